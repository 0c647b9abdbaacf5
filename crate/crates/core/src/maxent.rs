//! Maximum-entropy joint degree distributions with prescribed edge-end
//! marginals and assortativity: `Q_jk = e^{γjk} q_j q_k / (Z_j Z_k)`, where
//! `Z_k = Σ_j q_j e^{γjk} / Z_j`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degree::EdgeEndDistribution;
use crate::error::{Error, Result};
use crate::joint::JointDegreeDistribution;
use crate::numeric::sum;

/// `|γ| k_max²` must stay below this so `e^{γjk}` is representable.
pub const GAMMA_GUARD: f64 = 700.0;

const DAMPING: f64 = 0.5;
const FIXED_POINT_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 100_000;
const PROBE_POINTS: usize = 25;
const R_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub iters: usize,
    /// Final step `max_k |Δ log Z_k|`.
    pub residual: f64,
    /// `max_k |Z_k − Σ_j q_j e^{γjk}/Z_j| / Z_k` at the solution.
    pub equation_residual: f64,
    /// Initial iterate; always all ones.
    pub init: String,
    /// `|Σ Q − 1|` before renormalization.
    pub renormalization_drift: f64,
}

/// A solved ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxEntModel {
    pub gamma: f64,
    pub r: f64,
    pub k_support: Vec<usize>,
    #[serde(rename = "Z")]
    pub z: Vec<f64>,
    /// Edge-end probabilities over `k_support`.
    pub q: Vec<f64>,
    pub convergence: Convergence,
    /// Achievable `r` range and monotonicity seen on the probe grid, when
    /// the model came from [`gamma_for_r`].
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub probe: Option<ProbeReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub gamma_range: (f64, f64),
    pub r_range: (f64, f64),
    pub monotone: bool,
    pub points: Vec<(f64, f64)>,
}

/// Solution of the partition-function fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub z: Vec<f64>,
    pub iters: usize,
    pub residual: f64,
    pub equation_residual: f64,
}

struct Classes {
    degrees: Vec<usize>,
    q: Vec<f64>,
}

fn classes(q: &EdgeEndDistribution) -> Classes {
    let (degrees, q) = q.support().unzip();
    Classes { degrees, q }
}

/// Largest admissible `|γ|` for `q`.
pub fn gamma_guard(q: &EdgeEndDistribution) -> f64 {
    let k = q.k_max() as f64;
    GAMMA_GUARD / (k * k)
}

fn exp_matrix(degrees: &[usize], gamma: f64) -> Vec<f64> {
    let c = degrees.len();
    let mut e = vec![0.0; c * c];
    for a in 0..c {
        for b in a..c {
            let v = (gamma * (degrees[a] * degrees[b]) as f64).exp();
            e[a * c + b] = v;
            e[b * c + a] = v;
        }
    }
    e
}

fn check_gamma(q: &EdgeEndDistribution, gamma: f64) -> Result<()> {
    let guard = gamma_guard(q);
    if !gamma.is_finite() || gamma.abs() >= guard {
        return Err(Error::param(format!(
            "|gamma| = {} exceeds the overflow guard {guard:.6e} (|gamma| k_max^2 < {GAMMA_GUARD})",
            gamma.abs()
        )));
    }
    Ok(())
}

fn map_z(e: &[f64], q: &[f64], z: &[f64], out: &mut [f64]) {
    let c = q.len();
    let w: Vec<f64> = q.iter().zip(z).map(|(q, z)| q / z).collect();
    for (b, o) in out.iter_mut().enumerate() {
        let row = &e[b * c..(b + 1) * c];
        *o = sum(row.iter().zip(&w).map(|(e, w)| e * w));
    }
}

fn solve_from(e: &[f64], q: &[f64], mut log_z: Vec<f64>, gamma: f64) -> Result<Partition> {
    let c = q.len();
    let mut z: Vec<f64> = log_z.iter().map(|u| u.exp()).collect();
    let mut mapped = vec![0.0; c];
    for iter in 1..=MAX_ITERATIONS {
        map_z(e, q, &z, &mut mapped);
        let mut step = 0.0f64;
        for b in 0..c {
            let target = mapped[b].ln();
            let next = (1.0 - DAMPING) * log_z[b] + DAMPING * target;
            step = step.max((next - log_z[b]).abs());
            log_z[b] = next;
            z[b] = next.exp();
        }
        if !step.is_finite() {
            return Err(Error::NonConvergence {
                what: format!("partition function at gamma = {gamma}"),
                iterations: iter,
                residual: step,
            });
        }
        if step < FIXED_POINT_TOL {
            map_z(e, q, &z, &mut mapped);
            let equation_residual = z
                .iter()
                .zip(&mapped)
                .map(|(z, m)| ((z - m) / z).abs())
                .fold(0.0, f64::max);
            return Ok(Partition { z, iters: iter, residual: step, equation_residual });
        }
        if iter == MAX_ITERATIONS {
            return Err(Error::NonConvergence {
                what: format!("partition function at gamma = {gamma}"),
                iterations: iter,
                residual: step,
            });
        }
    }
    unreachable!()
}

/// Damped log-space iteration `log Z ← (1−η) log Z + η log(map Z)` with
/// `η = 0.5`, from `Z = 1`.
pub fn solve_partition(q: &EdgeEndDistribution, gamma: f64) -> Result<Partition> {
    check_gamma(q, gamma)?;
    let cl = classes(q);
    let e = exp_matrix(&cl.degrees, gamma);
    solve_from(&e, &cl.q, vec![0.0; cl.q.len()], gamma)
}

/// Same fixed point from an arbitrary starting point, for checking that the
/// solution does not depend on initialization.
pub fn solve_partition_from(q: &EdgeEndDistribution, gamma: f64, z0: &[f64]) -> Result<Partition> {
    check_gamma(q, gamma)?;
    let cl = classes(q);
    if z0.len() != cl.q.len() || z0.iter().any(|z| !(*z > 0.0)) {
        return Err(Error::param("initial Z must be positive, one per degree class"));
    }
    let e = exp_matrix(&cl.degrees, gamma);
    solve_from(&e, &cl.q, z0.iter().map(|z| z.ln()).collect(), gamma)
}

fn assemble(cl: &Classes, e: &[f64], z: &[f64]) -> (JointDegreeDistribution, f64) {
    let c = cl.q.len();
    let mut m = vec![0.0; c * c];
    let w: Vec<f64> = cl.q.iter().zip(z).map(|(q, z)| q / z).collect();
    for a in 0..c {
        for b in a..c {
            let v = e[a * c + b] * w[a] * w[b];
            m[a * c + b] = v;
            m[b * c + a] = v;
        }
    }
    let total = sum(m.iter().copied());
    for v in m.iter_mut() {
        *v /= total;
    }
    (JointDegreeDistribution::from_parts_unchecked(cl.degrees.clone(), m), (total - 1.0).abs())
}

/// Solves for `Z` at `gamma` and assembles the model.
pub fn model_from_gamma(q: &EdgeEndDistribution, gamma: f64) -> Result<MaxEntModel> {
    check_gamma(q, gamma)?;
    let cl = classes(q);
    let e = exp_matrix(&cl.degrees, gamma);
    let part = solve_from(&e, &cl.q, vec![0.0; cl.q.len()], gamma)?;
    let (joint, drift) = assemble(&cl, &e, &part.z);
    let r = joint.assortativity().unwrap_or(0.0);
    Ok(MaxEntModel {
        gamma,
        r,
        k_support: cl.degrees,
        z: part.z,
        q: cl.q,
        convergence: Convergence {
            iters: part.iters,
            residual: part.residual,
            equation_residual: part.equation_residual,
            init: "ones".to_string(),
            renormalization_drift: drift,
        },
        probe: None,
    })
}

/// `Q_jk = e^{γjk} q_j q_k / (Z_j Z_k)`, renormalized.
pub fn joint_from_gamma(q: &EdgeEndDistribution, gamma: f64) -> Result<JointDegreeDistribution> {
    Ok(model_from_gamma(q, gamma)?.joint())
}

/// Degree assortativity `Σ jk (Q_jk − q_j q_k) / σ_q²`.
pub fn assortativity_of(joint: &JointDegreeDistribution) -> Result<f64> {
    joint
        .assortativity()
        .ok_or_else(|| Error::domain("assortativity undefined: edge-end degrees have zero variance"))
}

/// Finds the `γ` whose ensemble has assortativity `r_target`.
///
/// `r(γ)` is probed on a grid spanning the overflow guard; targets outside
/// the probed range are a range error. Inside, a bracketing false-position
/// iteration (Illinois variant) narrows `γ` until `|r − r_target| < 1e-10`.
pub fn gamma_for_r(q: &EdgeEndDistribution, r_target: f64) -> Result<MaxEntModel> {
    if !r_target.is_finite() {
        return Err(Error::param("target assortativity must be finite"));
    }
    if q.support().count() < 2 {
        return Err(Error::domain("assortativity undefined for a single degree class"));
    }
    let guard = gamma_guard(q) * (1.0 - 1e-9);
    let grid: Vec<f64> = (0..PROBE_POINTS)
        .map(|i| -guard + 2.0 * guard * i as f64 / (PROBE_POINTS - 1) as f64)
        .collect();
    let probes: Vec<Option<f64>> = grid
        .par_iter()
        .map(|&g| model_from_gamma(q, g).ok().map(|m| m.r))
        .collect();
    // outermost contiguous converged probes around γ = 0
    let mid = PROBE_POINTS / 2;
    let mut lo = mid;
    while lo > 0 && probes[lo - 1].is_some() {
        lo -= 1;
    }
    let mut hi = mid;
    while hi + 1 < PROBE_POINTS && probes[hi + 1].is_some() {
        hi += 1;
    }
    let points: Vec<(f64, f64)> = (lo..=hi).map(|i| (grid[i], probes[i].unwrap())).collect();
    let monotone = points.windows(2).all(|w| w[1].1 >= w[0].1);
    let r_min = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let r_max = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let report = ProbeReport {
        gamma_range: (grid[lo], grid[hi]),
        r_range: (r_min, r_max),
        monotone,
        points: points.clone(),
    };
    if r_target < r_min || r_target > r_max {
        return Err(Error::Range { target: r_target, min: r_min, max: r_max });
    }
    if r_target == 0.0 {
        let mut m = model_from_gamma(q, 0.0)?;
        m.probe = Some(report);
        return Ok(m);
    }
    // bracket from the probe grid
    let idx = points.windows(2).position(|w| {
        let (a, b) = (w[0].1 - r_target, w[1].1 - r_target);
        a == 0.0 || b == 0.0 || (a < 0.0) != (b < 0.0)
    });
    let idx = idx.ok_or(Error::Range { target: r_target, min: r_min, max: r_max })?;
    let (mut g0, mut f0) = (points[idx].0, points[idx].1 - r_target);
    let (mut g1, mut f1) = (points[idx + 1].0, points[idx + 1].1 - r_target);
    let mut best = if f0.abs() <= f1.abs() { g0 } else { g1 };
    let mut side = 0i8;
    for _ in 0..200 {
        if f0.abs() < R_TOL {
            best = g0;
            break;
        }
        if f1.abs() < R_TOL {
            best = g1;
            break;
        }
        let mut g = (g0 * f1 - g1 * f0) / (f1 - f0);
        if !(g > g0.min(g1) && g < g0.max(g1)) {
            g = 0.5 * (g0 + g1);
        }
        let f = model_from_gamma(q, g)?.r - r_target;
        best = g;
        if f.abs() < R_TOL || (g1 - g0).abs() < 1e-15 * g.abs().max(1e-300) {
            break;
        }
        if (f < 0.0) == (f1 < 0.0) {
            (g1, f1) = (g, f);
            if side == -1 {
                f0 *= 0.5;
            }
            side = -1;
        } else {
            (g0, f0) = (g, f);
            if side == 1 {
                f1 *= 0.5;
            }
            side = 1;
        }
    }
    let mut model = model_from_gamma(q, best)?;
    if (model.r - r_target).abs() > 1e-6 {
        return Err(Error::NonConvergence {
            what: format!("gamma search for r = {r_target}"),
            iterations: 200,
            residual: (model.r - r_target).abs(),
        });
    }
    model.probe = Some(report);
    Ok(model)
}

impl MaxEntModel {
    pub fn joint(&self) -> JointDegreeDistribution {
        let cl = Classes { degrees: self.k_support.clone(), q: self.q.clone() };
        let e = exp_matrix(&cl.degrees, self.gamma);
        assemble(&cl, &e, &self.z).0
    }

    pub fn edge_end(&self) -> EdgeEndDistribution {
        let pairs: Vec<(usize, f64)> = self.k_support.iter().copied().zip(self.q.iter().copied()).collect();
        EdgeEndDistribution::from_pairs(&pairs).expect("model q is a valid pmf")
    }

    pub fn write_json<W: Write>(&self, w: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(w, self).map_err(std::io::Error::other)
    }
}

/// Shannon entropy of the joint distribution, `−Σ Q log Q`.
pub fn entropy(joint: &JointDegreeDistribution) -> f64 {
    joint.entropy()
}

/// Largest deviation of the joint marginals from `q`.
pub fn marginal_error(joint: &JointDegreeDistribution, q: &EdgeEndDistribution) -> f64 {
    let marg = joint.marginal();
    joint
        .degrees()
        .iter()
        .enumerate()
        .map(|(a, &k)| (marg[a] - q.prob(k)).abs())
        .fold(0.0, f64::max)
}
