//! Degree distributions on `k ≥ 1`: Poisson, truncated power law with
//! exponential cutoff, and empirical histograms.
//!
//! Parametric families are zero-truncated (degree-zero nodes carry no
//! defined `Δ`) and cut at the smallest `k_max` whose dropped upper tail is
//! below `tail_tol`, then renormalized.

use std::io::{BufRead, Write};
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bisect, sum, CompensatedSum};

/// Default relative mass allowed in the truncated upper tail.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

/// Largest support a parametric family may be truncated to.
const MAX_SUPPORT: usize = 5_000_000;

/// Probability mass function over `k_min..=k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistribution {
    k_min: usize,
    pmf: Vec<f64>,
    tail_mass_dropped: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    /// `E[1/k]`.
    pub mean_inverse: f64,
}

impl DegreeDistribution {
    /// Normalizes nonnegative weights over `k_min..k_min + weights.len()`.
    pub fn from_weights(k_min: usize, weights: Vec<f64>) -> Result<Self> {
        if k_min == 0 {
            return Err(Error::param("degree distributions start at k >= 1"));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::param("degree weights must be finite and nonnegative"));
        }
        let total = sum(weights.iter().copied());
        if !(total > 0.0) {
            return Err(Error::param("degree weights sum to zero"));
        }
        let mut dist = Self {
            k_min,
            pmf: weights.into_iter().map(|w| w / total).collect(),
            tail_mass_dropped: 0.0,
        };
        dist.trim();
        Ok(dist)
    }

    /// Builds from `(k, p_k)` pairs; repeated degrees accumulate.
    pub fn from_pairs(pairs: &[(usize, f64)]) -> Result<Self> {
        let k_min = pairs.iter().map(|p| p.0).min().ok_or_else(|| Error::param("empty pmf"))?;
        let k_max = pairs.iter().map(|p| p.0).max().unwrap_or(k_min);
        let mut w = vec![0.0; k_max - k_min + 1];
        for &(k, p) in pairs {
            w[k - k_min] += p;
        }
        Self::from_weights(k_min, w)
    }

    /// Empirical histogram of a degree sequence.
    pub fn from_degrees(degrees: &[usize]) -> Result<Self> {
        if degrees.contains(&0) {
            return Err(Error::domain("degree sequence contains isolated nodes"));
        }
        let k_min = *degrees.iter().min().ok_or_else(|| Error::param("empty degree sequence"))?;
        let k_max = *degrees.iter().max().unwrap();
        let mut counts = vec![0.0; k_max - k_min + 1];
        for &k in degrees {
            counts[k - k_min] += 1.0;
        }
        Self::from_weights(k_min, counts)
    }

    fn trim(&mut self) {
        let first = self.pmf.iter().position(|&p| p > 0.0).unwrap_or(0);
        let last = self.pmf.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        if first > 0 || last + 1 < self.pmf.len() {
            self.pmf = self.pmf[first..=last].to_vec();
            self.k_min += first;
        }
    }

    pub fn k_min(&self) -> usize {
        self.k_min
    }

    pub fn k_max(&self) -> usize {
        self.k_min + self.pmf.len() - 1
    }

    /// Dense pmf indexed from `k_min`.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn tail_mass_dropped(&self) -> f64 {
        self.tail_mass_dropped
    }

    pub fn prob(&self, k: usize) -> f64 {
        if k < self.k_min {
            return 0.0;
        }
        self.pmf.get(k - self.k_min).copied().unwrap_or(0.0)
    }

    /// All `(k, p_k)` over the dense support, zeros included.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.pmf.iter().enumerate().map(move |(i, &p)| (self.k_min + i, p))
    }

    /// `(k, p_k)` for `p_k > 0` only.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.iter().filter(|&(_, p)| p > 0.0)
    }

    pub fn mean(&self) -> f64 {
        sum(self.iter().map(|(k, p)| k as f64 * p))
    }

    pub fn moments(&self) -> Moments {
        let mean = self.mean();
        Moments {
            mean,
            variance: sum(self.iter().map(|(k, p)| p * (k as f64 - mean).powi(2))),
            mean_inverse: sum(self.iter().map(|(k, p)| p / k as f64)),
        }
    }

    /// Writes CSV `k,p_k`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "k,p_k")?;
        for (k, p) in self.iter() {
            writeln!(w, "{k},{p:e}")?;
        }
        Ok(())
    }

    /// Reads CSV `k,p_k` (header optional) and renormalizes.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut pairs = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split(',').map(str::trim);
            let (Some(k), Some(p), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse { line: idx + 1, message: "expected `k,p_k`".into() });
            };
            match (k.parse::<usize>(), p.parse::<f64>()) {
                (Ok(k), Ok(p)) => pairs.push((k, p)),
                _ if idx == 0 => continue,
                _ => {
                    return Err(Error::Parse {
                        line: idx + 1,
                        message: format!("cannot parse `{line}`"),
                    })
                }
            }
        }
        Self::from_pairs(&pairs)
    }
}

/// Distribution of the degree found at the end of a uniformly chosen edge,
/// `q_k = k p_k / Σ_j j p_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEndDistribution(DegreeDistribution);

impl EdgeEndDistribution {
    pub fn as_distribution(&self) -> &DegreeDistribution {
        &self.0
    }

    /// Inverse map: reweights by `1/k` to recover the node-degree pmf.
    pub fn node_distribution(&self) -> DegreeDistribution {
        let w = self.0.iter().map(|(k, q)| q / k as f64).collect();
        DegreeDistribution::from_weights(self.0.k_min, w).expect("valid edge-end distribution")
    }

    /// Wraps an already-normalized edge-end pmf (e.g. a joint marginal).
    pub fn from_pairs(pairs: &[(usize, f64)]) -> Result<Self> {
        DegreeDistribution::from_pairs(pairs).map(Self)
    }
}

impl Deref for EdgeEndDistribution {
    type Target = DegreeDistribution;

    fn deref(&self) -> &DegreeDistribution {
        &self.0
    }
}

pub fn edge_end(p: &DegreeDistribution) -> EdgeEndDistribution {
    let w = p.iter().map(|(k, pk)| k as f64 * pk).collect();
    let mut q = DegreeDistribution::from_weights(p.k_min, w).expect("positive mean");
    q.tail_mass_dropped = p.tail_mass_dropped;
    EdgeEndDistribution(q)
}

fn check_tail_tol(tail_tol: f64) -> Result<()> {
    if !(tail_tol > 0.0 && tail_tol <= 1e-6) {
        return Err(Error::param(format!("tail_tol must lie in (0, 1e-6], got {tail_tol}")));
    }
    Ok(())
}

/// Zero-truncated Poisson degree distribution with mean parameter `lambda`.
pub fn make_poisson(lambda: f64, tail_tol: f64) -> Result<DegreeDistribution> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::param(format!("Poisson mean must be positive, got {lambda}")));
    }
    check_tail_tol(tail_tol)?;
    let ln_lambda = lambda.ln();
    let mut ln_fact = 0.0;
    truncate_family(
        |k| {
            ln_fact += (k as f64).ln();
            k as f64 * ln_lambda - ln_fact
        },
        |k| lambda / (k as f64 + 1.0),
        tail_tol,
    )
}

/// Truncated power law `p_k ∝ k^{−α} e^{−βk}` on `k ≥ 1`.
pub fn make_power_law_cutoff(alpha: f64, beta: f64, tail_tol: f64) -> Result<DegreeDistribution> {
    if !(beta > 0.0) || !beta.is_finite() || !alpha.is_finite() {
        return Err(Error::param(format!(
            "power law needs finite alpha and beta > 0, got ({alpha}, {beta})"
        )));
    }
    check_tail_tol(tail_tol)?;
    truncate_family(
        |k| -alpha * (k as f64).ln() - beta * k as f64,
        |k| {
            // sup_{j >= k} p_{j+1}/p_j
            if alpha >= 0.0 {
                (-beta).exp()
            } else {
                (-alpha * (1.0 + 1.0 / k as f64).ln() - beta).exp()
            }
        },
        tail_tol,
    )
}

/// Generates log-weights for `k = 1, 2, …` until the remaining tail is
/// provably negligible, then cuts at the smallest `k_max` with relative tail
/// below `tail_tol`.
///
/// `ratio_bound(k)` must bound `w_{j+1}/w_j` for every `j >= k`.
fn truncate_family<L, R>(mut log_weight: L, ratio_bound: R, tail_tol: f64) -> Result<DegreeDistribution>
where
    L: FnMut(usize) -> f64,
    R: Fn(usize) -> f64,
{
    let mut lw: Vec<f64> = Vec::new();
    // running log-sum-exp
    let mut max = f64::NEG_INFINITY;
    let mut scaled = 0.0;
    let mut k = 0usize;
    let ln_tail_bound = loop {
        k += 1;
        if k > MAX_SUPPORT {
            return Err(Error::param("degree distribution tail decays too slowly to truncate"));
        }
        let w = log_weight(k);
        lw.push(w);
        if w > max {
            scaled = scaled * (max - w).exp() + 1.0;
            max = w;
        } else {
            scaled += (w - max).exp();
        }
        let rho = ratio_bound(k);
        if rho < 1.0 {
            let ln_total = max + scaled.ln();
            let ln_tail = w + (rho / (1.0 - rho)).ln();
            if ln_tail - ln_total < (tail_tol * 1e-6).ln() {
                break ln_tail - ln_total;
            }
        }
    };
    let ln_total = max + scaled.ln();
    let w: Vec<f64> = lw.iter().map(|&x| (x - ln_total).exp()).collect();
    // tail[i] = mass strictly above index i
    let mut tail = vec![0.0; w.len()];
    let mut acc = ln_tail_bound.exp();
    for i in (0..w.len()).rev() {
        tail[i] = acc;
        acc += w[i];
    }
    let cut = tail.iter().position(|&t| t < tail_tol).unwrap_or(w.len() - 1);
    let dropped = tail[cut];
    let mut dist = DegreeDistribution::from_weights(1, w[..=cut].to_vec())?;
    dist.tail_mass_dropped = dropped;
    Ok(dist)
}

/// Parameters of a truncated power law fitted to a target mean and variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub beta: f64,
    pub mean: f64,
    pub variance: f64,
    pub iterations: usize,
}

impl PowerLawFit {
    pub fn distribution(&self, tail_tol: f64) -> Result<DegreeDistribution> {
        make_power_law_cutoff(self.alpha, self.beta, tail_tol)
    }
}

const FIT_MAX_ITER: usize = 1000;
const FIT_MEAN_TOL: f64 = 1e-9;
const FIT_VAR_TOL: f64 = 1e-7;
/// Bounds on `ln β` explored by the fit; keeps supports below ~10^5.
const FIT_LN_BETA: (f64, f64) = (-8.0, 6.0);
const FIT_ALPHA: (f64, f64) = (-1000.0, 4.0);

struct FitPoint {
    mean: f64,
    var: f64,
    /// d(mean, var)/d(alpha, ln beta)
    jac: [[f64; 2]; 2],
}

fn fit_eval(alpha: f64, ln_beta: f64) -> Option<FitPoint> {
    let beta = ln_beta.exp();
    let p = make_power_law_cutoff(alpha, beta, DEFAULT_TAIL_TOL).ok()?;
    if p.pmf.len() > 200_000 {
        return None;
    }
    let m = p.mean();
    let (mut var, mut mu3, mut c_kl, mut c_vl) = (
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    );
    let mean_ln = sum(p.iter().map(|(k, pk)| pk * (k as f64).ln()));
    for (k, pk) in p.iter() {
        let d = k as f64 - m;
        let l = (k as f64).ln() - mean_ln;
        var.add(pk * d * d);
        mu3.add(pk * d * d * d);
        c_kl.add(pk * d * l);
        c_vl.add(pk * d * d * l);
    }
    let var = var.value();
    Some(FitPoint {
        mean: m,
        var,
        jac: [
            [-c_kl.value(), -beta * var],
            [-c_vl.value(), -beta * mu3.value()],
        ],
    })
}

/// Finds `(α, β)` whose truncated power law has the requested mean and
/// variance.
///
/// Damped Newton on the log-moment residuals, using the exact moment
/// derivatives of the exponential family; falls back to nested bisection
/// (β for the mean, α for the variance) if Newton stalls.
pub fn fit_mean_var(target_mean: f64, target_var: f64) -> Result<PowerLawFit> {
    if !(target_mean > 1.0) || !target_mean.is_finite() {
        return Err(Error::param(format!("target mean must exceed 1, got {target_mean}")));
    }
    if !(target_var > 0.0) || !target_var.is_finite() {
        return Err(Error::param(format!("target variance must be positive, got {target_var}")));
    }
    let residual = |pt: &FitPoint| {
        [
            pt.mean.ln() - target_mean.ln(),
            pt.var.max(1e-300).ln() - target_var.ln(),
        ]
    };
    let done = |pt: &FitPoint| {
        (pt.mean - target_mean).abs() < FIT_MEAN_TOL && (pt.var - target_var).abs() < FIT_VAR_TOL
    };

    // Start from the continuous gamma law with the same two moments.
    let shape = target_mean * target_mean / target_var;
    let mut alpha = (1.0 - shape).clamp(FIT_ALPHA.0, FIT_ALPHA.1);
    let mut ln_beta = (target_mean / target_var).ln().clamp(FIT_LN_BETA.0, FIT_LN_BETA.1);
    let mut iterations = 0;
    let mut best = f64::INFINITY;

    if let Some(mut pt) = fit_eval(alpha, ln_beta) {
        while iterations < FIT_MAX_ITER {
            iterations += 1;
            if done(&pt) {
                return Ok(PowerLawFit { alpha, beta: ln_beta.exp(), mean: pt.mean, variance: pt.var, iterations });
            }
            let f = residual(&pt);
            let norm = f[0].hypot(f[1]);
            best = best.min(norm);
            let j = [
                [pt.jac[0][0] / pt.mean, pt.jac[0][1] / pt.mean],
                [pt.jac[1][0] / pt.var, pt.jac[1][1] / pt.var],
            ];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if !(det.abs() > 1e-300) {
                break;
            }
            let mut da = -(j[1][1] * f[0] - j[0][1] * f[1]) / det;
            let mut db = -(-j[1][0] * f[0] + j[0][0] * f[1]) / det;
            let scale = (da.abs().max(db.abs()) / 2.0).max(1.0);
            da /= scale;
            db /= scale;
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                let a = (alpha + step * da).clamp(FIT_ALPHA.0, FIT_ALPHA.1);
                let b = (ln_beta + step * db).clamp(FIT_LN_BETA.0, FIT_LN_BETA.1);
                if let Some(next) = fit_eval(a, b) {
                    let g = residual(&next);
                    if g[0].hypot(g[1]) < norm {
                        accepted = Some((a, b, next));
                        break;
                    }
                }
                step *= 0.5;
            }
            match accepted {
                Some((a, b, next)) => {
                    alpha = a;
                    ln_beta = b;
                    pt = next;
                }
                None => break,
            }
        }
    }

    fit_by_bisection(target_mean, target_var, iterations).map_err(|e| match e {
        Error::NonConvergence { iterations, residual, .. } => Error::NonConvergence {
            what: format!("fit_mean_var({target_mean}, {target_var}): infeasible target"),
            iterations,
            residual: residual.min(best),
        },
        other => other,
    })
}

fn fit_by_bisection(target_mean: f64, target_var: f64, used: usize) -> Result<PowerLawFit> {
    let mean_at = |alpha: f64, ln_beta: f64| {
        make_power_law_cutoff(alpha, ln_beta.exp(), DEFAULT_TAIL_TOL)
            .ok()
            .filter(|p| p.pmf.len() <= 200_000)
            .map(|p| p.moments())
    };
    // Mean is strictly decreasing in β at fixed α.
    let beta_for = |alpha: f64| -> Option<f64> {
        let lo = mean_at(alpha, FIT_LN_BETA.0)?.mean;
        if lo < target_mean {
            return None;
        }
        bisect(
            |u| mean_at(alpha, u).map_or(f64::NAN, |m| m.mean - target_mean),
            FIT_LN_BETA.0,
            FIT_LN_BETA.1,
            1e-15,
            200,
        )
    };
    let var_gap = |alpha: f64| -> f64 {
        match beta_for(alpha) {
            Some(u) => mean_at(alpha, u).map_or(f64::INFINITY, |m| m.variance - target_var),
            // heavy tails: the mean cannot be brought down to the target
            None => f64::INFINITY,
        }
    };
    let mut iterations = used;
    let mut best = f64::INFINITY;
    let gap_lo = var_gap(FIT_ALPHA.0);
    let gap_hi = var_gap(FIT_ALPHA.1);
    best = best.min(gap_lo.abs()).min(gap_hi.abs());
    if !(gap_lo < 0.0 && gap_hi > 0.0) {
        return Err(Error::NonConvergence { what: String::new(), iterations, residual: best });
    }
    let (mut lo, mut hi) = FIT_ALPHA;
    while iterations < 3 * FIT_MAX_ITER {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let gap = var_gap(mid);
        best = best.min(gap.abs());
        if gap < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if let Some(u) = beta_for(mid) {
            if let Some(m) = mean_at(mid, u) {
                if (m.mean - target_mean).abs() < FIT_MEAN_TOL && (m.variance - target_var).abs() < FIT_VAR_TOL {
                    return Ok(PowerLawFit {
                        alpha: mid,
                        beta: u.exp(),
                        mean: m.mean,
                        variance: m.variance,
                        iterations,
                    });
                }
            }
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Err(Error::NonConvergence { what: String::new(), iterations, residual: best })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_mode_and_ratio() {
        let p = make_poisson(8.0, DEFAULT_TAIL_TOL).unwrap();
        assert_eq!(p.k_min(), 1);
        assert!((p.prob(7) / p.prob(8) - 1.0).abs() < 1e-12);
        let mode = p.iter().max_by(|a, b| a.1.partial_cmp(&b.1).unwrap()).unwrap().0;
        assert!(mode == 7 || mode == 8);
        assert!((p.prob(1) / p.prob(2) - 2.0 / 8.0).abs() < 1e-14);
        assert!((sum(p.pmf().iter().copied()) - 1.0).abs() < 1e-12);
        assert!(p.tail_mass_dropped() < DEFAULT_TAIL_TOL);
    }

    #[test]
    fn poisson_truncation_is_minimal() {
        let p = make_poisson(8.0, 1e-10).unwrap();
        // exact zero-truncated tail above k_max - 1 must exceed the tolerance
        let norm = 1.0 - (-8f64).exp();
        let mut ln_term = -8.0;
        let mut tail_above = 0.0;
        let mut masses = vec![];
        for k in 1..200u32 {
            ln_term += 8f64.ln() - (k as f64).ln();
            masses.push(ln_term.exp() / norm);
        }
        for (i, m) in masses.iter().enumerate() {
            if i + 1 > p.k_max() - 1 {
                tail_above += m;
            }
        }
        assert!(tail_above >= 1e-10);
    }

    #[test]
    fn geometric_special_case() {
        let p = make_power_law_cutoff(0.0, 2f64.ln(), DEFAULT_TAIL_TOL).unwrap();
        assert!((p.prob(1) - 0.5).abs() < 1e-9);
        assert!((p.prob(2) - 0.25).abs() < 1e-9);
        assert!((sum(p.pmf().iter().copied()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn steep_power_law_concentrates_on_one() {
        let p = make_power_law_cutoff(60.0, 0.1, DEFAULT_TAIL_TOL).unwrap();
        assert!(p.prob(1) > 1.0 - 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(make_poisson(0.0, 1e-10), Err(Error::Parameter(_))));
        assert!(matches!(make_poisson(-1.0, 1e-10), Err(Error::Parameter(_))));
        assert!(matches!(make_power_law_cutoff(1.0, 0.0, 1e-10), Err(Error::Parameter(_))));
        assert!(matches!(make_poisson(3.0, 1e-3), Err(Error::Parameter(_))));
        assert!(matches!(fit_mean_var(1.0, 4.0), Err(Error::Parameter(_))));
        assert!(matches!(fit_mean_var(4.0, 0.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn edge_end_hand_case() {
        let p = DegreeDistribution::from_pairs(&[(1, 0.5), (3, 0.5)]).unwrap();
        let q = edge_end(&p);
        assert!((q.prob(1) - 0.25).abs() < 1e-15);
        assert!((q.prob(2)).abs() < 1e-15);
        assert!((q.prob(3) - 0.75).abs() < 1e-15);
        let back = q.node_distribution();
        assert!((back.prob(1) - 0.5).abs() < 1e-12 && (back.prob(3) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn edge_end_of_point_mass() {
        let p = DegreeDistribution::from_pairs(&[(5, 1.0)]).unwrap();
        let q = edge_end(&p);
        assert_eq!(q.k_min(), 5);
        assert_eq!(q.prob(5), 1.0);
    }

    #[test]
    fn poisson_edge_end_is_shifted_poisson() {
        let p = make_poisson(8.0, 1e-12).unwrap();
        let q = edge_end(&p);
        for k in 2..p.k_max() {
            let shifted = (-8f64).exp() * 8f64.powi(k as i32 - 1)
                / (1..k).map(|i| i as f64).product::<f64>();
            assert!((q.prob(k) - shifted).abs() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn moments_hand_cases() {
        let m = DegreeDistribution::from_pairs(&[(1, 1.0)]).unwrap().moments();
        assert_eq!((m.mean, m.variance, m.mean_inverse), (1.0, 0.0, 1.0));
        let m = DegreeDistribution::from_pairs(&[(1, 0.5), (3, 0.5)]).unwrap().moments();
        assert!((m.mean - 2.0).abs() < 1e-15);
        assert!((m.variance - 1.0).abs() < 1e-15);
        assert!((m.mean_inverse - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_truncated_poisson_mean_matches_series() {
        let lambda: f64 = 8.0;
        // independent oracle: E[k | k>=1] = λ / (1 − e^{−λ})
        let expected = lambda / (1.0 - (-lambda).exp());
        let m = make_poisson(lambda, 1e-12).unwrap().moments();
        assert!((m.mean - expected).abs() < 1e-10);
        assert!(m.mean > lambda);
    }

    #[test]
    fn fit_reaches_targets() {
        for var in [8.0, 64.0, 256.0] {
            let fit = fit_mean_var(8.0, var).unwrap();
            let m = fit.distribution(DEFAULT_TAIL_TOL).unwrap().moments();
            assert!((m.mean - 8.0).abs() < 1e-6, "var={var}: {m:?}");
            assert!((m.variance - var).abs() < 1e-4, "var={var}: {m:?}");
        }
    }

    #[test]
    fn fit_reports_infeasible_target() {
        let err = fit_mean_var(1.0001, 1e4).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }), "{err}");
    }

    #[test]
    fn csv_round_trip() {
        let p = DegreeDistribution::from_pairs(&[(2, 0.25), (4, 0.75)]).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let back = DegreeDistribution::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.k_min(), 2);
        assert!((back.prob(4) - 0.75).abs() < 1e-15);
    }
}
