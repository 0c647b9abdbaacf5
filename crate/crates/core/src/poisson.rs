//! Exact distribution of `Δ` in the sparse Poisson random graph.
//!
//! A node of degree `k` has `Δ = 1 − k + m/k`, where `m = Σ_j (k_j − 1)`
//! over its neighbours is Poisson with mean `kλ`. The distribution of `Δ`
//! is therefore a mixture over `k` of Poisson pmfs placed on the grid
//! `1 − k + m/k`, and every atom sits at a rational point.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::degree::make_poisson;
use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, sum, CompensatedSum};

/// Default total probability the enumeration may leave out.
pub const DEFAULT_DELTA_TAIL_TOL: f64 = 1e-8;

/// Reduced fraction `num/den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ratio {
    num: i64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Ratio {
    pub fn new(num: i64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        let g = gcd(num.unsigned_abs(), den).max(1);
        Self { num: num / g as i64, den: den / g }
    }

    /// `Δ = 1 − k + m/k = (m − k(k−1)) / k`.
    pub fn delta(k: u64, m: u64) -> Self {
        Self::new(m as i64 - (k * (k - 1)) as i64, k)
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn signum(&self) -> i64 {
        self.num.signum()
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaAtom {
    pub delta: Ratio,
    pub prob: f64,
}

/// Which `m` values were enumerated for one degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceInfo {
    pub k: u64,
    /// `p_k` of the zero-truncated Poisson degree distribution.
    pub weight: f64,
    pub m_min: u64,
    pub m_max: u64,
    /// Mass of `P(·|k)` captured by `m_min..=m_max`.
    pub captured: f64,
}

/// Atoms of the `Δ` distribution, sorted by value, identical rational values
/// merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaAtomDistribution {
    pub lambda: f64,
    pub tail_tol: f64,
    pub atoms: Vec<DeltaAtom>,
    pub slices: Vec<SliceInfo>,
}

/// Conditional pmf of `m ~ Poisson(kλ)` over a window around the mode.
struct Slice {
    info: SliceInfo,
    probs: Vec<f64>,
}

/// Walks outward from the mode of Poisson(`mu`) until each remaining tail is
/// bounded by `side_tol`.
fn poisson_window(mu: f64, side_tol: f64) -> (u64, Vec<f64>) {
    let mode = mu.floor() as u64;
    let ln_mode = mode as f64 * mu.ln() - mu - ln_factorial(mode);
    let top = ln_mode.exp();
    let mut below = Vec::new();
    let (mut m, mut t) = (mode, top);
    // ratio t(m-1)/t(m) = m/mu, decreasing as m falls
    while m > 0 {
        let rho = m as f64 / mu;
        if rho < 1.0 && t * rho / (1.0 - rho) < side_tol {
            break;
        }
        t *= rho;
        m -= 1;
        below.push(t);
    }
    let m_min = m;
    let mut probs: Vec<f64> = below.into_iter().rev().collect();
    probs.push(top);
    let (mut m, mut t) = (mode, top);
    loop {
        let rho = mu / (m as f64 + 1.0);
        if rho < 1.0 && t * rho / (1.0 - rho) < side_tol {
            break;
        }
        t *= rho;
        m += 1;
        probs.push(t);
    }
    (m_min, probs)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::param(format!("mean degree must be positive, got {lambda}")));
    }
    Ok(())
}

/// Enumerates the degree slices. The tail budget is split: a quarter for
/// the degree tail, a quarter for slices too light to matter, a half for the
/// conditional `m` tails.
fn slices(lambda: f64, tail_tol: f64) -> Result<Vec<Slice>> {
    check_lambda(lambda)?;
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::param(format!("tail_tol must lie in (0, 1), got {tail_tol}")));
    }
    let p = make_poisson(lambda, (tail_tol / 4.0).min(1e-6))?;
    let n_k = p.pmf().len() as f64;
    let per_slice = tail_tol / (2.0 * n_k);
    Ok(p.iter()
        .filter(|&(_, pk)| pk >= tail_tol / (4.0 * n_k))
        .map(|(k, pk)| {
            let mu = k as f64 * lambda;
            let (m_min, probs) = poisson_window(mu, per_slice / 2.0);
            let captured = sum(probs.iter().copied());
            Slice {
                info: SliceInfo {
                    k: k as u64,
                    weight: pk,
                    m_min,
                    m_max: m_min + probs.len() as u64 - 1,
                    captured,
                },
                probs,
            }
        })
        .collect())
}

/// Atom distribution of `Δ` for the Poisson random graph with mean degree
/// `lambda`, missing at most `tail_tol` of the probability.
pub fn poisson_delta_pmf(lambda: f64, tail_tol: f64) -> Result<DeltaAtomDistribution> {
    let slices = slices(lambda, tail_tol)?;
    let mut merged: BTreeMap<Ratio, CompensatedSum> = BTreeMap::new();
    for s in &slices {
        let k = s.info.k;
        for (i, &pm) in s.probs.iter().enumerate() {
            let m = s.info.m_min + i as u64;
            merged.entry(Ratio::delta(k, m)).or_default().add(s.info.weight * pm);
        }
    }
    Ok(DeltaAtomDistribution {
        lambda,
        tail_tol,
        atoms: merged
            .into_iter()
            .map(|(delta, acc)| DeltaAtom { delta, prob: acc.value() })
            .collect(),
        slices: slices.into_iter().map(|s| s.info).collect(),
    })
}

/// Mean and variance as given in closed form: `E[Δ] = 1` and
/// `Var(Δ) = λ (1 + E[1/k])`, with `E[1/k]` over the zero-truncated Poisson.
///
/// Both follow from `E[Δ|k] = 1 + λ − k`, `Var(Δ|k) = λ/k` and
/// `Var(k) = λ` for an untruncated Poisson; with degree-zero nodes removed
/// the exact moments differ by terms of order `λ e^{−λ}`
/// (see [`poisson_delta_moments_truncated`]).
pub fn poisson_delta_moments(lambda: f64) -> Result<(f64, f64)> {
    check_lambda(lambda)?;
    let m = make_poisson(lambda, 1e-15)?.moments();
    Ok((1.0, lambda * (1.0 + m.mean_inverse)))
}

/// Exact mean and variance of `Δ` over the zero-truncated degree
/// distribution: `E[Δ] = 1 + λ − E[k]`, `Var(Δ) = λ E[1/k] + Var(k)`.
pub fn poisson_delta_moments_truncated(lambda: f64) -> Result<(f64, f64)> {
    check_lambda(lambda)?;
    let m = make_poisson(lambda, 1e-15)?.moments();
    Ok((1.0 + lambda - m.mean, lambda * m.mean_inverse + m.variance))
}

/// `P(Δ < 0)`, `P(Δ = 0)`, `P(Δ > 0)` and the captured mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignFractions {
    pub negative: f64,
    pub zero: f64,
    pub positive: f64,
    pub captured: f64,
}

/// Sign fractions summed slice by slice, without materializing atoms:
/// `Δ < 0` exactly when `m < k(k − 1)`.
pub fn poisson_delta_sign_fractions(lambda: f64, tail_tol: f64) -> Result<SignFractions> {
    let slices = slices(lambda, tail_tol)?;
    let (mut neg, mut zero, mut pos) =
        (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
    for s in &slices {
        let pivot = s.info.k * (s.info.k - 1);
        for (i, &pm) in s.probs.iter().enumerate() {
            let w = s.info.weight * pm;
            match (s.info.m_min + i as u64).cmp(&pivot) {
                Ordering::Less => neg.add(w),
                Ordering::Equal => zero.add(w),
                Ordering::Greater => pos.add(w),
            }
        }
    }
    let (negative, zero, positive) = (neg.value(), zero.value(), pos.value());
    Ok(SignFractions { negative, zero, positive, captured: negative + zero + positive })
}

/// Fraction of nodes whose degree exceeds the mean degree of their
/// neighbours.
pub fn poisson_delta_negative_fraction(lambda: f64) -> Result<f64> {
    Ok(poisson_delta_sign_fractions(lambda, DEFAULT_DELTA_TAIL_TOL)?.negative)
}

impl DeltaAtomDistribution {
    pub fn total_mass(&self) -> f64 {
        sum(self.atoms.iter().map(|a| a.prob))
    }

    pub fn mean(&self) -> f64 {
        sum(self.atoms.iter().map(|a| a.prob * a.delta.to_f64())) / self.total_mass()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        sum(self.atoms.iter().map(|a| a.prob * (a.delta.to_f64() - mean).powi(2))) / self.total_mass()
    }

    pub fn prob_negative(&self) -> f64 {
        sum(self.atoms.iter().filter(|a| a.delta.signum() < 0).map(|a| a.prob))
    }

    pub fn prob_zero(&self) -> f64 {
        sum(self.atoms.iter().filter(|a| a.delta.signum() == 0).map(|a| a.prob))
    }

    pub fn prob_positive(&self) -> f64 {
        sum(self.atoms.iter().filter(|a| a.delta.signum() > 0).map(|a| a.prob))
    }

    /// `P(Δ ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let end = self.atoms.partition_point(|a| a.delta.to_f64() <= x);
        sum(self.atoms[..end].iter().map(|a| a.prob))
    }

    /// `(value, probability)` pairs, sorted by value.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.atoms.iter().map(|a| (a.delta.to_f64(), a.prob)).collect()
    }

    /// Total probability placed on slice `k`, i.e. `p_k` times the captured
    /// conditional mass.
    pub fn slice_mass(&self, k: u64) -> f64 {
        self.slices
            .iter()
            .find(|s| s.k == k)
            .map_or(0.0, |s| s.weight * s.captured)
    }

    /// Probabilities of the bins `[(j − ½)w, (j + ½)w)` with at least one
    /// atom, as `(center, prob)`.
    pub fn histogram(&self, bin_width: f64) -> Result<Vec<(f64, f64)>> {
        if !(bin_width > 0.0) || !bin_width.is_finite() {
            return Err(Error::param(format!("bin width must be positive, got {bin_width}")));
        }
        let mut bins: BTreeMap<i64, CompensatedSum> = BTreeMap::new();
        for a in &self.atoms {
            let j = (a.delta.to_f64() / bin_width + 0.5).floor() as i64;
            bins.entry(j).or_default().add(a.prob);
        }
        Ok(bins.into_iter().map(|(j, acc)| (j as f64 * bin_width, acc.value())).collect())
    }

    /// Writes CSV `delta_num,delta_den,prob`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "delta_num,delta_den,prob")?;
        for a in &self.atoms {
            writeln!(w, "{},{},{:e}", a.delta.num(), a.delta.den(), a.prob)?;
        }
        Ok(())
    }
}
