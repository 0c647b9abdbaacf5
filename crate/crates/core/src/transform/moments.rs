//! Moments from derivatives at the origin, and tail probabilities.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::invert::{split_for_tails, Parts as TailParts};
use super::lattice::lattice_law;
use super::TransformFn;
use crate::numeric::CompensatedSum;

/// Offset used for strict sign tests: `P(Δ > 0)` is evaluated as
/// `P(Δ > SIGN_EPSILON)`, so an atom at zero is never counted as positive.
pub const SIGN_EPSILON: f64 = 1e-6;

const BASE_STEP: f64 = 1e-2;
const TAIL_CUT: f64 = 1e-10;
const BLOCK: usize = 512;
const MAX_NODES: usize = 1 << 21;

/// First and second central differences of `F` in `θ`.
fn differences(f: &dyn Fn(f64) -> Complex64, h: f64) -> (Complex64, Complex64) {
    let (p, z, m) = (f(h), f(0.0), f(-h));
    ((p - m) / (2.0 * h), (p - z * 2.0 + m) / (h * h))
}

/// Two Richardson steps on central differences at `h`, `h/2`, `h/4`.
fn richardson(f: &dyn Fn(f64) -> Complex64, h: f64) -> (Complex64, Complex64) {
    let d: Vec<(Complex64, Complex64)> = [h, h / 2.0, h / 4.0].iter().map(|&s| differences(f, s)).collect();
    let r1 = |a: Complex64, b: Complex64| (b * 4.0 - a) / 3.0;
    let r2 = |a: Complex64, b: Complex64| (b * 16.0 - a) / 15.0;
    let first = r2(r1(d[0].0, d[1].0), r1(d[1].0, d[2].0));
    let second = r2(r1(d[0].1, d[1].1), r1(d[1].1, d[2].1));
    (first, second)
}

/// Mean and variance of `Δ` from the first and second derivatives of
/// `F(iθ) = E[e^{−iθΔ}]` at `θ = 0`: `E[Δ] = −Im F′(0)` and the variance is
/// `−F″(0)` of the transform recentred at the mean.
///
/// The step is `1e-2` divided by the RMS of `Δ` (from a pilot difference),
/// so `hΔ` stays small while roundoff in `F″` stays near `1e-7` relative.
pub fn mean_var_from_transform(f: &TransformFn) -> (f64, f64) {
    let mass = f.mass();
    let eval = |theta: f64| f.eval(theta) / mass;
    let (_, pilot) = differences(&eval, BASE_STEP);
    let rms = (-pilot.re).max(0.0).sqrt();
    let h = BASE_STEP / rms.max(1.0);
    let (d1, _) = richardson(&eval, h);
    let mean = -d1.im + 0.0;
    let centred = |theta: f64| eval(theta) * Complex64::from_polar(1.0, theta * mean);
    let (_, d2) = richardson(&centred, h);
    (mean, (-d2.re).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailProbability {
    pub value: f64,
    /// Nodes of the half-line inversion, when one was needed.
    pub n_theta: Option<usize>,
    pub theta_max: Option<f64>,
    pub warnings: Vec<String>,
}

/// `P(Δ > t)`. Lattice parts are summed exactly; the rest uses
/// `P(X > t) = F(0)/2 − (1/π) ∫₀^∞ Im(F(iθ) e^{iθt}) / θ dθ` with midpoint
/// nodes, which is exact for atoms within one aliasing period of `t`.
pub fn prob_delta_above(f: &TransformFn, t: f64) -> TailProbability {
    let TailParts { lattice, atoms, rest } = split_for_tails(f);
    let mut total = CompensatedSum::new();
    if let Some(atoms) = atoms {
        for &(x, p) in atoms {
            if x > t {
                total.add(p);
            }
        }
    }
    let exact: f64 = lattice
        .par_iter()
        .map(|slice| {
            let law = lattice_law(slice).expect("lattice slice");
            let mut acc = CompensatedSum::new();
            for (n, &p) in law.probs.iter().enumerate() {
                if law.value(n) > t {
                    acc.add(p);
                }
            }
            law.weight * acc.value()
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .sum();
    total.add(exact);
    let mut out = TailProbability { value: 0.0, n_theta: None, theta_max: None, warnings: Vec::new() };
    if let Some(rest) = rest {
        let (lo, hi) = rest.support();
        let period = 1.05 * (hi - t).abs().max((t - lo).abs()) + 1.0;
        let h = 2.0 * std::f64::consts::PI / period;
        let mut integral = CompensatedSum::new();
        let mut n = 0usize;
        let mut decayed = false;
        while n < MAX_NODES {
            let block: Vec<(f64, f64)> = (n..n + BLOCK)
                .into_par_iter()
                .map(|i| {
                    let theta = (i as f64 + 0.5) * h;
                    let v = rest.eval(theta);
                    ((v * Complex64::from_polar(1.0, theta * t)).im / theta, v.norm() / theta)
                })
                .collect();
            for &(term, _) in &block {
                integral.add(term);
            }
            n += BLOCK;
            if block.iter().all(|&(_, m)| m < TAIL_CUT) {
                decayed = true;
                break;
            }
        }
        if !decayed {
            out.warnings.push(format!(
                "half-line integrand not below {TAIL_CUT:e} after {n} nodes; tail probability is approximate"
            ));
        }
        total.add(0.5 * rest.mass() - h * integral.value() / std::f64::consts::PI);
        out.n_theta = Some(n);
        out.theta_max = Some((n as f64 - 0.5) * h);
    }
    out.value = total.value();
    out
}

/// `P(Δ > 0)`, with an atom at zero excluded.
pub fn prob_delta_positive(f: &TransformFn) -> TailProbability {
    prob_delta_above(f, SIGN_EPSILON)
}

/// `P(Δ < 0)`, with an atom at zero excluded.
pub fn prob_delta_negative(f: &TransformFn) -> TailProbability {
    let mut above = prob_delta_above(f, -SIGN_EPSILON);
    above.value = f.mass() - above.value;
    above
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree::{make_poisson, DegreeDistribution};
    use crate::poisson::{poisson_delta_moments_truncated, poisson_delta_sign_fractions};
    use crate::transform::config_delta_transform;

    #[test]
    fn degenerate_transform_has_no_spread() {
        let p = DegreeDistribution::from_pairs(&[(4, 1.0)]).unwrap();
        let f = config_delta_transform(&p);
        let (mean, var) = mean_var_from_transform(&f);
        assert!(mean.abs() < 1e-12 && var.abs() < 1e-12, "{mean} {var}");
        assert_eq!(prob_delta_positive(&f).value, 0.0);
        assert_eq!(prob_delta_negative(&f).value.abs(), 0.0);
    }

    #[test]
    fn poisson_moments_from_derivatives() {
        for lambda in [2.0, 8.0, 32.0] {
            let f = config_delta_transform(&make_poisson(lambda, 1e-12).unwrap());
            let (mean, var) = mean_var_from_transform(&f);
            let (m, v) = poisson_delta_moments_truncated(lambda).unwrap();
            assert!((mean - m).abs() < 1e-7, "λ={lambda}: {mean} vs {m}");
            assert!((var - v).abs() < 1e-5, "λ={lambda}: {var} vs {v}");
            let (sm, sv) = f.structural_moments().unwrap();
            assert!((sm - m).abs() < 1e-9 && (sv - v).abs() < 1e-8);
        }
    }

    #[test]
    fn sign_probabilities_match_exact_enumeration() {
        let f = config_delta_transform(&make_poisson(8.0, 1e-12).unwrap());
        let exact = poisson_delta_sign_fractions(8.0, 1e-10).unwrap();
        assert!((prob_delta_positive(&f).value - exact.positive).abs() < 1e-8);
        assert!((prob_delta_negative(&f).value - exact.negative).abs() < 1e-8);
    }

    #[test]
    fn gil_pelaez_on_a_normal_law() {
        let f = TransformFn::normal(0.7, 2.25).unwrap();
        for t in [-2.0, 0.0, 0.7, 3.1] {
            let z = (t - 0.7) / 1.5;
            let want = 0.5 * statrs::function::erf::erfc(z / std::f64::consts::SQRT_2);
            let got = prob_delta_above(&f, t);
            assert!((got.value - want).abs() < 1e-9, "t={t}: {} vs {want}", got.value);
            assert!(got.warnings.is_empty());
        }
    }

    #[test]
    fn gil_pelaez_sign_on_atoms_with_noise() {
        // atoms at −1 (0.3) and 2 (0.7) blurred by N(0, 0.04): P(X > 0) ≈ 0.7
        let atoms = TransformFn::from_atoms([(-1.0, 0.3), (2.0, 0.7)]).unwrap();
        let f = atoms.independent_sum(&TransformFn::normal(0.0, 0.04).unwrap());
        let got = prob_delta_above(&f, 0.0).value;
        let tail = |d: f64| 0.5 * statrs::function::erf::erfc(-d / 0.2 / std::f64::consts::SQRT_2);
        let want = 0.3 * tail(-1.0) + 0.7 * tail(2.0);
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
}
