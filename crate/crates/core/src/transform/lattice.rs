//! Exact conditional laws for lattice slices: the sum of `k` i.i.d. lattice
//! indices has pmf `IFFT(FFT(pmf)^k)` once the transform length exceeds the
//! (effective) support.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{NeighborLaw, OwnLaw, Slice};
use crate::numeric::sum;

/// Atoms `base + n·step` with probability `weight · probs[n]`.
pub(crate) struct LatticeLaw {
    pub weight: f64,
    pub base: f64,
    pub step: f64,
    pub probs: Vec<f64>,
    pub fft_len: usize,
}

impl LatticeLaw {
    pub fn value(&self, n: usize) -> f64 {
        self.base + n as f64 * self.step
    }
}

/// Mass below which the top eighth of an FFT window counts as empty.
const WRAP_TOL: f64 = 1e-12;

/// Pmf of the sum of `k` i.i.d. draws from `pmf` (indices `0..len`), with
/// the FFT length used.
pub(crate) fn sum_pmf(pmf: &[f64], k: usize) -> (Vec<f64>, usize) {
    let j = pmf.len();
    if k == 1 || j == 1 {
        let out = if j == 1 { vec![pmf[0].powi(k as i32)] } else { pmf.to_vec() };
        return (out, 0);
    }
    let full = k * (j - 1) + 1;
    let idx: Vec<f64> = (0..j).map(|i| i as f64).collect();
    let mean = sum(idx.iter().zip(pmf).map(|(i, p)| i * p));
    let var = sum(idx.iter().zip(pmf).map(|(i, p)| p * (i - mean) * (i - mean)));
    let estimate = k as f64 * mean + 12.0 * (k as f64 * var).sqrt() + j as f64 + 64.0;
    let full_len = full.next_power_of_two();
    let mut len = (estimate.ceil() as usize).next_power_of_two().min(full_len);

    let mut planner = FftPlanner::<f64>::new();
    loop {
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut buf: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); len];
        for (b, &p) in buf.iter_mut().zip(pmf) {
            b.re = p;
        }
        forward.process(&mut buf);
        for v in buf.iter_mut() {
            *v = v.powu(k as u32);
        }
        inverse.process(&mut buf);
        let scale = 1.0 / len as f64;
        let mut out: Vec<f64> = buf.iter().map(|v| (v.re * scale).max(0.0)).collect();
        if len >= full {
            out.truncate(full);
            return (out, len);
        }
        let top = sum(out[len - len / 8..].iter().copied());
        if top < WRAP_TOL {
            return (out, len);
        }
        len *= 2;
    }
}

/// Exact conditional law of `Δ` for a lattice slice; `None` otherwise.
pub(crate) fn lattice_law(slice: &Slice) -> Option<LatticeLaw> {
    let (offset, spacing, first, pmf) = match (&slice.neighbor, &slice.own) {
        (NeighborLaw::Lattice { offset, spacing, first, pmf, noise_var }, OwnLaw::Point(_))
            if *noise_var == 0.0 =>
        {
            (*offset, *spacing, *first, pmf)
        }
        _ => return None,
    };
    let own = match slice.own {
        OwnLaw::Point(x) => x,
        _ => unreachable!(),
    };
    let lead = pmf.iter().position(|&p| p > 0.0).unwrap_or(0);
    let last = pmf.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let k = slice.count;
    let (probs, fft_len) = sum_pmf(&pmf[lead..=last], k);
    let step = spacing / k as f64;
    let base = offset + spacing * (first + lead as i64) as f64 - own;
    if step < 0.0 {
        // keep atoms ascending
        let n = probs.len();
        let mut probs = probs;
        probs.reverse();
        return Some(LatticeLaw {
            weight: slice.weight,
            base: base + (n - 1) as f64 * step,
            step: -step,
            probs,
            fft_len,
        });
    }
    Some(LatticeLaw { weight: slice.weight, base, step, probs, fft_len })
}
