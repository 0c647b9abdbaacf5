//! Kernel-smoothed densities `ρ_κ(x) = (1/2π) ∫ F(iθ) F_κ(iθ) e^{iθx} dθ`.
//!
//! Lattice slices are inverted exactly (see `lattice`) and smoothed in
//! `x`-space; whatever remains is integrated over `θ` with the trapezoid
//! rule, its step set by the aliasing period and refined by halving.

use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{Kernel, KernelKind};
use super::lattice::lattice_law;
use super::{ModelKind, Repr, Slice, TransformFn};
use crate::error::{Error, Result};
use crate::numeric::{trapezoid, CompensatedSum};

/// Negative ringing tolerated before a warning is attached; values are
/// clipped at zero on output either way.
pub const NEGATIVE_TOLERANCE: f64 = 1e-6;

const DECAY_CUT: f64 = 1e-8;
const REFINE_TOL: f64 = 1e-5;
const BLOCK: usize = 512;
const MAX_NODES: usize = 1 << 19;
const MAX_REFINEMENTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() || !(x_max > x_min) || n_points < 2 {
            return Err(Error::param(format!(
                "grid needs x_min < x_max and at least 2 points, got {x_min}:{x_max}:{n_points}"
            )));
        }
        Ok(GridSpec { x_min, x_max, n_points })
    }

    pub fn step(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Grid over `mean ± 8 sd` (clipped to the support hint, padded by a few
    /// bandwidths) with spacing about a tenth of the bandwidth.
    pub fn auto(f: &TransformFn, kernel: &Kernel) -> Self {
        let (lo, hi) = f.support();
        let (mean, var) = super::mean_var_from_transform(f);
        let sd = var.max(0.0).sqrt();
        let pad = 4.0 * kernel.bandwidth;
        let x_min = (mean - 8.0 * sd).max(lo) - pad;
        let x_max = (mean + 8.0 * sd).min(hi) + pad;
        let x_min = x_min.floor();
        let x_max = x_max.ceil().max(x_min + 1.0);
        let n = (((x_max - x_min) / (kernel.bandwidth / 10.0)).ceil() as usize + 1).clamp(101, 20_001);
        GridSpec { x_min, x_max, n_points: n }
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    /// `XMIN:XMAX:NPTS`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::param(format!("grid must look like XMIN:XMAX:NPTS, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let x_min: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let x_max: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        GridSpec::new(x_min, x_max, n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InversionMethod {
    /// Exact lattice inversion where possible, quadrature for the rest.
    #[default]
    Auto,
    /// Quadrature over `θ` for everything.
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionMeta {
    pub model: ModelKind,
    pub method: String,
    pub kernel: Kernel,
    /// Lattice slices inverted exactly, and the largest FFT used for them.
    pub lattice_slices: usize,
    pub max_fft_len: usize,
    pub theta_max: Option<f64>,
    pub theta_step: Option<f64>,
    pub n_theta: Option<usize>,
    /// Exact mass of the smoothed distribution inside `[x_min, x_max]`.
    pub captured_mass: f64,
    /// Trapezoid integral of the grid values.
    pub grid_mass: f64,
    /// Smallest value before clipping.
    pub min_raw_value: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub values: Vec<f64>,
    pub meta: InversionMeta,
}

impl DensityGrid {
    pub fn grid(&self) -> GridSpec {
        GridSpec { x_min: self.x_min, x_max: self.x_max, n_points: self.n_points }
    }

    pub fn xs(&self) -> Vec<f64> {
        self.grid().points()
    }

    pub fn mass(&self) -> f64 {
        trapezoid(&self.values, self.grid().step())
    }

    /// Sup-norm distance to values on the same grid.
    pub fn sup_distance(&self, other: &[f64]) -> f64 {
        assert_eq!(other.len(), self.values.len(), "grids differ");
        self.values.iter().zip(other).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,density")?;
        for (x, v) in self.xs().iter().zip(&self.values) {
            writeln!(w, "{x},{v:e}")?;
        }
        Ok(())
    }

    /// JSON sidecar: grid plus quadrature metadata and warnings.
    pub fn write_metadata_json<W: Write>(&self, w: W) -> std::io::Result<()> {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            x_min: f64,
            x_max: f64,
            n_points: usize,
            #[serde(flatten)]
            meta: &'a InversionMeta,
        }
        let side = Sidecar { x_min: self.x_min, x_max: self.x_max, n_points: self.n_points, meta: &self.meta };
        serde_json::to_writer_pretty(w, &side).map_err(std::io::Error::other)
    }
}

/// Adds the kernel-smoothed density of ascending atoms to `out`, returning
/// the smoothed mass that falls inside the grid range.
fn smooth_sorted(kernel: &Kernel, xs: &[f64], atoms: &[(f64, f64)], out: &mut [f64]) -> f64 {
    if atoms.is_empty() {
        return 0.0;
    }
    let b = kernel.bandwidth;
    let (x_min, x_max) = (xs[0], xs[xs.len() - 1]);
    let mut captured = CompensatedSum::new();
    for &(d, w) in atoms {
        captured.add(w * (kernel.cdf(x_max - d) - kernel.cdf(x_min - d)));
    }
    match kernel.kind {
        KernelKind::Laplace => {
            let norm = 0.5 / b;
            // Σ_{d ≤ x} w e^{−(x−d)/b}, sweeping up
            let (mut acc, mut pos, mut j) = (0.0f64, 0.0f64, 0usize);
            for (i, &x) in xs.iter().enumerate() {
                while j < atoms.len() && atoms[j].0 <= x {
                    let d = atoms[j].0;
                    if acc > 0.0 {
                        acc *= (-(d - pos) / b).exp();
                    }
                    acc += atoms[j].1;
                    pos = d;
                    j += 1;
                }
                if acc > 0.0 {
                    acc *= (-(x - pos) / b).exp();
                    pos = x;
                    out[i] += norm * acc;
                }
            }
            // Σ_{d > x} w e^{−(d−x)/b}, sweeping down
            let (mut acc, mut pos, mut j) = (0.0f64, 0.0f64, atoms.len());
            for (i, &x) in xs.iter().enumerate().rev() {
                while j > 0 && atoms[j - 1].0 > x {
                    let d = atoms[j - 1].0;
                    if acc > 0.0 {
                        acc *= (-(pos - d) / b).exp();
                    }
                    acc += atoms[j - 1].1;
                    pos = d;
                    j -= 1;
                }
                if acc > 0.0 {
                    acc *= (-(pos - x) / b).exp();
                    pos = x;
                    out[i] += norm * acc;
                }
            }
        }
        KernelKind::Rectangular => {
            let mut prefix = Vec::with_capacity(atoms.len() + 1);
            let mut run = CompensatedSum::new();
            prefix.push(0.0);
            for &(_, w) in atoms {
                run.add(w);
                prefix.push(run.value());
            }
            let norm = 0.5 / b;
            for (i, &x) in xs.iter().enumerate() {
                let (lo, hi) = (x - b, x + b);
                let lo_lt = atoms.partition_point(|a| a.0 < lo);
                let lo_le = atoms.partition_point(|a| a.0 <= lo);
                let hi_lt = atoms.partition_point(|a| a.0 < hi);
                let hi_le = atoms.partition_point(|a| a.0 <= hi);
                let inside = prefix[hi_lt] - prefix[lo_le];
                let edges = (prefix[lo_le] - prefix[lo_lt]) + (prefix[hi_le] - prefix[hi_lt]);
                out[i] += norm * (inside + 0.5 * edges);
            }
        }
    }
    captured.value()
}

/// Kernel-smoothed density of weighted points (e.g. a Monte Carlo sample
/// with weights `1/n`) on `grid`.
pub fn smooth_points(points: &[(f64, f64)], kernel: &Kernel, grid: &GridSpec) -> Vec<f64> {
    let xs = grid.points();
    let reach = kernel.reach();
    let mut atoms: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(d, _)| d >= grid.x_min - reach && d <= grid.x_max + reach)
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = vec![0.0; xs.len()];
    smooth_sorted(kernel, &xs, &atoms, &mut out);
    out
}

pub fn invert_with_kernel(f: &TransformFn, kernel: &Kernel, grid: &GridSpec) -> DensityGrid {
    invert_with_options(f, kernel, grid, InversionMethod::Auto)
}

pub(crate) struct Parts<'a> {
    pub lattice: Vec<&'a Slice>,
    pub atoms: Option<&'a [(f64, f64)]>,
    pub rest: Option<TransformFn>,
}

pub(crate) fn split_for_tails(f: &TransformFn) -> Parts<'_> {
    split(f, InversionMethod::Auto)
}

fn split(f: &TransformFn, method: InversionMethod) -> Parts<'_> {
    let exact_ok = method == InversionMethod::Auto;
    match &f.repr {
        Repr::Mixture(slices) if exact_ok => {
            let (lattice, other): (Vec<&Slice>, Vec<&Slice>) =
                slices.iter().filter(|s| s.weight > 0.0).partition(|s| s.is_lattice());
            let rest = if other.is_empty() {
                None
            } else {
                let mut t = TransformFn::mixture_unchecked(other.into_iter().cloned().collect(), f.kind);
                t.support = f.support;
                Some(t)
            };
            Parts { lattice, atoms: None, rest }
        }
        Repr::Atoms(a) if exact_ok => Parts { lattice: Vec::new(), atoms: Some(a), rest: None },
        _ => Parts { lattice: Vec::new(), atoms: None, rest: Some(f.clone()) },
    }
}

pub(crate) struct ExactPart {
    pub values: Vec<f64>,
    pub captured: f64,
    pub max_fft_len: usize,
}

fn invert_exact(parts: &Parts<'_>, kernel: &Kernel, xs: &[f64]) -> ExactPart {
    let reach = kernel.reach();
    let (lo, hi) = (xs[0] - reach, xs[xs.len() - 1] + reach);
    let n = xs.len();
    let mut exact = ExactPart { values: vec![0.0; n], captured: 0.0, max_fft_len: 0 };
    if let Some(atoms) = parts.atoms {
        let window: Vec<(f64, f64)> = atoms.iter().copied().filter(|a| a.0 >= lo && a.0 <= hi).collect();
        exact.captured += smooth_sorted(kernel, xs, &window, &mut exact.values);
    }
    let (values, captured, max_len) = parts
        .lattice
        .par_iter()
        .fold(
            || (vec![0.0; n], 0.0, 0usize),
            |(mut acc, mut cap, mut max_len), slice| {
                let law = lattice_law(slice).expect("lattice slice");
                max_len = max_len.max(law.fft_len);
                let window: Vec<(f64, f64)> = law
                    .probs
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| (law.value(i), law.weight * p))
                    .filter(|a| a.0 >= lo && a.0 <= hi && a.1 > 0.0)
                    .collect();
                cap += smooth_sorted(kernel, xs, &window, &mut acc);
                (acc, cap, max_len)
            },
        )
        .reduce(
            || (vec![0.0; n], 0.0, 0usize),
            |(mut a, ca, la), (b, cb, lb)| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                (a, ca + cb, la.max(lb))
            },
        );
    for (x, y) in exact.values.iter_mut().zip(&values) {
        *x += y;
    }
    exact.captured += captured;
    exact.max_fft_len = max_len;
    exact
}

pub(crate) struct QuadPart {
    pub values: Vec<f64>,
    pub captured: f64,
    pub theta_max: f64,
    pub theta_step: f64,
    pub n_theta: usize,
    pub warnings: Vec<String>,
}

/// Evaluates `F·F_κ` at `θ = (n + shift)·h` for `n = 0, 1, …` in parallel
/// blocks until a whole block is below the decay cut. Returns the values
/// and whether the cut was reached.
fn integrand_nodes(
    f: &TransformFn,
    kernel: &Kernel,
    h: f64,
    shift: f64,
    count: Option<usize>,
) -> (Vec<Complex64>, bool) {
    let mut nodes = Vec::new();
    loop {
        let start = nodes.len();
        let len = match count {
            Some(c) => (c - start).min(BLOCK),
            None => BLOCK,
        };
        let block: Vec<Complex64> = (start..start + len)
            .into_par_iter()
            .map(|n| {
                let theta = (n as f64 + shift) * h;
                f.eval(theta) * kernel.transform(theta)
            })
            .collect();
        let decayed = block.iter().all(|v| v.norm() < DECAY_CUT);
        nodes.extend(block);
        match count {
            Some(c) if nodes.len() >= c => return (nodes, true),
            Some(_) => continue,
            None if decayed => return (nodes, true),
            None if nodes.len() >= MAX_NODES => return (nodes, false),
            None => continue,
        }
    }
}

/// `Σ_n c_n Re(v_n e^{iθ_n x})` for `θ_n = (n + shift) h`, at every `x`.
fn fourier_sum(nodes: &[Complex64], weights0: f64, h: f64, shift: f64, xs: &[f64]) -> Vec<f64> {
    xs.par_iter()
        .map(|&x| {
            let mut acc = CompensatedSum::new();
            let rot = Complex64::from_polar(1.0, h * x);
            let mut z = Complex64::from_polar(1.0, shift * h * x);
            for (n, v) in nodes.iter().enumerate() {
                if n % 64 == 0 {
                    z = Complex64::from_polar(1.0, (n as f64 + shift) * h * x);
                }
                let c = if n == 0 && shift == 0.0 { weights0 } else { 1.0 };
                acc.add(c * (v * z).re);
                z *= rot;
            }
            acc.value()
        })
        .collect()
}

/// `∫_{x_min}^{x_max}` of the periodic trapezoid approximation.
fn fourier_mass(nodes: &[Complex64], h: f64, shift: f64, x_min: f64, x_max: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for (n, v) in nodes.iter().enumerate() {
        let theta = (n as f64 + shift) * h;
        if theta == 0.0 {
            acc.add(0.5 * v.re * (x_max - x_min));
        } else {
            let e = Complex64::from_polar(1.0, theta * x_max) - Complex64::from_polar(1.0, theta * x_min);
            acc.add((v * e / Complex64::new(0.0, theta)).re);
        }
    }
    acc.value() * h / std::f64::consts::PI
}

pub(crate) fn invert_quadrature(f: &TransformFn, kernel: &Kernel, grid: &GridSpec) -> QuadPart {
    let xs = grid.points();
    let (lo, hi) = f.support();
    let period = (hi - grid.x_min).max(grid.x_max - lo) + kernel.reach() + 1.0;
    let mut h = 2.0 * std::f64::consts::PI / period;
    let mut warnings = Vec::new();
    let (mut nodes, decayed) = integrand_nodes(f, kernel, h, 0.0, None);
    if !decayed {
        warnings.push(format!(
            "integrand |F·F_κ| not below {DECAY_CUT:e} at the θ cap {:.4e}; density may ring",
            nodes.len() as f64 * h
        ));
    }
    let scale = |h: f64| h / std::f64::consts::PI;
    let mut values: Vec<f64> =
        fourier_sum(&nodes, 0.5, h, 0.0, &xs).into_iter().map(|v| v * scale(h)).collect();
    let mut refined = !decayed;
    for _ in 0..if decayed { MAX_REFINEMENTS } else { 0 } {
        let (mid, _) = integrand_nodes(f, kernel, h, 0.5, Some(nodes.len()));
        let mid_sum = fourier_sum(&mid, 1.0, h, 0.5, &xs);
        let finer: Vec<f64> =
            values.iter().zip(&mid_sum).map(|(v, m)| 0.5 * v + 0.5 * scale(h) * m).collect();
        let diff = finer.iter().zip(&values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        // interleave to get the node list for step h/2
        let mut merged = Vec::with_capacity(2 * nodes.len());
        for (a, b) in nodes.iter().zip(&mid) {
            merged.push(*a);
            merged.push(*b);
        }
        nodes = merged;
        h *= 0.5;
        values = finer;
        if diff < REFINE_TOL {
            refined = true;
            break;
        }
    }
    if !refined {
        warnings.push(format!("θ-step refinement did not settle below {REFINE_TOL:e}"));
    }
    let captured = fourier_mass(&nodes, h, 0.0, grid.x_min, grid.x_max);
    QuadPart {
        values,
        captured,
        theta_max: (nodes.len() - 1) as f64 * h,
        theta_step: h,
        n_theta: nodes.len(),
        warnings,
    }
}

pub fn invert_with_options(
    f: &TransformFn,
    kernel: &Kernel,
    grid: &GridSpec,
    method: InversionMethod,
) -> DensityGrid {
    let xs = grid.points();
    let parts = split(f, method);
    let exact = invert_exact(&parts, kernel, &xs);
    let mut values = exact.values;
    let mut captured = exact.captured;
    let mut warnings = Vec::new();
    let (mut theta_max, mut theta_step, mut n_theta) = (None, None, None);
    if let Some(rest) = &parts.rest {
        let q = invert_quadrature(rest, kernel, grid);
        for (v, r) in values.iter_mut().zip(&q.values) {
            *v += r;
        }
        captured += q.captured;
        theta_max = Some(q.theta_max);
        theta_step = Some(q.theta_step);
        n_theta = Some(q.n_theta);
        warnings.extend(q.warnings);
    }
    let method_name = match (parts.lattice.is_empty() && parts.atoms.is_none(), parts.rest.is_some()) {
        (true, _) => "quadrature",
        (false, false) => "lattice",
        (false, true) => "lattice+quadrature",
    };
    let min_raw = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min_raw < -NEGATIVE_TOLERANCE {
        warnings.push(format!("negative density {min_raw:e} below tolerance, clipped"));
    }
    for v in values.iter_mut() {
        *v = v.max(0.0);
    }
    let grid_mass = trapezoid(&values, grid.step());
    if (grid_mass - captured).abs() > 1e-3 {
        warnings.push(format!(
            "grid integral {grid_mass:.6} differs from captured mass {captured:.6}; refine the grid"
        ));
    }
    DensityGrid {
        x_min: grid.x_min,
        x_max: grid.x_max,
        n_points: grid.n_points,
        values,
        meta: InversionMeta {
            model: f.kind(),
            method: method_name.to_string(),
            kernel: *kernel,
            lattice_slices: parts.lattice.len(),
            max_fft_len: exact.max_fft_len,
            theta_max,
            theta_step,
            n_theta,
            captured_mass: captured,
            grid_mass,
            min_raw_value: min_raw,
            warnings,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree::make_poisson;
    use crate::transform::config_delta_transform;

    #[test]
    fn point_mass_gives_the_kernel() {
        let grid = GridSpec::new(-3.0, 3.0, 601).unwrap();
        let kernel = Kernel::default();
        for method in [InversionMethod::Auto, InversionMethod::Quadrature] {
            let d = invert_with_options(&TransformFn::point_mass(0.0), &kernel, &grid, method);
            for (x, v) in d.xs().iter().zip(&d.values) {
                assert!((v - 1.5 * (-3.0 * x.abs()).exp()).abs() < 1e-4, "{method:?} x={x}");
            }
        }
    }

    #[test]
    fn sweep_matches_direct_sum() {
        let atoms = [(-1.3, 0.2), (0.0, 0.1), (0.25, 0.3), (2.0, 0.4)];
        let grid = GridSpec::new(-4.0, 4.0, 161).unwrap();
        for kernel in [Kernel::laplace(0.4).unwrap(), Kernel::histogram(0.5).unwrap()] {
            let got = smooth_points(&atoms, &kernel, &grid);
            for (i, x) in grid.points().into_iter().enumerate() {
                let want: f64 = atoms.iter().map(|(d, w)| w * kernel.density(x - d)).sum();
                assert!((got[i] - want).abs() < 1e-13, "x={x}");
            }
        }
    }

    #[test]
    fn normal_law_inverts_by_quadrature() {
        let f = TransformFn::normal(1.0, 4.0).unwrap();
        let kernel = Kernel::laplace(0.2).unwrap();
        let grid = GridSpec::new(-8.0, 10.0, 181).unwrap();
        let d = invert_with_kernel(&f, &kernel, &grid);
        assert_eq!(d.meta.method, "quadrature");
        // oracle: direct numerical convolution of the two densities
        for (x, v) in d.xs().iter().zip(&d.values) {
            let du = 1e-3;
            let want: f64 = (-20_000..=20_000)
                .map(|i| {
                    let u = i as f64 * du;
                    let g = (-(x - u - 1.0).powi(2) / 8.0).exp() / (8.0 * std::f64::consts::PI).sqrt();
                    g * kernel.density(u) * du
                })
                .sum();
            assert!((v - want).abs() < 1e-5, "x={x}: {v} vs {want}");
        }
        assert!(d.meta.warnings.is_empty(), "{:?}", d.meta.warnings);
    }

    #[test]
    fn lattice_and_quadrature_agree() {
        let p = make_poisson(3.0, 1e-10).unwrap();
        let f = config_delta_transform(&p);
        let kernel = Kernel::laplace(0.5).unwrap();
        let grid = GridSpec::new(-8.0, 10.0, 361).unwrap();
        let a = invert_with_options(&f, &kernel, &grid, InversionMethod::Auto);
        let b = invert_with_options(&f, &kernel, &grid, InversionMethod::Quadrature);
        assert_eq!(a.meta.method, "lattice");
        assert!(a.sup_distance(&b.values) < 1e-3, "{}", a.sup_distance(&b.values));
        assert!((a.meta.grid_mass - a.meta.captured_mass).abs() < 1e-3);
    }

    #[test]
    fn grid_spec_parsing() {
        let g: GridSpec = "-10:20:301".parse().unwrap();
        assert_eq!(g, GridSpec { x_min: -10.0, x_max: 20.0, n_points: 301 });
        assert!((g.step() - 0.1).abs() < 1e-15);
        assert!("1:0:10".parse::<GridSpec>().is_err());
        assert!("a:b".parse::<GridSpec>().is_err());
    }
}
