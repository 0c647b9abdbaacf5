//! Two-sided Laplace transform `F(s) = E[e^{−sΔ}]` evaluated on the
//! imaginary axis, and its inversion into kernel-smoothed densities.
//!
//! Ensemble transforms are mixtures over the node degree `k` of slices
//! `p_k · L_k(iθ/k)^k · O_k(−iθ)`, where `L_k` is the transform of a
//! neighbour's value and `O_k` that of the node's own value. Keeping that
//! structure (instead of an opaque closure) lets slices whose values live on
//! a lattice be inverted exactly; everything else goes through quadrature.

mod invert;
mod kernel;
mod lattice;
mod moments;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::degree::{edge_end, DegreeDistribution};
use crate::error::{Error, Result};
use crate::joint::JointDegreeDistribution;
use crate::numeric::{sum, CompensatedSum};

pub use invert::{
    invert_with_kernel, invert_with_options, smooth_points, DensityGrid, GridSpec, InversionMeta,
    InversionMethod, NEGATIVE_TOLERANCE,
};
pub use kernel::{Kernel, KernelKind, DEFAULT_BANDWIDTH};
pub use moments::{
    mean_var_from_transform, prob_delta_above, prob_delta_negative, prob_delta_positive,
    TailProbability, SIGN_EPSILON,
};

/// Where a transform came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Configuration,
    Correlated,
    Attribute,
    Atomic,
    Normal,
    Custom,
}

/// Law of a single neighbour's value.
#[derive(Debug, Clone, PartialEq)]
pub enum NeighborLaw {
    /// `offset + spacing·(first + i)` with probability `pmf[i]`, plus
    /// independent `Normal(0, noise_var)` noise.
    Lattice {
        offset: f64,
        spacing: f64,
        first: i64,
        pmf: Arc<[f64]>,
        noise_var: f64,
    },
    Discrete {
        values: Arc<[f64]>,
        probs: Arc<[f64]>,
    },
}

/// Law of the node's own value.
#[derive(Debug, Clone, PartialEq)]
pub enum OwnLaw {
    Point(f64),
    Normal { mean: f64, var: f64 },
    Discrete { values: Arc<[f64]>, probs: Arc<[f64]> },
}

/// Contribution `weight · E[e^{−iθΔ} | k]` of one degree class, where
/// `Δ = mean of count neighbour values − own value`.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub weight: f64,
    pub count: usize,
    pub neighbor: NeighborLaw,
    pub own: OwnLaw,
}

fn discrete_mean_var(values: &[f64], probs: &[f64]) -> (f64, f64) {
    let m = sum(values.iter().zip(probs).map(|(v, p)| v * p));
    let v = sum(values.iter().zip(probs).map(|(v, p)| p * (v - m) * (v - m)));
    (m, v)
}

fn discrete_range(values: &[f64], probs: &[f64]) -> (f64, f64) {
    values
        .iter()
        .zip(probs)
        .filter(|(_, &p)| p > 0.0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&v, _)| (lo.min(v), hi.max(v)))
}

impl NeighborLaw {
    /// `E[e^{−iφY}]`.
    pub fn eval(&self, phi: f64) -> Complex64 {
        match self {
            NeighborLaw::Lattice { offset, spacing, first, pmf, noise_var } => {
                let z = Complex64::from_polar(1.0, -phi * spacing);
                let mut acc = Complex64::new(0.0, 0.0);
                for &p in pmf.iter().rev() {
                    acc = acc * z + p;
                }
                let shift = offset + spacing * *first as f64;
                acc * Complex64::from_polar((-0.5 * phi * phi * noise_var).exp(), -phi * shift)
            }
            NeighborLaw::Discrete { values, probs } => {
                let mut re = CompensatedSum::new();
                let mut im = CompensatedSum::new();
                for (&v, &p) in values.iter().zip(probs.iter()) {
                    let (s, c) = (phi * v).sin_cos();
                    re.add(p * c);
                    im.add(-p * s);
                }
                Complex64::new(re.value(), im.value())
            }
        }
    }

    pub fn mean_var(&self) -> (f64, f64) {
        match self {
            NeighborLaw::Lattice { offset, spacing, first, pmf, noise_var } => {
                let idx: Vec<f64> = (0..pmf.len()).map(|i| i as f64).collect();
                let (m, v) = discrete_mean_var(&idx, pmf);
                (offset + spacing * (*first as f64 + m), spacing * spacing * v + noise_var)
            }
            NeighborLaw::Discrete { values, probs } => discrete_mean_var(values, probs),
        }
    }

    /// Range of the noiseless part and the noise variance.
    fn range(&self) -> ((f64, f64), f64) {
        match self {
            NeighborLaw::Lattice { offset, spacing, first, pmf, noise_var } => {
                let lo_i = pmf.iter().position(|&p| p > 0.0).unwrap_or(0);
                let hi_i = pmf.iter().rposition(|&p| p > 0.0).unwrap_or(0);
                let a = offset + spacing * (*first as f64 + lo_i as f64);
                let b = offset + spacing * (*first as f64 + hi_i as f64);
                ((a.min(b), a.max(b)), *noise_var)
            }
            NeighborLaw::Discrete { values, probs } => (discrete_range(values, probs), 0.0),
        }
    }
}

impl OwnLaw {
    /// `E[e^{+iθX}]`, i.e. the own-value transform at `−s`.
    pub fn eval(&self, theta: f64) -> Complex64 {
        match self {
            OwnLaw::Point(x) => Complex64::from_polar(1.0, theta * x),
            OwnLaw::Normal { mean, var } => {
                Complex64::from_polar((-0.5 * theta * theta * var).exp(), theta * mean)
            }
            OwnLaw::Discrete { values, probs } => {
                let mut re = CompensatedSum::new();
                let mut im = CompensatedSum::new();
                for (&v, &p) in values.iter().zip(probs.iter()) {
                    let (s, c) = (theta * v).sin_cos();
                    re.add(p * c);
                    im.add(p * s);
                }
                Complex64::new(re.value(), im.value())
            }
        }
    }

    pub fn mean_var(&self) -> (f64, f64) {
        match self {
            OwnLaw::Point(x) => (*x, 0.0),
            OwnLaw::Normal { mean, var } => (*mean, *var),
            OwnLaw::Discrete { values, probs } => discrete_mean_var(values, probs),
        }
    }

    fn range(&self) -> (f64, f64) {
        match self {
            OwnLaw::Point(x) => (*x, *x),
            OwnLaw::Normal { mean, var } => (mean - 8.0 * var.sqrt(), mean + 8.0 * var.sqrt()),
            OwnLaw::Discrete { values, probs } => discrete_range(values, probs),
        }
    }
}

impl Slice {
    pub fn eval(&self, theta: f64) -> Complex64 {
        let g = self.neighbor.eval(theta / self.count as f64);
        g.powu(self.count as u32) * self.own.eval(theta) * self.weight
    }

    /// Neighbour values on a noiseless lattice and a fixed own value: the
    /// conditional law of `Δ` is a finite set of atoms.
    pub fn is_lattice(&self) -> bool {
        matches!(
            (&self.neighbor, &self.own),
            (NeighborLaw::Lattice { noise_var, .. }, OwnLaw::Point(_)) if *noise_var == 0.0
        )
    }

    /// Conditional mean and variance of `Δ`.
    pub fn mean_var(&self) -> (f64, f64) {
        let (my, vy) = self.neighbor.mean_var();
        let (mo, vo) = self.own.mean_var();
        (my - mo, vy / self.count as f64 + vo)
    }

    fn range(&self) -> (f64, f64) {
        let ((ylo, yhi), noise) = self.neighbor.range();
        let spread = 8.0 * (noise / self.count as f64).sqrt();
        let (olo, ohi) = self.own.range();
        (ylo - spread - ohi, yhi + spread - olo)
    }
}

#[derive(Clone)]
enum Repr {
    Mixture(Arc<[Slice]>),
    /// Sorted by value, equal values merged.
    Atoms(Arc<[(f64, f64)]>),
    Normal { mean: f64, var: f64 },
    Custom(Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
}

/// Evaluator `θ ↦ F(iθ) = E[e^{−iθΔ}]` plus a model tag and a hint
/// `[lo, hi]` containing (essentially) all of the mass.
#[derive(Clone)]
pub struct TransformFn {
    repr: Repr,
    kind: ModelKind,
    support: (f64, f64),
}

impl fmt::Debug for TransformFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let repr = match &self.repr {
            Repr::Mixture(s) => format!("Mixture({} slices)", s.len()),
            Repr::Atoms(a) => format!("Atoms({})", a.len()),
            Repr::Normal { mean, var } => format!("Normal({mean}, {var})"),
            Repr::Custom(_) => "Custom".to_string(),
        };
        f.debug_struct("TransformFn")
            .field("repr", &repr)
            .field("kind", &self.kind)
            .field("support", &self.support)
            .finish()
    }
}

impl TransformFn {
    pub fn eval(&self, theta: f64) -> Complex64 {
        match &self.repr {
            Repr::Mixture(slices) => {
                let mut re = CompensatedSum::new();
                let mut im = CompensatedSum::new();
                for s in slices.iter() {
                    let v = s.eval(theta);
                    re.add(v.re);
                    im.add(v.im);
                }
                Complex64::new(re.value(), im.value())
            }
            Repr::Atoms(atoms) => {
                let mut re = CompensatedSum::new();
                let mut im = CompensatedSum::new();
                for &(x, p) in atoms.iter() {
                    let (s, c) = (theta * x).sin_cos();
                    re.add(p * c);
                    im.add(-p * s);
                }
                Complex64::new(re.value(), im.value())
            }
            Repr::Normal { mean, var } => {
                Complex64::from_polar((-0.5 * theta * theta * var).exp(), -theta * mean)
            }
            Repr::Custom(f) => f(theta),
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Total mass `F(0)`.
    pub fn mass(&self) -> f64 {
        self.eval(0.0).re
    }

    pub fn slices(&self) -> Option<&[Slice]> {
        match &self.repr {
            Repr::Mixture(s) => Some(s),
            _ => None,
        }
    }

    pub fn atoms(&self) -> Option<&[(f64, f64)]> {
        match &self.repr {
            Repr::Atoms(a) => Some(a),
            _ => None,
        }
    }

    /// Mean and variance computed from the structure rather than from
    /// derivatives; `None` for custom evaluators.
    pub fn structural_moments(&self) -> Option<(f64, f64)> {
        match &self.repr {
            Repr::Mixture(slices) => {
                let w = sum(slices.iter().map(|s| s.weight));
                let mv: Vec<(f64, f64, f64)> =
                    slices.iter().map(|s| (s.weight, s.mean_var().0, s.mean_var().1)).collect();
                let mean = sum(mv.iter().map(|(p, m, _)| p * m)) / w;
                let var = sum(mv.iter().map(|(p, m, v)| p * (v + (m - mean) * (m - mean)))) / w;
                Some((mean, var))
            }
            Repr::Atoms(atoms) => {
                let (v, p): (Vec<f64>, Vec<f64>) = atoms.iter().copied().unzip();
                Some(discrete_mean_var(&v, &p))
            }
            Repr::Normal { mean, var } => Some((*mean, *var)),
            Repr::Custom(_) => None,
        }
    }

    /// Mixture of degree slices. Weights must sum to one.
    pub fn from_slices(slices: Vec<Slice>, kind: ModelKind) -> Result<Self> {
        if slices.is_empty() {
            return Err(Error::param("transform needs at least one slice"));
        }
        for s in &slices {
            if s.count == 0 || !(s.weight >= 0.0) || !s.weight.is_finite() {
                return Err(Error::param("slices need a positive count and nonnegative weight"));
            }
        }
        let total = sum(slices.iter().map(|s| s.weight));
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::param(format!("slice weights sum to {total}")));
        }
        Ok(Self::mixture_unchecked(slices, kind))
    }

    pub(crate) fn mixture_unchecked(slices: Vec<Slice>, kind: ModelKind) -> Self {
        let support = slices
            .iter()
            .filter(|s| s.weight > 0.0)
            .map(Slice::range)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| (lo.min(a), hi.max(b)));
        TransformFn { repr: Repr::Mixture(slices.into()), kind, support }
    }

    /// Finite distribution of `(value, probability)` pairs.
    pub fn from_atoms<I: IntoIterator<Item = (f64, f64)>>(points: I) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = points.into_iter().collect();
        if atoms.is_empty() {
            return Err(Error::param("atom distribution is empty"));
        }
        if atoms.iter().any(|&(x, p)| !x.is_finite() || !p.is_finite() || p < 0.0) {
            return Err(Error::param("atoms need finite values and nonnegative probabilities"));
        }
        let total = sum(atoms.iter().map(|a| a.1));
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::param(format!("atom probabilities sum to {total}")));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, p) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += p,
                _ => merged.push((x, p)),
            }
        }
        let support = (merged[0].0, merged[merged.len() - 1].0);
        Ok(TransformFn { repr: Repr::Atoms(merged.into()), kind: ModelKind::Atomic, support })
    }

    pub fn point_mass(x: f64) -> Self {
        Self::from_atoms([(x, 1.0)]).expect("finite point")
    }

    pub fn normal(mean: f64, var: f64) -> Result<Self> {
        if !mean.is_finite() || !(var > 0.0) || !var.is_finite() {
            return Err(Error::param("normal law needs a finite mean and positive variance"));
        }
        let sd = var.sqrt();
        Ok(TransformFn {
            repr: Repr::Normal { mean, var },
            kind: ModelKind::Normal,
            support: (mean - 9.0 * sd, mean + 9.0 * sd),
        })
    }

    /// Arbitrary evaluator. `support` must contain essentially all the mass;
    /// it sets the aliasing period of the quadrature.
    pub fn from_fn<F>(f: F, support: (f64, f64)) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        TransformFn { repr: Repr::Custom(Arc::new(f)), kind: ModelKind::Custom, support }
    }

    /// Law of `aX + b`: `F_{aX+b}(s) = e^{−bs} F_X(as)`.
    pub fn affine(&self, a: f64, b: f64) -> Self {
        let inner = self.clone();
        let (lo, hi) = self.support;
        let (x, y) = (a * lo + b, a * hi + b);
        let mut out = Self::from_fn(
            move |theta| inner.eval(a * theta) * Complex64::from_polar(1.0, -b * theta),
            (x.min(y), x.max(y)),
        );
        out.kind = self.kind;
        out
    }

    /// Law of `X + Y` for independent `X`, `Y`: `F_{X+Y} = F_X F_Y`.
    pub fn independent_sum(&self, other: &Self) -> Self {
        let (f, g) = (self.clone(), other.clone());
        let support = (self.support.0 + other.support.0, self.support.1 + other.support.1);
        Self::from_fn(move |theta| f.eval(theta) * g.eval(theta), support)
    }
}

/// Dense conditional neighbour-degree pmf for node class `b`, indexed from
/// the smallest degree class of `joint`.
pub(crate) fn neighbor_pmf(joint: &JointDegreeDistribution, b: usize) -> (i64, Arc<[f64]>) {
    let degrees = joint.degrees();
    let first = degrees[0];
    let mut pmf = vec![0.0; degrees[degrees.len() - 1] - first + 1];
    for (a, p) in joint.conditional(b).into_iter().enumerate() {
        pmf[degrees[a] - first] = p;
    }
    (first as i64, pmf.into())
}

/// Fails unless the marginals of `joint` equal the edge-end distribution of
/// `p` within `1e-8`.
pub(crate) fn check_marginals(p: &DegreeDistribution, joint: &JointDegreeDistribution) -> Result<()> {
    let q = edge_end(p);
    let marg = joint.marginal();
    for (a, &k) in joint.degrees().iter().enumerate() {
        let d = (marg[a] - q.prob(k)).abs();
        if d > 1e-8 {
            return Err(Error::Consistency(format!(
                "joint marginal at k={k} is {}, edge-end distribution gives {}",
                marg[a],
                q.prob(k)
            )));
        }
    }
    for (k, qk) in q.support() {
        if joint.index_of(k).is_none() && qk > 1e-8 {
            return Err(Error::Consistency(format!("degree {k} missing from the joint distribution")));
        }
    }
    Ok(())
}

/// `F_Δ(s) = Σ_k p_k e^{sk} G(s/k)^k` with `G(s) = Σ_j q_j e^{−sj}`.
pub fn config_delta_transform(p: &DegreeDistribution) -> TransformFn {
    let q = edge_end(p);
    let pmf: Arc<[f64]> = q.pmf().into();
    let neighbor = NeighborLaw::Lattice {
        offset: 0.0,
        spacing: 1.0,
        first: q.k_min() as i64,
        pmf,
        noise_var: 0.0,
    };
    let slices = p
        .support()
        .map(|(k, pk)| Slice { weight: pk, count: k, neighbor: neighbor.clone(), own: OwnLaw::Point(k as f64) })
        .collect();
    TransformFn::mixture_unchecked(slices, ModelKind::Configuration)
}

/// `F_Δ(s) = Σ_k p_k e^{sk} G_k(s/k)^k` with the degree-conditioned
/// neighbour transform `G_k(s) = Σ_j (Q_jk/q_k) e^{−sj}`.
pub fn correlated_delta_transform(
    p: &DegreeDistribution,
    joint: &JointDegreeDistribution,
) -> Result<TransformFn> {
    check_marginals(p, joint)?;
    let mut slices = Vec::new();
    for (k, pk) in p.support() {
        let b = joint
            .index_of(k)
            .ok_or_else(|| Error::Consistency(format!("degree {k} missing from the joint distribution")))?;
        let (first, pmf) = neighbor_pmf(joint, b);
        slices.push(Slice {
            weight: pk,
            count: k,
            neighbor: NeighborLaw::Lattice { offset: 0.0, spacing: 1.0, first, pmf, noise_var: 0.0 },
            own: OwnLaw::Point(k as f64),
        });
    }
    Ok(TransformFn::mixture_unchecked(slices, ModelKind::Correlated))
}
