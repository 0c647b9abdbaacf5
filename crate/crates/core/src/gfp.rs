//! Generalized paradox for a node attribute `x`:
//! `F_{Δ^(x)}(s) = Σ_k p_k G_k(s/k)^k H_k(−s)`, with
//! `G_k(s) = Σ_j (Q_jk/q_k) H_j(s)` and `H_k` the transform of `x | k`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::degree::DegreeDistribution;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeAttributes};
use crate::joint::JointDegreeDistribution;
use crate::numeric::sum;
use crate::transform::{check_marginals, neighbor_pmf, ModelKind, NeighborLaw, OwnLaw, Slice, TransformFn};

/// Law of `x` given the degree `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttributeModel {
    /// `x | k ~ Normal(intercept + slope·k, noise_sd²)`.
    GaussianLinear { intercept: f64, slope: f64, noise_sd: f64 },
    /// Per-degree pmf over `(x, probability)` pairs.
    EmpiricalTable {
        #[serde(with = "row_list")]
        rows: BTreeMap<usize, Vec<(f64, f64)>>,
    },
}

// Integer map keys do not survive an internally tagged enum, so rows travel
// as `[{"k": .., "pmf": [[x, p], ..]}, ..]`.
mod row_list {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Row {
        k: usize,
        pmf: Vec<(f64, f64)>,
    }

    pub fn serialize<S: Serializer>(rows: &BTreeMap<usize, Vec<(f64, f64)>>, s: S) -> Result<S::Ok, S::Error> {
        let list: Vec<Row> = rows.iter().map(|(&k, pmf)| Row { k, pmf: pmf.clone() }).collect();
        list.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, Vec<(f64, f64)>>, D::Error> {
        Ok(Vec::<Row>::deserialize(d)?.into_iter().map(|r| (r.k, r.pmf)).collect())
    }
}

impl Default for AttributeModel {
    /// `x | k ~ Normal(k, 1)`.
    fn default() -> Self {
        AttributeModel::GaussianLinear { intercept: 0.0, slope: 1.0, noise_sd: 1.0 }
    }
}

impl AttributeModel {
    /// `x ≡ k`.
    pub fn degree() -> Self {
        AttributeModel::GaussianLinear { intercept: 0.0, slope: 1.0, noise_sd: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AttributeModel::GaussianLinear { intercept, slope, noise_sd } => {
                if !intercept.is_finite() || !slope.is_finite() || !(*noise_sd >= 0.0) || !noise_sd.is_finite() {
                    return Err(Error::param("gaussian attribute model needs finite a, b_x and sigma >= 0"));
                }
            }
            AttributeModel::EmpiricalTable { rows } => {
                if rows.is_empty() {
                    return Err(Error::param("empirical attribute table is empty"));
                }
                for (k, row) in rows {
                    if row.iter().any(|&(x, p)| !x.is_finite() || !(p >= 0.0)) {
                        return Err(Error::param(format!("bad entry in attribute row for k={k}")));
                    }
                    let total = sum(row.iter().map(|r| r.1));
                    if (total - 1.0).abs() > 1e-9 {
                        return Err(Error::param(format!("attribute row for k={k} sums to {total}")));
                    }
                }
            }
        }
        Ok(())
    }

    fn row(&self, k: usize) -> Result<&[(f64, f64)]> {
        match self {
            AttributeModel::EmpiricalTable { rows } => rows
                .get(&k)
                .map(Vec::as_slice)
                .ok_or_else(|| Error::domain(format!("attribute table has no row for degree {k}"))),
            _ => unreachable!(),
        }
    }

    /// Mean of `x | k`.
    pub fn mean(&self, k: usize) -> Result<f64> {
        match self {
            AttributeModel::GaussianLinear { intercept, slope, .. } => Ok(intercept + slope * k as f64),
            AttributeModel::EmpiricalTable { .. } => Ok(sum(self.row(k)?.iter().map(|(x, p)| x * p))),
        }
    }

    pub fn write_json<W: std::io::Write>(&self, w: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(w, self).map_err(std::io::Error::other)
    }
}

/// `H_k(iθ) = E[e^{−iθx} | k]`.
pub fn attribute_transform(model: &AttributeModel, k: usize) -> Result<TransformFn> {
    model.validate()?;
    match model {
        AttributeModel::GaussianLinear { intercept, slope, noise_sd } => {
            let mu = intercept + slope * k as f64;
            if *noise_sd == 0.0 {
                Ok(TransformFn::point_mass(mu))
            } else {
                TransformFn::normal(mu, noise_sd * noise_sd)
            }
        }
        AttributeModel::EmpiricalTable { .. } => TransformFn::from_atoms(model.row(k)?.iter().copied()),
    }
}

/// Transform of `Δ^(x)` on the ensemble with degree distribution `p` and
/// joint distribution `joint`.
pub fn gfp_delta_transform(
    p: &DegreeDistribution,
    joint: &JointDegreeDistribution,
    model: &AttributeModel,
) -> Result<TransformFn> {
    model.validate()?;
    check_marginals(p, joint)?;
    let mut slices = Vec::new();
    for (k, pk) in p.support() {
        let b = joint
            .index_of(k)
            .ok_or_else(|| Error::Consistency(format!("degree {k} missing from the joint distribution")))?;
        let (neighbor, own) = match model {
            AttributeModel::GaussianLinear { intercept, slope, noise_sd } => {
                let (first, pmf) = neighbor_pmf(joint, b);
                let var = noise_sd * noise_sd;
                let mu = intercept + slope * k as f64;
                (
                    NeighborLaw::Lattice { offset: *intercept, spacing: *slope, first, pmf, noise_var: var },
                    if var == 0.0 { OwnLaw::Point(mu) } else { OwnLaw::Normal { mean: mu, var } },
                )
            }
            AttributeModel::EmpiricalTable { .. } => {
                let (mut values, mut probs) = (Vec::new(), Vec::new());
                for (a, w) in joint.conditional(b).into_iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    for &(x, px) in model.row(joint.degrees()[a])? {
                        values.push(x);
                        probs.push(w * px);
                    }
                }
                let (ov, op): (Vec<f64>, Vec<f64>) = model.row(k)?.iter().copied().unzip();
                (
                    NeighborLaw::Discrete { values: values.into(), probs: probs.into() },
                    OwnLaw::Discrete { values: Arc::from(ov), probs: Arc::from(op) },
                )
            }
        };
        slices.push(Slice { weight: pk, count: k, neighbor, own });
    }
    Ok(TransformFn::mixture_unchecked(slices, ModelKind::Attribute))
}

/// Independent draws `x_i | k_i` for every node of `g`.
pub fn sample_attributes(g: &Graph, model: &AttributeModel, seed: u64) -> Result<NodeAttributes> {
    model.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(g.node_count());
    for i in 0..g.node_count() {
        let k = g.degree(i);
        let x = match model {
            AttributeModel::GaussianLinear { intercept, slope, noise_sd } => {
                let z: f64 = StandardNormal.sample(&mut rng);
                intercept + slope * k as f64 + noise_sd * z
            }
            AttributeModel::EmpiricalTable { .. } => {
                let row = model.row(k)?;
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = row[row.len() - 1].0;
                for &(x, p) in row {
                    acc += p;
                    if u < acc {
                        pick = x;
                        break;
                    }
                }
                pick
            }
        };
        values.push(x);
    }
    NodeAttributes::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree::{edge_end, fit_mean_var, make_poisson};
    use crate::maxent::joint_from_gamma;
    use crate::transform::{correlated_delta_transform, mean_var_from_transform};
    use num_complex::Complex64;

    fn ensemble() -> (DegreeDistribution, JointDegreeDistribution) {
        let p = fit_mean_var(8.0, 64.0).unwrap().distribution(1e-10).unwrap();
        let joint = joint_from_gamma(&edge_end(&p), 0.004).unwrap();
        (p, joint)
    }

    #[test]
    fn attribute_transforms() {
        let deg = attribute_transform(&AttributeModel::degree(), 5).unwrap();
        assert!((deg.eval(0.3) - Complex64::from_polar(1.0, -1.5)).norm() < 1e-15);
        let std = AttributeModel::GaussianLinear { intercept: 0.0, slope: 0.0, noise_sd: 1.0 };
        let h = attribute_transform(&std, 7).unwrap();
        for theta in [0.0, 0.5, 2.0] {
            // quadrature oracle for E[cos θZ]
            let dz = 1e-3;
            let num: f64 = (-10_000..=10_000)
                .map(|i| {
                    let z = i as f64 * dz;
                    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt() * (theta * z).cos() * dz
                })
                .sum();
            assert!((h.eval(theta).re - num).abs() < 1e-10);
            assert!((h.eval(theta).re - (-0.5 * theta * theta).exp()).abs() < 1e-15);
        }
        let table = AttributeModel::EmpiricalTable { rows: BTreeMap::from([(2, vec![(0.0, 0.5), (1.0, 0.5)])]) };
        assert!((attribute_transform(&table, 2).unwrap().eval(0.0).re - 1.0).abs() < 1e-15);
        assert!(matches!(attribute_transform(&table, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn degree_attribute_reduces_to_ordinary_paradox() {
        let (p, joint) = ensemble();
        let f = gfp_delta_transform(&p, &joint, &AttributeModel::degree()).unwrap();
        let g = correlated_delta_transform(&p, &joint).unwrap();
        for i in 0..100 {
            let theta = -20.0 + 0.4 * i as f64;
            assert!((f.eval(theta) - g.eval(theta)).norm() < 1e-10);
        }
    }

    #[test]
    fn constant_attribute_is_a_point_mass() {
        let (p, joint) = ensemble();
        let model = AttributeModel::GaussianLinear { intercept: 2.5, slope: 0.0, noise_sd: 0.0 };
        let f = gfp_delta_transform(&p, &joint, &model).unwrap();
        for theta in [-7.0, 0.1, 3.0] {
            assert!((f.eval(theta) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn positive_slope_gives_positive_mean() {
        let p = make_poisson(5.0, 1e-10).unwrap();
        let joint = JointDegreeDistribution::product(&edge_end(&p));
        let f = gfp_delta_transform(&p, &joint, &AttributeModel::default()).unwrap();
        let (mean, _) = mean_var_from_transform(&f);
        let (sm, _) = f.structural_moments().unwrap();
        assert!(mean > 0.0);
        assert!((mean - sm).abs() < 1e-8);
    }

    #[test]
    fn sampling_is_deterministic_and_exact_without_noise() {
        let (g, _) = Graph::with_numeric_ids(4, vec![(0, 1), (1, 2), (2, 3), (1, 3)]);
        let a = sample_attributes(&g, &AttributeModel::default(), 9).unwrap();
        let b = sample_attributes(&g, &AttributeModel::default(), 9).unwrap();
        assert_eq!(a, b);
        let model = AttributeModel::GaussianLinear { intercept: 1.0, slope: 2.0, noise_sd: 0.0 };
        let x = sample_attributes(&g, &model, 1).unwrap();
        assert_eq!(x.values(), &[3.0, 7.0, 5.0, 5.0]);
    }

    #[test]
    fn json_round_trip() {
        let model = AttributeModel::EmpiricalTable { rows: BTreeMap::from([(1, vec![(0.5, 1.0)])]) };
        let s = serde_json::to_string(&model).unwrap();
        assert!(s.contains("\"kind\":\"empirical_table\""));
        assert_eq!(serde_json::from_str::<AttributeModel>(&s).unwrap(), model);
    }
}
