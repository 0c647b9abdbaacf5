//! Measurement of real graphs and measured-versus-predicted comparison.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::degree::{edge_end, fit_mean_var, DegreeDistribution, DEFAULT_TAIL_TOL};
use crate::error::{Error, Result};
use crate::graph::{assortativity, node_stats, paradox_summary, remove_isolates, Graph, NodeAttributes, NodeStats};
use crate::maxent::gamma_for_r;
use crate::transform::{
    config_delta_transform, correlated_delta_transform, mean_var_from_transform, prob_delta_negative,
    prob_delta_positive, TransformFn,
};

/// Absolute tolerance of the identity checks.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Pass/fail flags for the exact per-graph identities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Identities {
    /// `mean κ = 1`.
    pub mean_kappa_one: bool,
    /// `mean Δ ≥ 0`.
    pub mean_delta_nonnegative: bool,
    /// `mean Δ = 0` exactly when every component is regular.
    pub zero_iff_regular: bool,
    /// `mean Δ = Cov(k, κ)`.
    pub mean_delta_cov: bool,
    /// `mean Δ^(x) = Cov(x, κ)`, when attributes were given.
    pub mean_delta_x_cov: Option<bool>,
    pub all_pass: bool,
}

/// Summary written by `analyze`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphAnalysis {
    pub n: usize,
    pub m: usize,
    pub isolates_removed: usize,
    pub mean_delta: f64,
    pub var_delta: f64,
    pub frac_delta_pos: f64,
    pub frac_delta_zero: f64,
    pub frac_delta_neg: f64,
    pub mean_kappa: f64,
    /// `None` when every edge end has the same degree.
    pub assortativity: Option<f64>,
    pub cov_k_kappa: f64,
    pub cov_x_kappa: Option<f64>,
    pub mean_delta_x: Option<f64>,
    pub regular_components: bool,
    pub identities: Identities,
}

impl GraphAnalysis {
    pub fn write_json<W: Write>(&self, w: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(w, self).map_err(std::io::Error::other)
    }
}

/// Every connected component has a single degree.
pub fn components_regular(g: &Graph) -> bool {
    let n = g.node_count();
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        stack.push(s);
        let k = g.degree(s);
        while let Some(i) = stack.pop() {
            if g.degree(i) != k {
                return false;
            }
            for &j in g.neighbors(i) {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    true
}

/// Drops isolated nodes (and their attribute values) before measuring.
pub fn drop_isolates(g: &Graph, attrs: Option<&NodeAttributes>) -> Result<(Graph, Option<NodeAttributes>, usize)> {
    let (clean, removed) = remove_isolates(g);
    let attrs = match attrs {
        None => None,
        Some(a) if removed == 0 => Some(a.clone()),
        Some(a) => {
            let kept = (0..g.node_count()).filter(|&i| g.degree(i) > 0).map(|i| a.values()[i]).collect();
            Some(NodeAttributes::new(kept)?)
        }
    };
    Ok((clean, attrs, removed))
}

/// Measures `g`, which must have no isolated nodes; `isolates_removed` is
/// only recorded.
pub fn analyze(
    g: &Graph,
    attrs: Option<&NodeAttributes>,
    isolates_removed: usize,
) -> Result<(GraphAnalysis, NodeStats)> {
    if g.node_count() == 0 {
        return Err(Error::domain("graph has no nodes with edges"));
    }
    let stats = node_stats(g, attrs)?;
    let s = paradox_summary(&stats);
    let regular = components_regular(g);
    let zero = s.mean_delta.abs() <= IDENTITY_TOL;
    let mean_delta_x_cov = match (s.mean_delta_x, s.cov_x_kappa) {
        (Some(d), Some(c)) => Some((d - c).abs() <= IDENTITY_TOL * (1.0 + c.abs())),
        _ => None,
    };
    let mut identities = Identities {
        mean_kappa_one: (s.mean_kappa - 1.0).abs() <= IDENTITY_TOL,
        mean_delta_nonnegative: s.mean_delta >= -IDENTITY_TOL,
        zero_iff_regular: zero == regular,
        mean_delta_cov: (s.mean_delta - s.cov_k_kappa).abs() <= IDENTITY_TOL * (1.0 + s.mean_delta.abs()),
        mean_delta_x_cov,
        all_pass: false,
    };
    identities.all_pass = identities.mean_kappa_one
        && identities.mean_delta_nonnegative
        && identities.zero_iff_regular
        && identities.mean_delta_cov
        && identities.mean_delta_x_cov != Some(false);
    let analysis = GraphAnalysis {
        n: s.n,
        m: g.edge_count(),
        isolates_removed,
        mean_delta: s.mean_delta,
        var_delta: s.var_delta,
        frac_delta_pos: s.frac_delta_pos,
        frac_delta_zero: s.frac_delta_zero,
        frac_delta_neg: s.frac_delta_neg,
        mean_kappa: s.mean_kappa,
        assortativity: assortativity(g),
        cov_k_kappa: s.cov_k_kappa,
        cov_x_kappa: s.cov_x_kappa,
        mean_delta_x: s.mean_delta_x,
        regular_components: regular,
        identities,
    };
    Ok((analysis, stats))
}

/// Per-node CSV `id,k,delta,kappa,delta_x`; `delta_x` is empty without
/// attributes.
pub fn write_node_csv<W: Write>(g: &Graph, stats: &NodeStats, mut w: W) -> std::io::Result<()> {
    writeln!(w, "id,k,delta,kappa,delta_x")?;
    for i in 0..stats.len() {
        let dx = stats.delta_x.as_ref().map(|d| d[i].to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{},{}", g.id(i), stats.degree[i], stats.delta[i], stats.kappa[i], dx)?;
    }
    Ok(())
}

/// Moments and sign probabilities of `Δ` from a transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheorySummary {
    pub mean: f64,
    pub var: f64,
    pub prob_delta_pos: f64,
    pub prob_delta_neg: f64,
    pub warnings: Vec<String>,
}

pub fn theory_summary(f: &TransformFn) -> TheorySummary {
    let (mean, var) = mean_var_from_transform(f);
    let pos = prob_delta_positive(f);
    let neg = prob_delta_negative(f);
    let mut warnings = pos.warnings;
    warnings.extend(neg.warnings);
    TheorySummary { mean, var, prob_delta_pos: pos.value, prob_delta_neg: neg.value, warnings }
}

/// Where `compare` takes `p_k` from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeSource {
    /// The measured degree histogram.
    #[default]
    Empirical,
    /// A truncated power law matched to the measured mean and variance.
    PowerLawFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub mean: f64,
    pub std: f64,
    pub gamma: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub mean: f64,
    pub std: f64,
    /// Standard error of the mean, `std/√n`.
    pub sem: f64,
}

/// Measured moments of `Δ` against the configuration-model and max-ent
/// predictions built from the same graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub n: usize,
    pub m: usize,
    pub isolates_removed: usize,
    pub degree_source: DegreeSource,
    pub r_hat: Option<f64>,
    pub measured: Measured,
    pub config: Prediction,
    /// `None` when no max-ent model could be built; see `warnings`.
    pub maxent: Option<Prediction>,
    pub warnings: Vec<String>,
}

impl Comparison {
    pub fn write_json<W: Write>(&self, w: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(w, self).map_err(std::io::Error::other)
    }
}

fn predict(f: &TransformFn, gamma: f64, r: f64) -> Prediction {
    let (mean, var) = mean_var_from_transform(f);
    Prediction { mean, std: var.sqrt(), gamma, r }
}

/// Compares `g` (isolates already removed) with its two model predictions.
pub fn compare_graph(g: &Graph, source: DegreeSource, isolates_removed: usize) -> Result<Comparison> {
    let (analysis, _) = analyze(g, None, isolates_removed)?;
    let degrees = g.degrees();
    let p = match source {
        DegreeSource::Empirical => DegreeDistribution::from_degrees(&degrees)?,
        DegreeSource::PowerLawFit => {
            let k: Vec<f64> = degrees.iter().map(|&k| k as f64).collect();
            let (mean, var) = crate::numeric::mean_var(&k);
            fit_mean_var(mean, var)?.distribution(DEFAULT_TAIL_TOL)?
        }
    };
    let mut warnings = Vec::new();
    let config = predict(&config_delta_transform(&p), 0.0, 0.0);
    let r_hat = analysis.assortativity;
    let maxent = match r_hat {
        None => {
            warnings.push("assortativity undefined; using the configuration-model prediction".into());
            None
        }
        Some(r) => match gamma_for_r(&edge_end(&p), r) {
            Ok(model) => {
                let f = correlated_delta_transform(&p, &model.joint())?;
                Some(predict(&f, model.gamma, model.r))
            }
            Err(e) => {
                warnings.push(format!("no max-ent model at r = {r}: {e}; using the configuration-model prediction"));
                None
            }
        },
    };
    let std = analysis.var_delta.sqrt();
    Ok(Comparison {
        n: analysis.n,
        m: analysis.m,
        isolates_removed,
        degree_source: source,
        r_hat,
        measured: Measured { mean: analysis.mean_delta, std, sem: std / (analysis.n as f64).sqrt() },
        config,
        maxent,
        warnings,
    })
}
