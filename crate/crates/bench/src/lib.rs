//! Shared fixtures for the benchmarks in `benches/`.

use paradox_core::degree::{edge_end, fit_mean_var};
use paradox_core::{DegreeDistribution, EdgeEndDistribution};

/// Truncated power law with mean 8 and variance 64.
pub fn heavy_tailed() -> (DegreeDistribution, EdgeEndDistribution) {
    let p = fit_mean_var(8.0, 64.0)
        .and_then(|f| f.distribution(1e-10))
        .expect("mean 8, variance 64 is feasible");
    let q = edge_end(&p);
    (p, q)
}
