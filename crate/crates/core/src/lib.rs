//! Full distributions of the friendship-paradox difference.
//!
//! For every node `i` of degree `k_i`, the difference
//! `Δ_i = (1/k_i) Σ_j A_ij k_j − k_i` compares the mean degree of its
//! neighbours with its own degree. This crate measures `Δ` (and the
//! attribute analogue `Δ^(x)`) on real graphs, and computes its complete
//! distribution for three random-graph ensembles:
//!
//! * the Poisson random graph, where the distribution is an explicit sum of
//!   atoms at rational points ([`poisson`]);
//! * the configuration model with an arbitrary degree distribution, via the
//!   two-sided Laplace transform of `Δ` ([`transform`]);
//! * a maximum-entropy ensemble with tunable degree assortativity
//!   ([`maxent`]), including the generalized paradox for node attributes
//!   ([`gfp`]).
//!
//! Seeded samplers for all ensembles ([`sampler`]) serve as independent
//! Monte Carlo checks of the analytic results, and [`analysis`] ties the
//! pieces together into measured-versus-predicted comparisons.

pub mod analysis;
pub mod degree;
pub mod error;
pub mod gfp;
pub mod graph;
pub mod joint;
pub mod maxent;
pub mod numeric;
pub mod poisson;
pub mod sampler;
pub mod transform;

pub use degree::{DegreeDistribution, EdgeEndDistribution, Moments, PowerLawFit};
pub use error::{Error, Result};
pub use gfp::AttributeModel;
pub use graph::{Graph, NodeAttributes, NodeStats, ParadoxSummary};
pub use joint::JointDegreeDistribution;
pub use maxent::MaxEntModel;
pub use poisson::{DeltaAtomDistribution, Ratio};
pub use sampler::{SamplePolicy, SampleReport};
pub use transform::{DensityGrid, GridSpec, Kernel, KernelKind, TransformFn};
