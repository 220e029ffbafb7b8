//! Ground-truth machinery: known feature laws, Monte Carlo oracles,
//! synthetic generators, fixture models and accuracy metrics.

pub mod cart;
pub mod experiments;
pub mod fixtures;
pub mod gated;
pub mod gaussian;
pub mod law;
pub mod mc;
pub mod metrics;
pub mod random;
pub mod synth;

pub use gaussian::{GaussianSampler, GaussianSpec};
pub use law::{ConditionalSampler, FeatureLaw, MixtureLaw};
pub use mc::{mc_reduced, mc_shapley, mc_value_table, shapley_with_errors, stream_rng, Estimate};
pub use metrics::{metrics_to_csv, r_ae, spearman, tpr, MetricReport, RankBy};
