pub mod columns;
pub mod data;
pub mod error;
pub mod estimators;
pub mod oracle;
pub mod shapley;
pub mod tree;

pub use columns::ColumnSet;
pub use data::{Dataset, FeatureKind, FeatureMeta, PlayerPartition};
pub use error::{Error, ErrorClass, Result};
pub use estimators::{Estimator, Explainer};
pub use shapley::{explain, explain_batch, Algorithm, ExplainOptions, SVReport};
pub use tree::{Aggregation, Tree, TreeEnsemble};
