//! Shapley values over player partitions.

mod brute;
mod categorical;
mod importance;
mod multi_games;
mod report;
mod tree_shap;
mod weights;

pub use brute::{brute_force_coalition, brute_force_sv, coalition_from_table, shapley_from_table, DEFAULT_MAX_PLAYERS};
pub use categorical::{check_encoding_groups, coalition_sv_categorical, extend_by_zero};
pub use importance::{global_importance, ranking, ranking_change_fraction, sum_groups, GlobalImportance};
pub use multi_games::{multi_games_sv, OpStats};
pub use report::{reports_to_csv, reports_to_json, Algorithm, SVReport};
pub use tree_shap::tree_shap_sv;
pub use weights::{binom, GameWeights};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{Estimator, Explainer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExplainOptions {
    /// Enumeration guard for brute force.
    pub max_players: usize,
    /// Worker threads for batches; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Forces sequential evaluation.
    pub strict: bool,
}

impl Default for ExplainOptions {
    fn default() -> Self {
        Self {
            max_players: DEFAULT_MAX_PLAYERS,
            workers: None,
            strict: false,
        }
    }
}

/// Attributions for one instance with the chosen estimator and algorithm.
pub fn explain(
    explainer: &Explainer,
    x: &[f64],
    estimator: Estimator,
    algorithm: Algorithm,
    instance: usize,
    options: &ExplainOptions,
) -> Result<SVReport> {
    algorithm.check(estimator)?;
    explainer.check_estimator(estimator)?;
    match algorithm {
        Algorithm::BruteForce => brute_force_sv(explainer, x, estimator, instance, options.max_players),
        Algorithm::MultiGames => multi_games_sv(explainer, x, instance).map(|(r, _)| r),
        Algorithm::TreeShap => tree_shap_sv(explainer, x, instance),
    }
}

/// Explains each row; `ids[i]` names row `i` in reports and errors. The
/// output order follows the input regardless of scheduling.
pub fn explain_batch(
    explainer: &Explainer,
    rows: &[Vec<f64>],
    ids: &[usize],
    estimator: Estimator,
    algorithm: Algorithm,
    options: &ExplainOptions,
) -> Result<Vec<SVReport>> {
    if rows.len() != ids.len() {
        return Err(Error::Config("one instance id per row is required".into()));
    }
    algorithm.check(estimator)?;
    explainer.check_estimator(estimator)?;
    if estimator.needs_data() && matches!(estimator, Estimator::Leaf | Estimator::LeafRaw) {
        // Build the shared count index once, outside the workers.
        explainer.index()?;
    }
    let one = |(x, &id): (&Vec<f64>, &usize)| {
        explain(explainer, x, estimator, algorithm, id, options).map_err(|e| e.in_instance(id))
    };
    if options.strict || options.workers == Some(1) {
        return rows.iter().zip(ids).map(one).collect();
    }
    match options.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {w} workers: {e}")))?;
            pool.install(|| rows.par_iter().zip(ids).map(one).collect())
        }
        None => rows.par_iter().zip(ids).map(one).collect(),
    }
}
