//! Reduced predictors `f_S(x_S)` and the per-instance value tables the
//! Shapley engine consumes.

mod index;
mod reduced;

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use index::{LeafEntry, LeafIndex};
pub use reduced::{discrete_reduced, leaf_reduced, shap_reduced, LeafWeight, ReducedValue};

use crate::columns::ColumnSet;
use crate::data::{Dataset, PlayerPartition};
use crate::error::{Error, Result};
use crate::tree::TreeEnsemble;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Path-dependent factorization over model node counts.
    ShapPath,
    /// Exact-match empirical conditional expectation.
    Discrete,
    /// Leaf estimator normalized by `Z(S, x)`.
    Leaf,
    /// Leaf estimator without normalization; the game Multi-Games solves.
    LeafRaw,
}

impl Estimator {
    pub const ALL: [Estimator; 4] = [
        Estimator::ShapPath,
        Estimator::Discrete,
        Estimator::Leaf,
        Estimator::LeafRaw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::ShapPath => "shap_path",
            Estimator::Discrete => "discrete",
            Estimator::Leaf => "leaf",
            Estimator::LeafRaw => "leaf_raw",
        }
    }

    pub fn needs_data(self) -> bool {
        !matches!(self, Estimator::ShapPath)
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            Error::Config(format!(
                "unknown estimator '{s}' (expected shap_path, discrete, leaf or leaf_raw)"
            ))
        })
    }
}

/// A model, its reference dataset and a player partition.
///
/// Counts for the leaf estimators are indexed lazily on first use; the
/// index is shared by all later queries, including concurrent ones.
#[derive(Debug)]
pub struct Explainer {
    ensemble: TreeEnsemble,
    data: Option<Dataset>,
    partition: PlayerPartition,
    index: OnceLock<LeafIndex>,
    predictions: OnceLock<Vec<f64>>,
}

impl Explainer {
    pub fn new(ensemble: TreeEnsemble, data: Option<Dataset>, partition: PlayerPartition) -> Result<Self> {
        if let Some(d) = &data {
            if d.n_cols() != ensemble.n_features() {
                return Err(Error::Dimension {
                    expected: ensemble.n_features(),
                    got: d.n_cols(),
                });
            }
        }
        partition.check_columns(ensemble.n_features())?;
        Ok(Self {
            ensemble,
            data,
            partition,
            index: OnceLock::new(),
            predictions: OnceLock::new(),
        })
    }

    /// One player per model column, labelled by feature or column name.
    pub fn with_singletons(ensemble: TreeEnsemble, data: Option<Dataset>) -> Result<Self> {
        let labels = column_labels(&ensemble, data.as_ref());
        Self::new(ensemble, data, PlayerPartition::singletons(labels))
    }

    pub fn ensemble(&self) -> &TreeEnsemble {
        &self.ensemble
    }

    pub fn data(&self) -> Option<&Dataset> {
        self.data.as_ref()
    }

    pub fn partition(&self) -> &PlayerPartition {
        &self.partition
    }

    pub fn n_players(&self) -> usize {
        self.partition.n_players()
    }

    pub fn n_columns(&self) -> usize {
        self.ensemble.n_features()
    }

    pub fn check_estimator(&self, estimator: Estimator) -> Result<()> {
        if estimator.needs_data() && self.data.is_none() {
            return Err(Error::Config(format!(
                "the {estimator} estimator needs a reference dataset"
            )));
        }
        if estimator == Estimator::Discrete {
            let data = self.data.as_ref().expect("checked above");
            for &c in self.partition.players().iter().flatten() {
                if !data.column_meta(c).is_discrete() {
                    return Err(Error::ContinuousConditioning { column: c });
                }
            }
        }
        Ok(())
    }

    pub fn index(&self) -> Result<&LeafIndex> {
        if let Some(i) = self.index.get() {
            return Ok(i);
        }
        let data = self
            .data
            .as_ref()
            .ok_or_else(|| Error::Config("the leaf estimators need a reference dataset".into()))?;
        let built = LeafIndex::build(&self.ensemble, data)?;
        Ok(self.index.get_or_init(|| built))
    }

    fn predictions(&self, data: &Dataset) -> &[f64] {
        self.predictions.get_or_init(|| {
            let mut row = vec![0.0; data.n_cols()];
            (0..data.n_rows())
                .map(|r| {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = data.value(r, j);
                    }
                    self.ensemble.predict_unchecked(&row)
                })
                .collect()
        })
    }

    /// Reduced predictor at an arbitrary column set, with leaf weights.
    pub fn reduced(&self, x: &[f64], columns: &ColumnSet, estimator: Estimator) -> Result<ReducedValue> {
        self.check_estimator(estimator)?;
        let data = self.data.as_ref();
        match estimator {
            Estimator::ShapPath => shap_reduced(&self.ensemble, columns, x),
            Estimator::Discrete => discrete_reduced(&self.ensemble, data.unwrap(), columns, x),
            Estimator::Leaf => leaf_reduced(&self.ensemble, data.unwrap(), columns, x, true),
            Estimator::LeafRaw => leaf_reduced(&self.ensemble, data.unwrap(), columns, x, false),
        }
    }

    /// `v(S)` for every player subset `S`, indexed by the bit mask of `S`.
    pub fn value_table(&self, x: &[f64], estimator: Estimator) -> Result<Vec<f64>> {
        self.ensemble.check_point(x)?;
        self.check_estimator(estimator)?;
        let p = self.n_players();
        if p >= usize::BITS as usize - 1 {
            return Err(Error::TooManyPlayers {
                players: p,
                limit: usize::BITS as usize - 2,
            });
        }
        match estimator {
            Estimator::ShapPath => self.shap_table(x),
            Estimator::Discrete => self.discrete_table(x),
            Estimator::Leaf => self.leaf_table(x, true),
            Estimator::LeafRaw => self.leaf_table(x, false),
        }
    }

    fn subset_players(&self, mask: usize) -> Vec<usize> {
        (0..self.n_players()).filter(|p| mask >> p & 1 == 1).collect()
    }

    fn shap_table(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.n_columns();
        let tw = self.ensemble.tree_weight();
        (0..1usize << self.n_players())
            .map(|mask| {
                let cols = self.partition.columns_of_mask(mask as u64, n);
                let mut v = 0.0;
                for (t, tree) in self.ensemble.trees().iter().enumerate() {
                    v += tw
                        * reduced::shap_tree(tree, t, &cols, x, None)
                            .map_err(|e| e.in_subset(self.subset_players(mask)))?;
                }
                Ok(v)
            })
            .collect()
    }

    fn discrete_table(&self, x: &[f64]) -> Result<Vec<f64>> {
        let data = self.data.as_ref().expect("checked by check_estimator");
        let preds = self.predictions(data);
        let p = self.n_players();
        let size = 1usize << p;
        let mut sum = vec![0.0; size];
        let mut cnt = vec![0u64; size];
        let groups = self.partition.players();
        for (r, &pred) in preds.iter().enumerate() {
            let mut m = 0usize;
            for (k, g) in groups.iter().enumerate() {
                if g.iter().all(|&c| data.value(r, c) == x[c]) {
                    m |= 1 << k;
                }
            }
            sum[m] += pred;
            cnt[m] += 1;
        }
        for k in 0..p {
            let bit = 1usize << k;
            for m in 0..size {
                if m & bit == 0 {
                    sum[m] += sum[m | bit];
                    cnt[m] += cnt[m | bit];
                }
            }
        }
        let n = self.n_columns();
        (0..size)
            .map(|m| {
                if cnt[m] == 0 {
                    let cols = self.partition.columns_of_mask(m as u64, n).to_vec();
                    let values = cols.iter().map(|&c| x[c]).collect();
                    return Err(
                        Error::UnsupportedConditioning { columns: cols, values }.in_subset(self.subset_players(m))
                    );
                }
                Ok(sum[m] / cnt[m] as f64)
            })
            .collect()
    }

    fn leaf_table(&self, x: &[f64], normalize: bool) -> Result<Vec<f64>> {
        let index = self.index()?;
        let owner = self.partition.player_of_column(self.n_columns());
        let size = 1usize << self.n_players();
        let tw = self.ensemble.tree_weight();
        let mut total = vec![0.0; size];
        let mut num = vec![0.0; size];
        let mut z = vec![0.0; size];
        let mut local = vec![0u64; size];
        for (t, leaves) in index.trees().iter().enumerate() {
            num.fill(0.0);
            z.fill(0.0);
            for leaf in leaves {
                let n_m = leaf.leaf_count();
                if n_m == 0 {
                    continue;
                }
                let sat = leaf.sat_mask(x);
                local_masks(leaf, &owner, &mut local);
                for s in 0..size {
                    let tm = local[s];
                    if tm & !sat != 0 {
                        continue;
                    }
                    // N(L_m^T) >= N(L_m) > 0, so no zero-count exclusion is needed here.
                    let w = n_m as f64 / leaf.count(tm) as f64;
                    num[s] += w * leaf.value;
                    z[s] += w;
                }
            }
            for s in 0..size {
                if normalize {
                    if z[s] == 0.0 {
                        return Err(Error::DegenerateQuery { tree: t }.in_subset(self.subset_players(s)));
                    }
                    total[s] += tw * (num[s] / z[s]);
                } else {
                    total[s] += tw * num[s];
                }
            }
        }
        Ok(total)
    }
}

/// Fills `out[s]` with the leaf-local mask of the columns owned by players in `s`.
fn local_masks(leaf: &LeafEntry, owner: &[Option<usize>], out: &mut [u64]) {
    let n_players = out.len().trailing_zeros() as usize;
    let mut player_bits = vec![0u64; n_players];
    for (k, b) in leaf.bounds.iter().enumerate() {
        if let Some(p) = owner[b.feature] {
            player_bits[p] |= 1 << k;
        }
    }
    out[0] = 0;
    for s in 1..out.len() {
        out[s] = out[s & (s - 1)] | player_bits[s.trailing_zeros() as usize];
    }
}

pub(crate) fn column_labels(ensemble: &TreeEnsemble, data: Option<&Dataset>) -> Vec<String> {
    if let Some(names) = ensemble.feature_names() {
        return names.to_vec();
    }
    if let Some(d) = data {
        return d.names();
    }
    (0..ensemble.n_features()).map(|j| format!("x{j}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimator_names_round_trip() {
        for e in Estimator::ALL {
            assert_eq!(e.name().parse::<Estimator>().unwrap(), e);
        }
        assert!("treeshap".parse::<Estimator>().is_err());
    }
}
