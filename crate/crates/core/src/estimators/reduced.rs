//! Direct evaluation of one reduced predictor `f_S(x_S)` by scanning the
//! dataset. These are slower than the [`Explainer`](super::Explainer) tables
//! and serve as the reference implementation and for diagnostics.

use serde::Serialize;

use crate::columns::ColumnSet;
use crate::data::{count_region, Constraint, Dataset};
use crate::error::{Error, Result};
use crate::tree::{LeafRegion, NodeKind, Tree, TreeEnsemble};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafWeight {
    pub tree: usize,
    pub leaf_id: i64,
    pub weight: f64,
}

/// A reduced-predictor value with the leaf weights that produced it.
///
/// Within each tree the weights sum to one, except for the unnormalized leaf
/// estimator. `normalizers` holds the per-tree `Z(S, x)` of the leaf
/// estimators and is empty otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedValue {
    pub value: f64,
    pub weights: Vec<LeafWeight>,
    pub normalizers: Vec<f64>,
}

fn check_query(ensemble: &TreeEnsemble, s: &ColumnSet, x: &[f64]) -> Result<()> {
    ensemble.check_point(x)?;
    if s.n_columns() != ensemble.n_features() {
        return Err(Error::Dimension {
            expected: ensemble.n_features(),
            got: s.n_columns(),
        });
    }
    Ok(())
}

fn check_data(ensemble: &TreeEnsemble, data: &Dataset) -> Result<()> {
    if data.n_cols() != ensemble.n_features() {
        return Err(Error::Dimension {
            expected: ensemble.n_features(),
            got: data.n_cols(),
        });
    }
    Ok(())
}

/// Path-dependent estimate from the model's own node counts: conditioned
/// splits follow `x`, the others split the weight by child frequency.
pub fn shap_reduced(ensemble: &TreeEnsemble, s: &ColumnSet, x: &[f64]) -> Result<ReducedValue> {
    check_query(ensemble, s, x)?;
    let tw = ensemble.tree_weight();
    let mut weights = Vec::new();
    let mut value = 0.0;
    for (t, tree) in ensemble.trees().iter().enumerate() {
        value += tw * shap_tree(tree, t, s, x, Some(&mut weights))?;
    }
    Ok(ReducedValue {
        value,
        weights,
        normalizers: Vec::new(),
    })
}

pub(crate) fn shap_tree(
    tree: &Tree,
    t: usize,
    s: &ColumnSet,
    x: &[f64],
    mut weights: Option<&mut Vec<LeafWeight>>,
) -> Result<f64> {
    let mut total = 0.0;
    let mut stack = vec![(0usize, 1.0f64)];
    while let Some((i, w)) = stack.pop() {
        let node = tree.node(i);
        match node.kind {
            NodeKind::Leaf { value } => {
                total += w * value;
                if let Some(ws) = weights.as_deref_mut() {
                    ws.push(LeafWeight {
                        tree: t,
                        leaf_id: node.id,
                        weight: w,
                    });
                }
            }
            NodeKind::Internal {
                feature,
                threshold,
                left,
                right,
            } => {
                if s.contains(feature) {
                    stack.push((if x[feature] <= threshold { left } else { right }, w));
                } else {
                    if node.count == 0 {
                        return Err(Error::ZeroCount { tree: t, node: node.id });
                    }
                    let n = node.count as f64;
                    // Right pushed first so leaves come out left to right.
                    for child in [right, left] {
                        let c = tree.node(child).count;
                        if c > 0 {
                            stack.push((child, w * c as f64 / n));
                        }
                    }
                }
            }
        }
    }
    Ok(total)
}

fn region_constraints<'a>(
    region: &'a LeafRegion,
    only: Option<&'a ColumnSet>,
) -> impl Iterator<Item = Constraint> + 'a {
    region
        .bounds
        .iter()
        .filter(move |b| only.is_none_or(|s| s.contains(b.feature)))
        .map(|b| Constraint::interval(b.feature, b.lower, b.upper))
}

/// Plug-in conditional expectation over the rows matching `x` exactly on `S`.
pub fn discrete_reduced(ensemble: &TreeEnsemble, data: &Dataset, s: &ColumnSet, x: &[f64]) -> Result<ReducedValue> {
    check_query(ensemble, s, x)?;
    check_data(ensemble, data)?;
    if let Some(c) = s.iter().find(|&c| !data.column_meta(c).is_discrete()) {
        return Err(Error::ContinuousConditioning { column: c });
    }
    let matches: Vec<Constraint> = s.iter().map(|c| Constraint::equals(c, x[c])).collect();
    let n_xs = count_region(data, &matches);
    if n_xs == 0 {
        return Err(Error::UnsupportedConditioning {
            columns: s.to_vec(),
            values: s.iter().map(|c| x[c]).collect(),
        });
    }
    let tw = ensemble.tree_weight();
    let mut weights = Vec::new();
    let mut value = 0.0;
    for (t, tree) in ensemble.trees().iter().enumerate() {
        let mut v = 0.0;
        for region in tree.leaf_regions().iter().filter(|r| r.contains_on(s, x)) {
            let mut cons: Vec<Constraint> = region_constraints(region, None).collect();
            cons.extend_from_slice(&matches);
            let n = count_region(data, &cons);
            if n > 0 {
                let w = n as f64 / n_xs as f64;
                v += w * region.value;
                weights.push(LeafWeight {
                    tree: t,
                    leaf_id: region.leaf_id,
                    weight: w,
                });
            }
        }
        value += tw * v;
    }
    Ok(ReducedValue {
        value,
        weights,
        normalizers: Vec::new(),
    })
}

/// Leaf estimator: each compatible leaf weighted by `N(L_m) / N(L_m^S)`,
/// divided by the per-tree total `Z` when `normalize` is set.
///
/// Leaves with `N(L_m^S) = 0` are left out of both sums. A normalized tree
/// whose compatible leaves carry no mass is a degenerate query.
pub fn leaf_reduced(
    ensemble: &TreeEnsemble,
    data: &Dataset,
    s: &ColumnSet,
    x: &[f64],
    normalize: bool,
) -> Result<ReducedValue> {
    check_query(ensemble, s, x)?;
    check_data(ensemble, data)?;
    let tw = ensemble.tree_weight();
    let mut weights = Vec::new();
    let mut normalizers = Vec::new();
    let mut value = 0.0;
    for (t, tree) in ensemble.trees().iter().enumerate() {
        let first = weights.len();
        let (mut num, mut z) = (0.0, 0.0);
        for region in tree.leaf_regions().iter().filter(|r| r.contains_on(s, x)) {
            let n_m = count_region(data, &region_constraints(region, None).collect::<Vec<_>>());
            let n_ms = count_region(data, &region_constraints(region, Some(s)).collect::<Vec<_>>());
            if n_ms == 0 {
                continue;
            }
            let w = n_m as f64 / n_ms as f64;
            num += w * region.value;
            z += w;
            weights.push(LeafWeight {
                tree: t,
                leaf_id: region.leaf_id,
                weight: w,
            });
        }
        if normalize {
            if z == 0.0 {
                return Err(Error::DegenerateQuery { tree: t });
            }
            for lw in &mut weights[first..] {
                lw.weight /= z;
            }
            value += tw * num / z;
            normalizers.push(z);
        } else {
            value += tw * num;
        }
    }
    Ok(ReducedValue {
        value,
        weights,
        normalizers,
    })
}
