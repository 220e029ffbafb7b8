//! Least-squares regression trees and bagged forests for fixtures.

use rand::Rng;

use super::mc::stream_rng;
use crate::error::{Error, Result};
use crate::tree::{Aggregation, NodeKind, Tree, TreeEnsemble, TreeNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CartParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for CartParams {
    fn default() -> Self {
        Self {
            max_depth: 10,
            min_samples_leaf: 1,
        }
    }
}

struct Builder<'a> {
    rows: &'a [Vec<f64>],
    y: &'a [f64],
    params: CartParams,
    n_features: usize,
    nodes: Vec<TreeNode>,
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Builder<'_> {
    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let me = self.nodes.len();
        let n = idx.len();
        let mean = idx.iter().map(|&i| self.y[i]).sum::<f64>() / n as f64;
        self.nodes.push(TreeNode {
            id: me as i64,
            kind: NodeKind::Leaf { value: mean },
            count: n as u64,
        });
        if depth >= self.params.max_depth || n < 2 * self.params.min_samples_leaf.max(1) {
            return me;
        }
        let Some(split) = self.best_split(&idx) else {
            return me;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| self.rows[i][split.feature] <= split.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[me].kind = NodeKind::Internal {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        me
    }

    /// Largest reduction of the squared error over midpoints of adjacent
    /// distinct values; ties keep the lowest feature, then the lowest
    /// threshold.
    fn best_split(&self, idx: &[usize]) -> Option<Split> {
        let n = idx.len();
        let total: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let sse = idx.iter().map(|&i| (self.y[i] - total / n as f64).powi(2)).sum::<f64>();
        if sse <= 1e-12 * (1.0 + total.abs() / n as f64).powi(2) * n as f64 {
            return None;
        }
        let min_leaf = self.params.min_samples_leaf.max(1);
        let base = total * total / n as f64;
        let mut best: Option<Split> = None;
        let mut order = idx.to_vec();
        for f in 0..self.n_features {
            order.sort_by(|&a, &b| self.rows[a][f].total_cmp(&self.rows[b][f]));
            let mut left_sum = 0.0;
            for k in 0..n - 1 {
                left_sum += self.y[order[k]];
                let (v, next) = (self.rows[order[k]][f], self.rows[order[k + 1]][f]);
                let n_left = k + 1;
                if v == next || n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / n_left as f64 + right_sum * right_sum / (n - n_left) as f64 - base;
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    let mid = 0.5 * (v + next);
                    let threshold = if mid < next { mid } else { v };
                    best = Some(Split {
                        feature: f,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best.filter(|b| b.gain > 1e-12 * sse)
    }
}

fn check_inputs(rows: &[Vec<f64>], y: &[f64]) -> Result<usize> {
    if rows.is_empty() {
        return Err(Error::InvalidData("cannot fit a tree to zero rows".into()));
    }
    if rows.len() != y.len() {
        return Err(Error::Dimension {
            expected: rows.len(),
            got: y.len(),
        });
    }
    let p = rows[0].len();
    if let Some(r) = rows.iter().position(|r| r.len() != p) {
        return Err(Error::InvalidData(format!(
            "row {r} has {} values, expected {p}",
            rows[r].len()
        )));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidData(format!("label {i} is not finite")));
    }
    Ok(p)
}

fn fit_indices(rows: &[Vec<f64>], y: &[f64], idx: Vec<usize>, params: CartParams, t: usize) -> Result<Tree> {
    let n_features = rows[0].len();
    let mut b = Builder {
        rows,
        y,
        params,
        n_features,
        nodes: Vec::new(),
    };
    b.grow(idx, 0);
    Tree::new(b.nodes, n_features, t)
}

/// Single regression tree; node counts are the training rows reaching each
/// node. Constant labels or `max_depth = 0` give one leaf.
pub fn fit_cart(rows: &[Vec<f64>], y: &[f64], params: CartParams) -> Result<TreeEnsemble> {
    let p = check_inputs(rows, y)?;
    let tree = fit_indices(rows, y, (0..rows.len()).collect(), params, 0)?;
    TreeEnsemble::single(tree, p)
}

/// Averaged forest of trees fit on bootstrap resamples; node counts are
/// bootstrap multiplicities. Tree `t` draws from stream `t` of `seed`.
pub fn fit_forest(rows: &[Vec<f64>], y: &[f64], n_trees: usize, params: CartParams, seed: u64) -> Result<TreeEnsemble> {
    let p = check_inputs(rows, y)?;
    if n_trees == 0 {
        return Err(Error::Config("a forest needs at least one tree".into()));
    }
    let n = rows.len();
    let trees = (0..n_trees)
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            fit_indices(rows, y, idx, params, t)
        })
        .collect::<Result<Vec<_>>>()?;
    TreeEnsemble::new(trees, p, Aggregation::Average)
}
