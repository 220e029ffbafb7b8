//! Random datasets and data-compatible trees for property tests.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::{Dataset, FeatureMeta};
use crate::error::Result;
use crate::tree::{Aggregation, NodeKind, Tree, TreeEnsemble, TreeNode};

/// Standard normal columns rounded to two decimals, so ties occur.
pub fn random_continuous<R: Rng + ?Sized>(rng: &mut R, n: usize, p: usize) -> Result<Dataset> {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..p)
                .map(|_| (rng.sample::<f64, _>(StandardNormal) * 100.0).round() / 100.0)
                .collect()
        })
        .collect();
    Dataset::continuous(&rows)
}

/// Categorical columns named `x{j}` with 2 to `max_levels` categories each.
pub fn random_categorical<R: Rng + ?Sized>(rng: &mut R, n: usize, p: usize, max_levels: usize) -> Result<Dataset> {
    let mut meta = Vec::with_capacity(p);
    let mut columns = Vec::with_capacity(p);
    for j in 0..p {
        let k = rng.random_range(2..=max_levels.max(2));
        meta.push(FeatureMeta::categorical(
            format!("x{j}"),
            (0..k).map(|c| format!("c{c}")).collect(),
        ));
        columns.push((0..n).map(|_| rng.random_range(0..k) as f64).collect());
    }
    Dataset::new(meta, columns)
}

/// Random tree of depth at most `max_depth` whose thresholds are observed
/// values strictly below the largest value reaching the node, so every node
/// holds at least one row. Counts come from `data`.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, data: &Dataset, max_depth: usize, index: usize) -> Result<Tree> {
    let mut nodes = Vec::new();
    let rows: Vec<usize> = (0..data.n_rows()).collect();
    grow(rng, data, rows, 0, max_depth, &mut nodes);
    Tree::new(nodes, data.n_cols(), index)
}

fn grow<R: Rng + ?Sized>(
    rng: &mut R,
    data: &Dataset,
    rows: Vec<usize>,
    depth: usize,
    max_depth: usize,
    nodes: &mut Vec<TreeNode>,
) -> usize {
    let me = nodes.len();
    nodes.push(TreeNode {
        id: me as i64,
        kind: NodeKind::Leaf {
            value: ((rng.random::<f64>() * 1000.0).round() - 500.0) / 100.0,
        },
        count: rows.len() as u64,
    });
    // Stop early now and then so trees are unbalanced.
    if depth >= max_depth || rows.len() < 2 || (depth > 0 && rng.random::<f64>() < 0.15) {
        return me;
    }
    let p = data.n_cols();
    for _ in 0..4 {
        let f = rng.random_range(0..p);
        let col = data.column(f);
        let max = rows.iter().map(|&r| col[r]).fold(f64::NEG_INFINITY, f64::max);
        let below: Vec<f64> = rows.iter().map(|&r| col[r]).filter(|&v| v < max).collect();
        if below.is_empty() {
            continue;
        }
        let threshold = below[rng.random_range(0..below.len())];
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| col[i] <= threshold);
        let left = grow(rng, data, l, depth + 1, max_depth, nodes);
        let right = grow(rng, data, r, depth + 1, max_depth, nodes);
        nodes[me].kind = NodeKind::Internal {
            feature: f,
            threshold,
            left,
            right,
        };
        return me;
    }
    me
}

pub fn random_ensemble<R: Rng + ?Sized>(
    rng: &mut R,
    data: &Dataset,
    n_trees: usize,
    max_depth: usize,
) -> Result<TreeEnsemble> {
    let trees = (0..n_trees)
        .map(|t| random_tree(rng, data, max_depth, t))
        .collect::<Result<Vec<_>>>()?;
    TreeEnsemble::new(trees, data.n_cols(), Aggregation::Sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::mc::stream_rng;

    #[test]
    fn every_node_holds_data() {
        let mut rng = stream_rng(9, 0);
        for _ in 0..20 {
            let ds = random_continuous(&mut rng, 40, 4).unwrap();
            let t = random_tree(&mut rng, &ds, 5, 0).unwrap();
            assert!(t.nodes().iter().all(|n| n.count > 0));
            assert_eq!(t.node(0).count, 40);
            let mut recounted = t.clone();
            let rows = ds.rows();
            recounted.recount(rows.iter().map(Vec::as_slice));
            assert_eq!(recounted, t);
        }
        let cat = random_categorical(&mut rng, 30, 3, 4).unwrap();
        assert!(cat.meta().iter().all(|m| m.categories.len() <= 4));
    }
}
