//! Tree ensembles: node tables, leaf geometry, prediction and compatible-leaf
//! queries.
//!
//! Splits route left iff `x[feature] <= threshold`, so every leaf region is a
//! product of half-open intervals `(lower, upper]` and the leaves of one tree
//! tile the input space exactly.

mod parse;
mod region;

pub use parse::{parse_model, read_model};
pub use region::{Bound, LeafRegion};

use crate::columns::ColumnSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Internal {
        feature: usize,
        threshold: f64,
        /// Index of the left child in the node table.
        left: usize,
        /// Index of the right child in the node table.
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    /// External id, as it appears in the model dump.
    pub id: i64,
    pub kind: NodeKind,
    /// Training observations that reached this node.
    pub count: u64,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }
}

/// A binary decision tree whose root is `nodes[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<TreeNode>,
}

impl Tree {
    /// Builds a tree from a node table whose child references are table
    /// indices. `tree_index` is only used in error messages.
    pub fn new(nodes: Vec<TreeNode>, n_features: usize, tree_index: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidModel(format!("tree {tree_index} has no nodes")));
        }
        let mut parent_seen = vec![false; nodes.len()];
        for (idx, node) in nodes.iter().enumerate() {
            match node.kind {
                NodeKind::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature >= n_features {
                        return Err(Error::InvalidModel(format!(
                            "tree {tree_index}, node {}: split feature {feature} out of range (n_features = {n_features})",
                            node.id
                        )));
                    }
                    if !threshold.is_finite() {
                        return Err(Error::InvalidModel(format!(
                            "tree {tree_index}, node {}: non-finite threshold",
                            node.id
                        )));
                    }
                    for child in [left, right] {
                        if child >= nodes.len() || child == 0 || child == idx {
                            return Err(Error::InvalidModel(format!(
                                "tree {tree_index}, node {}: invalid child reference",
                                node.id
                            )));
                        }
                        if parent_seen[child] {
                            return Err(Error::InvalidModel(format!(
                                "tree {tree_index}, node {}: has more than one parent",
                                nodes[child].id
                            )));
                        }
                        parent_seen[child] = true;
                    }
                    if left == right {
                        return Err(Error::InvalidModel(format!(
                            "tree {tree_index}, node {}: both children are the same node",
                            node.id
                        )));
                    }
                    let (lc, rc) = (nodes[left].count, nodes[right].count);
                    if node.count != lc + rc {
                        return Err(Error::CountMismatch {
                            tree: tree_index,
                            node: node.id,
                            parent: node.count,
                            left: lc,
                            right: rc,
                        });
                    }
                }
                NodeKind::Leaf { value } => {
                    if !value.is_finite() {
                        return Err(Error::InvalidModel(format!(
                            "tree {tree_index}, node {}: non-finite leaf value",
                            node.id
                        )));
                    }
                }
            }
        }
        if let Some(orphan) = (1..nodes.len()).find(|&i| !parent_seen[i]) {
            return Err(Error::InvalidModel(format!(
                "tree {tree_index}, node {}: unreachable from the root",
                nodes[orphan].id
            )));
        }
        // Every non-root node has exactly one parent and n-1 edges exist, so
        // the graph is a tree as long as the root reaches everything.
        let tree = Tree { nodes };
        let mut reached = 0usize;
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            reached += 1;
            if reached > tree.nodes.len() {
                break;
            }
            if let NodeKind::Internal { left, right, .. } = tree.nodes[i].kind {
                stack.push(left);
                stack.push(right);
            }
        }
        if reached != tree.nodes.len() {
            return Err(Error::InvalidModel(format!(
                "tree {tree_index}: node graph contains a cycle"
            )));
        }
        Ok(tree)
    }

    /// A tree with a single leaf.
    pub fn constant(value: f64, count: u64) -> Self {
        Tree {
            nodes: vec![TreeNode {
                id: 0,
                kind: NodeKind::Leaf { value },
                count,
            }],
        }
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, index: usize) -> &TreeNode {
        &self.nodes[index]
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn max_depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match t.nodes[i].kind {
                NodeKind::Leaf { .. } => 0,
                NodeKind::Internal { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }

    /// Index of the leaf containing `x`.
    #[inline]
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i].kind {
                NodeKind::Leaf { .. } => return i,
                NodeKind::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    #[inline]
    pub fn predict(&self, x: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(x)].kind {
            NodeKind::Leaf { value } => value,
            NodeKind::Internal { .. } => unreachable!(),
        }
    }

    /// Leaf regions in depth-first (left before right) order.
    pub fn leaf_regions(&self) -> Vec<LeafRegion> {
        region::leaf_regions(self)
    }

    /// Ids of leaves `m` with `x_S` inside the projection of `L_m` on `S`.
    pub fn compatible_leaves(&self, columns: &ColumnSet, x: &[f64]) -> Vec<i64> {
        let mut out = Vec::new();
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            match self.nodes[i].kind {
                NodeKind::Leaf { .. } => out.push(self.nodes[i].id),
                NodeKind::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if columns.contains(feature) {
                        stack.push(if x[feature] <= threshold { left } else { right });
                    } else {
                        stack.push(right);
                        stack.push(left);
                    }
                }
            }
        }
        out
    }

    /// Recomputes every node count from the rows of a matrix.
    pub fn recount<'a>(&mut self, rows: impl Iterator<Item = &'a [f64]>) {
        for n in &mut self.nodes {
            n.count = 0;
        }
        for x in rows {
            let mut i = 0;
            loop {
                self.nodes[i].count += 1;
                match self.nodes[i].kind {
                    NodeKind::Leaf { .. } => break,
                    NodeKind::Internal {
                        feature,
                        threshold,
                        left,
                        right,
                    } => i = if x[feature] <= threshold { left } else { right },
                }
            }
        }
    }

    fn map_nodes(&self, mut f: impl FnMut(&TreeNode) -> NodeKind) -> Tree {
        Tree {
            nodes: self
                .nodes
                .iter()
                .map(|n| TreeNode {
                    id: n.id,
                    kind: f(n),
                    count: n.count,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Sum,
    Average,
}

/// Additive collection of trees over `n_features` raw columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeEnsemble {
    trees: Vec<Tree>,
    n_features: usize,
    feature_names: Option<Vec<String>>,
    aggregation: Aggregation,
}

impl TreeEnsemble {
    pub fn new(trees: Vec<Tree>, n_features: usize, aggregation: Aggregation) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::InvalidModel("ensemble has no trees".into()));
        }
        for (t, tree) in trees.iter().enumerate() {
            for n in tree.nodes() {
                if let NodeKind::Internal { feature, .. } = n.kind {
                    if feature >= n_features {
                        return Err(Error::InvalidModel(format!(
                            "tree {t}, node {}: split feature {feature} out of range",
                            n.id
                        )));
                    }
                }
            }
        }
        Ok(Self {
            trees,
            n_features,
            feature_names: None,
            aggregation,
        })
    }

    pub fn single(tree: Tree, n_features: usize) -> Result<Self> {
        Self::new(vec![tree], n_features, Aggregation::Sum)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_features {
            return Err(Error::Dimension {
                expected: self.n_features,
                got: names.len(),
            });
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn aggregation(&self) -> Aggregation {
        self.aggregation
    }

    /// Multiplier applied to every tree's output.
    pub fn tree_weight(&self) -> f64 {
        match self.aggregation {
            Aggregation::Sum => 1.0,
            Aggregation::Average => 1.0 / self.trees.len() as f64,
        }
    }

    pub fn max_depth(&self) -> usize {
        self.trees.iter().map(Tree::max_depth).max().unwrap_or(0)
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::Dimension {
                expected: self.n_features,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.predict_unchecked(x))
    }

    #[inline]
    pub fn predict_unchecked(&self, x: &[f64]) -> f64 {
        let s: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        s * self.tree_weight()
    }

    /// Columns used by at least one split.
    pub fn used_features(&self) -> ColumnSet {
        let mut set = ColumnSet::empty(self.n_features);
        for t in &self.trees {
            for n in t.nodes() {
                if let NodeKind::Internal { feature, .. } = n.kind {
                    set.insert(feature);
                }
            }
        }
        set
    }

    /// Applies `map(feature, threshold)` to every split threshold. Used to
    /// carry a per-feature monotone reparametrization into the model.
    pub fn map_thresholds(&self, mut map: impl FnMut(usize, f64) -> f64) -> TreeEnsemble {
        let trees = self
            .trees
            .iter()
            .map(|t| {
                t.map_nodes(|n| match n.kind {
                    NodeKind::Internal {
                        feature,
                        threshold,
                        left,
                        right,
                    } => NodeKind::Internal {
                        feature,
                        threshold: map(feature, threshold),
                        left,
                        right,
                    },
                    ref leaf => leaf.clone(),
                })
            })
            .collect();
        TreeEnsemble {
            trees,
            n_features: self.n_features,
            feature_names: self.feature_names.clone(),
            aggregation: self.aggregation,
        }
    }

    /// Replaces leaf values through `map(tree, region)`.
    pub fn map_leaf_values(&self, mut map: impl FnMut(usize, &LeafRegion) -> f64) -> TreeEnsemble {
        let trees = self
            .trees
            .iter()
            .enumerate()
            .map(|(t, tree)| {
                let mut new = tree.clone();
                for r in tree.leaf_regions() {
                    new.nodes[r.node].kind = NodeKind::Leaf { value: map(t, &r) };
                }
                new
            })
            .collect();
        TreeEnsemble {
            trees,
            n_features: self.n_features,
            feature_names: self.feature_names.clone(),
            aggregation: self.aggregation,
        }
    }

    /// Recomputes all node counts from `rows`.
    pub fn recount<'a>(&mut self, rows: impl Iterator<Item = &'a [f64]> + Clone) {
        for t in &mut self.trees {
            t.recount(rows.clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn stump(threshold: f64, left: f64, right: f64, counts: (u64, u64)) -> Tree {
        Tree::new(
            vec![
                TreeNode {
                    id: 0,
                    kind: NodeKind::Internal {
                        feature: 0,
                        threshold,
                        left: 1,
                        right: 2,
                    },
                    count: counts.0 + counts.1,
                },
                TreeNode {
                    id: 1,
                    kind: NodeKind::Leaf { value: left },
                    count: counts.0,
                },
                TreeNode {
                    id: 2,
                    kind: NodeKind::Leaf { value: right },
                    count: counts.1,
                },
            ],
            2,
            0,
        )
        .unwrap()
    }

    #[test]
    fn constant_tree_predicts_everywhere() {
        let e = TreeEnsemble::single(Tree::constant(3.0, 10), 2).unwrap();
        assert_eq!(e.predict(&[0.0, 0.0]).unwrap(), 3.0);
        assert_eq!(e.predict(&[-1e9, 1e9]).unwrap(), 3.0);
    }

    #[test]
    fn stump_routes_left_on_le() {
        let e = TreeEnsemble::single(stump(0.305, 1.0, 2.0, (4, 6)), 2).unwrap();
        assert_eq!(e.predict(&[0.0, 5.0]).unwrap(), 1.0);
        assert_eq!(e.predict(&[0.305, 5.0]).unwrap(), 1.0);
        assert_eq!(e.predict(&[0.31, 5.0]).unwrap(), 2.0);
    }

    #[test]
    fn predict_rejects_wrong_dimension() {
        let e = TreeEnsemble::single(Tree::constant(1.0, 1), 2).unwrap();
        assert!(matches!(
            e.predict(&[0.0]),
            Err(Error::Dimension { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn average_aggregation_divides_by_tree_count() {
        let e = TreeEnsemble::new(
            vec![Tree::constant(1.0, 1), Tree::constant(3.0, 1)],
            1,
            Aggregation::Average,
        )
        .unwrap();
        assert_eq!(e.predict(&[0.0]).unwrap(), 2.0);
    }

    #[test]
    fn count_mismatch_is_rejected() {
        let nodes = vec![
            TreeNode {
                id: 0,
                kind: NodeKind::Internal {
                    feature: 0,
                    threshold: 0.0,
                    left: 1,
                    right: 2,
                },
                count: 10,
            },
            TreeNode {
                id: 1,
                kind: NodeKind::Leaf { value: 0.0 },
                count: 4,
            },
            TreeNode {
                id: 2,
                kind: NodeKind::Leaf { value: 0.0 },
                count: 7,
            },
        ];
        let err = Tree::new(nodes, 1, 0).unwrap_err();
        assert!(matches!(
            err,
            Error::CountMismatch {
                parent: 10,
                left: 4,
                right: 7,
                ..
            }
        ));
    }

    #[test]
    fn shared_child_is_rejected() {
        let nodes = vec![
            TreeNode {
                id: 0,
                kind: NodeKind::Internal {
                    feature: 0,
                    threshold: 0.0,
                    left: 1,
                    right: 2,
                },
                count: 2,
            },
            TreeNode {
                id: 1,
                kind: NodeKind::Internal {
                    feature: 0,
                    threshold: -1.0,
                    left: 2,
                    right: 2,
                },
                count: 1,
            },
            TreeNode {
                id: 2,
                kind: NodeKind::Leaf { value: 0.0 },
                count: 1,
            },
        ];
        assert!(Tree::new(nodes, 1, 0).is_err());
    }

    #[test]
    fn compatible_leaves_endpoints() {
        let t = stump(0.305, 1.0, 2.0, (4, 6));
        let x = [0.0, 0.0];
        assert_eq!(t.compatible_leaves(&ColumnSet::empty(2), &x), vec![1, 2]);
        assert_eq!(t.compatible_leaves(&ColumnSet::full(2), &x), vec![1]);
    }
}
