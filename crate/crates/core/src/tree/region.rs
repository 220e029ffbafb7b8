use super::{NodeKind, Tree};
use crate::columns::ColumnSet;

/// Half-open constraint `lower < x[feature] <= upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub feature: usize,
    pub lower: f64,
    pub upper: f64,
}

impl Bound {
    #[inline]
    pub fn contains(&self, v: f64) -> bool {
        self.lower < v && v <= self.upper
    }
}

/// Geometry of one leaf: the product of per-feature intervals along its
/// decision path. Features absent from `bounds` are unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafRegion {
    /// External node id of the leaf.
    pub leaf_id: i64,
    /// Index of the leaf in the tree's node table.
    pub node: usize,
    /// One bound per distinct path feature, sorted by feature.
    pub bounds: Vec<Bound>,
    /// Number of splits on the path.
    pub depth: usize,
    pub value: f64,
    pub count: u64,
}

impl LeafRegion {
    pub fn interval(&self, feature: usize) -> (f64, f64) {
        self.bounds
            .iter()
            .find(|b| b.feature == feature)
            .map(|b| (b.lower, b.upper))
            .unwrap_or((f64::NEG_INFINITY, f64::INFINITY))
    }

    pub fn used_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.bounds.iter().map(|b| b.feature)
    }

    pub fn n_used(&self) -> usize {
        self.bounds.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.bounds.iter().all(|b| b.contains(x[b.feature]))
    }

    /// `x_S` lies in the projection of the region on `S`.
    pub fn contains_on(&self, columns: &ColumnSet, x: &[f64]) -> bool {
        self.bounds
            .iter()
            .filter(|b| columns.contains(b.feature))
            .all(|b| b.contains(x[b.feature]))
    }
}

pub(super) fn leaf_regions(tree: &Tree) -> Vec<LeafRegion> {
    let mut out = Vec::with_capacity(tree.n_leaves());
    let mut path: Vec<Bound> = Vec::new();
    walk(tree, 0, &mut path, 0, &mut out);
    out
}

fn walk(tree: &Tree, i: usize, path: &mut Vec<Bound>, depth: usize, out: &mut Vec<LeafRegion>) {
    let node = tree.node(i);
    match node.kind {
        NodeKind::Leaf { value } => {
            let mut bounds: Vec<Bound> = Vec::new();
            for b in path.iter() {
                match bounds.iter_mut().find(|e| e.feature == b.feature) {
                    Some(e) => {
                        e.lower = e.lower.max(b.lower);
                        e.upper = e.upper.min(b.upper);
                    }
                    None => bounds.push(*b),
                }
            }
            bounds.sort_by_key(|b| b.feature);
            out.push(LeafRegion {
                leaf_id: node.id,
                node: i,
                bounds,
                depth,
                value,
                count: node.count,
            });
        }
        NodeKind::Internal {
            feature,
            threshold,
            left,
            right,
        } => {
            path.push(Bound {
                feature,
                lower: f64::NEG_INFINITY,
                upper: threshold,
            });
            walk(tree, left, path, depth + 1, out);
            path.pop();
            path.push(Bound {
                feature,
                lower: threshold,
                upper: f64::INFINITY,
            });
            walk(tree, right, path, depth + 1, out);
            path.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::TreeNode;

    #[test]
    fn single_leaf_region_is_unbounded() {
        let t = Tree::constant(1.0, 3);
        let r = t.leaf_regions();
        assert_eq!(r.len(), 1);
        assert!(r[0].bounds.is_empty());
        assert_eq!(r[0].interval(0), (f64::NEG_INFINITY, f64::INFINITY));
    }

    #[test]
    fn repeated_feature_intersects_intervals() {
        // x0 <= 1 then x0 > -1 on the left path
        let t = Tree::new(
            vec![
                TreeNode {
                    id: 0,
                    kind: NodeKind::Internal {
                        feature: 0,
                        threshold: 1.0,
                        left: 1,
                        right: 2,
                    },
                    count: 3,
                },
                TreeNode {
                    id: 1,
                    kind: NodeKind::Internal {
                        feature: 0,
                        threshold: -1.0,
                        left: 3,
                        right: 4,
                    },
                    count: 2,
                },
                TreeNode {
                    id: 2,
                    kind: NodeKind::Leaf { value: 0.0 },
                    count: 1,
                },
                TreeNode {
                    id: 3,
                    kind: NodeKind::Leaf { value: 1.0 },
                    count: 1,
                },
                TreeNode {
                    id: 4,
                    kind: NodeKind::Leaf { value: 2.0 },
                    count: 1,
                },
            ],
            1,
            0,
        )
        .unwrap();
        let regions = t.leaf_regions();
        let r4 = regions.iter().find(|r| r.leaf_id == 4).unwrap();
        assert_eq!(r4.bounds.len(), 1);
        assert_eq!(r4.interval(0), (-1.0, 1.0));
        assert_eq!(r4.depth, 2);
    }
}
