//! Polynomial-time Shapley values of the path-dependent (`shap_path`) game.
//!
//! Follows the extend/unwind recursion over unique path players. Splits on
//! columns outside the partition are never conditioned on, so they only
//! rescale the weight of both subtrees.

use super::{Algorithm, SVReport};
use crate::columns::ColumnSet;
use crate::error::{Error, Result};
use crate::estimators::{shap_reduced, Estimator, Explainer};
use crate::tree::{NodeKind, Tree};

#[derive(Debug, Clone, Copy)]
struct PathElem {
    player: usize,
    zero: f64,
    one: f64,
    weight: f64,
}

const ROOT: usize = usize::MAX;

fn extend(path: &mut Vec<PathElem>, zero: f64, one: f64, player: usize) {
    let l = path.len();
    path.push(PathElem {
        player,
        zero,
        one,
        weight: if l == 0 { 1.0 } else { 0.0 },
    });
    for i in (0..l).rev() {
        path[i + 1].weight += one * path[i].weight * (i + 1) as f64 / (l + 1) as f64;
        path[i].weight = zero * path[i].weight * (l - i) as f64 / (l + 1) as f64;
    }
}

fn unwind(path: &mut Vec<PathElem>, index: usize) {
    let depth = path.len() - 1;
    let PathElem { one, zero, .. } = path[index];
    let mut next_one = path[depth].weight;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = path[i].weight;
            path[i].weight = next_one * (depth + 1) as f64 / ((i + 1) as f64 * one);
            next_one = tmp - path[i].weight * zero * (depth - i) as f64 / (depth + 1) as f64;
        } else {
            path[i].weight = path[i].weight * (depth + 1) as f64 / (zero * (depth - i) as f64);
        }
    }
    for i in index..depth {
        path[i].player = path[i + 1].player;
        path[i].zero = path[i + 1].zero;
        path[i].one = path[i + 1].one;
    }
    path.pop();
}

fn unwound_sum(path: &[PathElem], index: usize) -> f64 {
    let depth = path.len() - 1;
    let PathElem { one, zero, .. } = path[index];
    let mut next_one = path[depth].weight;
    let mut total = 0.0;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = next_one * (depth + 1) as f64 / ((i + 1) as f64 * one);
            total += tmp;
            next_one = path[i].weight - tmp * zero * (depth - i) as f64 / (depth + 1) as f64;
        } else if zero != 0.0 {
            total += path[i].weight / zero / ((depth - i) as f64 / (depth + 1) as f64);
        }
    }
    total
}

struct Walk<'a> {
    tree: &'a Tree,
    tree_index: usize,
    owner: &'a [Option<usize>],
    x: &'a [f64],
    phi: &'a mut [f64],
    scale_all: f64,
}

impl Walk<'_> {
    fn recurse(&mut self, node: usize, path: &[PathElem], scale: f64) -> Result<()> {
        let n = self.tree.node(node);
        match n.kind {
            NodeKind::Leaf { value } => {
                for i in 1..path.len() {
                    let w = unwound_sum(path, i);
                    let e = path[i];
                    self.phi[e.player] += w * (e.one - e.zero) * value * scale * self.scale_all;
                }
                Ok(())
            }
            NodeKind::Internal {
                feature,
                threshold,
                left,
                right,
            } => {
                let (hot, cold) = if self.x[feature] <= threshold {
                    (left, right)
                } else {
                    (right, left)
                };
                let cover = n.count as f64;
                let frac = |c: usize| self.tree.node(c).count as f64 / cover;
                let Some(player) = self.owner[feature] else {
                    if n.count == 0 {
                        return Err(Error::ZeroCount {
                            tree: self.tree_index,
                            node: n.id,
                        });
                    }
                    for child in [hot, cold] {
                        let f = frac(child);
                        if f > 0.0 {
                            self.recurse(child, path, scale * f)?;
                        }
                    }
                    return Ok(());
                };
                let mut base = path.to_vec();
                let (mut iz, mut io) = (1.0, 1.0);
                if let Some(k) = base.iter().skip(1).position(|e| e.player == player) {
                    let k = k + 1;
                    iz = base[k].zero;
                    io = base[k].one;
                    unwind(&mut base, k);
                }
                let (hz, cz) = if iz == 0.0 {
                    (0.0, 0.0)
                } else {
                    if n.count == 0 {
                        return Err(Error::ZeroCount {
                            tree: self.tree_index,
                            node: n.id,
                        });
                    }
                    (frac(hot) * iz, frac(cold) * iz)
                };
                if hz != 0.0 || io != 0.0 {
                    let mut p = base.clone();
                    extend(&mut p, hz, io, player);
                    self.recurse(hot, &p, scale)?;
                }
                if cz != 0.0 {
                    let mut p = base;
                    extend(&mut p, cz, 0.0, player);
                    self.recurse(cold, &p, scale)?;
                }
                Ok(())
            }
        }
    }
}

pub fn tree_shap_sv(explainer: &Explainer, x: &[f64], instance: usize) -> Result<SVReport> {
    let ensemble = explainer.ensemble();
    ensemble.check_point(x)?;
    let owner = explainer.partition().player_of_column(explainer.n_columns());
    let mut phi = vec![0.0; explainer.n_players()];
    for (t, tree) in ensemble.trees().iter().enumerate() {
        let mut path = Vec::with_capacity(tree.max_depth() + 2);
        extend(&mut path, 1.0, 1.0, ROOT);
        Walk {
            tree,
            tree_index: t,
            owner: &owner,
            x,
            phi: &mut phi,
            scale_all: ensemble.tree_weight(),
        }
        .recurse(0, &path, 1.0)?;
    }
    let base = shap_reduced(ensemble, &ColumnSet::empty(explainer.n_columns()), x)?.value;
    Ok(SVReport::new(
        instance,
        Estimator::ShapPath,
        Algorithm::TreeShap,
        explainer.partition().labels(),
        phi,
        base,
        ensemble.predict(x)?,
    ))
}
