//! Shapley values of the unnormalized leaf game as a sum of per-leaf games.
//!
//! The leaf value function is `v(S) = sum_m f_m g_m(S ∩ Q_m)` where `Q_m` are
//! the players splitting on leaf `m`'s path, so each leaf is a game on at
//! most `D` players and players outside `Q_m` are null in it. Summing the
//! Shapley values of the small games, reweighted for the `P - |Q_m|` absent
//! players, gives the values of the full game.

use serde::Serialize;

use super::{Algorithm, GameWeights, SVReport};
use crate::error::{Error, Result};
use crate::estimators::{Estimator, Explainer};

/// Leaf games with more players than this are refused.
const MAX_LEAF_PLAYERS: usize = 30;

/// Work counters for one call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OpStats {
    /// Leaves visited.
    pub leaves: u64,
    /// `sum_m 2^{|Q_m|}`: count lookups.
    pub subset_evaluations: u64,
    /// `sum_m |Q_m| 2^{|Q_m| - 1}`: weighted difference accumulations.
    pub player_updates: u64,
}

impl std::ops::AddAssign for OpStats {
    fn add_assign(&mut self, o: Self) {
        self.leaves += o.leaves;
        self.subset_evaluations += o.subset_evaluations;
        self.player_updates += o.player_updates;
    }
}

pub fn multi_games_sv(explainer: &Explainer, x: &[f64], instance: usize) -> Result<(SVReport, OpStats)> {
    explainer.ensemble().check_point(x)?;
    let index = explainer.index()?;
    let p = explainer.n_players();
    let owner = explainer.partition().player_of_column(explainer.n_columns());
    let weights = GameWeights::new(p);
    let mut rows: Vec<Option<Vec<f64>>> = vec![None; p.min(MAX_LEAF_PLAYERS) + 1];
    let tw = explainer.ensemble().tree_weight();
    let n = index.n_rows() as f64;

    let mut phi = vec![0.0; p];
    let mut base = 0.0;
    let mut stats = OpStats::default();
    let mut players: Vec<usize> = Vec::new();
    let mut player_bits: Vec<u64> = Vec::new();
    let mut g: Vec<f64> = Vec::new();
    let mut local: Vec<u64> = Vec::new();

    for leaves in index.trees() {
        for leaf in leaves {
            stats.leaves += 1;
            let n_m = leaf.leaf_count();
            if n_m == 0 {
                continue;
            }
            base += tw * leaf.value * n_m as f64 / n;

            players.clear();
            player_bits.clear();
            for (k, b) in leaf.bounds.iter().enumerate() {
                if let Some(pl) = owner[b.feature] {
                    match players.iter().position(|&q| q == pl) {
                        Some(pos) => player_bits[pos] |= 1 << k,
                        None => {
                            players.push(pl);
                            player_bits.push(1 << k);
                        }
                    }
                }
            }
            let d = players.len();
            if d == 0 {
                continue;
            }
            if d > MAX_LEAF_PLAYERS {
                return Err(Error::TooManyPlayers {
                    players: d,
                    limit: MAX_LEAF_PLAYERS,
                });
            }
            let size = 1usize << d;
            stats.subset_evaluations += size as u64;
            stats.player_updates += (d * size / 2) as u64;

            let sat = leaf.sat_mask(x);
            local.resize(size, 0);
            g.resize(size, 0.0);
            local[0] = 0;
            g[0] = n_m as f64 / n;
            for u in 1..size {
                let t = local[u & (u - 1)] | player_bits[u.trailing_zeros() as usize];
                local[u] = t;
                g[u] = if t & !sat == 0 {
                    n_m as f64 / leaf.count(t) as f64
                } else {
                    0.0
                };
            }

            let w = rows[d].get_or_insert_with(|| weights.multi_games_row(d));
            let scale = tw * leaf.value;
            for (i, &pl) in players.iter().enumerate() {
                let bit = 1usize << i;
                let mut acc = 0.0;
                for u in 0..size {
                    if u & bit == 0 {
                        acc += w[u.count_ones() as usize] * (g[u | bit] - g[u]);
                    }
                }
                phi[pl] += scale * acc;
            }
        }
    }

    let report = SVReport::new(
        instance,
        Estimator::LeafRaw,
        Algorithm::MultiGames,
        explainer.partition().labels(),
        phi,
        base,
        explainer.ensemble().predict(x)?,
    );
    Ok((report, stats))
}
