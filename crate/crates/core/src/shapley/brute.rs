use super::{GameWeights, SVReport};
use crate::error::{Error, Result};
use crate::estimators::{Estimator, Explainer};
use crate::shapley::Algorithm;

/// Default cap on players for subset enumeration.
pub const DEFAULT_MAX_PLAYERS: usize = 20;

/// Shapley values of every player from a table of `v(S)` indexed by bit mask.
pub fn shapley_from_table(table: &[f64]) -> Vec<f64> {
    let size = table.len();
    let p = size.trailing_zeros() as usize;
    debug_assert_eq!(size, 1 << p);
    let w = GameWeights::new(p);
    let kernel: Vec<f64> = (0..p.max(1)).map(|s| if p == 0 { 0.0 } else { w.kernel(s) }).collect();
    let mut phi = vec![0.0; p];
    for s in 0..size {
        let k = kernel[(s.count_ones() as usize).min(p.saturating_sub(1))];
        for (i, f) in phi.iter_mut().enumerate() {
            let bit = 1 << i;
            if s & bit == 0 {
                *f += k * (table[s | bit] - table[s]);
            }
        }
    }
    phi
}

/// Value of the coalition `c_mask` (a set of players treated as one) in the
/// game given by `table`: subsets range over the players outside the
/// coalition, weighted by `1 / ((P - |C| + 1) * binom(P - |C|, |S|))`.
pub fn coalition_from_table(table: &[f64], c_mask: usize) -> f64 {
    let p = table.len().trailing_zeros() as usize;
    let c = c_mask.count_ones() as usize;
    assert!(
        c >= 1 && c_mask < table.len(),
        "coalition must be a nonempty player set"
    );
    let w = GameWeights::new(p);
    let mut total = 0.0;
    for s in 0..table.len() {
        if s & c_mask == 0 {
            total += w.coalition(c, s.count_ones() as usize) * (table[s | c_mask] - table[s]);
        }
    }
    total
}

fn check_players(explainer: &Explainer, max_players: usize) -> Result<()> {
    let p = explainer.n_players();
    if p > max_players {
        return Err(Error::TooManyPlayers {
            players: p,
            limit: max_players,
        });
    }
    Ok(())
}

/// Exact Shapley values of every player by subset enumeration.
pub fn brute_force_sv(
    explainer: &Explainer,
    x: &[f64],
    estimator: Estimator,
    instance: usize,
    max_players: usize,
) -> Result<SVReport> {
    check_players(explainer, max_players)?;
    let table = explainer.value_table(x, estimator)?;
    let phi = shapley_from_table(&table);
    Ok(SVReport::new(
        instance,
        estimator,
        Algorithm::BruteForce,
        explainer.partition().labels(),
        phi,
        table[0],
        explainer.ensemble().predict(x)?,
    ))
}

/// Coalition value of a group of players.
pub fn brute_force_coalition(
    explainer: &Explainer,
    x: &[f64],
    estimator: Estimator,
    players: &[usize],
    max_players: usize,
) -> Result<f64> {
    check_players(explainer, max_players)?;
    let p = explainer.n_players();
    let mut mask = 0usize;
    for &i in players {
        if i >= p {
            return Err(Error::Config(format!("player {i} out of range for {p} players")));
        }
        mask |= 1 << i;
    }
    if mask == 0 {
        return Err(Error::Config("empty coalition".into()));
    }
    let table = explainer.value_table(x, estimator)?;
    Ok(coalition_from_table(&table, mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn one_player_game() {
        let phi = shapley_from_table(&[1.5, 4.0]);
        assert_eq!(phi, vec![2.5]);
    }

    #[test]
    fn two_player_closed_form() {
        // v(0)=0, v(X)=2, v(Z)=5, v(XZ)=9
        let t = [0.0, 2.0, 5.0, 9.0];
        let phi = shapley_from_table(&t);
        assert_abs_diff_eq!(phi[0], 0.5 * (2.0 - 0.0) + 0.5 * (9.0 - 5.0), epsilon = 1e-15);
        assert_abs_diff_eq!(phi[0] + phi[1], 9.0, epsilon = 1e-15);
    }

    #[test]
    fn singleton_coalition_is_shapley_value() {
        let t: Vec<f64> = (0..16).map(|m: i32| (m * m % 7) as f64 - 0.3 * m as f64).collect();
        let phi = shapley_from_table(&t);
        for (i, &v) in phi.iter().enumerate() {
            assert_abs_diff_eq!(coalition_from_table(&t, 1 << i), v, epsilon = 1e-12);
        }
        // Whole player set as one coalition takes the full surplus.
        assert_abs_diff_eq!(coalition_from_table(&t, 15), t[15] - t[0], epsilon = 1e-12);
    }
}
