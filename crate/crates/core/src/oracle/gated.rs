//! Gated two-branch linear model on independent standard normal features:
//! `f(x) = (a0 x0 + a1 x1) 1{x4 <= 0} + (a2 x2 + a3 x3) 1{x4 > 0}`, with any
//! further columns unused. Players on the branch not selected by `x4` still
//! receive attribution.

use crate::error::{Error, Result};
use crate::shapley::binom;

pub const GATE: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct GatedLinear {
    pub a: [f64; 4],
    pub p: usize,
}

impl GatedLinear {
    pub fn new(a: [f64; 4], p: usize) -> Result<Self> {
        if p < 5 {
            return Err(Error::Config(format!(
                "the gated model needs at least 5 features, got {p}"
            )));
        }
        if p > 20 {
            return Err(Error::TooManyPlayers { players: p, limit: 20 });
        }
        Ok(Self { a, p })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let a = &self.a;
        if x[GATE] <= 0.0 {
            a[0] * x[0] + a[1] * x[1]
        } else {
            a[2] * x[2] + a[3] * x[3]
        }
    }

    /// Exact `E[f(X) | X_S = x_S]`: unknown features contribute their zero
    /// mean and an unknown gate is open either way with probability 1/2.
    pub fn value(&self, mask: usize, x: &[f64]) -> f64 {
        let known = |i: usize| mask >> i & 1 == 1;
        let part = |i: usize| if known(i) { self.a[i] * x[i] } else { 0.0 };
        let low = part(0) + part(1);
        let high = part(2) + part(3);
        let q = if known(GATE) {
            if x[GATE] <= 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            0.5
        };
        low * q + high * (1.0 - q)
    }

    /// Value table over singleton players, indexed by bit mask.
    pub fn value_table(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.p {
            return Err(Error::Dimension {
                expected: self.p,
                got: x.len(),
            });
        }
        Ok((0..1usize << self.p).map(|m| self.value(m, x)).collect())
    }

    /// Columns of the branch that `x` does not select.
    pub fn off_branch(x: &[f64]) -> [usize; 2] {
        if x[GATE] <= 0.0 {
            [2, 3]
        } else {
            [0, 1]
        }
    }

    /// Closed-form attributions of the off-branch players, `K a_i x_i`.
    pub fn off_branch_sv(&self, x: &[f64]) -> [(usize, f64); 2] {
        let k = off_branch_constant(self.p);
        Self::off_branch(x).map(|i| (i, k * self.a[i] * x[i]))
    }
}

/// `K = (1/p) P(gate open) sum_{S without i and the gate} 1 / binom(p-1, |S|)`.
pub fn off_branch_constant(p: usize) -> f64 {
    let sum: f64 = (0..=p - 2).map(|k| binom(p - 2, k) / binom(p - 1, k)).sum();
    0.5 * sum / p as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapley::shapley_from_table;

    #[test]
    fn constant_at_five() {
        assert!((off_branch_constant(5) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn enumeration_matches_closed_form() {
        for p in [5, 6, 8] {
            let g = GatedLinear::new([1.0, -0.5, 1.3, 0.7], p).unwrap();
            let mut x = vec![0.4; p];
            x[0] = 1.0;
            x[2] = 2.0;
            x[3] = -1.5;
            x[GATE] = -0.5;
            let phi = shapley_from_table(&g.value_table(&x).unwrap());
            for (i, want) in g.off_branch_sv(&x) {
                assert!((phi[i] - want).abs() < 1e-12, "p={p} i={i}: {} vs {want}", phi[i]);
            }
            x[GATE] = 0.5;
            let phi = shapley_from_table(&g.value_table(&x).unwrap());
            for (i, want) in g.off_branch_sv(&x) {
                assert!((phi[i] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_coefficient_gives_zero() {
        let g = GatedLinear::new([1.0, 1.0, 0.0, 1.0], 5).unwrap();
        let x = [1.0, 1.0, 2.0, 1.0, -0.5];
        let phi = shapley_from_table(&g.value_table(&x).unwrap());
        assert!(phi[2].abs() < 1e-15);
        assert!(phi[3].abs() > 0.1);
    }
}
