/// Combinatorial weights for a game with `P` players.
#[derive(Debug, Clone)]
pub struct GameWeights {
    players: usize,
    ln_fact: Vec<f64>,
}

impl GameWeights {
    pub fn new(players: usize) -> Self {
        let mut ln_fact = Vec::with_capacity(players + 1);
        ln_fact.push(0.0);
        for i in 1..=players {
            ln_fact.push(ln_fact[i - 1] + (i as f64).ln());
        }
        Self { players, ln_fact }
    }

    pub fn players(&self) -> usize {
        self.players
    }

    fn ln_binom(&self, n: usize, k: usize) -> f64 {
        self.ln_fact[n] - self.ln_fact[k] - self.ln_fact[n - k]
    }

    /// Shapley kernel `|S|! (P - |S| - 1)! / P!` for a subset not containing the player.
    pub fn kernel(&self, s: usize) -> f64 {
        self.coalition(1, s)
    }

    /// Weight of a subset of size `s` in the coalition value of a group of
    /// `c` players: `1 / ((P - c + 1) * binom(P - c, s))`.
    pub fn coalition(&self, c: usize, s: usize) -> f64 {
        let rest = self.players - c;
        if rest <= 60 {
            1.0 / ((rest + 1) as f64 * binom(rest, s))
        } else {
            (-self.ln_binom(rest, s)).exp() / (rest + 1) as f64
        }
    }

    /// Multi-Games reweighting of a subset of size `k` inside a leaf game on
    /// `d` of the `P` players:
    /// `(1/P) * sum_{j=0}^{P-d} binom(P-d, j) / binom(P-1, k+j)`.
    pub fn multi_games(&self, k: usize, d: usize) -> f64 {
        let p = self.players;
        debug_assert!(k < d && d <= p);
        let sum: f64 = if p <= 60 {
            (0..=p - d).map(|j| binom(p - d, j) / binom(p - 1, k + j)).sum()
        } else {
            (0..=p - d)
                .map(|j| (self.ln_binom(p - d, j) - self.ln_binom(p - 1, k + j)).exp())
                .sum()
        };
        sum / p as f64
    }

    /// `multi_games(k, d)` for every `k < d`.
    pub fn multi_games_row(&self, d: usize) -> Vec<f64> {
        (0..d).map(|k| self.multi_games(k, d)).collect()
    }
}

/// Binomial coefficient in floating point, exact for `n <= 60` up to rounding.
pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0f64;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    if r < 9.0e15 {
        r.round()
    } else {
        r
    }
}
