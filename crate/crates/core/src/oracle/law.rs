//! Feature laws with exact conditional samplers.

use rand::Rng;

use super::gaussian::{GaussianSampler, GaussianSpec};
use crate::error::{Error, Result};

/// Gaussian mixture over continuous columns plus one class column holding
/// the component's level.
#[derive(Debug, Clone)]
pub struct MixtureLaw {
    pub weights: Vec<f64>,
    pub components: Vec<GaussianSpec>,
    /// Position of the class column in the full feature vector; the
    /// continuous columns fill the other positions in order.
    pub class_column: usize,
    pub class_levels: Vec<f64>,
}

impl MixtureLaw {
    pub fn new(weights: Vec<f64>, components: Vec<GaussianSpec>, class_column: usize) -> Result<Self> {
        if weights.len() != components.len() || components.is_empty() {
            return Err(Error::Config("one weight per mixture component is required".into()));
        }
        if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 || weights.iter().any(|&w| w < 0.0) {
            return Err(Error::Config(
                "mixture weights must be non-negative and sum to 1".into(),
            ));
        }
        let d = components[0].dim();
        if components.iter().any(|c| c.dim() != d) || class_column > d {
            return Err(Error::Config("mixture components differ in dimension".into()));
        }
        let class_levels = (0..weights.len()).map(|k| k as f64).collect();
        Ok(Self {
            weights,
            components,
            class_column,
            class_levels,
        })
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim() + 1
    }

    /// Continuous-space index of a full column index (not the class column).
    fn cont_index(&self, col: usize) -> usize {
        if col < self.class_column {
            col
        } else {
            col - 1
        }
    }

    fn full_index(&self, cont: usize) -> usize {
        if cont < self.class_column {
            cont
        } else {
            cont + 1
        }
    }

    /// Posterior class probabilities given the continuous columns `s` (full
    /// indices) at `x`, restricted to the classes marked in `allowed`.
    pub fn posterior(&self, s: &[usize], x: &[f64], allowed: &[bool]) -> Result<Vec<f64>> {
        let cont: Vec<usize> = s.iter().map(|&c| self.cont_index(c)).collect();
        let vals: Vec<f64> = s.iter().map(|&c| x[c]).collect();
        let mut post = Vec::with_capacity(self.weights.len());
        for (k, comp) in self.components.iter().enumerate() {
            post.push(if allowed[k] {
                self.weights[k] * comp.marginal_density(&cont, &vals)?
            } else {
                0.0
            });
        }
        let total: f64 = post.iter().sum();
        // Also rejects NaN.
        if total.is_nan() || total <= 0.0 {
            return Err(Error::Numerical("conditioning event has zero probability".into()));
        }
        for p in &mut post {
            *p /= total;
        }
        Ok(post)
    }

    /// Allowed classes given the class column, if conditioned on.
    fn allowed_from(&self, s: &[usize], x: &[f64]) -> Result<Vec<bool>> {
        if s.contains(&self.class_column) {
            let v = x[self.class_column];
            let k = self
                .class_levels
                .iter()
                .position(|&l| l == v)
                .ok_or_else(|| Error::Config(format!("class value {v} is not a mixture level")))?;
            Ok((0..self.weights.len()).map(|j| j == k).collect())
        } else {
            Ok(vec![true; self.weights.len()])
        }
    }

    /// `E[b_Z . X | X_S = x_S, Z in allowed]` for a per-class linear model,
    /// with `s` the conditioned continuous columns (full indices).
    pub fn linear_expectation(&self, b: &[Vec<f64>], s: &[usize], x: &[f64], allowed: &[bool]) -> Result<f64> {
        let post = self.posterior(s, x, allowed)?;
        let cont: Vec<usize> = s.iter().map(|&c| self.cont_index(c)).collect();
        let vals: Vec<f64> = s.iter().map(|&c| x[c]).collect();
        let mut total = 0.0;
        for (k, comp) in self.components.iter().enumerate() {
            if post[k] == 0.0 {
                continue;
            }
            let (rest, cond) = comp.conditional(&cont, &vals, false)?;
            let mut e = 0.0;
            for (ci, &v) in cont.iter().zip(&vals) {
                e += b[k][*ci] * v;
            }
            for (ri, &r) in rest.iter().enumerate() {
                e += b[k][r] * cond.mean[ri];
            }
            total += post[k] * e;
        }
        Ok(total)
    }
}

#[derive(Debug, Clone)]
pub enum FeatureLaw {
    Gaussian(GaussianSpec),
    Mixture(MixtureLaw),
}

impl FeatureLaw {
    pub fn dim(&self) -> usize {
        match self {
            FeatureLaw::Gaussian(g) => g.dim(),
            FeatureLaw::Mixture(m) => m.dim(),
        }
    }

    /// Sampler of `X | X_S = x_S`; draws keep `x` on `S`.
    pub fn conditional_sampler(&self, s: &[usize], x: &[f64]) -> Result<ConditionalSampler> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        match self {
            FeatureLaw::Gaussian(g) => {
                let xs: Vec<f64> = s.iter().map(|&i| x[i]).collect();
                let (rest, cond) = g.conditional(s, &xs, false)?;
                Ok(ConditionalSampler {
                    base: x.to_vec(),
                    mixture: vec![(1.0, rest, cond.sampler())],
                    class_column: None,
                })
            }
            FeatureLaw::Mixture(m) => {
                let allowed = m.allowed_from(s, x)?;
                let cont_s: Vec<usize> = s.iter().copied().filter(|&c| c != m.class_column).collect();
                let post = m.posterior(&cont_s, x, &allowed)?;
                let ci: Vec<usize> = cont_s.iter().map(|&c| m.cont_index(c)).collect();
                let vals: Vec<f64> = cont_s.iter().map(|&c| x[c]).collect();
                let mut mixture = Vec::new();
                for (k, comp) in m.components.iter().enumerate() {
                    let (rest, cond) = comp.conditional(&ci, &vals, false)?;
                    let rest_full = rest.iter().map(|&r| m.full_index(r)).collect();
                    mixture.push((post[k], rest_full, cond.sampler()));
                }
                Ok(ConditionalSampler {
                    base: x.to_vec(),
                    mixture,
                    class_column: Some((m.class_column, m.class_levels.clone())),
                })
            }
        }
    }

    /// Unconditional draws.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<Vec<f64>>> {
        let s = self.conditional_sampler(&[], &vec![0.0; self.dim()])?;
        let mut out = Vec::with_capacity(n);
        let mut buf = vec![0.0; self.dim()];
        for _ in 0..n {
            s.sample_into(rng, &mut buf);
            out.push(buf.clone());
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct ConditionalSampler {
    base: Vec<f64>,
    /// (probability, free full columns, sampler over them)
    mixture: Vec<(f64, Vec<usize>, GaussianSampler)>,
    class_column: Option<(usize, Vec<f64>)>,
}

impl ConditionalSampler {
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        out.copy_from_slice(&self.base);
        let k = if self.mixture.len() == 1 {
            0
        } else {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = self.mixture.len() - 1;
            for (k, (p, _, _)) in self.mixture.iter().enumerate() {
                acc += p;
                if u < acc {
                    pick = k;
                    break;
                }
            }
            pick
        };
        let (_, free, sampler) = &self.mixture[k];
        let mut z = vec![0.0; free.len()];
        let mut draw = vec![0.0; free.len()];
        sampler.sample_into(rng, &mut z, &mut draw);
        for (&c, &v) in free.iter().zip(&draw) {
            out[c] = v;
        }
        if let Some((col, levels)) = &self.class_column {
            out[*col] = levels[k];
        }
    }
}
