//! Synthetic laws and datasets with known ground truth.

use nalgebra::DMatrix;

use super::gaussian::GaussianSpec;
use super::law::{FeatureLaw, MixtureLaw};
use super::mc::stream_rng;
use crate::data::{Dataset, FeatureMeta};
use crate::error::{Error, Result};

/// Coefficients of the linear benchmark model.
pub const EXPERIMENT1_BETA: [f64; 5] = [6.49, -2.44, -2.11, -4.29, 3.46];

/// Draws from a linear Gaussian model `y = beta . x`.
#[derive(Debug, Clone)]
pub struct LinearGaussian {
    pub dataset: Dataset,
    pub labels: Vec<f64>,
    pub law: FeatureLaw,
    pub beta: Vec<f64>,
}

/// `n` rows of `X ~ N(0, (1 - rho) I + rho J)` with `y = beta . X`.
pub fn gen_experiment1(n: usize, p: usize, rho: f64, beta: &[f64], seed: u64) -> Result<LinearGaussian> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Config(format!("correlation {rho} must lie in [0, 1)")));
    }
    if beta.len() != p {
        return Err(Error::Dimension {
            expected: p,
            got: beta.len(),
        });
    }
    let law = FeatureLaw::Gaussian(GaussianSpec::equicorrelated(p, rho)?);
    let mut rng = stream_rng(seed, 0);
    let rows = law.sample(&mut rng, n)?;
    let labels = rows.iter().map(|r| dot(beta, r)).collect();
    Ok(LinearGaussian {
        dataset: Dataset::continuous(&rows)?,
        labels,
        law,
        beta: beta.to_vec(),
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Class-dependent linear model over a three-component Gaussian mixture.
#[derive(Debug, Clone)]
pub struct ToyCategorical {
    /// Columns `x0, x1, x2` and the categorical `z` in {a, b, c}.
    pub dataset: Dataset,
    pub labels: Vec<f64>,
    pub law: MixtureLaw,
    /// Per-class coefficients over the continuous columns.
    pub b: Vec<Vec<f64>>,
}

pub const TOY_CLASSES: [&str; 3] = ["a", "b", "c"];
pub const TOY_CLASS_COLUMN: usize = 3;
/// The reference observation `(0.35, -1.61, -0.11, z = a)`.
pub const TOY_OBSERVATION: [f64; 4] = [0.35, -1.61, -0.11, 0.0];

fn symmetric(rows: [[f64; 3]; 3]) -> DMatrix<f64> {
    let m = DMatrix::from_fn(3, 3, |i, j| rows[i][j]);
    // The published matrices are symmetric only to about 1e-9.
    (&m + m.transpose()) * 0.5
}

pub fn toy_law() -> Result<(MixtureLaw, Vec<Vec<f64>>)> {
    let sigma_a = symmetric([
        [0.41871254, -0.790061361, 0.46956991],
        [-0.79006136, 1.90865098, -0.82571655],
        [0.46956991, -0.82571655, 0.95835472],
    ]);
    let sigma_b = symmetric([
        [0.55326081, 0.11811951, -0.70677924],
        [0.11811951, 2.73312979, -2.94400196],
        [-0.70677924, -2.94400196, 4.22105088],
    ]);
    let sigma_c = symmetric([
        [9.2859966, 1.12872646, 2.4224434],
        [1.12872646, 0.92891237, -0.14373393],
        [2.4224434, -0.14373393, 1.81601676],
    ]);
    let components = [sigma_a, sigma_b, sigma_c]
        .into_iter()
        .map(|s| GaussianSpec::new(vec![0.0; 3], s))
        .collect::<Result<Vec<_>>>()?;
    let law = MixtureLaw::new(vec![1.0 / 3.0; 3], components, TOY_CLASS_COLUMN)?;
    let b = vec![vec![1.0, 3.0, 5.0], vec![-5.0, -10.0, -8.0], vec![6.0, 1.0, 0.0]];
    Ok((law, b))
}

impl ToyCategorical {
    pub fn predict(&self, x: &[f64]) -> f64 {
        toy_predict(&self.b, x)
    }

    /// Exact `E[f | X_S = x_S]` where `s` may include the class column.
    pub fn exact_value(&self, s: &[usize], x: &[f64]) -> Result<f64> {
        let cont: Vec<usize> = s.iter().copied().filter(|&c| c != TOY_CLASS_COLUMN).collect();
        let allowed: Vec<bool> = if s.contains(&TOY_CLASS_COLUMN) {
            (0..3).map(|k| k as f64 == x[TOY_CLASS_COLUMN]).collect()
        } else {
            vec![true; 3]
        };
        self.law.linear_expectation(&self.b, &cont, x, &allowed)
    }

    /// Exact value when the class is only known through some indicators:
    /// `known[k] = Some(true)` pins class `k`, `Some(false)` excludes it.
    pub fn exact_value_indicators(&self, cont: &[usize], x: &[f64], known: &[Option<bool>]) -> Result<f64> {
        let allowed = allowed_classes(known, self.b.len());
        self.law.linear_expectation(&self.b, cont, x, &allowed)
    }
}

/// Classes consistent with partially observed indicators. Classes past
/// `known.len()` have no indicator (the dropped category of a dummy
/// encoding).
pub fn allowed_classes(known: &[Option<bool>], n_classes: usize) -> Vec<bool> {
    match known.iter().position(|k| *k == Some(true)) {
        Some(hot) => (0..n_classes).map(|k| k == hot).collect(),
        None => (0..n_classes)
            .map(|k| known.get(k).copied().flatten() != Some(false))
            .collect(),
    }
}

pub fn toy_predict(b: &[Vec<f64>], x: &[f64]) -> f64 {
    let z = x[TOY_CLASS_COLUMN] as usize;
    dot(&b[z], &x[..TOY_CLASS_COLUMN])
}

pub fn gen_toy_categorical(n: usize, seed: u64) -> Result<ToyCategorical> {
    let (law, b) = toy_law()?;
    let mut rng = stream_rng(seed, 0);
    let rows = FeatureLaw::Mixture(law.clone()).sample(&mut rng, n)?;
    let labels = rows.iter().map(|r| toy_predict(&b, r)).collect();
    let meta = vec![
        FeatureMeta::continuous("x0"),
        FeatureMeta::continuous("x1"),
        FeatureMeta::continuous("x2"),
        FeatureMeta::categorical("z", TOY_CLASSES.iter().map(|s| s.to_string()).collect()),
    ];
    Ok(ToyCategorical {
        dataset: Dataset::from_rows(meta, &rows)?,
        labels,
        law,
        b,
    })
}
