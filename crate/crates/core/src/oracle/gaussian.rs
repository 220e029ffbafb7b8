use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Multivariate normal law `N(mean, cov)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianSpec {
    pub fn new(mean: Vec<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let p = mean.len();
        if cov.nrows() != p || cov.ncols() != p {
            return Err(Error::Dimension {
                expected: p,
                got: cov.nrows(),
            });
        }
        for i in 0..p {
            for j in 0..i {
                if (cov[(i, j)] - cov[(j, i)]).abs() > 1e-12 {
                    return Err(Error::Numerical(format!("covariance is not symmetric at ({i}, {j})")));
                }
            }
        }
        if p > 0 {
            let min_eig = cov.clone().symmetric_eigen().eigenvalues.min();
            if min_eig < -1e-10 {
                return Err(Error::Numerical(format!(
                    "covariance is not positive semi-definite (eigenvalue {min_eig:e})"
                )));
            }
        }
        Ok(Self {
            mean: DVector::from_vec(mean),
            cov,
        })
    }

    /// Unit-variance equicorrelation law: `(1 - rho) I + rho J`.
    pub fn equicorrelated(p: usize, rho: f64) -> Result<Self> {
        let cov = DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { rho });
        Self::new(vec![0.0; p], cov)
    }

    pub fn independent(p: usize) -> Self {
        Self {
            mean: DVector::zeros(p),
            cov: DMatrix::identity(p, p),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Law of `X_rest | X_s = x_s`, where `rest` lists the complement of `s`
    /// in increasing order. `x_s` holds one value per entry of `s`.
    ///
    /// A singular `Sigma_SS` is an error unless `pseudo_inverse` is set.
    pub fn conditional(&self, s: &[usize], x_s: &[f64], pseudo_inverse: bool) -> Result<(Vec<usize>, GaussianSpec)> {
        let p = self.dim();
        if s.len() != x_s.len() {
            return Err(Error::Dimension {
                expected: s.len(),
                got: x_s.len(),
            });
        }
        let rest: Vec<usize> = (0..p).filter(|i| !s.contains(i)).collect();
        if s.is_empty() {
            return Ok((rest, self.clone()));
        }
        let sigma_ss = self.cov.select_rows(s).select_columns(s);
        let sigma_rs = self.cov.select_rows(&rest).select_columns(s);
        let sigma_rr = self.cov.select_rows(&rest).select_columns(&rest);
        let diff = DVector::from_iterator(s.len(), s.iter().zip(x_s).map(|(&i, &v)| v - self.mean[i]));

        // K = Sigma_RS Sigma_SS^{-1}
        let k: DMatrix<f64> = match sigma_ss.clone().cholesky() {
            Some(ch) => ch.solve(&sigma_rs.transpose()).transpose(),
            None if pseudo_inverse => {
                log::warn!("conditioning covariance is singular; using the pseudo-inverse");
                let pinv = sigma_ss
                    .pseudo_inverse(1e-12)
                    .map_err(|e| Error::Numerical(e.to_string()))?;
                &sigma_rs * pinv
            }
            None => {
                return Err(Error::Numerical(format!(
                    "covariance of the conditioning columns {s:?} is singular"
                )))
            }
        };
        let mean_r = DVector::from_iterator(rest.len(), rest.iter().map(|&i| self.mean[i])) + &k * diff;
        let mut cov_r = sigma_rr - &k * sigma_rs.transpose();
        // Restore exact symmetry lost to rounding.
        let sym = (&cov_r + cov_r.transpose()) * 0.5;
        cov_r = sym;
        Ok((
            rest,
            GaussianSpec {
                mean: mean_r,
                cov: cov_r,
            },
        ))
    }

    /// Density at `x`, restricted to the coordinates `idx`.
    pub fn marginal_density(&self, idx: &[usize], x: &[f64]) -> Result<f64> {
        if idx.is_empty() {
            return Ok(1.0);
        }
        let cov = self.cov.select_rows(idx).select_columns(idx);
        let ch = cov
            .cholesky()
            .ok_or_else(|| Error::Numerical("singular marginal covariance".into()))?;
        let diff = DVector::from_iterator(idx.len(), idx.iter().zip(x).map(|(&i, &v)| v - self.mean[i]));
        let sol = ch.solve(&diff);
        let quad = diff.dot(&sol);
        let log_det: f64 = ch.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
        let k = idx.len() as f64;
        Ok((-0.5 * (quad + log_det + k * (2.0 * std::f64::consts::PI).ln())).exp())
    }

    pub fn sampler(&self) -> GaussianSampler {
        GaussianSampler::new(self)
    }
}

/// Draws from a fixed normal law through a square-root factor of the covariance.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    mean: DVector<f64>,
    factor: DMatrix<f64>,
}

impl GaussianSampler {
    pub fn new(spec: &GaussianSpec) -> Self {
        let p = spec.dim();
        let factor = match spec.cov.clone().cholesky() {
            Some(ch) => ch.l(),
            None if p == 0 => DMatrix::zeros(0, 0),
            None => {
                // Semi-definite: V diag(sqrt(max(lambda, 0))).
                let eig = spec.cov.clone().symmetric_eigen();
                let mut v = eig.eigenvectors.clone();
                for (j, &l) in eig.eigenvalues.iter().enumerate() {
                    let s = l.max(0.0).sqrt();
                    v.column_mut(j).scale_mut(s);
                }
                v
            }
        };
        Self {
            mean: spec.mean.clone(),
            factor,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Writes one draw into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [f64], out: &mut [f64]) {
        let p = self.dim();
        for v in z.iter_mut().take(p) {
            *v = rng.sample(StandardNormal);
        }
        for (i, o) in out.iter_mut().enumerate().take(p) {
            let mut acc = self.mean[i];
            for (j, &zj) in z.iter().enumerate().take(p) {
                acc += self.factor[(i, j)] * zj;
            }
            *o = acc;
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<Vec<f64>> {
        let p = self.dim();
        let mut z = vec![0.0; p];
        (0..n)
            .map(|_| {
                let mut out = vec![0.0; p];
                self.sample_into(rng, &mut z, &mut out);
                out
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn empty_conditioning_is_identity() {
        let g = GaussianSpec::equicorrelated(3, 0.4).unwrap();
        let (rest, c) = g.conditional(&[], &[], false).unwrap();
        assert_eq!(rest, vec![0, 1, 2]);
        assert_eq!(c, g);
    }

    #[test]
    fn bivariate_closed_form() {
        let rho = 0.6;
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]);
        let g = GaussianSpec::new(vec![1.0, -2.0], cov).unwrap();
        let (rest, c) = g.conditional(&[0], &[2.5], false).unwrap();
        assert_eq!(rest, vec![1]);
        assert_abs_diff_eq!(c.mean[0], -2.0 + rho * 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c.cov[(0, 0)], 1.0 - rho * rho, epsilon = 1e-14);
    }

    #[test]
    fn rejects_asymmetric_and_indefinite() {
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(GaussianSpec::new(vec![0.0; 2], cov).is_err());
        assert!(GaussianSpec::new(
            vec![0.0; 3],
            DMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { -0.7 })
        )
        .is_err());
    }

    #[test]
    fn singular_needs_opt_in() {
        let cov = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let g = GaussianSpec::new(vec![0.0; 3], cov).unwrap();
        assert!(g.conditional(&[0, 1], &[1.0, 1.0], false).is_err());
        let (_, c) = g.conditional(&[0, 1], &[1.0, 1.0], true).unwrap();
        assert_abs_diff_eq!(c.mean[0], 0.0, epsilon = 1e-12);
    }
}
