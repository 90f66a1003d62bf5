//! Whitened sparse variational objective for probit preference likelihoods.
//!
//! With inducing values `u = L_mm v` and `q(v) = N(mean, cov)`, the latent
//! utility of item `i` has mean `a_iᵀ mean` and the covariance of two items is
//! `k(x_i, x_j) - a_iᵀ a_j + a_iᵀ cov a_j`, where row `a_i` of the projection is
//! `L_mm⁻¹ k_m(x_i)`. Each observation `better ≻ worse` contributes
//! `weight · E_q[ln Φ((f_better - f_worse) / scale)]`; the ELBO subtracts
//! `KL(q(v) ‖ N(0, I))`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::probit::{probit_expectation, ProbitExpectation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub better: usize,
    pub worse: usize,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct Objective {
    projection: DMatrix<f64>,
    residual: Vec<f64>,
    observations: Vec<Observation>,
    scale: f64,
}

/// Variational posterior in natural form: mean and Cholesky factor of the precision.
#[derive(Debug, Clone)]
pub(crate) struct Posterior {
    pub mean: DVector<f64>,
    pub precision: Cholesky<f64, Dyn>,
}

impl Posterior {
    pub fn prior(m: usize) -> Self {
        Posterior {
            mean: DVector::zeros(m),
            precision: Cholesky::new(DMatrix::identity(m, m)).expect("identity is SPD"),
        }
    }

    /// Upper-triangular `R` with `cov = R Rᵀ`.
    pub fn cov_factor(&self) -> DMatrix<f64> {
        let m = self.mean.len();
        let l = self.precision.l();
        let l_inv = l
            .solve_lower_triangular(&DMatrix::identity(m, m))
            .expect("precision factor has a positive diagonal");
        l_inv.transpose()
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        self.precision.inverse()
    }

    fn ln_det_cov(&self) -> f64 {
        -2.0 * self.precision.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }
}

impl Objective {
    /// `kernel_diag_pairs[k]` is `k(x_b, x_b) + k(x_w, x_w) - 2 k(x_b, x_w)` for observation `k`.
    pub fn new(
        projection: DMatrix<f64>,
        observations: Vec<Observation>,
        kernel_diag_pairs: &[f64],
        scale: f64,
    ) -> Self {
        let residual = observations
            .iter()
            .zip(kernel_diag_pairs)
            .map(|(o, &kd)| {
                let d = projection.row(o.better) - projection.row(o.worse);
                (kd - d.norm_squared()).max(0.0)
            })
            .collect();
        Objective {
            projection,
            residual,
            observations,
            scale,
        }
    }

    pub fn num_inducing(&self) -> usize {
        self.projection.ncols()
    }

    pub fn num_observations(&self) -> usize {
        self.observations.len()
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub(crate) fn projection(&self) -> &DMatrix<f64> {
        &self.projection
    }

    /// Per-observation expectations under the posterior given by `mean` and `cov = factor factorᵀ`.
    fn local(
        &self,
        mean: &DVector<f64>,
        factor: &DMatrix<f64>,
        batch: impl Iterator<Item = usize>,
    ) -> Vec<(usize, ProbitExpectation)> {
        let item_mean = &self.projection * mean;
        let item_factor = &self.projection * factor;
        batch
            .map(|k| {
                let o = self.observations[k];
                let diff_mean = item_mean[o.better] - item_mean[o.worse];
                let diff = item_factor.row(o.better) - item_factor.row(o.worse);
                let var = self.residual[k] + diff.norm_squared();
                (k, probit_expectation(diff_mean, var, self.scale))
            })
            .collect()
    }

    fn expected_log_lik(&self, mean: &DVector<f64>, factor: &DMatrix<f64>) -> f64 {
        self.local(mean, factor, 0..self.observations.len())
            .iter()
            .map(|(k, e)| self.observations[*k].weight * e.value)
            .sum()
    }

    /// ELBO at `mean` and symmetric positive definite `cov`.
    pub fn elbo(&self, mean: &DVector<f64>, cov: &DMatrix<f64>) -> Result<f64> {
        let chol = spd_cholesky(cov)?;
        let factor = chol.l();
        let ln_det: f64 = 2.0 * factor.diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let kl = 0.5 * (cov.trace() + mean.norm_squared() - mean.len() as f64 - ln_det);
        Ok(self.expected_log_lik(mean, &factor) - kl)
    }

    pub(crate) fn elbo_of(&self, q: &Posterior) -> f64 {
        let factor = q.cov_factor();
        let kl = 0.5 * (factor.norm_squared() + q.mean.norm_squared()
            - q.mean.len() as f64
            - q.ln_det_cov());
        self.expected_log_lik(&q.mean, &factor) - kl
    }

    /// Analytic gradients of the ELBO with respect to `mean` and `cov`.
    pub fn gradient(
        &self,
        mean: &DVector<f64>,
        cov: &DMatrix<f64>,
    ) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let chol = spd_cholesky(cov)?;
        let factor = chol.l();
        let local = self.local(mean, &factor, 0..self.observations.len());
        let (g_mean, g_cov) = self.likelihood_gradients(&local, 1.0);
        let m = mean.len();
        let grad_mean = g_mean - mean;
        let grad_cov = g_cov + 0.5 * (chol.inverse() - DMatrix::identity(m, m));
        Ok((grad_mean, grad_cov))
    }

    /// Gradients of the (scaled) expected log-likelihood over `local` observations.
    fn likelihood_gradients(
        &self,
        local: &[(usize, ProbitExpectation)],
        batch_scale: f64,
    ) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.projection.nrows();
        let m = self.projection.ncols();
        let mut item_grad = DVector::zeros(n);
        let mut curvature = DMatrix::zeros(n, m);
        for &(k, e) in local {
            let o = self.observations[k];
            let w = o.weight * batch_scale;
            item_grad[o.better] += w * e.d_mean;
            item_grad[o.worse] -= w * e.d_mean;
            let diff = self.projection.row(o.better) - self.projection.row(o.worse);
            let h = w * e.d_var;
            let mut row = curvature.row_mut(o.better);
            row += h * &diff;
            let mut row = curvature.row_mut(o.worse);
            row -= h * &diff;
        }
        let g_mean = self.projection.tr_mul(&item_grad);
        let g_cov = self.projection.tr_mul(&curvature);
        (g_mean, g_cov)
    }

    /// One natural-gradient step of size `rho` using the observations in `batch`.
    pub(crate) fn natural_step(
        &self,
        q: &Posterior,
        batch: &[usize],
        rho: f64,
    ) -> Result<Posterior> {
        let m = q.mean.len();
        let factor = q.cov_factor();
        let local = self.local(&q.mean, &factor, batch.iter().copied());
        let batch_scale = self.observations.len() as f64 / batch.len().max(1) as f64;
        let (g_mean, g_cov) = self.likelihood_gradients(&local, batch_scale);

        let g_cov = 0.5 * (&g_cov + g_cov.transpose());
        let target_precision = DMatrix::identity(m, m) - 2.0 * &g_cov;
        let target_shift = g_mean - 2.0 * &g_cov * &q.mean;

        let precision = q.precision.l() * q.precision.l().transpose();
        let shift = &precision * &q.mean;
        let new_precision = (1.0 - rho) * precision + rho * target_precision;
        let new_shift = (1.0 - rho) * shift + rho * target_shift;

        let chol = spd_cholesky(&new_precision)?;
        let mean = chol.solve(&new_shift);
        if mean.iter().any(|x| !x.is_finite()) {
            return Err(Error::Computation("variational mean diverged".into()));
        }
        Ok(Posterior {
            mean,
            precision: chol,
        })
    }
}

fn spd_cholesky(a: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    let sym = 0.5 * (a + a.transpose());
    Cholesky::new(sym).ok_or_else(|| Error::Computation("matrix is not positive definite".into()))
}
