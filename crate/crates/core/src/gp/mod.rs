//! Gaussian-process preference learning with a sparse variational posterior.
//!
//! Utilities `f` get a zero-mean GP prior over paper feature vectors. An
//! observed pair `x ≻ y` has likelihood `Φ((f(x) - f(y)) / (√2 σ))`; a tie is
//! two opposing half-weight observations. The posterior over inducing values
//! is fitted by natural-gradient variational inference: full-batch steps with
//! step halving when all observations fit in one batch, Robbins–Monro steps on
//! shuffled mini-batches otherwise.

mod inducing;
mod kernel;
pub mod probit;
mod svi;

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureLayout, Features};
use crate::prefs::PreferencePair;
use crate::ranking::RankingResult;

pub use inducing::kmeanspp_seeds;
pub use kernel::{Kernel, KernelKind};
pub use svi::{Objective, Observation};

pub const MODEL_FORMAT_VERSION: u32 = 1;

const JITTER_LADDER: [f64; 5] = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2];
const CONVERGENCE_WINDOW: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GpplConfig {
    pub kernel: KernelKind,
    /// `None` picks the median pairwise distance between training feature vectors.
    pub length_scale: Option<f64>,
    /// Defaults to `min(500, N)`.
    pub inducing_count: Option<usize>,
    /// Observations per natural-gradient step.
    pub batch_size: usize,
    pub max_iterations: usize,
    /// Relative ELBO change below which the fit has converged (over a 5-step window).
    pub convergence_tol: f64,
    /// Comparison noise σ; the probit argument is divided by `√2 σ`.
    pub noise_scale: f64,
    /// Robbins–Monro step size `(t + delay)^(-forgetting_rate)` for mini-batches.
    pub step_delay: f64,
    pub forgetting_rate: f64,
    pub seed: u64,
}

impl Default for GpplConfig {
    fn default() -> Self {
        GpplConfig {
            kernel: KernelKind::Matern32,
            length_scale: None,
            inducing_count: None,
            batch_size: 1000,
            max_iterations: 500,
            convergence_tol: 1e-4,
            noise_scale: 2.0,
            step_delay: 1.0,
            forgetting_rate: 0.7,
            seed: 0,
        }
    }
}

impl GpplConfig {
    /// Kernel with the configured length-scale, or the median heuristic over `points`.
    pub fn kernel_for(&self, points: &[&[f64]]) -> Kernel {
        let length_scale = self.length_scale.unwrap_or_else(|| median_distance(points));
        Kernel::new(self.kernel, length_scale)
    }

    fn validate(&self) -> Result<()> {
        if self.length_scale.is_some_and(|l| !(l.is_finite() && l > 0.0)) {
            return Err(Error::Config("GPPL length-scale must be positive".into()));
        }
        let positive = [
            self.convergence_tol,
            self.noise_scale,
            self.step_delay,
            self.forgetting_rate,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("GPPL numeric settings must be positive".into()));
        }
        if self.batch_size == 0 || self.max_iterations == 0 || self.inducing_count == Some(0) {
            return Err(Error::Config("GPPL counts must be positive".into()));
        }
        Ok(())
    }
}

/// Training data prepared for variational inference: inducing inputs,
/// projection and observations.
#[derive(Debug, Clone)]
pub struct Problem {
    ids: Vec<String>,
    kernel: Kernel,
    inducing: Vec<Vec<f64>>,
    jitter: f64,
    chol_mm: Cholesky<f64, Dyn>,
    objective: Objective,
}

impl Problem {
    pub fn prepare(features: &Features, pairs: &[PreferencePair], cfg: &GpplConfig) -> Result<Self> {
        cfg.validate()?;
        if features.is_empty() {
            return Err(Error::Training("no feature vectors".into()));
        }
        let ids: Vec<String> = features.vectors.keys().cloned().collect();
        let index: BTreeMap<&str, usize> =
            ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let points: Vec<&[f64]> = features.vectors.values().map(Vec::as_slice).collect();

        let mut observations = Vec::with_capacity(pairs.len());
        for p in pairs {
            let lookup = |id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::Training(format!("pair references paper `{id}` without features")))
            };
            let (b, w) = (lookup(&p.better)?, lookup(&p.worse)?);
            if b == w {
                return Err(Error::Training(format!("pair compares `{}` with itself", p.better)));
            }
            if p.is_tie() {
                observations.push(Observation { better: b, worse: w, weight: 0.5 });
                observations.push(Observation { better: w, worse: b, weight: 0.5 });
            } else {
                observations.push(Observation { better: b, worse: w, weight: 1.0 });
            }
        }
        if observations.is_empty() {
            return Err(Error::Training("no preference pairs to learn from".into()));
        }

        let kernel = cfg.kernel_for(&points);
        let wanted = cfg.inducing_count.unwrap_or(500).min(points.len());
        let chosen = kmeanspp_seeds(&points, wanted, cfg.seed);
        let inducing: Vec<Vec<f64>> = chosen.iter().map(|&i| points[i].to_vec()).collect();
        let (chol_mm, jitter) = factor_with_jitter(&kernel, &inducing)?;

        let projection = project(&kernel, &chol_mm, &inducing, &points);
        let kernel_diag_pairs: Vec<f64> = observations
            .iter()
            .map(|o| 2.0 - 2.0 * kernel.eval_unchecked(points[o.better], points[o.worse]))
            .collect();
        let objective = Objective::new(
            projection,
            observations,
            &kernel_diag_pairs,
            std::f64::consts::SQRT_2 * cfg.noise_scale,
        );
        Ok(Problem {
            ids,
            kernel,
            inducing,
            jitter,
            chol_mm,
            objective,
        })
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn num_inducing(&self) -> usize {
        self.inducing.len()
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }
}

const MEDIAN_SAMPLE: usize = 300;

/// Median Euclidean distance between distinct rows, over an evenly strided
/// sample of at most 300 rows; 1.0 when all rows coincide.
fn median_distance(points: &[&[f64]]) -> f64 {
    let stride = points.len().div_ceil(MEDIAN_SAMPLE).max(1);
    let sample: Vec<&[f64]> = points.iter().step_by(stride).copied().collect();
    let mut d = Vec::with_capacity(sample.len() * sample.len() / 2);
    for i in 0..sample.len() {
        for j in 0..i {
            let d2: f64 = sample[i].iter().zip(sample[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 > 0.0 {
                d.push(d2.sqrt());
            }
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    d.sort_by(f64::total_cmp);
    d[d.len() / 2]
}

fn factor_with_jitter(kernel: &Kernel, inducing: &[Vec<f64>]) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let refs: Vec<&[f64]> = inducing.iter().map(Vec::as_slice).collect();
    let k = kernel.gram(&refs);
    for jitter in JITTER_LADDER {
        let m = k.nrows();
        if let Some(chol) = Cholesky::new(&k + DMatrix::identity(m, m) * jitter) {
            if jitter > JITTER_LADDER[0] {
                log::warn!("inducing kernel matrix needed jitter {jitter:e}");
            }
            return Ok((chol, jitter));
        }
    }
    Err(Error::Training(format!(
        "inducing kernel matrix is not positive definite even with jitter {:e}",
        JITTER_LADDER[JITTER_LADDER.len() - 1]
    )))
}

fn project(
    kernel: &Kernel,
    chol_mm: &Cholesky<f64, Dyn>,
    inducing: &[Vec<f64>],
    points: &[&[f64]],
) -> DMatrix<f64> {
    let zs: Vec<&[f64]> = inducing.iter().map(Vec::as_slice).collect();
    let k_mn = kernel.cross(&zs, points);
    let a_t = chol_mm
        .l_dirty()
        .solve_lower_triangular(&k_mn)
        .expect("cholesky factor has a positive diagonal");
    a_t.transpose()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub iterations: usize,
    pub converged: bool,
    pub elbo_trace: Vec<f64>,
}

/// Fitted model: everything needed to predict utilities for new feature vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GpplModel {
    pub version: u32,
    pub config: GpplConfig,
    pub layout: FeatureLayout,
    pub inducing: Vec<Vec<f64>>,
    pub jitter: f64,
    /// Whitened variational mean.
    pub mean: Vec<f64>,
    /// Lower Cholesky factor of the whitened variational covariance, row-major.
    pub cov_factor: Vec<Vec<f64>>,
    pub report: FitReport,
    /// Posterior mean utilities of the training papers at fit time.
    pub training_utilities: BTreeMap<String, f64>,
    #[serde(skip)]
    cache: Option<PredictCache>,
}

#[derive(Debug, Clone)]
struct PredictCache {
    chol_mm: Cholesky<f64, Dyn>,
    mean: DVector<f64>,
    cov_factor: DMatrix<f64>,
}

/// Fits the variational posterior to the preference pairs.
pub fn fit(features: &Features, pairs: &[PreferencePair], cfg: &GpplConfig) -> Result<GpplModel> {
    let problem = Problem::prepare(features, pairs, cfg)?;
    let (q, report) = optimize(&problem, cfg)?;

    let m = problem.num_inducing();
    let cov = q.covariance();
    let cov = 0.5 * (&cov + cov.transpose());
    let cov_chol = Cholesky::new(cov)
        .ok_or_else(|| Error::Computation("variational covariance lost definiteness".into()))?;
    let l = cov_chol.l();
    let cov_factor: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| l[(i, j)]).collect()).collect();

    let item_mean = problem.objective.projection() * &q.mean;
    let training_utilities = problem
        .ids
        .iter()
        .cloned()
        .zip(item_mean.iter().copied())
        .collect();

    Ok(GpplModel {
        version: MODEL_FORMAT_VERSION,
        config: GpplConfig {
            length_scale: Some(problem.kernel.length_scale),
            ..cfg.clone()
        },
        layout: features.layout.clone(),
        inducing: problem.inducing.clone(),
        jitter: problem.jitter,
        mean: q.mean.iter().copied().collect(),
        cov_factor,
        report,
        training_utilities,
        cache: Some(PredictCache {
            chol_mm: problem.chol_mm.clone(),
            mean: q.mean,
            cov_factor: l,
        }),
    })
}

fn optimize(problem: &Problem, cfg: &GpplConfig) -> Result<(svi::Posterior, FitReport)> {
    let obj = &problem.objective;
    let n_obs = obj.num_observations();
    let mut q = svi::Posterior::prior(problem.num_inducing());
    let mut elbo = obj.elbo_of(&q);
    let mut trace = vec![elbo];
    let full_batch = cfg.batch_size >= n_obs;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..n_obs).collect();
    let mut cursor = n_obs;
    let mut rho: f64 = 1.0;
    let mut converged = false;
    let mut iterations = 0;

    for t in 0..cfg.max_iterations {
        iterations = t + 1;
        if full_batch {
            let mut accepted = None;
            for _ in 0..30 {
                let candidate = obj.natural_step(&q, &order, rho);
                match candidate {
                    Ok(c) => {
                        let e = obj.elbo_of(&c);
                        if e.is_finite() && e >= elbo - 1e-12 * elbo.abs().max(1.0) {
                            accepted = Some((c, e));
                            break;
                        }
                    }
                    Err(err) => log::debug!("rejected step at rho={rho}: {err}"),
                }
                rho *= 0.5;
            }
            let Some((c, e)) = accepted else {
                converged = true;
                break;
            };
            q = c;
            elbo = e;
            rho = (2.0 * rho).min(1.0);
        } else {
            if cursor + cfg.batch_size > n_obs {
                order.shuffle(&mut rng);
                cursor = 0;
            }
            let batch = &order[cursor..cursor + cfg.batch_size];
            cursor += cfg.batch_size;
            let step = (t as f64 + cfg.step_delay).powf(-cfg.forgetting_rate).min(1.0);
            q = obj.natural_step(&q, batch, step)?;
            elbo = obj.elbo_of(&q);
        }
        trace.push(elbo);
        if trace.len() > CONVERGENCE_WINDOW {
            let tail = &trace[trace.len() - CONVERGENCE_WINDOW - 1..];
            let settled = tail
                .windows(2)
                .all(|w| (w[1] - w[0]).abs() <= cfg.convergence_tol * w[1].abs().max(1e-12));
            if settled {
                converged = true;
                break;
            }
        }
    }
    if !elbo.is_finite() {
        return Err(Error::Computation("ELBO is not finite".into()));
    }
    log::debug!(
        "gppl: {} inducing, {} observations, {} iterations, elbo {elbo:.4}",
        problem.num_inducing(),
        n_obs,
        iterations
    );
    Ok((
        q,
        FitReport {
            iterations,
            converged,
            elbo_trace: trace,
        },
    ))
}

impl GpplModel {
    fn cache(&self) -> Result<PredictCache> {
        if let Some(c) = &self.cache {
            return Ok(c.clone());
        }
        let kernel = self.stored_kernel()?;
        let refs: Vec<&[f64]> = self.inducing.iter().map(Vec::as_slice).collect();
        let m = refs.len();
        let k = kernel.gram(&refs) + DMatrix::identity(m, m) * self.jitter;
        let chol_mm = Cholesky::new(k)
            .ok_or_else(|| Error::Computation("stored inducing matrix is not positive definite".into()))?;
        if self.mean.len() != m || self.cov_factor.len() != m {
            return Err(Error::Schema("model parameters do not match the inducing set".into()));
        }
        let cov_factor = DMatrix::from_fn(m, m, |i, j| self.cov_factor[i][j]);
        Ok(PredictCache {
            chol_mm,
            mean: DVector::from_column_slice(&self.mean),
            cov_factor,
        })
    }

    fn stored_kernel(&self) -> Result<Kernel> {
        let l = self
            .config
            .length_scale
            .ok_or_else(|| Error::Schema("model does not record its length-scale".into()))?;
        Ok(Kernel::new(self.config.kernel, l))
    }

    fn check_layout(&self, features: &Features) -> Result<()> {
        if features.layout != self.layout {
            return Err(Error::Schema(
                "feature layout differs from the one the model was trained on".into(),
            ));
        }
        let dim = self.inducing.first().map_or(0, Vec::len);
        if let Some((id, _)) = features.vectors.iter().find(|(_, v)| v.len() != dim) {
            return Err(Error::Schema(format!("feature vector of `{id}` has the wrong length")));
        }
        Ok(())
    }

    /// Posterior mean and variance of the utility of every paper in `features`.
    pub fn predict_with_variance(&self, features: &Features) -> Result<BTreeMap<String, (f64, f64)>> {
        self.check_layout(features)?;
        let cache = self.cache()?;
        let kernel = self.stored_kernel()?;
        let points: Vec<&[f64]> = features.vectors.values().map(Vec::as_slice).collect();
        let projection = project(&kernel, &cache.chol_mm, &self.inducing, &points);
        let means = &projection * &cache.mean;
        let spread = &projection * &cache.cov_factor;
        Ok(features
            .vectors
            .keys()
            .enumerate()
            .map(|(i, id)| {
                let prior_residual = (1.0 - projection.row(i).norm_squared()).max(0.0);
                let var = prior_residual + spread.row(i).norm_squared();
                (id.clone(), (means[i], var))
            })
            .collect())
    }

    pub fn predict_utilities(&self, features: &Features) -> Result<RankingResult> {
        let predicted = self.predict_with_variance(features)?;
        Ok(RankingResult::from_utilities(
            "GPPL",
            predicted.into_iter().map(|(id, (mean, _))| (id, mean)),
            serde_json::to_value(&self.config)?,
        ))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: GpplModel = serde_json::from_str(&text)?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
                model.version
            )));
        }
        Ok(model)
    }
}

/// Fits on `pairs` and ranks every paper in `features`.
pub fn rank_gppl(features: &Features, pairs: &[PreferencePair], cfg: &GpplConfig) -> Result<RankingResult> {
    let model = fit(features, pairs, cfg)?;
    model.predict_utilities(features)
}
