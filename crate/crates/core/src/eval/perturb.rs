//! Controlled rating errors: noisy referees, commensuration bias and review
//! sub-sampling.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Review, ScaleSpec};
use crate::error::{Error, Result};

/// Standard deviation of the noise added to commensurated overall scores, in aspect points.
pub const COMMENSURATION_NOISE: f64 = 0.5;
/// Readability weight of the COMM-READ scenario.
pub const READABILITY_EMPHASIS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationKind {
    RefereeNoise,
    Commensuration,
    ReviewSubsample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    pub kind: PerturbationKind,
    /// Free-form label used in reports, e.g. `COMM-EQ`.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub sigma: f64,
    /// Fraction of referees (noise, commensuration) or reviews (sub-sampling).
    pub alpha: f64,
    #[serde(default)]
    pub weights: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
}

impl PerturbationConfig {
    pub fn referee_noise(sigma: f64, alpha: f64, seed: u64) -> Self {
        PerturbationConfig {
            kind: PerturbationKind::RefereeNoise,
            name: None,
            sigma,
            alpha,
            weights: BTreeMap::new(),
            seed,
        }
    }

    pub fn subsample(alpha: f64, seed: u64) -> Self {
        PerturbationConfig {
            kind: PerturbationKind::ReviewSubsample,
            name: None,
            sigma: 0.0,
            alpha,
            weights: BTreeMap::new(),
            seed,
        }
    }

    pub fn commensuration(name: &str, weights: BTreeMap<String, f64>, alpha: f64, seed: u64) -> Self {
        PerturbationConfig {
            kind: PerturbationKind::Commensuration,
            name: Some(name.to_string()),
            sigma: COMMENSURATION_NOISE,
            alpha,
            weights,
            seed,
        }
    }

    /// Equal weight on every aspect.
    pub fn comm_eq(scale: &ScaleSpec, alpha: f64, seed: u64) -> Self {
        let w = 1.0 / scale.aspects.len() as f64;
        let weights = scale.aspects.iter().map(|a| (a.name.clone(), w)).collect();
        Self::commensuration("COMM-EQ", weights, alpha, seed)
    }

    /// Readability at [`READABILITY_EMPHASIS`], the rest shared equally.
    pub fn comm_read(scale: &ScaleSpec, alpha: f64, seed: u64) -> Result<Self> {
        Self::emphasise(scale, "readability", READABILITY_EMPHASIS, "COMM-READ", alpha, seed)
    }

    /// Originality discarded, the rest shared equally.
    pub fn comm_con(scale: &ScaleSpec, alpha: f64, seed: u64) -> Result<Self> {
        Self::emphasise(scale, "originality", 0.0, "COMM-CON", alpha, seed)
    }

    fn emphasise(
        scale: &ScaleSpec,
        aspect: &str,
        weight: f64,
        name: &str,
        alpha: f64,
        seed: u64,
    ) -> Result<Self> {
        if scale.aspect(aspect).is_none() || scale.aspects.len() < 2 {
            return Err(Error::Config(format!("{name} needs a `{aspect}` aspect and at least one other")));
        }
        let rest = (1.0 - weight) / (scale.aspects.len() - 1) as f64;
        let weights = scale
            .aspects
            .iter()
            .map(|a| (a.name.clone(), if a.name == aspect { weight } else { rest }))
            .collect();
        Ok(Self::commensuration(name, weights, alpha, seed))
    }

    pub fn label(&self) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        match self.kind {
            PerturbationKind::RefereeNoise => format!("noise(sigma={}, alpha={})", self.sigma, self.alpha),
            PerturbationKind::Commensuration => format!("commensuration(alpha={})", self.alpha),
            PerturbationKind::ReviewSubsample => format!("subsample(alpha={})", self.alpha),
        }
    }

    pub fn validate(&self, scale: &ScaleSpec) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha {} must lie in (0, 1)", self.alpha)));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::Config(format!("sigma {} must be non-negative", self.sigma)));
        }
        if self.kind == PerturbationKind::Commensuration {
            if let Some(name) = self.weights.keys().find(|a| scale.aspect(a).is_none()) {
                return Err(Error::Config(format!("weight for unknown aspect `{name}`")));
            }
            if self.weights.values().any(|w| !(w.is_finite() && *w >= 0.0)) {
                return Err(Error::Config("aspect weights must be non-negative".into()));
            }
            let total: f64 = self.weights.values().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!("aspect weights sum to {total}, not 1")));
            }
        }
        Ok(())
    }
}

/// Applies `cfg` to a copy of `dataset`. Deterministic per seed.
pub fn perturb(dataset: &Dataset, cfg: &PerturbationConfig) -> Result<Dataset> {
    let scale = dataset.scale();
    cfg.validate(scale)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut reviews = dataset.reviews().to_vec();
    match cfg.kind {
        PerturbationKind::RefereeNoise => {
            if cfg.sigma == 0.0 {
                return Ok(dataset.clone());
            }
            let affected = pick_referees(dataset, cfg.alpha, &mut rng);
            let noise = Normal::new(0.0, cfg.sigma).expect("sigma validated");
            for r in reviews.iter_mut().filter(|r| affected.contains(r.referee_id.as_str())) {
                r.overall_score = scale.overall.clamp((r.overall_score + noise.sample(&mut rng)).round());
                for a in &scale.aspects {
                    let v = r.aspect_scores.get_mut(&a.name).expect("dataset has every aspect");
                    *v = a.bounds().clamp((*v + noise.sample(&mut rng)).round());
                }
            }
        }
        PerturbationKind::Commensuration => {
            let affected = pick_referees(dataset, cfg.alpha, &mut rng);
            let normal = Normal::new(0.0, 1.0).expect("unit normal");
            for r in reviews.iter_mut().filter(|r| affected.contains(r.referee_id.as_str())) {
                let z = normal.sample(&mut rng);
                r.overall_score = commensurate(r, scale, &cfg.weights, cfg.sigma * z);
            }
        }
        PerturbationKind::ReviewSubsample => {
            let target = (cfg.alpha * reviews.len() as f64).round() as usize;
            let mut remaining: BTreeMap<&str, usize> = BTreeMap::new();
            for r in dataset.reviews() {
                *remaining.entry(r.paper_id.as_str()).or_default() += 1;
            }
            let mut order: Vec<usize> = (0..reviews.len()).collect();
            order.shuffle(&mut rng);
            let mut dropped = BTreeSet::new();
            for i in order {
                if dropped.len() == target {
                    break;
                }
                let left = remaining.get_mut(dataset.reviews()[i].paper_id.as_str()).unwrap();
                if *left > 1 {
                    *left -= 1;
                    dropped.insert(i);
                }
            }
            if dropped.len() < target {
                log::warn!(
                    "removed {} of {target} requested reviews to keep one review per paper",
                    dropped.len()
                );
            }
            reviews = reviews
                .into_iter()
                .enumerate()
                .filter(|(i, _)| !dropped.contains(i))
                .map(|(_, r)| r)
                .collect();
        }
    }
    dataset.with_reviews(reviews)
}

/// Weighted aspect score mapped affinely onto the overall scale, rounded and clipped.
///
/// Each aspect is first normalised to `[0, 1]`; `noise` is in aspect points and
/// is normalised by the weighted aspect range.
fn commensurate(review: &Review, scale: &ScaleSpec, weights: &BTreeMap<String, f64>, noise: f64) -> f64 {
    let mut level = 0.0;
    let mut range = 0.0;
    for (name, w) in weights {
        let bounds = scale.aspect(name).expect("weights validated").bounds();
        level += w * (review.aspect_scores[name] - bounds.min as f64) / bounds.width();
        range += w * bounds.width();
    }
    if range > 0.0 {
        level += noise / range;
    }
    let overall = scale.overall;
    overall.clamp((overall.min as f64 + level * overall.width()).round())
}

fn pick_referees<'a>(dataset: &'a Dataset, alpha: f64, rng: &mut ChaCha8Rng) -> BTreeSet<&'a str> {
    let mut referees: Vec<&str> = dataset.referees().collect();
    let k = (alpha * referees.len() as f64).round() as usize;
    referees.shuffle(rng);
    referees.into_iter().take(k).collect()
}
