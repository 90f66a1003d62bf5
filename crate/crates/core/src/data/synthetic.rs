//! Seeded synthetic peer-review processes with known paper utilities.
//!
//! Every paper gets a latent utility `u ~ N(0, 1)`. Referees carry a
//! calibration offset and a per-review noise level; overall scores are a
//! rounded, clipped linear map of `u` plus offset and noise. Acceptance is the
//! top quota by a noisy committee reading of the mean overall score, and
//! accepted papers get log-linear citation counts.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Dataset, Paper, Review, ScaleSpec, ACL_SECTIONS};
use crate::error::{Error, Result};
use crate::features::{relatedness_feature, TextFeatures};

/// True utility per paper id.
pub type Utilities = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub papers: usize,
    pub referees: usize,
    pub reviews_per_paper: usize,
    /// Upper bound on reviews per referee; `None` means unbounded.
    pub max_reviews_per_referee: Option<usize>,
    pub tracks: usize,
    /// Standard deviation of referee calibration offsets, in overall-scale points.
    pub bias_spread: f64,
    /// Standard deviation of per-review overall-score noise, in overall-scale points.
    pub score_noise: f64,
    /// Standard deviation of per-review aspect-score noise, in aspect-scale points.
    pub aspect_noise: f64,
    /// Correlation of each aspect's latent quality with the paper utility.
    pub aspect_loading: f64,
    pub acceptance_quota: f64,
    /// Noise on the committee's reading of the mean overall score.
    pub committee_noise: f64,
    pub citation_base: f64,
    pub citation_scale: f64,
    pub citation_noise: f64,
    pub scale: ScaleSpec,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            papers: 100,
            referees: 40,
            reviews_per_paper: 3,
            max_reviews_per_referee: None,
            tracks: 4,
            bias_spread: 1.0,
            score_noise: 0.5,
            aspect_noise: 0.5,
            aspect_loading: 0.8,
            acceptance_quota: 0.25,
            committee_noise: 0.3,
            citation_base: 20.0,
            citation_scale: 1.0,
            citation_noise: 0.5,
            scale: ScaleSpec::acl2018(),
        }
    }
}

impl SyntheticConfig {
    /// 20 papers, 8 referees.
    pub fn small() -> Self {
        SyntheticConfig {
            papers: 20,
            referees: 8,
            tracks: 2,
            ..Default::default()
        }
    }

    /// The desk-scale benchmark: 150 papers, 40 referees, 3 reviews each.
    pub fn benchmark() -> Self {
        SyntheticConfig {
            papers: 150,
            ..Default::default()
        }
    }

    pub fn noiseless(mut self) -> Self {
        self.bias_spread = 0.0;
        self.score_noise = 0.0;
        self.aspect_noise = 0.0;
        self.committee_noise = 0.0;
        self.citation_noise = 0.0;
        self
    }

    fn validate(&self) -> Result<()> {
        self.scale.validate()?;
        if self.papers == 0 || self.reviews_per_paper == 0 {
            return Err(Error::Config("papers and reviews_per_paper must be positive".into()));
        }
        if self.referees < self.reviews_per_paper {
            return Err(Error::Config(format!(
                "{} referees cannot give {} distinct reviews per paper",
                self.referees, self.reviews_per_paper
            )));
        }
        if let Some(cap) = self.max_reviews_per_referee {
            let slots = cap * self.referees;
            let needed = self.papers * self.reviews_per_paper;
            if slots < needed {
                return Err(Error::Config(format!(
                    "{slots} referee slots cannot cover {needed} required reviews"
                )));
            }
        }
        if self.tracks == 0 {
            return Err(Error::Config("at least one track required".into()));
        }
        if !(0.0..=1.0).contains(&self.acceptance_quota) {
            return Err(Error::Config("acceptance_quota must lie in [0, 1]".into()));
        }
        let spreads = [
            self.bias_spread,
            self.score_noise,
            self.aspect_noise,
            self.committee_noise,
            self.citation_noise,
        ];
        if spreads.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::Config("noise and bias spreads must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.aspect_loading) {
            return Err(Error::Config("aspect_loading must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Generates a dataset together with the latent utility of every paper.
pub fn generate_synthetic(cfg: &SyntheticConfig, seed: u64) -> Result<(Dataset, Utilities)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = &cfg.scale;
    let n = cfg.papers;

    let paper_ids: Vec<String> = (0..n).map(|i| format!("p{i:05}")).collect();
    let referee_ids: Vec<String> = (0..cfg.referees).map(|i| format!("e{i:04}")).collect();

    let utility: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
    let aspect_quality: Vec<Vec<f64>> = utility
        .iter()
        .map(|&u| {
            let l = cfg.aspect_loading;
            scale
                .aspects
                .iter()
                .map(|_| l * u + (1.0 - l * l).sqrt() * normal(&mut rng))
                .collect()
        })
        .collect();
    let offsets: Vec<f64> = (0..cfg.referees)
        .map(|_| cfg.bias_spread * normal(&mut rng))
        .collect();

    // Balanced assignment: each paper goes to the least-loaded referees.
    let mut load = vec![0usize; cfg.referees];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut assignment: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &p in &order {
        let mut candidates: Vec<(usize, u64, usize)> = (0..cfg.referees)
            .filter(|&e| cfg.max_reviews_per_referee.is_none_or(|cap| load[e] < cap))
            .map(|e| (load[e], rng.random::<u64>(), e))
            .collect();
        candidates.sort_unstable();
        if candidates.len() < cfg.reviews_per_paper {
            return Err(Error::Config("referee capacity exhausted during assignment".into()));
        }
        for &(_, _, e) in &candidates[..cfg.reviews_per_paper] {
            load[e] += 1;
            assignment[p].push(e);
        }
        assignment[p].sort_unstable();
    }

    let overall = scale.overall;
    let overall_slope = overall.width() / 4.0;
    let mut reviews = Vec::with_capacity(n * cfg.reviews_per_paper);
    for p in 0..n {
        for &e in &assignment[p] {
            let confidence = rng.random_range(1..=5) as f64;
            let noise_sd = cfg.score_noise * (6.0 - confidence) / 3.0;
            let raw = overall.midpoint()
                + overall_slope * utility[p]
                + offsets[e]
                + noise_sd * normal(&mut rng);
            let overall_score = overall.clamp(raw.round());
            let aspect_scores = scale
                .aspects
                .iter()
                .zip(&aspect_quality[p])
                .map(|(a, &q)| {
                    let b = a.bounds();
                    let raw = b.midpoint() + b.width() / 4.0 * q + cfg.aspect_noise * normal(&mut rng);
                    (a.name.clone(), b.clamp(raw.round()))
                })
                .collect();
            reviews.push(Review {
                review_id: format!("r{:06}", reviews.len()),
                paper_id: paper_ids[p].clone(),
                referee_id: referee_ids[e].clone(),
                overall_score,
                aspect_scores,
                confidence: Some(confidence),
                sections: BTreeMap::new(),
            });
        }
    }

    // Committee decision from the observed overall scores.
    let mut committee: Vec<(f64, usize)> = (0..n)
        .map(|p| {
            let (sum, count) = reviews
                .iter()
                .filter(|r| r.paper_id == paper_ids[p])
                .fold((0.0, 0.0), |(s, c), r| (s + r.overall_score, c + 1.0));
            (sum / count + cfg.committee_noise * normal(&mut rng), p)
        })
        .collect();
    committee.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let quota = (cfg.acceptance_quota * n as f64).round() as usize;
    let mut accepted = vec![false; n];
    for &(_, p) in &committee[..quota] {
        accepted[p] = true;
    }

    let papers = (0..n)
        .map(|p| {
            let citation_count = accepted[p].then(|| {
                let log_c = cfg.citation_base.ln()
                    + cfg.citation_scale * utility[p]
                    + cfg.citation_noise * normal(&mut rng);
                log_c.exp().round() as u64
            });
            Paper {
                paper_id: paper_ids[p].clone(),
                track: format!("track{}", p % cfg.tracks),
                accepted: Some(accepted[p]),
                citation_count,
            }
        })
        .collect();

    let dataset = Dataset::new(papers, reviews, scale.clone())?;
    let truth = paper_ids.into_iter().zip(utility).collect();
    Ok((dataset, truth))
}

/// Parameters of the synthetic review-text feature proxy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticTextConfig {
    pub embed_dim: usize,
    pub sections: Vec<String>,
    pub discourse_labels: Vec<String>,
    /// Magnitude of the utility direction in each section embedding.
    pub signal: f64,
    /// Per-coordinate noise of each review's section embedding.
    pub noise: f64,
}

impl Default for SyntheticTextConfig {
    fn default() -> Self {
        SyntheticTextConfig {
            embed_dim: 8,
            sections: ACL_SECTIONS.iter().map(|s| s.to_string()).collect(),
            discourse_labels: ["evaluation", "request", "fact", "reference", "quote"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            signal: 1.0,
            noise: 0.5,
        }
    }
}

/// Text-feature table whose embeddings carry a noisy copy of the true utility.
///
/// Review embeddings do not see referee offsets, so they are an unbiased but
/// noisy view of quality, which is what review texts contribute on real data.
pub fn synthetic_text_features(
    dataset: &Dataset,
    truth: &Utilities,
    cfg: &SyntheticTextConfig,
    seed: u64,
) -> Result<TextFeatures> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7e47_f3a7);
    let dim = cfg.embed_dim;
    let unit = |rng: &mut ChaCha8Rng| {
        let v: Vec<f64> = (0..dim).map(|_| normal(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / norm).collect::<Vec<_>>()
    };
    let directions: Vec<Vec<f64>> = cfg.sections.iter().map(|_| unit(&mut rng)).collect();
    let label_weights: Vec<f64> = cfg.discourse_labels.iter().map(|_| normal(&mut rng)).collect();
    let slots = dataset.max_reviews_per_paper();

    let mut columns = Vec::new();
    for l in &cfg.discourse_labels {
        columns.push(format!("discourse:{l}"));
    }
    columns.push("discourse:nonarg".to_string());
    for s in &cfg.sections {
        for i in 0..slots * dim {
            columns.push(format!("embed:{s}:{i}"));
        }
    }
    for s in &cfg.sections {
        for i in 0..dim {
            columns.push(format!("embedmean:{s}:{i}"));
        }
    }
    columns.push("related:first_sentence_cosine".to_string());

    let mut rows = BTreeMap::new();
    for (pi, paper) in dataset.papers().iter().enumerate() {
        let u = *truth
            .get(&paper.paper_id)
            .ok_or_else(|| Error::unknown_paper(&paper.paper_id))?;
        let k = dataset.review_count(pi);

        let logits: Vec<f64> = label_weights
            .iter()
            .map(|w| w * u + 0.3 * normal(&mut rng))
            .collect();
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let z: f64 = exps.iter().sum();
        let mut row: Vec<f64> = exps.iter().map(|e| e / z).collect();
        row.push(1.0 / (1.0 + (u + 0.3 * normal(&mut rng)).exp()));

        let mut section_means = Vec::with_capacity(cfg.sections.len());
        for dir in &directions {
            let per_review: Vec<Vec<f64>> = (0..k)
                .map(|_| {
                    dir.iter()
                        .map(|d| cfg.signal * u * d + cfg.noise * normal(&mut rng))
                        .collect()
                })
                .collect();
            let mean: Vec<f64> = (0..dim)
                .map(|j| per_review.iter().map(|v| v[j]).sum::<f64>() / k as f64)
                .collect();
            for slot in 0..slots {
                row.extend_from_slice(per_review.get(slot).unwrap_or(&mean));
            }
            section_means.push(mean);
        }
        for mean in section_means {
            row.extend(mean);
        }

        let topic: Vec<f64> = (0..dim).map(|_| normal(&mut rng)).collect();
        let first_sentences: Vec<Vec<f64>> = (0..k)
            .map(|_| topic.iter().map(|t| t + 0.5 * normal(&mut rng)).collect())
            .collect();
        row.push(relatedness_feature(&first_sentences)?);

        rows.insert(paper.paper_id.clone(), row);
    }
    TextFeatures::new(columns, rows)
}
