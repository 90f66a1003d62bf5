//! Score-aggregation baselines over overall scores.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Review};
use crate::error::{Error, Result};
use crate::ranking::RankingResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaselineMethod {
    /// Confidence-weighted mean.
    #[serde(rename = "MEAN-S-w")]
    MeanWeighted,
    #[serde(rename = "MEDIAN-S")]
    Median,
    /// Mode, falling back to the mean when several scores are equally frequent.
    #[serde(rename = "MAJOR-S")]
    Majority,
}

impl BaselineMethod {
    pub fn tag(self) -> &'static str {
        match self {
            BaselineMethod::MeanWeighted => "MEAN-S-w",
            BaselineMethod::Median => "MEDIAN-S",
            BaselineMethod::Majority => "MAJOR-S",
        }
    }
}

impl fmt::Display for BaselineMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for BaselineMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mean-s-w" => Ok(BaselineMethod::MeanWeighted),
            "median-s" => Ok(BaselineMethod::Median),
            "major-s" => Ok(BaselineMethod::Majority),
            _ => Err(Error::Config(format!("unknown baseline `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineSpec {
    pub method: BaselineMethod,
    /// Weight for reviews without a confidence value.
    pub missing_confidence_weight: f64,
}

impl BaselineSpec {
    pub fn new(method: BaselineMethod) -> Self {
        BaselineSpec {
            method,
            missing_confidence_weight: 1.0,
        }
    }
}

pub fn rank_baseline(dataset: &Dataset, spec: &BaselineSpec) -> Result<RankingResult> {
    let mut utilities = Vec::with_capacity(dataset.num_papers());
    for (i, paper) in dataset.papers().iter().enumerate() {
        let reviews: Vec<&Review> = dataset.reviews_of_index(i).collect();
        let u = match spec.method {
            BaselineMethod::MeanWeighted => {
                weighted_mean(&reviews, spec.missing_confidence_weight).map_err(|msg| {
                    Error::Computation(format!("paper `{}`: {msg}", paper.paper_id))
                })?
            }
            BaselineMethod::Median => median(&overall(&reviews)),
            BaselineMethod::Majority => majority(&overall(&reviews)),
        };
        utilities.push((paper.paper_id.clone(), u));
    }
    Ok(RankingResult::from_utilities(
        spec.method.tag(),
        utilities,
        serde_json::to_value(spec)?,
    ))
}

fn overall(reviews: &[&Review]) -> Vec<f64> {
    reviews.iter().map(|r| r.overall_score).collect()
}

fn weighted_mean(reviews: &[&Review], default_weight: f64) -> std::result::Result<f64, String> {
    let (num, den) = reviews.iter().fold((0.0, 0.0), |(n, d), r| {
        let w = r.confidence.unwrap_or(default_weight);
        (n + w * r.overall_score, d + w)
    });
    if den > 0.0 {
        Ok(num / den)
    } else {
        Err(format!("total confidence weight {den} is not positive"))
    }
}

pub(crate) fn median(scores: &[f64]) -> f64 {
    let mut s = scores.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

pub(crate) fn majority(scores: &[f64]) -> f64 {
    let mut s = scores.to_vec();
    s.sort_by(f64::total_cmp);
    let mut best: Vec<(f64, usize)> = Vec::new();
    let mut i = 0;
    while i < s.len() {
        let j = s[i..].iter().take_while(|&&x| x == s[i]).count();
        match best.first() {
            Some(&(_, c)) if j < c => {}
            Some(&(_, c)) if j == c => best.push((s[i], j)),
            _ => best = vec![(s[i], j)],
        }
        i += j;
    }
    if best.len() == 1 {
        best[0].0
    } else {
        s.iter().sum::<f64>() / s.len() as f64
    }
}
