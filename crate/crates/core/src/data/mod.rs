//! Papers, reviews and referees of a single peer-review process.
//!
//! A [`Dataset`] is validated once at construction and immutable afterwards.
//! Papers are kept sorted by `paper_id` and reviews by `review_id`, so every
//! downstream computation sees the same canonical order regardless of the
//! order in which records were supplied.

mod io;
mod stats;
pub mod synthetic;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{load_dataset, load_scale, read_papers, read_reviews, write_dataset, DatasetPaths};
pub use stats::{DatasetStats, MeanSd};

/// Review-form section names used by the ACL-2018 review form.
pub const ACL_SECTIONS: [&str; 5] = [
    "summary_and_contributions",
    "strengths",
    "weaknesses",
    "questions",
    "additional_comments",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Paper {
    pub paper_id: String,
    pub track: String,
    pub accepted: Option<bool>,
    pub citation_count: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub review_id: String,
    pub paper_id: String,
    pub referee_id: String,
    pub overall_score: f64,
    #[serde(default)]
    pub aspect_scores: BTreeMap<String, f64>,
    pub confidence: Option<f64>,
    #[serde(default)]
    pub sections: BTreeMap<String, String>,
}

impl Review {
    /// Overall score followed by the aspect scores in the scale's aspect order.
    pub fn score_vector(&self, scale: &ScaleSpec) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + scale.aspects.len());
        v.push(self.overall_score);
        for aspect in &scale.aspects {
            v.push(self.aspect_scores[&aspect.name]);
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: i64,
    pub max: i64,
}

impl Bounds {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.min as f64 && x <= self.max as f64
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.min as f64, self.max as f64)
    }

    pub fn width(&self) -> f64 {
        (self.max - self.min) as f64
    }

    pub fn midpoint(&self) -> f64 {
        (self.min + self.max) as f64 / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AspectScale {
    pub name: String,
    pub min: i64,
    pub max: i64,
}

impl AspectScale {
    pub fn bounds(&self) -> Bounds {
        Bounds {
            min: self.min,
            max: self.max,
        }
    }
}

/// Score scales of a venue. The aspect order fixes the layout of score vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSpec {
    pub overall: Bounds,
    pub aspects: Vec<AspectScale>,
}

impl ScaleSpec {
    /// Six-point overall score and six five-point aspect scores.
    pub fn acl2018() -> Self {
        let aspects = [
            "originality",
            "soundness",
            "substance",
            "replicability",
            "meaningful_comparison",
            "readability",
        ]
        .into_iter()
        .map(|name| AspectScale {
            name: name.to_string(),
            min: 1,
            max: 5,
        })
        .collect();
        ScaleSpec {
            overall: Bounds { min: 1, max: 6 },
            aspects,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.overall.min >= self.overall.max {
            return Err(Error::Validation(format!(
                "overall scale min {} must be below max {}",
                self.overall.min, self.overall.max
            )));
        }
        let mut seen = HashSet::new();
        for a in &self.aspects {
            if a.min >= a.max {
                return Err(Error::Validation(format!(
                    "aspect `{}` scale min {} must be below max {}",
                    a.name, a.min, a.max
                )));
            }
            if !seen.insert(a.name.as_str()) {
                return Err(Error::Validation(format!("aspect `{}` declared twice", a.name)));
            }
        }
        Ok(())
    }

    pub fn aspect(&self, name: &str) -> Option<&AspectScale> {
        self.aspects.iter().find(|a| a.name == name)
    }

    /// Number of entries in a review score vector.
    pub fn score_dim(&self) -> usize {
        1 + self.aspects.len()
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    papers: Vec<Paper>,
    reviews: Vec<Review>,
    scale: ScaleSpec,
    paper_index: HashMap<String, usize>,
    reviews_by_paper: Vec<Vec<usize>>,
    reviews_by_referee: BTreeMap<String, Vec<usize>>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.papers == other.papers && self.reviews == other.reviews && self.scale == other.scale
    }
}

impl Dataset {
    /// Validates and indexes the records.
    pub fn new(mut papers: Vec<Paper>, mut reviews: Vec<Review>, scale: ScaleSpec) -> Result<Self> {
        scale.validate()?;
        if papers.is_empty() {
            return Err(Error::Validation("dataset contains no papers".into()));
        }
        papers.sort_by(|a, b| a.paper_id.cmp(&b.paper_id));
        reviews.sort_by(|a, b| a.review_id.cmp(&b.review_id));

        let mut paper_index = HashMap::with_capacity(papers.len());
        for (i, p) in papers.iter().enumerate() {
            if paper_index.insert(p.paper_id.clone(), i).is_some() {
                return Err(Error::Integrity(format!("duplicate paper_id `{}`", p.paper_id)));
            }
            if p.citation_count.is_some() && p.accepted.is_none() {
                return Err(Error::Validation(format!(
                    "paper `{}` has a citation count but no acceptance label",
                    p.paper_id
                )));
            }
        }

        let mut reviews_by_paper = vec![Vec::new(); papers.len()];
        let mut reviews_by_referee: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut seen_pairs = HashSet::new();
        for (ri, r) in reviews.iter().enumerate() {
            if ri > 0 && reviews[ri - 1].review_id == r.review_id {
                return Err(Error::Integrity(format!("duplicate review_id `{}`", r.review_id)));
            }
            let Some(&pi) = paper_index.get(&r.paper_id) else {
                return Err(Error::Integrity(format!(
                    "review `{}` references unknown paper `{}`",
                    r.review_id, r.paper_id
                )));
            };
            if r.referee_id.is_empty() {
                return Err(Error::Integrity(format!("review `{}` has an empty referee_id", r.review_id)));
            }
            if !seen_pairs.insert((r.referee_id.as_str(), r.paper_id.as_str())) {
                return Err(Error::Integrity(format!(
                    "referee `{}` reviewed paper `{}` more than once (review `{}`)",
                    r.referee_id, r.paper_id, r.review_id
                )));
            }
            validate_scores(r, &scale)?;
            reviews_by_paper[pi].push(ri);
            reviews_by_referee.entry(r.referee_id.clone()).or_default().push(ri);
        }

        if let Some(pi) = reviews_by_paper.iter().position(Vec::is_empty) {
            return Err(Error::Validation(format!(
                "paper `{}` has no reviews",
                papers[pi].paper_id
            )));
        }

        Ok(Dataset {
            papers,
            reviews,
            scale,
            paper_index,
            reviews_by_paper,
            reviews_by_referee,
        })
    }

    pub fn papers(&self) -> &[Paper] {
        &self.papers
    }

    pub fn reviews(&self) -> &[Review] {
        &self.reviews
    }

    pub fn scale(&self) -> &ScaleSpec {
        &self.scale
    }

    pub fn num_papers(&self) -> usize {
        self.papers.len()
    }

    pub fn paper_index(&self, paper_id: &str) -> Option<usize> {
        self.paper_index.get(paper_id).copied()
    }

    pub fn paper(&self, paper_id: &str) -> Option<&Paper> {
        self.paper_index(paper_id).map(|i| &self.papers[i])
    }

    /// Reviews of the paper at `index`, ordered by `review_id`.
    pub fn reviews_of_index(&self, index: usize) -> impl Iterator<Item = &Review> + '_ {
        self.reviews_by_paper[index].iter().map(|&ri| &self.reviews[ri])
    }

    pub fn reviews_of(&self, paper_id: &str) -> Result<Vec<&Review>> {
        let i = self
            .paper_index(paper_id)
            .ok_or_else(|| Error::unknown_paper(paper_id))?;
        Ok(self.reviews_of_index(i).collect())
    }

    pub fn review_count(&self, index: usize) -> usize {
        self.reviews_by_paper[index].len()
    }

    /// Referee ids in ascending order.
    pub fn referees(&self) -> impl Iterator<Item = &str> + '_ {
        self.reviews_by_referee.keys().map(String::as_str)
    }

    pub fn num_referees(&self) -> usize {
        self.reviews_by_referee.len()
    }

    /// The reviews `R_e` written by referee `e` and the papers `P_e` they cover.
    pub fn referee_portfolio(&self, referee_id: &str) -> Result<(Vec<&Review>, Vec<&str>)> {
        let idx = self
            .reviews_by_referee
            .get(referee_id)
            .ok_or_else(|| Error::unknown_referee(referee_id))?;
        let reviews: Vec<&Review> = idx.iter().map(|&ri| &self.reviews[ri]).collect();
        let papers = reviews.iter().map(|r| r.paper_id.as_str()).collect();
        Ok((reviews, papers))
    }

    pub fn max_reviews_per_paper(&self) -> usize {
        self.reviews_by_paper.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Same papers and scale with a replacement review set.
    pub fn with_reviews(&self, reviews: Vec<Review>) -> Result<Dataset> {
        Dataset::new(self.papers.clone(), reviews, self.scale.clone())
    }

    pub fn into_parts(self) -> (Vec<Paper>, Vec<Review>, ScaleSpec) {
        (self.papers, self.reviews, self.scale)
    }
}

fn validate_scores(r: &Review, scale: &ScaleSpec) -> Result<()> {
    if !r.overall_score.is_finite() || !scale.overall.contains(r.overall_score) {
        return Err(Error::Validation(format!(
            "review `{}`: overall score {} outside [{}, {}]",
            r.review_id, r.overall_score, scale.overall.min, scale.overall.max
        )));
    }
    for a in &scale.aspects {
        let Some(&s) = r.aspect_scores.get(&a.name) else {
            return Err(Error::Validation(format!(
                "review `{}`: missing aspect score `{}`",
                r.review_id, a.name
            )));
        };
        if !s.is_finite() || !a.bounds().contains(s) {
            return Err(Error::Validation(format!(
                "review `{}`: aspect `{}` score {} outside [{}, {}]",
                r.review_id, a.name, s, a.min, a.max
            )));
        }
    }
    if let Some(name) = r.aspect_scores.keys().find(|k| scale.aspect(k).is_none()) {
        return Err(Error::Validation(format!(
            "review `{}`: aspect `{}` is not declared in the scale",
            r.review_id, name
        )));
    }
    if let Some(c) = r.confidence {
        if !c.is_finite() {
            return Err(Error::Validation(format!(
                "review `{}`: confidence must be finite",
                r.review_id
            )));
        }
    }
    Ok(())
}
