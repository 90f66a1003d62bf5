//! Partial rankings per referee and the preference pairs they imply.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Papers of one referee grouped by overall score, least preferred group first.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialRanking {
    pub referee_id: String,
    pub groups: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Strict,
    Tie,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Strict => "strict",
            Relation::Tie => "tie",
        })
    }
}

/// `better ≻ worse` (or `better ~ worse` for ties, with `better < worse` by id).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PreferencePair {
    pub referee_id: String,
    pub better: String,
    pub worse: String,
    pub relation: Relation,
}

impl PreferencePair {
    pub fn is_tie(&self) -> bool {
        self.relation == Relation::Tie
    }

    /// The same judgement with the direction reversed. Ties stay canonical.
    pub fn reversed(&self) -> Self {
        match self.relation {
            Relation::Tie => self.clone(),
            Relation::Strict => PreferencePair {
                referee_id: self.referee_id.clone(),
                better: self.worse.clone(),
                worse: self.better.clone(),
                relation: Relation::Strict,
            },
        }
    }
}

pub fn partial_ranking(dataset: &Dataset, referee_id: &str) -> Result<PartialRanking> {
    let (reviews, _) = dataset.referee_portfolio(referee_id)?;
    let mut scored: Vec<(f64, &str)> = reviews
        .iter()
        .map(|r| (r.overall_score, r.paper_id.as_str()))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));

    let mut groups: Vec<Vec<String>> = Vec::new();
    let mut last = None;
    for (score, paper) in scored {
        if last != Some(score) {
            groups.push(Vec::new());
            last = Some(score);
        }
        groups.last_mut().unwrap().push(paper.to_string());
    }
    Ok(PartialRanking {
        referee_id: referee_id.to_string(),
        groups,
    })
}

impl PartialRanking {
    /// All `k(k-1)/2` pairs implied by this ranking.
    pub fn pairs(&self) -> Vec<PreferencePair> {
        let mut out = Vec::new();
        for (gi, group) in self.groups.iter().enumerate() {
            for (i, a) in group.iter().enumerate() {
                for b in &group[i + 1..] {
                    out.push(self.pair(a.min(b), a.max(b), Relation::Tie));
                }
                for higher in &self.groups[gi + 1..] {
                    for b in higher {
                        out.push(self.pair(b, a, Relation::Strict));
                    }
                }
            }
        }
        out
    }

    fn pair(&self, better: &str, worse: &str, relation: Relation) -> PreferencePair {
        PreferencePair {
            referee_id: self.referee_id.clone(),
            better: better.to_string(),
            worse: worse.to_string(),
            relation,
        }
    }
}

/// Every referee's pairs joined into one multiset, sorted by referee then ids.
pub fn preference_pairs(dataset: &Dataset) -> Vec<PreferencePair> {
    let mut out = Vec::new();
    for referee in dataset.referees() {
        let ranking = partial_ranking(dataset, referee).expect("referee taken from the dataset");
        out.extend(ranking.pairs());
    }
    out.sort();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairFilter {
    KeepAll,
    DropTies,
    DropCrossTrack,
}

impl FromStr for PairFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "keep-all" => Ok(PairFilter::KeepAll),
            "drop-ties" => Ok(PairFilter::DropTies),
            "drop-cross-track" => Ok(PairFilter::DropCrossTrack),
            other => Err(Error::Config(format!("unknown pair filter `{other}`"))),
        }
    }
}

pub fn filter_pairs(
    dataset: &Dataset,
    pairs: Vec<PreferencePair>,
    policy: PairFilter,
) -> Result<Vec<PreferencePair>> {
    Ok(match policy {
        PairFilter::KeepAll => pairs,
        PairFilter::DropTies => pairs.into_iter().filter(|p| !p.is_tie()).collect(),
        PairFilter::DropCrossTrack => {
            let track = |id: &str| {
                dataset
                    .paper(id)
                    .map(|p| p.track.as_str())
                    .ok_or_else(|| Error::unknown_paper(id))
            };
            let mut kept = Vec::with_capacity(pairs.len());
            for p in pairs {
                if track(&p.better)? == track(&p.worse)? {
                    kept.push(p);
                }
            }
            kept
        }
    })
}

/// Writes `referee_id,better,worse,relation` rows.
pub fn write_pairs_csv(path: &Path, pairs: &[PreferencePair]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["referee_id", "better", "worse", "relation"])?;
    for p in pairs {
        w.write_record([
            p.referee_id.as_str(),
            &p.better,
            &p.worse,
            &p.relation.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
