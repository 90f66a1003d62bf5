use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::data::synthetic::Utilities;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::eval::metrics::{auroc, prauc, spearman};
use crate::ranking::RankingResult;

/// Reference labels a ranking is judged against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldStandard {
    pub acceptance: BTreeMap<String, bool>,
    /// Citation counts, accepted papers only.
    pub citations_raw: BTreeMap<String, u64>,
    /// Citation counts divided by the track total.
    pub citations_norm: BTreeMap<String, f64>,
    pub track: BTreeMap<String, String>,
    /// Latent utilities, known only for synthetic data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<Utilities>,
}

impl GoldStandard {
    pub fn from_dataset(dataset: &Dataset) -> Self {
        let mut acceptance = BTreeMap::new();
        let mut citations_raw = BTreeMap::new();
        let mut track = BTreeMap::new();
        for p in dataset.papers() {
            track.insert(p.paper_id.clone(), p.track.clone());
            if let Some(a) = p.accepted {
                acceptance.insert(p.paper_id.clone(), a);
                if let (true, Some(c)) = (a, p.citation_count) {
                    citations_raw.insert(p.paper_id.clone(), c);
                }
            }
        }
        let mut gold = GoldStandard {
            acceptance,
            citations_raw,
            citations_norm: BTreeMap::new(),
            track,
            truth: None,
        };
        let totals = gold.track_totals();
        gold.citations_norm = gold
            .citations_raw
            .iter()
            .filter_map(|(id, &c)| {
                let total = totals[gold.track[id].as_str()];
                (total > 0).then(|| (id.clone(), c as f64 / total as f64))
            })
            .collect();
        gold
    }

    pub fn with_truth(mut self, truth: Utilities) -> Self {
        self.truth = Some(truth);
        self
    }

    fn track_totals(&self) -> BTreeMap<&str, u64> {
        let mut totals: BTreeMap<&str, u64> = BTreeMap::new();
        for (id, &c) in &self.citations_raw {
            *totals.entry(self.track[id].as_str()).or_default() += c;
        }
        totals
    }

    /// Citation count of `paper_id` normalised by the total of its track.
    pub fn ncc(&self, paper_id: &str) -> Result<f64> {
        let c = *self.citations_raw.get(paper_id).ok_or_else(|| {
            Error::Validation(format!("paper `{paper_id}` has no citation count (not accepted?)"))
        })?;
        let track = self
            .track
            .get(paper_id)
            .ok_or_else(|| Error::unknown_paper(paper_id))?;
        let total = self.track_totals().get(track.as_str()).copied().unwrap_or(0);
        if total == 0 {
            return Err(Error::Computation(format!(
                "track `{track}` has no citations, ncc is undefined"
            )));
        }
        Ok(c as f64 / total as f64)
    }

    pub fn labeled_papers(&self) -> BTreeSet<&str> {
        self.acceptance.keys().map(String::as_str).collect()
    }
}

/// Metrics of one ranking; absent values were undefined on the evaluated papers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Effectiveness {
    pub auroc: Option<f64>,
    pub prauc: Option<f64>,
    pub rho_raw: Option<f64>,
    pub rho_norm: Option<f64>,
    /// Spearman ρ against the latent utility, when the gold standard has one.
    pub rho_truth: Option<f64>,
}

impl Effectiveness {
    pub const METRICS: [&'static str; 5] = ["auroc", "prauc", "rho_raw", "rho_norm", "rho_truth"];

    pub fn get(&self, metric: &str) -> Option<f64> {
        match metric {
            "auroc" => self.auroc,
            "prauc" => self.prauc,
            "rho_raw" => self.rho_raw,
            "rho_norm" => self.rho_norm,
            "rho_truth" => self.rho_truth,
            _ => None,
        }
    }
}

/// Scores `result` on the labelled papers, restricted to `subset` if given.
pub fn effectiveness(
    result: &RankingResult,
    gold: &GoldStandard,
    subset: Option<&BTreeSet<String>>,
) -> Result<Effectiveness> {
    let utilities = result.utilities();
    let included = |id: &str| subset.is_none_or(|s| s.contains(id));
    let utility = |id: &str| {
        utilities.get(id).copied().ok_or_else(|| {
            Error::Coverage(format!("ranking `{}` has no utility for paper `{id}`", result.method))
        })
    };

    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for (id, &accepted) in &gold.acceptance {
        if included(id) {
            scores.push(utility(id)?);
            labels.push(accepted);
        }
    }

    let correlate = |reference: &mut dyn Iterator<Item = (&String, f64)>| -> Result<Option<f64>> {
        let mut u = Vec::new();
        let mut r = Vec::new();
        for (id, value) in reference {
            if included(id) {
                u.push(utility(id)?);
                r.push(value);
            }
        }
        Ok(spearman(&u, &r))
    };

    Ok(Effectiveness {
        auroc: auroc(&scores, &labels),
        prauc: prauc(&scores, &labels),
        rho_raw: correlate(&mut gold.citations_raw.iter().map(|(k, &v)| (k, v as f64)))?,
        rho_norm: correlate(&mut gold.citations_norm.iter().map(|(k, &v)| (k, v)))?,
        rho_truth: match &gold.truth {
            Some(t) => correlate(&mut t.iter().map(|(k, &v)| (k, v)))?,
            None => None,
        },
    })
}
