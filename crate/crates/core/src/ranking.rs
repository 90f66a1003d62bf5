use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverStatus {
    Optimal,
    BudgetExhausted,
    LocalOptimum,
}

impl fmt::Display for SolverStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverStatus::Optimal => "optimal",
            SolverStatus::BudgetExhausted => "budget-exhausted",
            SolverStatus::LocalOptimum => "local-optimum",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPaper {
    pub paper_id: String,
    pub utility: f64,
    /// 1 is best.
    pub rank: usize,
    /// False when a consensus ranker had no pair mentioning the paper.
    pub compared: bool,
}

/// Utilities per paper and the total order they induce.
///
/// Entries are sorted by rank: descending utility, ties broken by ascending
/// `paper_id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingResult {
    pub method: String,
    pub entries: Vec<RankedPaper>,
    pub status: Option<SolverStatus>,
    pub config: serde_json::Value,
}

impl RankingResult {
    pub fn from_utilities(
        method: impl Into<String>,
        utilities: impl IntoIterator<Item = (String, f64)>,
        config: serde_json::Value,
    ) -> Self {
        let mut items: Vec<(String, f64)> = utilities.into_iter().collect();
        items.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let entries = items
            .into_iter()
            .enumerate()
            .map(|(i, (paper_id, utility))| RankedPaper {
                paper_id,
                utility,
                rank: i + 1,
                compared: true,
            })
            .collect();
        RankingResult {
            method: method.into(),
            entries,
            status: None,
            config,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn utilities(&self) -> BTreeMap<String, f64> {
        self.entries
            .iter()
            .map(|e| (e.paper_id.clone(), e.utility))
            .collect()
    }

    pub fn utility(&self, paper_id: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.paper_id == paper_id)
            .map(|e| e.utility)
    }

    /// Paper ids from best to worst.
    pub fn order(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.paper_id.as_str()).collect()
    }

    /// Writes `paper_id,utility,rank`, plus a `status` column for solver output.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(file).map_err(|e| Error::io(path, e))
    }

    pub fn write_csv_to(&self, mut w: impl Write) -> std::io::Result<()> {
        match self.status {
            None => writeln!(w, "paper_id,utility,rank")?,
            Some(_) => writeln!(w, "paper_id,utility,rank,status")?,
        }
        for e in &self.entries {
            write!(w, "{},{:?},{}", e.paper_id, e.utility, e.rank)?;
            if let Some(status) = self.status {
                if e.compared {
                    write!(w, ",{status}")?;
                } else {
                    write!(w, ",uncompared")?;
                }
            }
            writeln!(w)?;
        }
        w.flush()
    }
}
