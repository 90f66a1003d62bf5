use std::fmt;

use serde::Serialize;

use super::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    /// Population moments; `NaN` for an empty sample.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        MeanSd {
            mean,
            sd: var.sqrt(),
        }
    }
}

impl fmt::Display for MeanSd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}±{:.2}", self.mean, self.sd)
    }
}

/// Summary counts in the style of a dataset-statistics table.
#[derive(Debug, Clone, Serialize)]
pub struct DatasetStats {
    pub papers: usize,
    pub reviews: usize,
    pub referees: usize,
    pub tracks: usize,
    pub accepted: usize,
    pub reviews_per_paper: MeanSd,
    pub reviews_per_referee: MeanSd,
}

impl Dataset {
    pub fn stats(&self) -> DatasetStats {
        let mut tracks: Vec<&str> = self.papers().iter().map(|p| p.track.as_str()).collect();
        tracks.sort_unstable();
        tracks.dedup();
        DatasetStats {
            papers: self.num_papers(),
            reviews: self.reviews().len(),
            referees: self.num_referees(),
            tracks: tracks.len(),
            accepted: self.papers().iter().filter(|p| p.accepted == Some(true)).count(),
            reviews_per_paper: MeanSd::of((0..self.num_papers()).map(|i| self.review_count(i) as f64)),
            reviews_per_referee: MeanSd::of(
                self.reviews_by_referee.values().map(|v| v.len() as f64),
            ),
        }
    }
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} papers, {} reviews, {} referees, {} tracks, {} accepted, reviews/paper {}, reviews/referee {}",
            self.papers,
            self.reviews,
            self.referees,
            self.tracks,
            self.accepted,
            self.reviews_per_paper,
            self.reviews_per_referee
        )
    }
}
