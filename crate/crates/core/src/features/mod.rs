//! Fixed-layout feature vectors per paper.
//!
//! Blocks are emitted in the order they appear in the [`FeatureConfig`].
//! Score-derived and discourse blocks are standardized across papers by
//! default; embedding blocks pass through unscaled.

mod text;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

pub use text::{
    validate_text_feature_file, TextFeatures, DISCOURSE_PREFIX, EMBED_MEAN_PREFIX, EMBED_PREFIX,
    RELATEDNESS_COLUMN,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Block {
    ScoreStats,
    ScoreConcat,
    Discourse,
    EmbedSections,
    EmbedSectionMeans,
    EmbedRelatedness,
}

impl Block {
    pub fn name(self) -> &'static str {
        match self {
            Block::ScoreStats => "score-stats",
            Block::ScoreConcat => "score-concat",
            Block::Discourse => "discourse",
            Block::EmbedSections => "embed-sections",
            Block::EmbedSectionMeans => "embed-section-means",
            Block::EmbedRelatedness => "embed-relatedness",
        }
    }

    pub fn is_embedding(self) -> bool {
        matches!(
            self,
            Block::EmbedSections | Block::EmbedSectionMeans | Block::EmbedRelatedness
        )
    }

    pub fn needs_text(self) -> bool {
        !matches!(self, Block::ScoreStats | Block::ScoreConcat)
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub block: Block,
    /// Defaults to standardizing every non-embedding block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalize: Option<bool>,
    /// Restricts embedding blocks to these review-form sections.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sections: Option<Vec<String>>,
}

impl BlockSpec {
    pub fn new(block: Block) -> Self {
        BlockSpec {
            block,
            normalize: None,
            sections: None,
        }
    }

    pub fn with_sections(mut self, sections: &[&str]) -> Self {
        self.sections = Some(sections.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn normalized(&self) -> bool {
        self.normalize.unwrap_or(!self.block.is_embedding())
    }

    fn wants_section(&self, section: &str) -> bool {
        self.sections
            .as_ref()
            .is_none_or(|s| s.iter().any(|x| x == section))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub blocks: Vec<BlockSpec>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig::accept_opt()
    }
}

impl FeatureConfig {
    pub fn from_blocks(blocks: &[Block]) -> Self {
        FeatureConfig {
            blocks: blocks.iter().copied().map(BlockSpec::new).collect(),
        }
    }

    /// Score and embedding features without discourse labels.
    pub fn accept_opt() -> Self {
        FeatureConfig::from_blocks(&[
            Block::ScoreStats,
            Block::ScoreConcat,
            Block::EmbedSections,
            Block::EmbedSectionMeans,
            Block::EmbedRelatedness,
        ])
    }

    /// Summary-and-contributions embeddings plus discourse labels.
    pub fn cite_opt() -> Self {
        let summary = ["summary_and_contributions"];
        FeatureConfig {
            blocks: vec![
                BlockSpec::new(Block::EmbedSections).with_sections(&summary),
                BlockSpec::new(Block::EmbedSectionMeans).with_sections(&summary),
                BlockSpec::new(Block::Discourse),
            ],
        }
    }

    pub fn score_only() -> Self {
        FeatureConfig::from_blocks(&[Block::ScoreStats, Block::ScoreConcat])
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: FeatureConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::Config("feature config enables no blocks".into()));
        }
        let mut seen = Vec::new();
        for b in &self.blocks {
            if seen.contains(&b.block) {
                return Err(Error::Config(format!("block `{}` enabled twice", b.block)));
            }
            seen.push(b.block);
        }
        Ok(())
    }

    pub fn needs_text(&self) -> bool {
        self.blocks.iter().any(|b| b.block.needs_text())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutBlock {
    pub block: Block,
    pub dim: usize,
    pub normalized: bool,
}

/// Ordered blocks and their widths; shared by every vector of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub blocks: Vec<LayoutBlock>,
}

impl FeatureLayout {
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }
}

/// Feature vectors keyed by paper id, all in one layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    pub layout: FeatureLayout,
    pub vectors: BTreeMap<String, Vec<f64>>,
}

impl Features {
    pub fn get(&self, paper_id: &str) -> Option<&[f64]> {
        self.vectors.get(paper_id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Builds an ad-hoc feature set from raw vectors (single unnormalized block).
    pub fn from_vectors(vectors: BTreeMap<String, Vec<f64>>) -> Result<Self> {
        let dim = vectors.values().next().map_or(0, Vec::len);
        if let Some((id, _)) = vectors.iter().find(|(_, v)| v.len() != dim) {
            return Err(Error::Schema(format!("vector of `{id}` has a different length")));
        }
        Ok(Features {
            layout: FeatureLayout {
                blocks: vec![LayoutBlock {
                    block: Block::EmbedSections,
                    dim,
                    normalized: false,
                }],
            },
            vectors,
        })
    }
}

/// Score statistics and concatenated score vectors of one paper.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreFeatures {
    /// Mean, population sd, min and max of the overall score, then of each aspect.
    pub stats: Vec<f64>,
    /// Score vectors in `review_id` order, padded with the mean score vector.
    pub concat: Vec<f64>,
}

pub fn score_features(dataset: &Dataset, paper_id: &str) -> Result<ScoreFeatures> {
    let index = dataset
        .paper_index(paper_id)
        .ok_or_else(|| Error::unknown_paper(paper_id))?;
    Ok(score_features_at(dataset, index, dataset.max_reviews_per_paper()))
}

fn score_features_at(dataset: &Dataset, index: usize, slots: usize) -> ScoreFeatures {
    let scale = dataset.scale();
    let vectors: Vec<Vec<f64>> = dataset
        .reviews_of_index(index)
        .map(|r| r.score_vector(scale))
        .collect();
    let dim = scale.score_dim();
    let n = vectors.len() as f64;

    let mut stats = Vec::with_capacity(4 * dim);
    let mut mean_vector = Vec::with_capacity(dim);
    for j in 0..dim {
        let column = vectors.iter().map(|v| v[j]);
        let mean = column.clone().sum::<f64>() / n;
        let var = column.clone().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let min = column.clone().fold(f64::INFINITY, f64::min);
        let max = column.fold(f64::NEG_INFINITY, f64::max);
        stats.extend([mean, var.sqrt(), min, max]);
        mean_vector.push(mean);
    }

    let mut concat = Vec::with_capacity(slots * dim);
    for slot in 0..slots {
        concat.extend_from_slice(vectors.get(slot).unwrap_or(&mean_vector));
    }
    ScoreFeatures { stats, concat }
}

/// Mean pairwise cosine similarity of the reviews' first-sentence embeddings.
///
/// Fewer than two reviews count as perfectly related (1.0).
pub fn relatedness_feature(embeddings: &[Vec<f64>]) -> Result<f64> {
    if embeddings.len() < 2 {
        return Ok(1.0);
    }
    let norms: Vec<f64> = embeddings
        .iter()
        .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    if norms.iter().any(|&n| n == 0.0 || !n.is_finite()) {
        return Err(Error::Computation(
            "first-sentence embedding has zero or non-finite norm".into(),
        ));
    }
    let dim = embeddings[0].len();
    if embeddings.iter().any(|v| v.len() != dim) {
        return Err(Error::Computation("embeddings differ in dimension".into()));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for i in 0..embeddings.len() {
        for j in i + 1..embeddings.len() {
            let dot: f64 = embeddings[i].iter().zip(&embeddings[j]).map(|(a, b)| a * b).sum();
            total += dot / (norms[i] * norms[j]);
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// Builds the per-paper feature vectors for `dataset` under `cfg`.
pub fn assemble(
    dataset: &Dataset,
    cfg: &FeatureConfig,
    text: Option<&TextFeatures>,
) -> Result<Features> {
    cfg.validate()?;
    let n = dataset.num_papers();
    if cfg.needs_text() {
        let text = text.ok_or_else(|| {
            Error::Coverage("feature config needs a text-feature file but none was given".into())
        })?;
        if let Some(p) = dataset.papers().iter().find(|p| text.row(&p.paper_id).is_none()) {
            return Err(Error::Coverage(format!(
                "text features missing for paper `{}`",
                p.paper_id
            )));
        }
    }

    let slots = dataset.max_reviews_per_paper();
    let scores: Vec<ScoreFeatures> = (0..n)
        .map(|i| score_features_at(dataset, i, slots))
        .collect();

    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut layout = Vec::with_capacity(cfg.blocks.len());
    for spec in &cfg.blocks {
        let mut block: Vec<Vec<f64>> = match spec.block {
            Block::ScoreStats => scores.iter().map(|s| s.stats.clone()).collect(),
            Block::ScoreConcat => scores.iter().map(|s| s.concat.clone()).collect(),
            _ => {
                let text = text.expect("checked above");
                let columns = text_columns(text, spec)?;
                dataset
                    .papers()
                    .iter()
                    .map(|p| {
                        let row = text.row(&p.paper_id).expect("coverage checked");
                        columns.iter().map(|&j| row[j]).collect()
                    })
                    .collect()
            }
        };
        let normalized = spec.normalized();
        if normalized {
            standardize_columns(&mut block);
        }
        layout.push(LayoutBlock {
            block: spec.block,
            dim: block.first().map_or(0, Vec::len),
            normalized,
        });
        for (row, part) in rows.iter_mut().zip(block) {
            row.extend(part);
        }
    }

    let vectors = dataset
        .papers()
        .iter()
        .map(|p| p.paper_id.clone())
        .zip(rows)
        .collect();
    Ok(Features {
        layout: FeatureLayout { blocks: layout },
        vectors,
    })
}

fn text_columns(text: &TextFeatures, spec: &BlockSpec) -> Result<Vec<usize>> {
    let columns = match spec.block {
        Block::Discourse => text.select(|c| c.starts_with(DISCOURSE_PREFIX)),
        Block::EmbedSections => text.select(|c| {
            text::embed_section(c, EMBED_PREFIX).is_some_and(|s| spec.wants_section(s))
        }),
        Block::EmbedSectionMeans => text.select(|c| {
            text::embed_section(c, EMBED_MEAN_PREFIX).is_some_and(|s| spec.wants_section(s))
        }),
        Block::EmbedRelatedness => text.select(|c| c == RELATEDNESS_COLUMN),
        Block::ScoreStats | Block::ScoreConcat => unreachable!("score blocks are not text blocks"),
    };
    if columns.is_empty() {
        return Err(Error::Schema(format!(
            "text-feature file has no columns for block `{}`",
            spec.block
        )));
    }
    Ok(columns)
}

/// Zero mean, unit population variance per column; constant columns become 0.
pub fn standardize_columns(rows: &mut [Vec<f64>]) {
    let Some(dim) = rows.first().map(Vec::len) else {
        return;
    };
    let n = rows.len() as f64;
    for j in 0..dim {
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        let constant = sd <= 1e-12 * mean.abs().max(1.0);
        for r in rows.iter_mut() {
            r[j] = if constant { 0.0 } else { (r[j] - mean) / sd };
        }
    }
}
