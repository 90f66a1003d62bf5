use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{Dataset, Paper, Review, ScaleSpec};
use crate::error::{Error, Result};

/// Locations of the two line-delimited JSON files that make up a dataset.
#[derive(Debug, Clone)]
pub struct DatasetPaths {
    pub reviews: PathBuf,
    pub papers: PathBuf,
}

pub fn load_scale(path: &Path) -> Result<ScaleSpec> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let scale: ScaleSpec = serde_json::from_reader(BufReader::new(file))?;
    scale.validate()?;
    Ok(scale)
}

pub fn read_reviews(path: &Path) -> Result<Vec<Review>> {
    read_jsonl(path)
}

pub fn read_papers(path: &Path) -> Result<Vec<Paper>> {
    read_jsonl(path)
}

/// Reads and validates a dataset, logging its summary statistics.
pub fn load_dataset(paths: &DatasetPaths, scale: ScaleSpec) -> Result<Dataset> {
    let papers = read_papers(&paths.papers)?;
    let reviews = read_reviews(&paths.reviews)?;
    let dataset = Dataset::new(papers, reviews, scale)?;
    log::info!("loaded dataset: {}", dataset.stats());
    Ok(dataset)
}

pub fn write_dataset(dataset: &Dataset, paths: &DatasetPaths) -> Result<()> {
    write_jsonl(&paths.papers, dataset.papers())?;
    write_jsonl(&paths.reviews, dataset.reviews())
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
