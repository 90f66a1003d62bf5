use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

pub const DISCOURSE_PREFIX: &str = "discourse:";
pub const EMBED_PREFIX: &str = "embed:";
pub const EMBED_MEAN_PREFIX: &str = "embedmean:";
pub const RELATEDNESS_COLUMN: &str = "related:first_sentence_cosine";

/// Per-paper review-text features produced by the offline text featurizer.
///
/// CSV layout: `paper_id`, then `discourse:<label>` proportions (including
/// `discourse:nonarg`), `embed:<section>:<i>` per-review section embeddings,
/// `embedmean:<section>:<i>` cross-review section means and
/// `related:first_sentence_cosine`. Every numeric cell must be finite.
#[derive(Debug, Clone, PartialEq)]
pub struct TextFeatures {
    columns: Vec<String>,
    rows: BTreeMap<String, Vec<f64>>,
}

impl TextFeatures {
    pub fn new(columns: Vec<String>, rows: BTreeMap<String, Vec<f64>>) -> Result<Self> {
        for c in &columns {
            check_column(c)?;
        }
        let mut sorted = columns.clone();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Schema(format!("duplicate column `{}`", w[0])));
        }
        for (id, row) in &rows {
            if row.len() != columns.len() {
                return Err(Error::Schema(format!(
                    "row `{id}` has {} values, header declares {}",
                    row.len(),
                    columns.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Schema(format!(
                    "row `{id}` column `{}` is not finite",
                    columns[j]
                )));
            }
        }
        Ok(TextFeatures { columns, rows })
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let header = reader.headers()?.clone();
        if header.get(0) != Some("paper_id") {
            return Err(Error::Schema(format!(
                "{}: first column must be `paper_id`",
                path.display()
            )));
        }
        let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut rows = BTreeMap::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let line = i + 2;
            let id = record.get(0).unwrap_or_default().to_string();
            let values = record
                .iter()
                .skip(1)
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|e| Error::Parse {
                        path: path.to_path_buf(),
                        line,
                        message: format!("`{v}`: {e}"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            if rows.insert(id.clone(), values).is_some() {
                return Err(Error::Schema(format!("duplicate paper_id `{id}` on line {line}")));
            }
        }
        TextFeatures::new(columns, rows)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["paper_id".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for (id, row) in &self.rows {
            let mut record = vec![id.clone()];
            record.extend(row.iter().map(|v| format!("{v:?}")));
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn row(&self, paper_id: &str) -> Option<&[f64]> {
        self.rows.get(paper_id).map(Vec::as_slice)
    }

    pub fn paper_ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.rows.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Indices of the columns accepted by `keep`, in file order.
    pub(crate) fn select(&self, keep: impl Fn(&str) -> bool) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| keep(c))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Section name of an `embed:` / `embedmean:` column.
pub(crate) fn embed_section<'a>(column: &'a str, prefix: &str) -> Option<&'a str> {
    let rest = column.strip_prefix(prefix)?;
    let (section, _) = rest.rsplit_once(':')?;
    Some(section)
}

fn check_column(c: &str) -> Result<()> {
    let ok = if let Some(label) = c.strip_prefix(DISCOURSE_PREFIX) {
        !label.is_empty()
    } else if c.starts_with(EMBED_MEAN_PREFIX) || c.starts_with(EMBED_PREFIX) {
        let prefix = if c.starts_with(EMBED_MEAN_PREFIX) {
            EMBED_MEAN_PREFIX
        } else {
            EMBED_PREFIX
        };
        match c[prefix.len()..].rsplit_once(':') {
            Some((section, index)) => !section.is_empty() && index.parse::<usize>().is_ok(),
            None => false,
        }
    } else {
        c == RELATEDNESS_COLUMN
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Schema(format!("unrecognised text-feature column `{c}`")))
    }
}

/// Checks a text-feature file against the schema without assembling features.
pub fn validate_text_feature_file(path: &Path) -> Result<TextFeatures> {
    TextFeatures::read_csv(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TextFeatures {
        let columns = vec![
            "discourse:request".to_string(),
            "discourse:nonarg".to_string(),
            "embed:summary_and_contributions:0".to_string(),
            "embedmean:summary_and_contributions:0".to_string(),
            RELATEDNESS_COLUMN.to_string(),
        ];
        let rows = [
            ("p1".to_string(), vec![0.25, 0.75, 0.1, -0.2, 1.0]),
            ("p2".to_string(), vec![1.0, 0.0, 0.5, 0.5, 0.3]),
        ]
        .into_iter()
        .collect();
        TextFeatures::new(columns, rows).unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let tf = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("text.csv");
        tf.write_csv(&path).unwrap();
        assert_eq!(validate_text_feature_file(&path).unwrap(), tf);
    }

    #[test]
    fn schema_violations() {
        let bad = TextFeatures::new(vec!["words:0".into()], BTreeMap::new());
        assert!(matches!(bad, Err(Error::Schema(_))));
        let bad = TextFeatures::new(vec!["embed:summary".into()], BTreeMap::new());
        assert!(matches!(bad, Err(Error::Schema(_))));
        let rows = [("p".to_string(), vec![f64::NAN])].into_iter().collect();
        let bad = TextFeatures::new(vec!["discourse:fact".into()], rows);
        assert!(matches!(bad, Err(Error::Schema(_))));
        let rows = [("p".to_string(), vec![1.0, 2.0])].into_iter().collect();
        let bad = TextFeatures::new(vec!["discourse:fact".into()], rows);
        assert!(matches!(bad, Err(Error::Schema(_))));
    }

    #[test]
    fn rejects_non_numeric_cell() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("text.csv");
        std::fs::write(&path, "paper_id,discourse:fact\np1,0.5\np2,abc\n").unwrap();
        match TextFeatures::read_csv(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn section_names() {
        assert_eq!(embed_section("embed:strengths:12", EMBED_PREFIX), Some("strengths"));
        assert_eq!(embed_section("embedmean:a:b:3", EMBED_MEAN_PREFIX), Some("a:b"));
    }
}
