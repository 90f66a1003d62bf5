//! Inter-referee agreement on overall scores.

use std::collections::BTreeMap;

use crate::data::Dataset;

/// Krippendorff's α with the ordinal distance metric.
///
/// Each unit holds the values its coders assigned; units with fewer than two
/// values carry no pairing information and are skipped. Returns `None` when
/// fewer than two pairable values exist or all of them are equal, where α is
/// undefined.
pub fn krippendorff_alpha_ordinal(units: &[Vec<f64>]) -> Option<f64> {
    let mut categories: Vec<f64> = units
        .iter()
        .filter(|u| u.len() >= 2)
        .flatten()
        .copied()
        .collect();
    categories.sort_by(f64::total_cmp);
    categories.dedup();
    let index = |v: f64| categories.binary_search_by(|c| c.total_cmp(&v)).unwrap();
    let k = categories.len();
    if k == 0 {
        return None;
    }

    // Coincidence matrix.
    let mut o = vec![vec![0.0; k]; k];
    for unit in units.iter().filter(|u| u.len() >= 2) {
        let m = unit.len() as f64;
        for (i, &a) in unit.iter().enumerate() {
            for (j, &b) in unit.iter().enumerate() {
                if i != j {
                    o[index(a)][index(b)] += 1.0 / (m - 1.0);
                }
            }
        }
    }
    let n_c: Vec<f64> = o.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = n_c.iter().sum();
    if n < 2.0 {
        return None;
    }

    let delta2 = |c: usize, d: usize| {
        let (lo, hi) = if c <= d { (c, d) } else { (d, c) };
        let between: f64 = n_c[lo..=hi].iter().sum::<f64>() - (n_c[lo] + n_c[hi]) / 2.0;
        between * between
    };
    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..k {
        for d in 0..k {
            let w = delta2(c, d);
            observed += o[c][d] * w;
            expected += n_c[c] * n_c[d] * w;
        }
    }
    if expected == 0.0 {
        return None;
    }
    Some(1.0 - (n - 1.0) * observed / expected)
}

/// Agreement of referees' overall scores, papers as units.
pub fn overall_score_agreement(dataset: &Dataset) -> Option<f64> {
    let mut units: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in dataset.reviews() {
        units.entry(r.paper_id.as_str()).or_default().push(r.overall_score);
    }
    krippendorff_alpha_ordinal(&units.into_values().collect::<Vec<_>>())
}
