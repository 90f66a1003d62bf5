use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::gold::GoldStandard;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub seed: u64,
    pub dev: BTreeSet<String>,
    pub test: BTreeSet<String>,
}

impl Split {
    pub fn id(&self) -> String {
        format!("dev{}-test{}-seed{}", self.dev.len(), self.test.len(), self.seed)
    }
}

/// Stratum key: acceptance label and citation-rank quartile (accepted papers only).
type Stratum = (bool, Option<usize>);

fn strata(gold: &GoldStandard) -> BTreeMap<Stratum, Vec<String>> {
    let mut cited: Vec<(&String, u64)> = gold.citations_raw.iter().map(|(k, &v)| (k, v)).collect();
    cited.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let n = cited.len();
    let quartile: BTreeMap<&String, usize> = cited
        .iter()
        .enumerate()
        .map(|(i, (id, _))| (*id, 4 * i / n.max(1)))
        .collect();

    let mut groups: BTreeMap<Stratum, Vec<String>> = BTreeMap::new();
    for (id, &accepted) in &gold.acceptance {
        let key = (accepted, quartile.get(id).copied());
        groups.entry(key).or_default().push(id.clone());
    }

    // Merge undersized citation quartiles into their neighbour.
    loop {
        let small = groups
            .iter()
            .find(|((_, q), members)| q.is_some() && members.len() < 2)
            .map(|(k, _)| *k);
        let Some(key @ (accepted, Some(q))) = small else {
            break;
        };
        let neighbour = groups
            .keys()
            .filter(|(a, other)| *a == accepted && other.is_some() && *other != Some(q))
            .min_by_key(|(_, other)| other.unwrap().abs_diff(q))
            .copied();
        let Some(neighbour) = neighbour else {
            break;
        };
        log::warn!("citation stratum {key:?} has fewer than 2 papers, merged into {neighbour:?}");
        let members = groups.remove(&key).unwrap();
        groups.get_mut(&neighbour).unwrap().extend(members);
    }
    groups
}

/// Random dev/test partition of the labelled papers, stratified jointly on the
/// acceptance label and the citation-rank quartile.
///
/// Dev sizes are allocated across strata by largest remainder so the dev set
/// holds `round(dev_fraction · N)` papers.
pub fn split(gold: &GoldStandard, dev_fraction: f64, seed: u64) -> Result<Split> {
    if !(dev_fraction > 0.0 && dev_fraction < 1.0) {
        return Err(Error::Config(format!("dev fraction {dev_fraction} must lie in (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups = strata(gold);
    let total: usize = groups.values().map(Vec::len).sum();
    let target = (dev_fraction * total as f64).round() as usize;

    let quotas: Vec<f64> = groups.values().map(|g| g.len() as f64 * dev_fraction).collect();
    let mut sizes: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut by_remainder: Vec<usize> = (0..quotas.len()).collect();
    by_remainder.sort_by(|&a, &b| {
        (quotas[b] - quotas[b].floor())
            .total_cmp(&(quotas[a] - quotas[a].floor()))
            .then(a.cmp(&b))
    });
    let mut missing = target.saturating_sub(sizes.iter().sum());
    for &i in by_remainder.iter().cycle().take(by_remainder.len() * 2) {
        if missing == 0 {
            break;
        }
        if sizes[i] < groups.values().nth(i).map_or(0, Vec::len) {
            sizes[i] += 1;
            missing -= 1;
        }
    }

    let mut dev = BTreeSet::new();
    let mut test = BTreeSet::new();
    for (members, size) in groups.into_values().zip(sizes) {
        let mut members = members;
        members.shuffle(&mut rng);
        let (d, t) = members.split_at(size);
        dev.extend(d.iter().cloned());
        test.extend(t.iter().cloned());
    }
    Ok(Split { seed, dev, test })
}
