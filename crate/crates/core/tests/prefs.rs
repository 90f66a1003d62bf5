use std::collections::{BTreeMap, BTreeSet};

use paperrank_core::prefs::{filter_pairs, preference_pairs, PairFilter, Relation};
use paperrank_core::{Dataset, Paper, Review, ScaleSpec};
use proptest::prelude::*;

/// `(referee, paper, score)` triples with distinct (referee, paper).
fn assignments() -> impl Strategy<Value = Vec<(usize, usize, i64)>> {
    prop::collection::btree_map((0..6usize, 0..12usize), 1..=6i64, 1..60)
        .prop_map(|m| m.into_iter().map(|((e, p), s)| (e, p, s)).collect())
}

fn build(assign: &[(usize, usize, i64)], transform: impl Fn(i64) -> f64, scale: ScaleSpec) -> Dataset {
    let papers: BTreeSet<usize> = assign.iter().map(|a| a.1).collect();
    let papers = papers
        .into_iter()
        .map(|p| Paper {
            paper_id: format!("p{p:02}"),
            track: if p % 2 == 0 { "even" } else { "odd" }.into(),
            accepted: None,
            citation_count: None,
        })
        .collect();
    let reviews = assign
        .iter()
        .enumerate()
        .map(|(i, &(e, p, s))| Review {
            review_id: format!("r{i:03}"),
            paper_id: format!("p{p:02}"),
            referee_id: format!("e{e}"),
            overall_score: transform(s),
            aspect_scores: scale.aspects.iter().map(|a| (a.name.clone(), a.min as f64)).collect(),
            confidence: None,
            sections: BTreeMap::new(),
        })
        .collect();
    Dataset::new(papers, reviews, scale).unwrap()
}

fn wide_scale() -> ScaleSpec {
    let mut s = ScaleSpec::acl2018();
    s.overall.min = -100;
    s.overall.max = 100;
    s
}

proptest! {
    #[test]
    fn pair_count_and_direction(assign in assignments()) {
        let d = build(&assign, |s| s as f64, ScaleSpec::acl2018());
        let pairs = preference_pairs(&d);
        let mut per_referee: BTreeMap<String, usize> = BTreeMap::new();
        for &(e, _, _) in &assign {
            *per_referee.entry(format!("e{e}")).or_default() += 1;
        }
        let expected: usize = per_referee.values().map(|k| k * (k - 1) / 2).sum();
        prop_assert_eq!(pairs.len(), expected);

        let score: BTreeMap<(String, String), i64> = assign
            .iter()
            .map(|&(e, p, s)| ((format!("e{e}"), format!("p{p:02}")), s))
            .collect();
        for q in &pairs {
            let b = score[&(q.referee_id.clone(), q.better.clone())];
            let w = score[&(q.referee_id.clone(), q.worse.clone())];
            match q.relation {
                Relation::Strict => prop_assert!(b > w),
                Relation::Tie => prop_assert!(b == w && q.better < q.worse),
            }
        }
    }

    #[test]
    fn strictly_increasing_transform_keeps_pairs(assign in assignments(), shift in -20i64..20, stretch in 1i64..5) {
        let original = preference_pairs(&build(&assign, |s| s as f64, wide_scale()));
        let moved = preference_pairs(&build(&assign, |s| (s * stretch + shift) as f64, wide_scale()));
        prop_assert_eq!(original, moved);
    }

    #[test]
    fn filters_only_remove(assign in assignments()) {
        let d = build(&assign, |s| s as f64, ScaleSpec::acl2018());
        let all = preference_pairs(&d);
        let strict = filter_pairs(&d, all.clone(), PairFilter::DropTies).unwrap();
        prop_assert_eq!(strict.len(), all.iter().filter(|p| !p.is_tie()).count());
        let same_track = filter_pairs(&d, all.clone(), PairFilter::DropCrossTrack).unwrap();
        for p in &same_track {
            let parity = |id: &str| id[1..].parse::<usize>().unwrap() % 2;
            prop_assert_eq!(parity(&p.better), parity(&p.worse));
        }
        prop_assert_eq!(filter_pairs(&d, all.clone(), PairFilter::KeepAll).unwrap(), all);
    }
}
