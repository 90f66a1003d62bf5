use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use paperrank_core::consensus::{dcon, ncon, ConsensusConfig};
use paperrank_core::data::synthetic::{generate_synthetic, SyntheticConfig};
use paperrank_core::eval::{auroc, spearman};
use paperrank_core::features::assemble;
use paperrank_core::gp::{rank_gppl, GpplConfig};
use paperrank_core::prefs::{filter_pairs, preference_pairs, PairFilter};
use paperrank_core::baselines::{rank_baseline, BaselineMethod, BaselineSpec};
use paperrank_core::FeatureConfig;

fn dataset(papers: usize) -> paperrank_core::Dataset {
    let cfg = SyntheticConfig {
        papers,
        referees: (papers / 3).max(6),
        ..Default::default()
    };
    generate_synthetic(&cfg, 1).unwrap().0
}

fn gppl(c: &mut Criterion) {
    let mut group = c.benchmark_group("gppl");
    group.sample_size(10);
    for papers in [50, 150, 300] {
        let d = dataset(papers);
        let features = assemble(&d, &FeatureConfig::score_only(), None).unwrap();
        let pairs = preference_pairs(&d);
        group.bench_with_input(BenchmarkId::new("fit-rank", papers), &papers, |b, _| {
            b.iter(|| rank_gppl(black_box(&features), black_box(&pairs), &GpplConfig::default()).unwrap())
        });
    }
    group.finish();
}

fn consensus(c: &mut Criterion) {
    let mut group = c.benchmark_group("consensus");
    let small = dataset(12);
    let ids: Vec<String> = small.papers().iter().map(|p| p.paper_id.clone()).collect();
    let pairs = filter_pairs(&small, preference_pairs(&small), PairFilter::DropTies).unwrap();
    group.bench_function("dcon/12", |b| {
        b.iter(|| dcon(black_box(&ids), black_box(&pairs), &ConsensusConfig::unlimited()).unwrap())
    });
    for papers in [100, 400] {
        let d = dataset(papers);
        let ids: Vec<String> = d.papers().iter().map(|p| p.paper_id.clone()).collect();
        let pairs = filter_pairs(&d, preference_pairs(&d), PairFilter::DropTies).unwrap();
        group.bench_with_input(BenchmarkId::new("ncon", papers), &papers, |b, _| {
            b.iter(|| ncon(black_box(&ids), black_box(&pairs), &ConsensusConfig::default()).unwrap())
        });
    }
    group.finish();
}

fn baselines(c: &mut Criterion) {
    let d = dataset(1000);
    for method in [BaselineMethod::MeanWeighted, BaselineMethod::Median, BaselineMethod::Majority] {
        c.bench_function(&format!("baseline/{method}"), |b| {
            b.iter(|| rank_baseline(black_box(&d), &BaselineSpec::new(method)).unwrap())
        });
    }
}

fn metrics(c: &mut Criterion) {
    let n = 10_000;
    let scores: Vec<f64> = (0..n).map(|i| ((i * 7919) % 613) as f64).collect();
    let labels: Vec<bool> = (0..n).map(|i| (i * 31) % 7 < 2).collect();
    let other: Vec<f64> = (0..n).map(|i| ((i * 104_729) % 997) as f64).collect();
    c.bench_function("metrics/auroc-10k", |b| b.iter(|| auroc(black_box(&scores), black_box(&labels))));
    c.bench_function("metrics/spearman-10k", |b| b.iter(|| spearman(black_box(&scores), black_box(&other))));
}

criterion_group!(benches, gppl, consensus, baselines, metrics);
criterion_main!(benches);
