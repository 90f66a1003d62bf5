//! Multi-run benchmarks over methods and perturbation scenarios.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{rank_baseline, BaselineMethod, BaselineSpec};
use crate::consensus::{dcon, ncon, ConsensusConfig};
use crate::data::synthetic::{synthetic_text_features, SyntheticTextConfig, Utilities};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::eval::gold::{effectiveness, Effectiveness, GoldStandard};
use crate::eval::metrics::spearman;
use crate::eval::perturb::{perturb, PerturbationConfig};
use crate::eval::split::split;
use crate::features::{assemble, FeatureConfig, Features, TextFeatures};
use crate::gp::{fit, GpplConfig, GpplModel};
use crate::prefs::{filter_pairs, preference_pairs, PairFilter, PreferencePair};
use crate::ranking::RankingResult;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    Gppl,
    Dcon,
    Ncon,
    MeanSW,
    MedianS,
    MajorS,
}

impl MethodKind {
    pub fn label(self) -> &'static str {
        match self {
            MethodKind::Gppl => "GPPL",
            MethodKind::Dcon => "DCON",
            MethodKind::Ncon => "NCON",
            MethodKind::MeanSW => BaselineMethod::MeanWeighted.tag(),
            MethodKind::MedianS => BaselineMethod::Median.tag(),
            MethodKind::MajorS => BaselineMethod::Majority.tag(),
        }
    }

    fn baseline(self) -> Option<BaselineMethod> {
        match self {
            MethodKind::MeanSW => Some(BaselineMethod::MeanWeighted),
            MethodKind::MedianS => Some(BaselineMethod::Median),
            MethodKind::MajorS => Some(BaselineMethod::Majority),
            _ => None,
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "gppl" => MethodKind::Gppl,
            "dcon" => MethodKind::Dcon,
            "ncon" => MethodKind::Ncon,
            "mean-s-w" => MethodKind::MeanSW,
            "median-s" => MethodKind::MedianS,
            "major-s" => MethodKind::MajorS,
            _ => return Err(Error::Config(format!("unknown method `{s}`"))),
        })
    }
}

/// A ranking method together with its settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub kind: MethodKind,
    /// Report label; defaults to the method's name.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub gppl: GpplConfig,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub consensus: ConsensusConfig,
    #[serde(default = "default_missing_weight")]
    pub missing_confidence_weight: f64,
}

fn default_missing_weight() -> f64 {
    1.0
}

impl MethodSpec {
    pub fn new(kind: MethodKind) -> Self {
        MethodSpec {
            kind,
            name: None,
            gppl: GpplConfig::default(),
            features: FeatureConfig::default(),
            consensus: ConsensusConfig::default(),
            missing_confidence_weight: 1.0,
        }
    }

    pub fn gppl(gppl: GpplConfig, features: FeatureConfig) -> Self {
        MethodSpec {
            gppl,
            features,
            ..MethodSpec::new(MethodKind::Gppl)
        }
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.label().to_string())
    }
}

/// Where the review-text features of a (possibly perturbed) dataset come from.
#[derive(Debug, Clone)]
pub enum TextSource {
    None,
    /// A fixed table, used unchanged for every scenario.
    Fixed(TextFeatures),
    /// Regenerated from each scenario's reviews with the synthetic proxy.
    Synthetic {
        truth: Utilities,
        config: SyntheticTextConfig,
        seed: u64,
    },
}

impl TextSource {
    pub fn features_for(&self, dataset: &Dataset) -> Result<Option<TextFeatures>> {
        match self {
            TextSource::None => Ok(None),
            TextSource::Fixed(t) => Ok(Some(t.clone())),
            TextSource::Synthetic { truth, config, seed } => {
                synthetic_text_features(dataset, truth, config, *seed).map(Some)
            }
        }
    }
}

/// Ranks `dataset` with `spec`. Preference pairs are shuffled by `seed`,
/// which also seeds the stochastic methods.
pub fn run_method(
    dataset: &Dataset,
    spec: &MethodSpec,
    text: Option<&TextFeatures>,
    seed: u64,
) -> Result<RankingResult> {
    if let Some(method) = spec.kind.baseline() {
        let mut b = BaselineSpec::new(method);
        b.missing_confidence_weight = spec.missing_confidence_weight;
        return rank_baseline(dataset, &b);
    }
    let mut pairs = preference_pairs(dataset);
    pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let ids: Vec<String> = dataset.papers().iter().map(|p| p.paper_id.clone()).collect();
    match spec.kind {
        MethodKind::Gppl => {
            let (model, features) = fit_gppl_with(dataset, spec, text, pairs, seed)?;
            model.predict_utilities(&features)
        }
        MethodKind::Dcon => {
            let strict = filter_pairs(dataset, pairs, PairFilter::DropTies)?;
            Ok(dcon(&ids, &strict, &spec.consensus)?.result)
        }
        MethodKind::Ncon => {
            let strict = filter_pairs(dataset, pairs, PairFilter::DropTies)?;
            let cfg = ConsensusConfig { seed, ..spec.consensus.clone() };
            ncon(&ids, &strict, &cfg)
        }
        _ => unreachable!("baselines handled above"),
    }
}

/// The GPPL model `run_method` would fit, with the features it was fitted on.
pub fn fit_gppl(
    dataset: &Dataset,
    spec: &MethodSpec,
    text: Option<&TextFeatures>,
    seed: u64,
) -> Result<(GpplModel, Features)> {
    let mut pairs = preference_pairs(dataset);
    pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    fit_gppl_with(dataset, spec, text, pairs, seed)
}

fn fit_gppl_with(
    dataset: &Dataset,
    spec: &MethodSpec,
    text: Option<&TextFeatures>,
    pairs: Vec<PreferencePair>,
    seed: u64,
) -> Result<(GpplModel, Features)> {
    let features = assemble(dataset, &spec.features, text)?;
    let cfg = GpplConfig { seed, ..spec.gppl.clone() };
    Ok((fit(&features, &pairs, &cfg)?, features))
}

/// Methods, perturbations and repetitions of one benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub perturbations: Vec<PerturbationConfig>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    /// When set, metrics are computed on the test part of a stratified split
    /// with this development fraction.
    #[serde(default)]
    pub dev_fraction: Option<f64>,
}

fn default_runs() -> usize {
    5
}

impl Scenario {
    pub fn run_seed(&self, run: usize) -> u64 {
        self.seed.wrapping_add(run as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub sd: f64,
    pub count: usize,
}

impl MetricSummary {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(MetricSummary {
            mean,
            sd: var.sqrt(),
            count: values.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub run: usize,
    pub seed: u64,
    pub metrics: Option<Effectiveness>,
    /// Spearman ρ between this ranking and the same method's ranking of the
    /// unperturbed data in the same run.
    pub consistency: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: String,
    pub runs: Vec<RunOutcome>,
    /// Mean and population standard deviation per metric over successful runs.
    pub summary: BTreeMap<String, MetricSummary>,
}

impl MethodReport {
    pub fn mean(&self, metric: &str) -> Option<f64> {
        self.summary.get(metric).map(|s| s.mean)
    }

    pub fn per_run(&self, metric: &str) -> Vec<Option<f64>> {
        self.runs
            .iter()
            .map(|r| {
                if metric == "consistency" {
                    r.consistency
                } else {
                    r.metrics.and_then(|m| m.get(metric))
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub perturbation: Option<PerturbationConfig>,
    pub methods: Vec<MethodReport>,
}

impl ScenarioReport {
    pub fn method(&self, label: &str) -> Option<&MethodReport> {
        self.methods.iter().find(|m| m.method == label)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub version: u32,
    pub run_count: usize,
    pub split: String,
    pub config: Scenario,
    /// The unperturbed scenario first, then one per perturbation.
    pub scenarios: Vec<ScenarioReport>,
}

impl EvaluationReport {
    pub fn scenario(&self, name: &str) -> Option<&ScenarioReport> {
        self.scenarios.iter().find(|s| s.name == name)
    }

    /// Checks that every reported metric lies in its valid range.
    pub fn validate(&self) -> Result<()> {
        for s in &self.scenarios {
            for m in &s.methods {
                for r in &m.runs {
                    let Some(e) = r.metrics else { continue };
                    let in_unit = |v: Option<f64>| v.is_none_or(|v| (0.0..=1.0).contains(&v));
                    let in_corr = |v: Option<f64>| v.is_none_or(|v| (-1.0..=1.0).contains(&v));
                    if !(in_unit(e.auroc)
                        && in_unit(e.prauc)
                        && in_corr(e.rho_raw)
                        && in_corr(e.rho_norm)
                        && in_corr(e.rho_truth)
                        && in_corr(r.consistency))
                    {
                        return Err(Error::Validation(format!(
                            "{} / {} run {}: metric out of range",
                            s.name, m.method, r.run
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// One row per scenario and method with mean and sd columns per metric.
    pub fn write_table_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let metrics: Vec<&str> = Effectiveness::METRICS.iter().copied().chain(["consistency"]).collect();
        let mut header = vec!["scenario".to_string(), "method".to_string(), "runs".to_string()];
        for m in &metrics {
            header.push(format!("{m}_mean"));
            header.push(format!("{m}_sd"));
        }
        out.write_record(&header)?;
        for s in &self.scenarios {
            for m in &s.methods {
                let mut row = vec![s.name.clone(), m.method.clone(), m.runs.len().to_string()];
                for metric in &metrics {
                    match m.summary.get(*metric) {
                        Some(sum) => {
                            row.push(format!("{:.4}", sum.mean));
                            row.push(format!("{:.4}", sum.sd));
                        }
                        None => row.extend([String::new(), String::new()]),
                    }
                }
                out.write_record(&row)?;
            }
        }
        out.flush().map_err(|e| Error::io("<table>", e))?;
        Ok(())
    }
}

fn summarise(method: String, runs: Vec<RunOutcome>) -> MethodReport {
    let mut summary = BTreeMap::new();
    for metric in Effectiveness::METRICS.iter().copied().chain(["consistency"]) {
        let values: Vec<f64> = runs
            .iter()
            .filter_map(|r| {
                if metric == "consistency" {
                    r.consistency
                } else {
                    r.metrics.and_then(|m| m.get(metric))
                }
            })
            .collect();
        if let Some(s) = MetricSummary::of(&values) {
            summary.insert(metric.to_string(), s);
        }
    }
    for r in &runs {
        if let Some(e) = &r.error {
            log::warn!("{method} run {} failed and is excluded: {e}", r.run);
        }
    }
    MethodReport { method, runs, summary }
}

/// Runs every method on the original data and on each perturbation, `runs`
/// times, and aggregates the metrics.
///
/// Work items run in parallel; results are reduced in scenario, method and
/// run order so the report does not depend on scheduling.
pub fn run_benchmark(
    dataset: &Dataset,
    gold: &GoldStandard,
    scenario: &Scenario,
    text: &TextSource,
) -> Result<EvaluationReport> {
    if scenario.runs == 0 || scenario.methods.is_empty() {
        return Err(Error::Config("a benchmark needs at least one run and one method".into()));
    }
    let labels: BTreeSet<String> = scenario.methods.iter().map(MethodSpec::label).collect();
    if labels.len() != scenario.methods.len() {
        return Err(Error::Config("method labels must be unique".into()));
    }
    for p in &scenario.perturbations {
        p.validate(dataset.scale())?;
    }
    let (subset, split_id) = match scenario.dev_fraction {
        Some(f) => {
            let s = split(gold, f, scenario.seed)?;
            let id = s.id();
            (Some(s.test), id)
        }
        None => (None, "all".to_string()),
    };

    // Datasets per (scenario, run); scenario 0 is the original data.
    let mut datasets: Vec<Vec<Dataset>> = vec![vec![dataset.clone(); scenario.runs]];
    for p in &scenario.perturbations {
        let per_run = (0..scenario.runs)
            .map(|run| {
                let cfg = PerturbationConfig {
                    seed: p.seed.wrapping_add(run as u64),
                    ..p.clone()
                };
                perturb(dataset, &cfg)
            })
            .collect::<Result<Vec<_>>>()?;
        datasets.push(per_run);
    }
    let texts: Vec<Vec<Option<TextFeatures>>> = datasets
        .iter()
        .map(|runs| runs.iter().map(|d| text.features_for(d)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, usize, usize)> = (0..datasets.len())
        .flat_map(|s| {
            (0..scenario.methods.len()).flat_map(move |m| (0..scenario.runs).map(move |r| (s, m, r)))
        })
        .collect();
    let results: Vec<Result<RankingResult>> = jobs
        .par_iter()
        .map(|&(s, m, r)| {
            run_method(
                &datasets[s][r],
                &scenario.methods[m],
                texts[s][r].as_ref(),
                scenario.run_seed(r),
            )
        })
        .collect();
    let results: BTreeMap<(usize, usize, usize), Result<RankingResult>> =
        jobs.into_iter().zip(results).collect();

    let mut scenarios = Vec::with_capacity(datasets.len());
    for s in 0..datasets.len() {
        let mut methods = Vec::new();
        for (m, spec) in scenario.methods.iter().enumerate() {
            let mut runs = Vec::with_capacity(scenario.runs);
            for r in 0..scenario.runs {
                let mut outcome = RunOutcome {
                    run: r,
                    seed: scenario.run_seed(r),
                    metrics: None,
                    consistency: None,
                    error: None,
                };
                match &results[&(s, m, r)] {
                    Ok(ranking) => match effectiveness(ranking, gold, subset.as_ref()) {
                        Ok(e) => {
                            outcome.metrics = Some(e);
                            if s > 0 {
                                if let Ok(original) = &results[&(0, m, r)] {
                                    outcome.consistency = ranking_correlation(original, ranking);
                                }
                            }
                        }
                        Err(e) => outcome.error = Some(e.to_string()),
                    },
                    Err(e) => outcome.error = Some(e.to_string()),
                }
                runs.push(outcome);
            }
            methods.push(summarise(spec.label(), runs));
        }
        methods.sort_by(|a, b| a.method.cmp(&b.method));
        let (name, perturbation) = match s {
            0 => ("original".to_string(), None),
            _ => {
                let p = &scenario.perturbations[s - 1];
                (p.label(), Some(p.clone()))
            }
        };
        scenarios.push(ScenarioReport {
            name,
            perturbation,
            methods,
        });
    }

    let report = EvaluationReport {
        version: REPORT_VERSION,
        run_count: scenario.runs,
        split: split_id,
        config: scenario.clone(),
        scenarios,
    };
    report.validate()?;
    Ok(report)
}

/// Spearman ρ between two rankings over the papers both contain.
pub fn ranking_correlation(a: &RankingResult, b: &RankingResult) -> Option<f64> {
    let ub = b.utilities();
    let (x, y): (Vec<f64>, Vec<f64>) = a
        .utilities()
        .into_iter()
        .filter_map(|(id, u)| ub.get(&id).map(|v| (u, *v)))
        .unzip();
    spearman(&x, &y)
}
