//! Measuring rankings against acceptance decisions, citation counts and,
//! on synthetic data, the latent paper utility.

pub mod benchmark;
pub mod gold;
pub mod metrics;
pub mod perturb;
pub mod plot;
pub mod split;

pub use benchmark::{
    fit_gppl, ranking_correlation, run_benchmark, run_method, EvaluationReport, MethodKind, MethodReport,
    MethodSpec, MetricSummary, RunOutcome, Scenario, ScenarioReport, TextSource,
};
pub use gold::{effectiveness, Effectiveness, GoldStandard};
pub use metrics::{auroc, average_ranks, kendall_tau, prauc, spearman};
pub use perturb::{perturb, PerturbationConfig, PerturbationKind};
pub use plot::{efficiency_series, efficiency_svg};
pub use split::{split, Split};
