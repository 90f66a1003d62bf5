use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use paperrank_core::agreement::overall_score_agreement;
use paperrank_core::consensus::ConsensusConfig;
use paperrank_core::data::synthetic::{
    generate_synthetic, synthetic_text_features, SyntheticConfig, SyntheticTextConfig, Utilities,
};
use paperrank_core::data::{load_dataset, load_scale, write_dataset, DatasetPaths};
use paperrank_core::eval::{
    efficiency_svg, fit_gppl, run_benchmark, run_method, EvaluationReport, GoldStandard, MethodKind,
    MethodSpec, Scenario, TextSource,
};
use paperrank_core::features::{validate_text_feature_file, TextFeatures};
use paperrank_core::gp::GpplConfig;
use paperrank_core::prefs::{filter_pairs, preference_pairs, write_pairs_csv, PairFilter};
use paperrank_core::{Dataset, FeatureConfig, ScaleSpec};
use serde::Serialize;

use crate::manifest::{path_for, Recorder};
use crate::{DataArgs, FeatureChoice, RankArgs};

fn load(data: &DataArgs, rec: &mut Recorder) -> Result<Dataset> {
    let scale = match &data.scale {
        Some(path) => {
            rec.input(path)?;
            load_scale(path)?
        }
        None => ScaleSpec::acl2018(),
    };
    rec.inputs([data.reviews.as_path(), data.papers.as_path()])?;
    let paths = DatasetPaths {
        reviews: data.reviews.clone(),
        papers: data.papers.clone(),
    };
    Ok(load_dataset(&paths, scale)?)
}

fn read_text(path: Option<&Path>, rec: &mut Recorder) -> Result<Option<TextFeatures>> {
    match path {
        Some(p) => {
            rec.input(p)?;
            Ok(Some(TextFeatures::read_csv(p)?))
        }
        None => Ok(None),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, rec: &mut Recorder) -> Result<T> {
    rec.input(path)?;
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(|e| paperrank_core::Error::Json(e).into())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    std::io::Write::write_all(&mut w, b"\n")?;
    Ok(())
}

fn feature_config(choice: &FeatureChoice, rec: &mut Recorder) -> Result<FeatureConfig> {
    Ok(match choice {
        FeatureChoice::AcceptOpt => FeatureConfig::accept_opt(),
        FeatureChoice::CiteOpt => FeatureConfig::cite_opt(),
        FeatureChoice::ScoreOnly => FeatureConfig::score_only(),
        FeatureChoice::Custom(path) => {
            rec.input(path)?;
            FeatureConfig::load(path)?
        }
    })
}

#[derive(Serialize)]
struct IngestSummary {
    stats: paperrank_core::data::DatasetStats,
    krippendorff_alpha_ordinal: Option<f64>,
}

pub fn ingest(data: &DataArgs, out: Option<&Path>) -> Result<()> {
    let mut rec = Recorder::start("ingest");
    let dataset = load(data, &mut rec)?;
    let stats = dataset.stats();
    let alpha = overall_score_agreement(&dataset);
    println!("papers            {}", stats.papers);
    println!("reviews           {}", stats.reviews);
    println!("referees          {}", stats.referees);
    println!("tracks            {}", stats.tracks);
    println!("accepted          {}", stats.accepted);
    println!("reviews/paper     {}", stats.reviews_per_paper);
    println!("reviews/referee   {}", stats.reviews_per_referee);
    match alpha {
        Some(a) => println!("krippendorff alpha (ordinal, overall score)  {a:.4}"),
        None => println!("krippendorff alpha (ordinal, overall score)  undefined"),
    }
    if let Some(out) = out {
        rec.config(dataset.scale())?;
        write_json(out, &IngestSummary { stats, krippendorff_alpha_ordinal: alpha })?;
        rec.finish(&[out], &path_for(out))?;
    }
    Ok(())
}

pub fn pairs(data: &DataArgs, filter: PairFilter, out: &Path) -> Result<()> {
    let mut rec = Recorder::start("pairs");
    let dataset = load(data, &mut rec)?;
    let pairs = filter_pairs(&dataset, preference_pairs(&dataset), filter)?;
    write_pairs_csv(out, &pairs)?;
    log::info!("wrote {} pairs to {}", pairs.len(), out.display());
    rec.config(serde_json::json!({ "filter": filter }))?;
    rec.finish(&[out], &path_for(out))?;
    Ok(())
}

pub fn rank(args: &RankArgs) -> Result<()> {
    let mut rec = Recorder::start("rank");
    let dataset = load(&args.data, &mut rec)?;
    let text = read_text(args.features.as_deref(), &mut rec)?;
    let mut spec = MethodSpec::new(args.method);
    spec.features = feature_config(&args.feature_config, &mut rec)?;
    if let Some(path) = &args.gppl_config {
        spec.gppl = read_json::<GpplConfig>(path, &mut rec)?;
    }
    if let Some(budget) = args.time_budget {
        spec.consensus = ConsensusConfig { time_budget: budget, ..ConsensusConfig::default() };
    }
    spec.missing_confidence_weight = args.missing_confidence_weight;
    rec.seed(args.seed);

    let mut outputs: Vec<&Path> = vec![&args.out];
    let ranking = match (&args.save_model, args.method) {
        (Some(model_path), MethodKind::Gppl) => {
            let (model, features) = fit_gppl(&dataset, &spec, text.as_ref(), args.seed)?;
            model.save(model_path)?;
            outputs.push(model_path);
            model.predict_utilities(&features)?
        }
        (Some(_), other) => anyhow::bail!(paperrank_core::Error::Config(format!(
            "--save-model applies to gppl only, not {other}"
        ))),
        (None, _) => run_method(&dataset, &spec, text.as_ref(), args.seed)?,
    };
    ranking.write_csv(&args.out)?;
    rec.config(&spec)?;
    rec.finish(&outputs, &path_for(&args.out))?;
    Ok(())
}

pub struct BenchmarkArgs<'a> {
    pub data: &'a DataArgs,
    pub scenario: &'a Path,
    pub features: Option<&'a Path>,
    pub truth: Option<&'a Path>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub out: &'a Path,
    pub table: Option<&'a Path>,
}

pub fn benchmark(args: BenchmarkArgs<'_>) -> Result<()> {
    let mut rec = Recorder::start("benchmark");
    let dataset = load(args.data, &mut rec)?;
    let mut scenario: Scenario = read_json(args.scenario, &mut rec)?;
    if let Some(runs) = args.runs {
        scenario.runs = runs;
    }
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    let truth = match args.truth {
        Some(p) => Some(read_json::<Utilities>(p, &mut rec)?),
        None => None,
    };
    let mut gold = GoldStandard::from_dataset(&dataset);
    let text = match (read_text(args.features, &mut rec)?, &truth) {
        (Some(t), _) => TextSource::Fixed(t),
        (None, Some(truth)) => TextSource::Synthetic {
            truth: truth.clone(),
            config: SyntheticTextConfig::default(),
            seed: scenario.seed,
        },
        (None, None) => TextSource::None,
    };
    if let Some(truth) = truth {
        gold = gold.with_truth(truth);
    }
    rec.seed(scenario.seed);

    let report = run_benchmark(&dataset, &gold, &scenario, &text)?;
    write_json(args.out, &report)?;
    let mut outputs = vec![args.out];
    if let Some(table) = args.table {
        let file = File::create(table).with_context(|| format!("cannot create {}", table.display()))?;
        report.write_table_csv(BufWriter::new(file))?;
        outputs.push(table);
    }
    for s in &report.scenarios {
        for m in &s.methods {
            let failed = m.runs.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                log::warn!("{} / {}: {failed} of {} runs failed", s.name, m.method, m.runs.len());
            }
        }
    }
    rec.config(&scenario)?;
    rec.finish(&outputs, &path_for(args.out))?;
    Ok(())
}

pub fn plot(report_path: &Path, left: &str, right: &str, out: &Path) -> Result<()> {
    let mut rec = Recorder::start("plot");
    let report: EvaluationReport = read_json(report_path, &mut rec)?;
    report.validate()?;
    let svg = efficiency_svg(&report, left, right)?;
    std::fs::write(out, svg).with_context(|| format!("cannot write {}", out.display()))?;
    rec.config(serde_json::json!({ "left": left, "right": right }))?;
    rec.finish(&[out], &path_for(out))?;
    Ok(())
}

pub fn synth(config: Option<&Path>, seed: u64, out_dir: &Path) -> Result<()> {
    let mut rec = Recorder::start("synth");
    let cfg: SyntheticConfig = match config {
        Some(p) => read_json(p, &mut rec)?,
        None => SyntheticConfig::default(),
    };
    std::fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    let (dataset, truth) = generate_synthetic(&cfg, seed)?;
    let text = synthetic_text_features(&dataset, &truth, &SyntheticTextConfig::default(), seed)?;
    let files: BTreeMap<&str, PathBuf> = ["papers.jsonl", "reviews.jsonl", "scale.json", "truth.json", "text.csv"]
        .into_iter()
        .map(|name| (name, out_dir.join(name)))
        .collect();
    write_dataset(
        &dataset,
        &DatasetPaths {
            reviews: files["reviews.jsonl"].clone(),
            papers: files["papers.jsonl"].clone(),
        },
    )?;
    write_json(&files["scale.json"], dataset.scale())?;
    write_json(&files["truth.json"], &truth)?;
    text.write_csv(&files["text.csv"])?;
    println!("{}", dataset.stats());
    rec.seed(seed);
    rec.config(&cfg)?;
    let outputs: Vec<&Path> = files.values().map(PathBuf::as_path).collect();
    rec.finish(&outputs, &out_dir.join("manifest.json"))?;
    Ok(())
}

pub fn validate_text(path: &Path) -> Result<()> {
    let table = validate_text_feature_file(path)?;
    println!("{}: {} papers, {} columns, schema ok", path.display(), table.len(), table.columns().len());
    Ok(())
}
