//! `viewpoint`: train topic models on an annotated corpus and analyze the
//! viewpoints they expose.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage or config error.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use viewpoint_core::checkpoint::Checkpoint;
use viewpoint_core::corpus::{
    apply_partition, build_unimodal, corpus_stats, load_annotated_corpus, CorpusStats, PartitionScheme, RawDocument,
};
use viewpoint_core::cv::cross_validate_matrix;
use viewpoint_core::experiment::{
    accuracy_curve_corrlda2, accuracy_curve_lda, point_seed, run_corrlda2, run_lda, CurveSettings, ModelKind,
};
use viewpoint_core::features::{build_feature_matrix, FeatureMode};
use viewpoint_core::viewpoint::{analyze, annotate_top_words, consistency_sweep, SweepReport, SweepSettings, TABLE_TOP_WORDS};

use crate::config::{parse_topic_range, ExperimentConfig};
use crate::output::OutputDir;

#[derive(Parser)]
#[command(name = "viewpoint", version, about = "Viewpoint discovery with LDA and CorrLDA2 topic models")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one chain and write a checkpoint plus its log-likelihood trace.
    Train(Overrides),
    /// Cross-validated classification accuracy of a checkpoint's features.
    Evaluate(FromCheckpoint),
    /// Topics-aspect groups, their viewpoints and scores.
    Groups(FromCheckpoint),
    /// Group scores over a range of topic counts and partition schemes.
    Sweep(Overrides),
    /// Classification accuracy over a range of topic counts.
    AccuracyCurve(Overrides),
    /// Corpus statistics under every partition scheme.
    Stats(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// TOML or JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// opinion+ne, opinion, adj+ne or ne.
    #[arg(long)]
    scheme: Option<PartitionScheme>,
    /// Comma-separated schemes for `sweep`.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<PartitionScheme>>,
    /// lda or corrlda2.
    #[arg(long, value_parser = parse_model)]
    model: Option<ModelKind>,
    #[arg(long)]
    topics: Option<usize>,
    /// start:end:step or a comma list.
    #[arg(long)]
    topic_range: Option<String>,
    #[arg(long)]
    aspects: Option<usize>,
    #[arg(long)]
    sweeps: Option<usize>,
    /// Worker threads; 0 = all cores.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct FromCheckpoint {
    checkpoint: PathBuf,
    /// topics, aspects or combined; defaults to topics for LDA and combined
    /// for CorrLDA2.
    #[arg(long)]
    features: Option<FeatureMode>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Corpus path, if it moved since training.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    match s {
        "lda" => Ok(ModelKind::Lda),
        "corrlda2" => Ok(ModelKind::Corrlda2),
        _ => Err(format!("unknown model {s:?}; expected lda or corrlda2")),
    }
}

/// Errors split by exit code.
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<viewpoint_core::Error> for Failure {
    fn from(e: viewpoint_core::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type CmdResult = Result<(), Failure>;

fn usage<T>(r: anyhow::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Usage)
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => usage(ExperimentConfig::load(path))?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = &self.corpus {
            cfg.corpus = Some(v.clone());
        }
        if let Some(v) = &self.out {
            cfg.output_dir = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.scheme {
            cfg.scheme = v;
        }
        if let Some(v) = &self.schemes {
            cfg.schemes = v.clone();
        }
        if let Some(v) = self.model {
            cfg.model = v;
        }
        if let Some(v) = self.topics {
            cfg.topics = v;
        }
        if let Some(v) = &self.topic_range {
            cfg.topic_range = parse_topic_range(v).map_err(|e| Failure::Usage(anyhow!(e)))?;
        }
        if let Some(v) = self.aspects {
            cfg.aspects = v;
        }
        if let Some(v) = self.sweeps {
            cfg.sweeps = Some(v);
        }
        if let Some(v) = self.jobs {
            cfg.jobs = v;
        }
        usage(cfg.validate())?;
        Ok(cfg)
    }
}

fn load_raw(cfg: &ExperimentConfig) -> Result<Vec<RawDocument>, Failure> {
    let path = usage(cfg.corpus_path())?;
    let raw = load_annotated_corpus(path).with_context(|| format!("cannot load corpus {}", path.display()))?;
    Ok(raw)
}

fn require_range(cfg: &ExperimentConfig) -> Result<(), Failure> {
    if cfg.topic_range.is_empty() {
        return Err(Failure::Usage(anyhow!("no topic range (set `topic_range` or pass --topic-range)")));
    }
    Ok(())
}

fn cmd_train(o: &Overrides) -> CmdResult {
    let cfg = o.resolve()?;
    let raw = load_raw(&cfg)?;
    let out = OutputDir::create(&cfg.output_dir, "train")?;
    let seed = point_seed(cfg.seed, cfg.topics, 0);
    let config_value = serde_json::to_value(&cfg).map_err(anyhow::Error::from)?;
    let (checkpoint, trace) = match cfg.model {
        ModelKind::Lda => {
            let corpus = build_unimodal(&raw, cfg.min_count)?;
            let run = run_lda(&corpus, cfg.topics, &cfg.sampler(true), seed)?;
            (Checkpoint::from_lda(&run.state, run.tail, config_value), run.log_likelihood)
        }
        ModelKind::Corrlda2 => {
            let corpus = apply_partition(&raw, cfg.scheme, cfg.min_count)?;
            let run = run_corrlda2(&corpus, cfg.topics, cfg.aspects, &cfg.sampler(true), seed)?;
            (Checkpoint::from_corrlda2(&run.state, run.tail, config_value), run.log_likelihood)
        }
    };
    let cp_path = out.write_plain("checkpoint.json", &checkpoint.to_json()?)?;
    let mut csv = String::from("sweep,log_likelihood\n");
    for (s, ll) in trace.iter().enumerate() {
        csv.push_str(&format!("{},{ll}\n", s + 1));
    }
    let ll_path = out.write_csv("loglik.csv", &cfg, csv.as_bytes())?;
    println!(
        "trained {} with T={} for {} sweeps; final log-likelihood {:.3}",
        cfg.model,
        cfg.topics,
        cfg.sweeps(),
        trace.last().copied().unwrap_or(f64::NAN)
    );
    println!("checkpoint: {}\ntrace: {}", cp_path.display(), ll_path.display());
    Ok(())
}

/// Checkpoint plus the config that produced it, with command-line
/// adjustments applied.
fn open_checkpoint(a: &FromCheckpoint) -> Result<(Checkpoint, ExperimentConfig), Failure> {
    if !a.checkpoint.is_file() {
        return Err(Failure::Usage(anyhow!("checkpoint {} does not exist", a.checkpoint.display())));
    }
    let cp = Checkpoint::load(&a.checkpoint).with_context(|| format!("cannot read {}", a.checkpoint.display()))?;
    let mut cfg: ExperimentConfig = serde_json::from_value(cp.config.clone())
        .map_err(|e| Failure::Usage(anyhow!("checkpoint config is not an experiment config: {e}")))?;
    if let Some(v) = &a.corpus {
        cfg.corpus = Some(v.clone());
    }
    if let Some(v) = &a.out {
        cfg.output_dir = v.clone();
    }
    if let Some(v) = a.folds {
        cfg.folds = v;
    }
    if let Some(v) = a.threshold {
        cfg.threshold = v;
    }
    if let Some(v) = a.jobs {
        cfg.jobs = v;
    }
    usage(cfg.validate())?;
    Ok((cp, cfg))
}

#[derive(Serialize)]
struct Evaluation {
    model: ModelKind,
    features: FeatureMode,
    documents: usize,
    cv: viewpoint_core::CvReport,
}

fn cmd_evaluate(a: &FromCheckpoint) -> CmdResult {
    let (cp, cfg) = open_checkpoint(a)?;
    let raw = load_raw(&cfg)?;
    let (model, meta) = if cp.is_lda() {
        let corpus = build_unimodal(&raw, cfg.min_count)?;
        cp.restore_lda(&corpus)?;
        (ModelKind::Lda, corpus.meta())
    } else {
        let corpus = apply_partition(&raw, cfg.scheme, cfg.min_count)?;
        cp.restore_corrlda2(&corpus)?;
        (ModelKind::Corrlda2, corpus.meta())
    };
    let mode = a.features.unwrap_or(match model {
        ModelKind::Lda => FeatureMode::Topics,
        ModelKind::Corrlda2 => FeatureMode::Combined,
    });
    let matrix = build_feature_matrix(&cp.tail, &meta, mode).map_err(|e| Failure::Usage(e.into()))?;
    let cv = cross_validate_matrix(&matrix, cfg.folds, &cfg.svm, cfg.seed, cfg.jobs)?;
    println!("{model} {mode} features: mean {}-fold accuracy {:.4}", cfg.folds, cv.mean_accuracy);
    let out = OutputDir::create(&cfg.output_dir, "evaluate")?;
    let result = Evaluation { model, features: mode, documents: matrix.len(), cv };
    let path = out.write_json(&format!("evaluate_{mode}.json"), &cfg, &result)?;
    let mut features_csv = Vec::new();
    matrix.write_csv(&mut features_csv)?;
    out.write_csv(&format!("features_{mode}.csv"), &cfg, &features_csv)?;
    println!("report: {}", path.display());
    Ok(())
}

fn cmd_groups(a: &FromCheckpoint) -> CmdResult {
    let (cp, cfg) = open_checkpoint(a)?;
    if cp.is_lda() {
        return Err(Failure::Usage(anyhow!("groups need a CorrLDA2 checkpoint")));
    }
    let raw = load_raw(&cfg)?;
    let corpus = apply_partition(&raw, cfg.scheme, cfg.min_count)?;
    let state = cp.restore_corrlda2(&corpus)?;
    let co = cp.tail.cooccurrence().ok_or_else(|| anyhow!("checkpoint has no co-occurrence counts"))?;
    let mut analysis = analyze(&cp.tail, &co, &corpus.meta(), cfg.threshold, &cfg.svm)?;
    annotate_top_words(&mut analysis.reports, &state, &corpus.topical_vocab, &corpus.opinion_vocab, TABLE_TOP_WORDS);
    let mut text = String::new();
    for report in &analysis.reports {
        text.push_str(&report.render());
        text.push('\n');
    }
    text.push_str(&format!("neutral topics: {:?}\n", analysis.groups.neutral));
    print!("{text}");
    let out = OutputDir::create(&cfg.output_dir, "groups")?;
    out.write_json("groups.json", &cfg, &analysis)?;
    out.write_text("groups.txt", &cfg, &text)?;
    Ok(())
}

fn cmd_sweep(o: &Overrides) -> CmdResult {
    let cfg = o.resolve()?;
    require_range(&cfg)?;
    if cfg.aspects != 2 {
        return Err(Failure::Usage(anyhow!("sweeps compare two viewpoints; aspects must be 2")));
    }
    let raw = load_raw(&cfg)?;
    let settings = SweepSettings {
        topics: cfg.topic_range.clone(),
        sampler: cfg.sampler(false),
        svm: cfg.svm,
        threshold: cfg.threshold,
        seed: cfg.seed,
        replicates: cfg.replicates,
        jobs: cfg.jobs,
    };
    let mut reports = Vec::new();
    for scheme in cfg.sweep_schemes() {
        let corpus = apply_partition(&raw, scheme, cfg.min_count)?;
        reports.push(consistency_sweep(&corpus, scheme, &settings)?);
    }
    let report = SweepReport::merge(reports);
    let out = OutputDir::create(&cfg.output_dir, "sweep")?;
    out.write_json("sweep.json", &cfg, &report)?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    out.write_csv("sweep.csv", &cfg, &csv)?;
    print!("{}", String::from_utf8_lossy(&csv));
    println!("separation {:.4}; overlap points {:?}", report.separation, report.overlap_points);
    Ok(())
}

fn cmd_accuracy_curve(o: &Overrides) -> CmdResult {
    let cfg = o.resolve()?;
    require_range(&cfg)?;
    let raw = load_raw(&cfg)?;
    let settings = CurveSettings {
        topics: cfg.topic_range.clone(),
        aspects: cfg.aspects,
        sampler: cfg.sampler(false),
        svm: cfg.svm,
        folds: cfg.folds,
        seed: cfg.seed,
        jobs: cfg.jobs,
    };
    let points = match cfg.model {
        ModelKind::Lda => accuracy_curve_lda(&build_unimodal(&raw, cfg.min_count)?, &settings)?,
        ModelKind::Corrlda2 => accuracy_curve_corrlda2(
            &apply_partition(&raw, cfg.scheme, cfg.min_count)?,
            &[FeatureMode::Topics, FeatureMode::Aspects, FeatureMode::Combined],
            &settings,
        )?,
    };
    let mut csv = String::from("T,model,features,mean_accuracy\n");
    for p in &points {
        csv.push_str(&format!("{},{},{},{}\n", p.topics, p.model, p.features, p.cv.mean_accuracy));
    }
    let out = OutputDir::create(&cfg.output_dir, "accuracy-curve")?;
    out.write_json("accuracy_curve.json", &cfg, &points)?;
    out.write_csv("accuracy_curve.csv", &cfg, csv.as_bytes())?;
    print!("{csv}");
    Ok(())
}

#[derive(Serialize)]
struct Stats {
    documents: usize,
    tokens: usize,
    named_entity_tokens: usize,
    lda: LdaStats,
    schemes: Vec<SchemeStats>,
}

#[derive(Serialize)]
struct SchemeStats {
    scheme: PartitionScheme,
    #[serde(flatten)]
    stats: CorpusStats,
}

#[derive(Serialize)]
struct LdaStats {
    documents: usize,
    vocab: usize,
    tokens: usize,
}

fn cmd_stats(o: &Overrides) -> CmdResult {
    let cfg = o.resolve()?;
    let raw = load_raw(&cfg)?;
    let uni = build_unimodal(&raw, cfg.min_count)?;
    let mut schemes = Vec::new();
    for scheme in PartitionScheme::ALL {
        schemes.push(SchemeStats { scheme, stats: corpus_stats(&apply_partition(&raw, scheme, cfg.min_count)?) });
    }
    let tokens = raw.iter().flat_map(|d| &d.tokens);
    let stats = Stats {
        documents: raw.len(),
        tokens: tokens.clone().count(),
        named_entity_tokens: tokens.filter(|t| t.is_named_entity()).count(),
        lda: LdaStats {
            documents: uni.docs.len(),
            vocab: uni.vocab.len(),
            tokens: uni.docs.iter().map(|d| d.ids.len()).sum(),
        },
        schemes,
    };
    println!("{}", serde_json::to_string_pretty(&stats).map_err(anyhow::Error::from)?);
    let out = OutputDir::create(&cfg.output_dir, "stats")?;
    out.write_json("stats.json", &cfg, &stats)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.command {
        Command::Train(o) => cmd_train(o),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Groups(a) => cmd_groups(a),
        Command::Sweep(o) => cmd_sweep(o),
        Command::AccuracyCurve(o) => cmd_accuracy_curve(o),
        Command::Stats(o) => cmd_stats(o),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
