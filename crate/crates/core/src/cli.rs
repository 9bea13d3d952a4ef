//! The `benchgate` command line.
//!
//! Exit codes: 0 clean, 1 a definite regression was detected, 2 usage or
//! validation error. Every file is written below the output directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::config::{ProjectConfig, Scenario};
use crate::detection::{analyze_series, detections_csv_string, Detection};
use crate::measurements::CommitSeries;
use crate::optimizer::{optimize, reference_impact};
use crate::scheduler::{make_duet_plan, make_rmit_plan};
use crate::simulator::{
    evaluate_matrix, evaluate_runs, generate_history, matrix_csv_string, Aggregate, Evaluation,
};
use crate::stats::{reports_csv_string, ChangeReport};

#[derive(Debug, Parser)]
#[command(name = "benchgate", version, about = "Microbenchmark suite minimization and performance change detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// Project configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select a non-redundant, practically relevant microbenchmark suite.
    Optimize {
        #[command(flatten)]
        common: Common,
    },
    /// Bootstrap change reports and jump/trend detections for a commit series.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Bootstrap seed; overrides the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Emit an execution plan for an external runner.
    Plan {
        #[command(subcommand)]
        kind: PlanKind,
    },
    /// Generate labelled synthetic histories and score the detector on them.
    Simulate {
        /// Scenario file (JSON).
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print the detections of a previous `analyze` run, ranked by
    /// reference impact.
    Report {
        /// Directory written by `analyze`.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum PlanKind {
    /// Randomized multiple interleaved trials for microbenchmarks.
    Rmit {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Co-located application benchmark of both versions.
    Duet {
        #[command(flatten)]
        common: Common,
    },
}

/// Detection with the reference impact of its benchmark, when known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedDetection {
    #[serde(flatten)]
    pub detection: Detection,
    pub reference_impact_s: Option<f64>,
}

fn load_config(common: &Common) -> anyhow::Result<ProjectConfig> {
    let mut cfg = ProjectConfig::load(&common.config)
        .with_context(|| format!("loading config {}", common.config.display()))?;
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> anyhow::Result<PathBuf> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

/// Runs a parsed command and returns the process exit code. Errors map to
/// exit code 2 in the binary.
pub fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Optimize { common } => cmd_optimize(&common),
        Command::Analyze { common, seed } => cmd_analyze(&common, seed),
        Command::Plan { kind: PlanKind::Rmit { common, seed } } => cmd_plan_rmit(&common, seed),
        Command::Plan { kind: PlanKind::Duet { common } } => cmd_plan_duet(&common),
        Command::Simulate { scenario, seed, out } => cmd_simulate(&scenario, seed, &out),
        Command::Report { out } => cmd_report(&out),
    }
}

pub fn cmd_optimize(common: &Common) -> anyhow::Result<u8> {
    let cfg = load_config(common)?;
    let (app, micros) = cfg.load_graphs()?;
    let suite = optimize(&app, &micros, &cfg.optimizer)?;
    write(&cfg.out_dir, "suite.json", suite.to_json_string() + "\n")?;
    let table = suite.to_table();
    write(&cfg.out_dir, "suite.txt", &table)?;
    print!("{table}");
    Ok(0)
}

fn impacts(cfg: &ProjectConfig) -> anyhow::Result<BTreeMap<String, f64>> {
    if cfg.app_graph.is_none() {
        return Ok(BTreeMap::new());
    }
    let (app, micros) = cfg.load_graphs()?;
    micros
        .iter()
        .map(|m| Ok((m.id().to_string(), reference_impact(&app, m)?)))
        .collect()
}

fn file_safe(metric: &str) -> String {
    metric
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

pub fn cmd_analyze(common: &Common, seed: Option<u64>) -> anyhow::Result<u8> {
    let mut cfg = load_config(common)?;
    if let Some(seed) = seed {
        cfg.bootstrap.rng_seed = seed;
    }
    let manifest = cfg
        .manifest
        .clone()
        .context("config has no `manifest` to analyze")?;
    let series = CommitSeries::load(&manifest, cfg.trim)?;
    if series.metrics.is_empty() {
        bail!("{}: no measurements found", manifest.display());
    }
    let impacts = impacts(&cfg)?;
    let analysis = analyze_series(&series, &cfg.bootstrap, &cfg.detector)?;

    let reports = analysis.reports();
    let detections: Vec<AnnotatedDetection> = analysis
        .detections()
        .into_iter()
        .map(|d| AnnotatedDetection {
            reference_impact_s: impacts.get(&d.metric).copied(),
            detection: d,
        })
        .collect();
    let out = &cfg.out_dir;
    write(out, "reports.csv", reports_csv_string(&reports))?;
    write(out, "reports.json", json(&reports))?;
    let plain: Vec<Detection> = detections.iter().map(|d| d.detection.clone()).collect();
    write(out, "detections.csv", detections_csv_string(&plain))?;
    write(out, "detections.json", json(&detections))?;
    for m in &analysis.metrics {
        write(out, &format!("plot/{}.csv", file_safe(&m.metric)), m.plot_csv_string())?;
    }
    let summary = render_summary(&reports, &detections);
    write(out, "summary.txt", &summary)?;
    print!("{summary}");

    let regressions = plain.iter().filter(|d| d.is_definite_regression()).count();
    Ok(if regressions > 0 { 1 } else { 0 })
}

fn render_summary(reports: &[ChangeReport], detections: &[AnnotatedDetection]) -> String {
    let mut out = String::new();
    let metrics: std::collections::BTreeSet<&str> = reports.iter().map(|r| r.metric.as_str()).collect();
    let _ = writeln!(
        out,
        "{} reports over {} metrics, {} detections",
        reports.len(),
        metrics.len(),
        detections.len()
    );
    let mut ranked: Vec<&AnnotatedDetection> = detections.iter().collect();
    ranked.sort_by(|a, b| {
        let ia = a.reference_impact_s.unwrap_or(f64::NEG_INFINITY);
        let ib = b.reference_impact_s.unwrap_or(f64::NEG_INFINITY);
        ib.total_cmp(&ia)
            .then(a.detection.commit_index.cmp(&b.detection.commit_index))
            .then_with(|| a.detection.metric.cmp(&b.detection.metric))
    });
    for a in ranked {
        let d = &a.detection;
        let impact = a
            .reference_impact_s
            .map_or_else(|| "-".to_string(), |v| format!("{v:.3}s"));
        let label = if d.is_definite_regression() { "REGRESSION" } else { "warning" };
        let _ = writeln!(
            out,
            "{label:<10} {} {} {} {} {:+.2}% (threshold {:.2}%, since {}) impact {impact}",
            d.commit, d.metric, d.kind, d.intensity, d.magnitude_pct, d.threshold_pct, d.window_start
        );
    }
    out
}

pub fn cmd_plan_rmit(common: &Common, seed: u64) -> anyhow::Result<u8> {
    let cfg = load_config(common)?;
    let suite = if !cfg.suite.is_empty() {
        cfg.suite.clone()
    } else if cfg.app_graph.is_some() {
        let (app, micros) = cfg.load_graphs()?;
        optimize(&app, &micros, &cfg.optimizer)?
            .selected()
            .map(str::to_string)
            .collect()
    } else {
        bail!("config lists neither `suite` nor call graphs to derive one from");
    };
    let plan = make_rmit_plan(&suite, &cfg.rmit, seed)?;
    let path = write(&cfg.out_dir, "plan_rmit.json", plan.to_json_string() + "\n")?;
    println!(
        "{} benchmarks, {} suite runs, {} measurements per benchmark and version -> {}",
        plan.suite.len(),
        plan.runs.len(),
        plan.measurements_per_benchmark(),
        path.display()
    );
    Ok(0)
}

pub fn cmd_plan_duet(common: &Common) -> anyhow::Result<u8> {
    let cfg = load_config(common)?;
    let duet = cfg.duet.as_ref().context("config has no `duet` section")?;
    let plan = make_duet_plan(
        &duet.base_ref,
        &duet.variation_ref,
        duet.workload.resolve()?,
        duet.repetitions,
    )?;
    for w in &plan.warnings {
        eprintln!("warning: {w}");
    }
    let path = write(&cfg.out_dir, "plan_duet.json", plan.to_json_string() + "\n")?;
    println!("duet plan -> {}", path.display());
    Ok(0)
}

#[derive(Serialize)]
struct RunRow {
    seed: u64,
    #[serde(flatten)]
    evaluation: Evaluation,
}

pub fn cmd_simulate(scenario_path: &Path, seed: Option<u64>, out: &Path) -> anyhow::Result<u8> {
    let mut scenario = Scenario::load(scenario_path)
        .with_context(|| format!("loading scenario {}", scenario_path.display()))?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let mut summary = String::new();
    if let Some(spec) = &scenario.history {
        let first = generate_history(spec, scenario.seed)?;
        first.write_to(&out.join("series"))?;
        write(out, "labels.json", json(&first.labels))?;

        let seeds: Vec<u64> = (0..scenario.runs as u64).map(|i| scenario.seed + i).collect();
        let evals = evaluate_runs(spec, seeds.iter().copied(), &scenario.bootstrap, &scenario.detector)?;
        let mut csv = String::from(
            "seed,precision,recall,jump_tp,jump_fp,jump_fn,trend_tp,trend_fp,trend_fn,flagged_commit_rate\n",
        );
        for (s, e) in seeds.iter().zip(&evals) {
            let _ = writeln!(
                csv,
                "{s},{},{},{},{},{},{},{},{},{}",
                e.precision,
                e.recall,
                e.jump.true_positives,
                e.jump.false_positives,
                e.jump.false_negatives,
                e.trend.true_positives,
                e.trend.false_positives,
                e.trend.false_negatives,
                e.flagged_commit_rate
            );
        }
        write(out, "evaluation.csv", csv)?;
        let agg = Aggregate::from_runs(&evals);
        let runs: Vec<RunRow> = seeds
            .iter()
            .zip(evals)
            .map(|(&seed, evaluation)| RunRow { seed, evaluation })
            .collect();
        write(
            out,
            "evaluation.json",
            json(&serde_json::json!({ "scenario": scenario.name, "aggregate": agg, "runs": runs })),
        )?;
        let _ = writeln!(
            summary,
            "{} runs: precision {:.3}, recall {:.3}, flagged commit rate {:.3}",
            agg.runs, agg.precision, agg.recall, agg.flagged_commit_rate
        );
    }
    if let Some(matrix) = &scenario.matrix {
        let cells = evaluate_matrix(matrix, &scenario.bootstrap, &scenario.detector)?;
        write(out, "matrix.csv", matrix_csv_string(&cells))?;
        let _ = writeln!(summary, "matrix: {} cells", cells.len());
    }
    print!("{summary}");
    Ok(0)
}

pub fn cmd_report(out: &Path) -> anyhow::Result<u8> {
    let read = |name: &str| {
        let path = out.join(name);
        fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))
    };
    let reports: Vec<ChangeReport> = serde_json::from_str(&read("reports.json")?)
        .context("parsing reports.json")?;
    let detections: Vec<AnnotatedDetection> = serde_json::from_str(&read("detections.json")?)
        .context("parsing detections.json")?;
    print!("{}", render_summary(&reports, &detections));
    Ok(0)
}
