//! Synthetic commit histories with known performance changes.
//!
//! Each commit gets a base and a variation measurement set. Noise is
//! multiplicative and lognormal at every hierarchy level. Instance and suite
//! factors are shared by both versions of a commit, as in interleaved runs on
//! one machine; iteration noise is independent per version. The variation's
//! true median is the base latency times the product of `1 + magnitude` of
//! all injections active at that commit. Trends ramp linearly over their
//! span.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::{analyze_series, DetectorConfig, Direction, Kind, SeriesAnalysis};
use crate::error::{Error, Result};
use crate::measurements::{
    micro_csv_string, CommitSeries, Manifest, MeasurementSet, PairData, Shape, TrimConfig, Version,
};
use crate::rng::{cell_seed, PortableRng};
use crate::stats::BootstrapConfig;

const SIM_DOMAIN: u64 = 0x5349_4d55_4c41_5445;

/// Relative standard deviations per hierarchy level.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    pub instance: f64,
    pub suite: f64,
    pub iteration: f64,
}

impl NoiseModel {
    pub fn iteration_only(sigma: f64) -> Self {
        NoiseModel {
            iteration: sigma,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, s) in [("instance", self.instance), ("suite", self.suite), ("iteration", self.iteration)] {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::invalid(format!("{name} noise must be a non-negative number")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InjectionKind {
    Jump,
    Trend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectedChange {
    /// First commit index affected.
    pub commit: usize,
    pub kind: InjectionKind,
    pub magnitude_pct: f64,
    /// Commits over which a trend ramps up; ignored for jumps.
    #[serde(default = "one")]
    pub span: usize,
    /// Affected metrics; empty means all.
    #[serde(default)]
    pub metrics: Vec<String>,
}

fn one() -> usize {
    1
}

impl InjectedChange {
    pub fn jump(commit: usize, magnitude_pct: f64) -> Self {
        InjectedChange {
            commit,
            kind: InjectionKind::Jump,
            magnitude_pct,
            span: 1,
            metrics: Vec::new(),
        }
    }

    pub fn trend(commit: usize, span: usize, magnitude_pct: f64) -> Self {
        InjectedChange {
            commit,
            kind: InjectionKind::Trend,
            magnitude_pct,
            span,
            metrics: Vec::new(),
        }
    }

    fn effective_span(&self) -> usize {
        match self.kind {
            InjectionKind::Jump => 1,
            InjectionKind::Trend => self.span,
        }
    }

    fn last_commit(&self) -> usize {
        self.commit + self.effective_span() - 1
    }

    fn affects(&self, metric: &str) -> bool {
        self.metrics.is_empty() || self.metrics.iter().any(|m| m == metric)
    }

    /// Multiplicative factor contributed at `commit`.
    fn factor_at(&self, commit: usize) -> f64 {
        if commit < self.commit {
            return 1.0;
        }
        let progress = match self.kind {
            InjectionKind::Jump => 1.0,
            InjectionKind::Trend => ((commit - self.commit + 1).min(self.span)) as f64 / self.span as f64,
        };
        1.0 + self.magnitude_pct / 100.0 * progress
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistorySpec {
    pub n_commits: usize,
    #[serde(default = "default_latency")]
    pub base_latency_s: f64,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<String>,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default)]
    pub injections: Vec<InjectedChange>,
    #[serde(default)]
    pub shape: Shape,
}

fn default_latency() -> f64 {
    1e-3
}

fn default_metrics() -> Vec<String> {
    vec!["BenchmarkSynthetic".to_string()]
}

impl HistorySpec {
    pub fn new(n_commits: usize, noise: NoiseModel, injections: Vec<InjectedChange>) -> Self {
        HistorySpec {
            n_commits,
            base_latency_s: default_latency(),
            metrics: default_metrics(),
            noise,
            injections,
            shape: Shape::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_commits == 0 {
            return Err(Error::invalid("a history needs at least one commit"));
        }
        if !(self.base_latency_s.is_finite() && self.base_latency_s > 0.0) {
            return Err(Error::invalid("base latency must be positive"));
        }
        if self.metrics.is_empty() {
            return Err(Error::invalid("a history needs at least one metric"));
        }
        self.noise.validate()?;
        self.shape.validate()?;
        for inj in &self.injections {
            if inj.kind == InjectionKind::Trend && inj.span < 2 {
                return Err(Error::invalid("trend injections need a span of at least 2"));
            }
            if inj.commit == 0 || inj.last_commit() >= self.n_commits {
                return Err(Error::invalid(format!(
                    "injection at commit {} (span {}) falls outside commits 1..{}",
                    inj.commit,
                    inj.effective_span(),
                    self.n_commits
                )));
            }
            if !(inj.magnitude_pct > -100.0 && inj.magnitude_pct.is_finite()) {
                return Err(Error::invalid("injection magnitude must exceed -100%"));
            }
        }
        for metric in &self.metrics {
            let mut on_metric: Vec<&InjectedChange> =
                self.injections.iter().filter(|i| i.affects(metric)).collect();
            on_metric.sort_by_key(|i| i.commit);
            for w in on_metric.windows(2) {
                if w[1].commit <= w[0].last_commit() {
                    return Err(Error::invalid(format!(
                        "injections at commits {} and {} overlap on `{metric}`",
                        w[0].commit, w[1].commit
                    )));
                }
            }
        }
        Ok(())
    }

    /// True variation/base median ratio at `commit`.
    pub fn true_ratio(&self, metric: &str, commit: usize) -> f64 {
        self.injections
            .iter()
            .filter(|i| i.affects(metric))
            .map(|i| i.factor_at(commit))
            .product()
    }

    pub fn labels(&self) -> Vec<Label> {
        let mut labels: Vec<Label> = self
            .metrics
            .iter()
            .flat_map(|m| {
                self.injections.iter().filter(|i| i.affects(m)).map(|i| Label {
                    metric: m.clone(),
                    kind: match i.kind {
                        InjectionKind::Jump => Kind::Jump,
                        InjectionKind::Trend => Kind::Trend,
                    },
                    direction: if i.magnitude_pct > 0.0 { Direction::Up } else { Direction::Down },
                    commit_index: i.commit,
                    span: i.effective_span(),
                })
            })
            .collect();
        labels.sort_by(|a, b| (a.commit_index, &a.metric).cmp(&(b.commit_index, &b.metric)));
        labels
    }
}

pub fn commit_name(index: usize) -> String {
    format!("c{index:03}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub metric: String,
    pub kind: Kind,
    pub direction: Direction,
    pub commit_index: usize,
    pub span: usize,
}

impl Label {
    /// Commit positions at which a detection counts as finding this label.
    pub fn accepts(&self, commit_index: usize) -> bool {
        let lo = self.commit_index.saturating_sub(1);
        let hi = self.commit_index + self.span;
        (lo..=hi).contains(&commit_index)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedHistory {
    pub spec: HistorySpec,
    pub seed: u64,
    pub series: CommitSeries,
    pub labels: Vec<Label>,
}

fn lognormal(rng: &mut PortableRng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        1.0
    } else {
        (sigma * rng.standard_normal()).exp()
    }
}

pub fn generate_history(spec: &HistorySpec, seed: u64) -> Result<SimulatedHistory> {
    spec.validate()?;
    let shape = spec.shape;
    let commits: Vec<String> = (0..spec.n_commits).map(commit_name).collect();
    let mut sets = Vec::with_capacity(2 * spec.n_commits * spec.metrics.len());
    for metric in &spec.metrics {
        for (ci, commit) in commits.iter().enumerate() {
            let mut rng = PortableRng::new(cell_seed(seed ^ SIM_DOMAIN, commit, metric));
            let ratio = spec.true_ratio(metric, ci);
            let mut base = Vec::with_capacity(shape.instances);
            let mut variation = Vec::with_capacity(shape.instances);
            for _ in 0..shape.instances {
                let fi = lognormal(&mut rng, spec.noise.instance);
                let mut bs = Vec::with_capacity(shape.suites);
                let mut vs = Vec::with_capacity(shape.suites);
                for _ in 0..shape.suites {
                    let level = spec.base_latency_s * fi * lognormal(&mut rng, spec.noise.suite);
                    let mut bi = Vec::with_capacity(shape.iterations);
                    let mut vi = Vec::with_capacity(shape.iterations);
                    for _ in 0..shape.iterations {
                        bi.push(level * lognormal(&mut rng, spec.noise.iteration));
                        vi.push(level * ratio * lognormal(&mut rng, spec.noise.iteration));
                    }
                    bs.push(bi);
                    vs.push(vi);
                }
                base.push(bs);
                variation.push(vs);
            }
            sets.push(MeasurementSet::new(metric.clone(), commit.clone(), Version::Base, base)?);
            sets.push(MeasurementSet::new(metric.clone(), commit.clone(), Version::Variation, variation)?);
        }
    }
    let series = CommitSeries::assemble(
        "synthetic",
        commits[0].clone(),
        commits,
        sets,
        Vec::new(),
        TrimConfig::default(),
    )?;
    Ok(SimulatedHistory {
        spec: spec.clone(),
        seed,
        series,
        labels: spec.labels(),
    })
}

impl SimulatedHistory {
    /// Writes one measurement CSV per commit plus a manifest; returns the
    /// manifest path.
    pub fn write_to(&self, dir: &Path) -> Result<PathBuf> {
        let micro_dir = dir.join("micro");
        fs::create_dir_all(&micro_dir).map_err(|e| Error::io(&micro_dir, e))?;
        let mut by_commit: BTreeMap<usize, Vec<MeasurementSet>> = BTreeMap::new();
        for m in self.series.metrics.values() {
            for p in &m.points {
                if let PairData::Micro { base, variation } = &p.data {
                    let entry = by_commit.entry(p.commit_index).or_default();
                    entry.push(base.clone());
                    entry.push(variation.clone());
                }
            }
        }
        let mut files = Vec::new();
        for (ci, sets) in by_commit {
            let rel = PathBuf::from("micro").join(format!("{}.csv", self.series.commits[ci]));
            let path = dir.join(&rel);
            fs::write(&path, micro_csv_string(&sets)).map_err(|e| Error::io(&path, e))?;
            files.push(rel);
        }
        let manifest = Manifest {
            project: self.series.project.clone(),
            base_commit: self.series.base_commit.clone(),
            commits: self.series.commits.clone(),
            micro: files,
            app: Vec::new(),
        };
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KindCounts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub labels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub precision: f64,
    pub recall: f64,
    pub jump: KindCounts,
    pub trend: KindCounts,
    pub detections: usize,
    /// Share of (metric, commit) points after the first that carry any
    /// detection.
    pub flagged_commit_rate: f64,
}

/// Scores an analysis against ground-truth labels. A detection matches a
/// label of the same metric, kind and direction when its commit lies within
/// the label's span widened by one commit on each side. With no detections
/// precision is 1; with no labels recall is 1.
pub fn score(analysis: &SeriesAnalysis, labels: &[Label]) -> Evaluation {
    let detections = analysis.detections();
    let mut counts = [KindCounts::default(), KindCounts::default()];
    let slot = |k: Kind| match k {
        Kind::Jump => 0,
        Kind::Trend => 1,
    };
    let matches = |d: &crate::detection::Detection, l: &Label| {
        d.metric == l.metric && d.kind == l.kind && d.direction == l.direction && l.accepts(d.commit_index)
    };
    let mut matched_detections = 0;
    for d in &detections {
        if labels.iter().any(|l| matches(d, l)) {
            matched_detections += 1;
            counts[slot(d.kind)].true_positives += 1;
        } else {
            counts[slot(d.kind)].false_positives += 1;
        }
    }
    let mut found = 0;
    for l in labels {
        counts[slot(l.kind)].labels += 1;
        if detections.iter().any(|d| matches(d, l)) {
            found += 1;
        } else {
            counts[slot(l.kind)].false_negatives += 1;
        }
    }
    let eligible: usize = analysis
        .metrics
        .iter()
        .map(|m| m.reports.len().saturating_sub(1))
        .sum();
    let flagged: std::collections::BTreeSet<(&str, usize)> = detections
        .iter()
        .map(|d| (d.metric.as_str(), d.commit_index))
        .collect();
    Evaluation {
        precision: if detections.is_empty() { 1.0 } else { matched_detections as f64 / detections.len() as f64 },
        recall: if labels.is_empty() { 1.0 } else { found as f64 / labels.len() as f64 },
        jump: counts[0],
        trend: counts[1],
        detections: detections.len(),
        flagged_commit_rate: if eligible == 0 { 0.0 } else { flagged.len() as f64 / eligible as f64 },
    }
}

pub fn evaluate_detector(
    history: &SimulatedHistory,
    bcfg: &BootstrapConfig,
    dcfg: &DetectorConfig,
) -> Result<Evaluation> {
    let analysis = analyze_series(&history.series, bcfg, dcfg)?;
    Ok(score(&analysis, &history.labels))
}

/// Totals over several seeded runs of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub runs: usize,
    pub precision: f64,
    pub recall: f64,
    pub jump: KindCounts,
    pub trend: KindCounts,
    pub flagged_commit_rate: f64,
}

impl Aggregate {
    pub fn from_runs(evals: &[Evaluation]) -> Self {
        let mut jump = KindCounts::default();
        let mut trend = KindCounts::default();
        for e in evals {
            for (acc, c) in [(&mut jump, e.jump), (&mut trend, e.trend)] {
                acc.true_positives += c.true_positives;
                acc.false_positives += c.false_positives;
                acc.false_negatives += c.false_negatives;
                acc.labels += c.labels;
            }
        }
        let tp = jump.true_positives + trend.true_positives;
        let det = tp + jump.false_positives + trend.false_positives;
        let labels = jump.labels + trend.labels;
        let found = labels - jump.false_negatives - trend.false_negatives;
        Aggregate {
            runs: evals.len(),
            precision: if det == 0 { 1.0 } else { tp as f64 / det as f64 },
            recall: if labels == 0 { 1.0 } else { found as f64 / labels as f64 },
            jump,
            trend,
            flagged_commit_rate: evals.iter().map(|e| e.flagged_commit_rate).sum::<f64>()
                / evals.len().max(1) as f64,
        }
    }
}

/// Generates and scores one history per seed.
pub fn evaluate_runs(
    spec: &HistorySpec,
    seeds: impl IntoIterator<Item = u64>,
    bcfg: &BootstrapConfig,
    dcfg: &DetectorConfig,
) -> Result<Vec<Evaluation>> {
    let seeds: Vec<u64> = seeds.into_iter().collect();
    seeds
        .into_par_iter()
        .map(|seed| {
            let h = generate_history(spec, seed)?;
            let b = bcfg.with_seed(bcfg.rng_seed ^ seed);
            evaluate_detector(&h, &b, dcfg)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub magnitudes_pct: Vec<f64>,
    pub noise_pct: Vec<f64>,
    pub runs: usize,
    #[serde(default = "default_matrix_commits")]
    pub n_commits: usize,
}

fn default_matrix_commits() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixCell {
    pub magnitude_pct: f64,
    pub noise_pct: f64,
    pub runs: usize,
    pub recall: f64,
    pub precision: f64,
    pub flagged_commit_rate: f64,
}

/// One jump of each magnitude injected mid-series under iteration noise of
/// each level; every cell runs the seeds `0..runs`.
pub fn evaluate_matrix(
    matrix: &MatrixSpec,
    bcfg: &BootstrapConfig,
    dcfg: &DetectorConfig,
) -> Result<Vec<MatrixCell>> {
    if matrix.n_commits < 3 {
        return Err(Error::invalid("matrix histories need at least 3 commits"));
    }
    let mut cells = Vec::new();
    for &noise in &matrix.noise_pct {
        for &mag in &matrix.magnitudes_pct {
            let spec = HistorySpec::new(
                matrix.n_commits,
                NoiseModel::iteration_only(noise / 100.0),
                vec![InjectedChange::jump(matrix.n_commits / 2, mag)],
            );
            let agg = Aggregate::from_runs(&evaluate_runs(&spec, 0..matrix.runs as u64, bcfg, dcfg)?);
            cells.push(MatrixCell {
                magnitude_pct: mag,
                noise_pct: noise,
                runs: matrix.runs,
                recall: agg.recall,
                precision: agg.precision,
                flagged_commit_rate: agg.flagged_commit_rate,
            });
        }
    }
    Ok(cells)
}

pub fn matrix_csv_string(cells: &[MatrixCell]) -> String {
    let mut out = String::from("magnitude_pct,noise_pct,runs,recall,precision,flagged_commit_rate\n");
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            c.magnitude_pct, c.noise_pct, c.runs, c.recall, c.precision, c.flagged_commit_rate
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::median_change;

    #[test]
    fn noise_free_history_matches_ground_truth() {
        let spec = HistorySpec::new(8, NoiseModel::default(), vec![InjectedChange::jump(5, 10.0)]);
        let h = generate_history(&spec, 1).unwrap();
        let m = &h.series.metrics["BenchmarkSynthetic"];
        for p in &m.points {
            let PairData::Micro { base, variation } = &p.data else { panic!() };
            let change = median_change(&base.flatten(), &variation.flatten()).unwrap();
            let expected = if p.commit_index >= 5 { 10.0 } else { 0.0 };
            assert!((change - expected).abs() < 1e-9, "{} {change}", p.commit);
        }
    }

    #[test]
    fn trend_ramps_linearly() {
        let spec = HistorySpec::new(20, NoiseModel::default(), vec![InjectedChange::trend(5, 10, 6.0)]);
        assert_eq!(spec.true_ratio("BenchmarkSynthetic", 4), 1.0);
        assert!((spec.true_ratio("BenchmarkSynthetic", 5) - 1.006).abs() < 1e-12);
        assert!((spec.true_ratio("BenchmarkSynthetic", 14) - 1.06).abs() < 1e-12);
        assert!((spec.true_ratio("BenchmarkSynthetic", 19) - 1.06).abs() < 1e-12);
    }

    #[test]
    fn zero_injections_means_zero_truth() {
        let spec = HistorySpec::new(5, NoiseModel { instance: 0.01, suite: 0.01, iteration: 0.02 }, vec![]);
        assert!((0..5).all(|c| spec.true_ratio("BenchmarkSynthetic", c) == 1.0));
        assert!(spec.labels().is_empty());
    }

    #[test]
    fn rejects_contradictory_or_out_of_range_injections() {
        let overlap = HistorySpec::new(
            20,
            NoiseModel::default(),
            vec![InjectedChange::jump(5, 10.0), InjectedChange::jump(5, -10.0)],
        );
        assert!(overlap.validate().is_err());
        let inside_trend = HistorySpec::new(
            20,
            NoiseModel::default(),
            vec![InjectedChange::trend(3, 5, 5.0), InjectedChange::jump(6, 10.0)],
        );
        assert!(inside_trend.validate().is_err());
        let out = HistorySpec::new(5, NoiseModel::default(), vec![InjectedChange::trend(3, 5, 5.0)]);
        assert!(out.validate().is_err());
        let short = HistorySpec::new(20, NoiseModel::default(), vec![InjectedChange::trend(3, 1, 5.0)]);
        assert!(short.validate().is_err());
        assert!(HistorySpec::new(0, NoiseModel::default(), vec![]).validate().is_err());
    }

    #[test]
    fn generation_is_seeded() {
        let spec = HistorySpec::new(3, NoiseModel::iteration_only(0.02), vec![]);
        assert_eq!(generate_history(&spec, 4).unwrap(), generate_history(&spec, 4).unwrap());
        assert_ne!(generate_history(&spec, 4).unwrap().series, generate_history(&spec, 5).unwrap().series);
    }

    #[test]
    fn perfect_detection_on_noise_free_series() {
        let spec = HistorySpec::new(
            30,
            NoiseModel::default(),
            vec![InjectedChange::jump(5, 10.0), InjectedChange::trend(12, 10, -6.0)],
        );
        let h = generate_history(&spec, 0).unwrap();
        let bcfg = BootstrapConfig { samples: 200, ..Default::default() };
        let e = evaluate_detector(&h, &bcfg, &DetectorConfig::default()).unwrap();
        assert_eq!((e.precision, e.recall), (1.0, 1.0), "{e:?}");
        assert_eq!(e.jump.true_positives, 1);
        assert_eq!(e.trend.true_positives, 1);
    }

    #[test]
    fn huge_floor_misses_everything() {
        let spec = HistorySpec::new(10, NoiseModel::default(), vec![InjectedChange::jump(5, 10.0)]);
        let h = generate_history(&spec, 0).unwrap();
        let bcfg = BootstrapConfig { samples: 200, ..Default::default() };
        let dcfg = DetectorConfig { min_threshold_pct: 100.0, ..Default::default() };
        let e = evaluate_detector(&h, &bcfg, &dcfg).unwrap();
        assert_eq!(e.recall, 0.0);
        assert_eq!(e.precision, 1.0);
    }

    #[test]
    fn label_windows() {
        let l = Label { metric: "m".into(), kind: Kind::Trend, direction: Direction::Up, commit_index: 5, span: 10 };
        assert!(l.accepts(4) && l.accepts(15) && !l.accepts(16) && !l.accepts(3));
        let j = Label { span: 1, kind: Kind::Jump, ..l };
        assert!(j.accepts(4) && j.accepts(6) && !j.accepts(7));
    }
}
