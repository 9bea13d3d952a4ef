//! Benchmark measurements: the nested microbenchmark hierarchy, application
//! request-latency series, duet trimming and file ingestion.

use std::collections::{btree_map::Entry, BTreeMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// Pooled base and variation latencies with the cut of each run.
type TrimmedPair = (Vec<f64>, Vec<f64>, Vec<TrimCut>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Version {
    Base,
    Variation,
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Version::Base => "base",
            Version::Variation => "variation",
        })
    }
}

impl FromStr for Version {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(Version::Base),
            "variation" => Ok(Version::Variation),
            other => Err(Error::invalid(format!("unknown version `{other}`"))),
        }
    }
}

/// Instance runs x suite runs x iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub instances: usize,
    pub suites: usize,
    pub iterations: usize,
}

impl Shape {
    pub const fn new(instances: usize, suites: usize, iterations: usize) -> Self {
        Shape {
            instances,
            suites,
            iterations,
        }
    }

    pub fn leaves(&self) -> usize {
        self.instances * self.suites * self.iterations
    }

    pub fn validate(&self) -> Result<()> {
        if self.leaves() == 0 {
            return Err(Error::invalid(format!(
                "shape {}x{}x{} has an empty level",
                self.instances, self.suites, self.iterations
            )));
        }
        Ok(())
    }
}

impl Default for Shape {
    fn default() -> Self {
        Shape::new(3, 3, 5)
    }
}

/// Durations of one benchmark, one commit, one version, nested as
/// instance run -> suite run -> iteration. Levels may be ragged but never
/// empty; every leaf is finite and positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSet {
    pub benchmark: String,
    pub commit: String,
    pub version: Version,
    values: Vec<Vec<Vec<f64>>>,
}

impl MeasurementSet {
    pub fn new(
        benchmark: impl Into<String>,
        commit: impl Into<String>,
        version: Version,
        values: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let benchmark = benchmark.into();
        if values.is_empty() {
            return Err(Error::validation(format!("`{benchmark}`: no instance runs")));
        }
        for (i, suites) in values.iter().enumerate() {
            if suites.is_empty() {
                return Err(Error::validation(format!(
                    "`{benchmark}`: instance {i} has no suite runs"
                )));
            }
            for (s, iters) in suites.iter().enumerate() {
                if iters.is_empty() {
                    return Err(Error::validation(format!(
                        "`{benchmark}`: instance {i} suite {s} has no iterations"
                    )));
                }
                if let Some(bad) = iters.iter().find(|v| !v.is_finite() || **v <= 0.0) {
                    return Err(Error::validation(format!(
                        "`{benchmark}`: non-positive duration {bad}"
                    )));
                }
            }
        }
        Ok(MeasurementSet {
            benchmark,
            commit: commit.into(),
            version,
            values,
        })
    }

    pub fn values(&self) -> &[Vec<Vec<f64>>] {
        &self.values
    }

    /// `Some` when every level has a uniform length.
    pub fn shape(&self) -> Option<Shape> {
        let suites = self.values[0].len();
        let iterations = self.values[0][0].len();
        let regular = self.values.iter().all(|s| {
            s.len() == suites && s.iter().all(|it| it.len() == iterations)
        });
        regular.then(|| Shape::new(self.values.len(), suites, iterations))
    }

    pub fn leaf_count(&self) -> usize {
        self.values.iter().flatten().map(Vec::len).sum()
    }

    /// Leaves in (instance, suite, iteration) order.
    pub fn flatten(&self) -> Vec<f64> {
        self.values.iter().flatten().flatten().copied().collect()
    }

    /// Inverse of [`flatten`](Self::flatten) for a regular shape.
    pub fn regroup(
        benchmark: impl Into<String>,
        commit: impl Into<String>,
        version: Version,
        flat: &[f64],
        shape: Shape,
    ) -> Result<Self> {
        shape.validate()?;
        if flat.len() != shape.leaves() {
            return Err(Error::invalid(format!(
                "{} values do not fill shape {}x{}x{}",
                flat.len(),
                shape.instances,
                shape.suites,
                shape.iterations
            )));
        }
        let values = flat
            .chunks(shape.suites * shape.iterations)
            .map(|inst| inst.chunks(shape.iterations).map(<[f64]>::to_vec).collect())
            .collect();
        MeasurementSet::new(benchmark, commit, version, values)
    }
}

/// Latencies of one request type observed in one duet run, ordered by
/// sequence index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppRequestSeries {
    pub commit: String,
    pub version: Version,
    pub request_type: String,
    latencies: Vec<(u64, f64)>,
}

impl AppRequestSeries {
    pub fn new(
        commit: impl Into<String>,
        version: Version,
        request_type: impl Into<String>,
        latencies: Vec<(u64, f64)>,
    ) -> Result<Self> {
        let request_type = request_type.into();
        for w in latencies.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::validation(format!(
                    "`{request_type}`: sequence index {} does not follow {}",
                    w[1].0, w[0].0
                )));
            }
        }
        if let Some((seq, bad)) = latencies.iter().find(|(_, v)| !v.is_finite() || *v <= 0.0) {
            return Err(Error::validation(format!(
                "`{request_type}`: non-positive latency {bad} at seq {seq}"
            )));
        }
        Ok(AppRequestSeries {
            commit: commit.into(),
            version,
            request_type,
            latencies,
        })
    }

    pub fn latencies(&self) -> &[(u64, f64)] {
        &self.latencies
    }

    pub fn values(&self) -> Vec<f64> {
        self.latencies.iter().map(|&(_, v)| v).collect()
    }

    pub fn len(&self) -> usize {
        self.latencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.latencies.is_empty()
    }
}

/// Positions kept by a duet trim: `start..end` of the first `paired_len`
/// entries of each series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrimCut {
    pub paired_len: usize,
    pub start: usize,
    pub end: usize,
}

impl TrimCut {
    pub fn compute(len: usize, head_frac: f64, tail_frac: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&head_frac)
            || !(0.0..1.0).contains(&tail_frac)
            || head_frac + tail_frac >= 1.0
        {
            return Err(Error::invalid(format!(
                "trim fractions head {head_frac} + tail {tail_frac} must be non-negative and sum below 1"
            )));
        }
        // The epsilon keeps products like 20 * 0.05 from flooring to 0.
        let head = (len as f64 * head_frac + 1e-9).floor() as usize;
        let tail = (len as f64 * tail_frac + 1e-9).floor() as usize;
        let end = len.saturating_sub(tail);
        if head >= end {
            return Err(Error::invalid(format!(
                "series of {len} entries is empty after trimming"
            )));
        }
        Ok(TrimCut {
            paired_len: len,
            start: head,
            end,
        })
    }

    pub fn kept(&self) -> usize {
        self.end - self.start
    }

    fn apply(&self, s: &AppRequestSeries) -> AppRequestSeries {
        AppRequestSeries {
            latencies: s.latencies[self.start..self.end].to_vec(),
            ..s.clone()
        }
    }
}

/// Drops the warm-up head and the tail of a single series.
pub fn trim_duet_series(
    series: &AppRequestSeries,
    head_frac: f64,
    tail_frac: f64,
) -> Result<(AppRequestSeries, TrimCut)> {
    let cut = TrimCut::compute(series.len(), head_frac, tail_frac)?;
    Ok((cut.apply(series), cut))
}

/// Trims both halves of a duet run with one shared cut, computed over the
/// common prefix length, so base and variation keep the same positions.
pub fn trim_duet_pair(
    base: &AppRequestSeries,
    variation: &AppRequestSeries,
    head_frac: f64,
    tail_frac: f64,
) -> Result<(AppRequestSeries, AppRequestSeries, TrimCut)> {
    let cut = TrimCut::compute(base.len().min(variation.len()), head_frac, tail_frac)?;
    Ok((cut.apply(base), cut.apply(variation), cut))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Json,
}

impl DataFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => DataFormat::Json,
            _ => DataFormat::Csv,
        }
    }
}

pub const MICRO_CSV_HEADER: &str = "benchmark,commit,version,instance,suite,iteration,duration_s";
pub const APP_CSV_HEADER: &str = "commit,version,request_type,seq,latency_s";

fn decimal<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Num {
        F(f64),
        S(String),
    }
    match Num::deserialize(d)? {
        Num::F(v) => Ok(v),
        Num::S(s) => s.trim().parse().map_err(serde::de::Error::custom),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicroRow {
    pub benchmark: String,
    pub commit: String,
    pub version: Version,
    pub instance: u32,
    pub suite: u32,
    pub iteration: u32,
    #[serde(deserialize_with = "decimal")]
    pub duration_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppRow {
    pub commit: String,
    pub version: Version,
    pub request_type: String,
    pub seq: u64,
    #[serde(deserialize_with = "decimal")]
    pub latency_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ingested {
    Micro(Vec<MeasurementSet>),
    App(Vec<AppRequestSeries>),
}

fn read_csv_rows<T: serde::de::DeserializeOwned>(text: &str, origin: &str) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    reader
        .deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| Error::parse(format!("{origin}: row {}", i + 1), e.to_string()))
        })
        .collect()
}

fn csv_header(text: &str) -> Option<&str> {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
}

/// Reads a microbenchmark or application measurement file. The schema is
/// recognised from the CSV header or the keys of the first JSON row.
pub fn ingest_measurements(path: &Path, format: DataFormat) -> Result<Ingested> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    ingest_str(&text, format, &origin)
}

pub fn ingest_str(text: &str, format: DataFormat, origin: &str) -> Result<Ingested> {
    match format {
        DataFormat::Csv => {
            let header: String = csv_header(text)
                .unwrap_or_default()
                .split(',')
                .map(str::trim)
                .collect::<Vec<_>>()
                .join(",");
            if header == MICRO_CSV_HEADER {
                group_micro(read_csv_rows(text, origin)?, origin).map(Ingested::Micro)
            } else if header == APP_CSV_HEADER {
                group_app(read_csv_rows(text, origin)?, origin).map(Ingested::App)
            } else {
                Err(Error::parse(
                    origin,
                    format!(
                        "unrecognised header `{header}`; expected `{MICRO_CSV_HEADER}` or `{APP_CSV_HEADER}`"
                    ),
                ))
            }
        }
        DataFormat::Json => {
            let rows: Vec<serde_json::Value> =
                serde_json::from_str(text).map_err(|e| Error::parse(origin, e.to_string()))?;
            let is_app = rows
                .first()
                .is_some_and(|r| r.get("latency_s").is_some());
            let parse = |e: serde_json::Error| Error::parse(origin, e.to_string());
            let value = serde_json::Value::Array(rows);
            if is_app {
                let rows: Vec<AppRow> = serde_json::from_value(value).map_err(parse)?;
                group_app(rows, origin).map(Ingested::App)
            } else {
                let rows: Vec<MicroRow> = serde_json::from_value(value).map_err(parse)?;
                group_micro(rows, origin).map(Ingested::Micro)
            }
        }
    }
}

type Hierarchy = BTreeMap<u32, BTreeMap<u32, BTreeMap<u32, f64>>>;

fn group_micro(rows: Vec<MicroRow>, origin: &str) -> Result<Vec<MeasurementSet>> {
    let mut groups: BTreeMap<(String, String, Version), Hierarchy> = BTreeMap::new();
    for row in rows {
        if !row.duration_s.is_finite() || row.duration_s <= 0.0 {
            return Err(Error::validation(format!(
                "{origin}: `{}` has non-positive duration {}",
                row.benchmark, row.duration_s
            )));
        }
        let h = groups
            .entry((row.benchmark.clone(), row.commit.clone(), row.version))
            .or_default();
        match h
            .entry(row.instance)
            .or_default()
            .entry(row.suite)
            .or_default()
            .entry(row.iteration)
        {
            Entry::Occupied(_) => {
                return Err(Error::validation(format!(
                    "{origin}: duplicate key ({}, {}, {}) for `{}` at {} {}",
                    row.instance, row.suite, row.iteration, row.benchmark, row.commit, row.version
                )))
            }
            Entry::Vacant(v) => {
                v.insert(row.duration_s);
            }
        }
    }
    groups
        .into_iter()
        .map(|((bench, commit, version), h)| {
            let values = h
                .into_values()
                .map(|suites| {
                    suites
                        .into_values()
                        .map(|iters| iters.into_values().collect())
                        .collect()
                })
                .collect();
            MeasurementSet::new(bench, commit, version, values)
        })
        .collect()
}

fn group_app(rows: Vec<AppRow>, origin: &str) -> Result<Vec<AppRequestSeries>> {
    let mut groups: BTreeMap<(String, Version, String), BTreeMap<u64, f64>> = BTreeMap::new();
    for row in rows {
        if !row.latency_s.is_finite() || row.latency_s <= 0.0 {
            return Err(Error::validation(format!(
                "{origin}: non-positive latency {} at seq {}",
                row.latency_s, row.seq
            )));
        }
        let series = groups
            .entry((row.commit.clone(), row.version, row.request_type.clone()))
            .or_default();
        if series.insert(row.seq, row.latency_s).is_some() {
            return Err(Error::validation(format!(
                "{origin}: duplicate seq {} for `{}` at {} {}",
                row.seq, row.request_type, row.commit, row.version
            )));
        }
    }
    groups
        .into_iter()
        .map(|((commit, version, rt), lat)| {
            AppRequestSeries::new(commit, version, rt, lat.into_iter().collect())
        })
        .collect()
}

pub fn micro_rows(sets: &[MeasurementSet]) -> Vec<MicroRow> {
    let mut rows = Vec::new();
    for set in sets {
        for (i, suites) in set.values.iter().enumerate() {
            for (s, iters) in suites.iter().enumerate() {
                for (t, &v) in iters.iter().enumerate() {
                    rows.push(MicroRow {
                        benchmark: set.benchmark.clone(),
                        commit: set.commit.clone(),
                        version: set.version,
                        instance: i as u32,
                        suite: s as u32,
                        iteration: t as u32,
                        duration_s: v,
                    });
                }
            }
        }
    }
    rows
}

/// CSV text for microbenchmark sets. Durations use Rust's shortest
/// round-trip decimal rendering, so reading the file back is lossless.
pub fn micro_csv_string(sets: &[MeasurementSet]) -> String {
    let mut out = format!("{MICRO_CSV_HEADER}\n");
    for r in micro_rows(sets) {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.benchmark, r.commit, r.version, r.instance, r.suite, r.iteration, r.duration_s
        ));
    }
    out
}

pub fn app_csv_string(series: &[AppRequestSeries]) -> String {
    let mut out = format!("{APP_CSV_HEADER}\n");
    for s in series {
        for &(seq, v) in &s.latencies {
            out.push_str(&format!(
                "{},{},{},{seq},{v}\n",
                s.commit, s.version, s.request_type
            ));
        }
    }
    out
}

/// Lists the measurement files that make up a commit series. Paths are
/// relative to the manifest's directory; the format follows the extension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub project: String,
    pub base_commit: String,
    pub commits: Vec<String>,
    #[serde(default)]
    pub micro: Vec<PathBuf>,
    /// One file per duet run; each holds both versions.
    #[serde(default)]
    pub app: Vec<PathBuf>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PairData {
    Micro {
        base: MeasurementSet,
        variation: MeasurementSet,
    },
    App {
        base: Vec<f64>,
        variation: Vec<f64>,
        cuts: Vec<TrimCut>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommitPoint {
    pub commit: String,
    pub commit_index: usize,
    pub data: PairData,
}

/// Data for one metric (benchmark or request type), in commit order. Commits
/// without data for this metric are skipped, which gives sparse series.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub metric: String,
    pub points: Vec<CommitPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommitSeries {
    pub project: String,
    pub base_commit: String,
    pub commits: Vec<String>,
    pub metrics: BTreeMap<String, MetricSeries>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrimConfig {
    pub head_frac: f64,
    pub tail_frac: f64,
}

impl Default for TrimConfig {
    fn default() -> Self {
        TrimConfig {
            head_frac: 0.05,
            tail_frac: 0.20,
        }
    }
}

impl CommitSeries {
    /// Assembles a series from ingested micro sets and duet runs. Each
    /// element of `app_runs` is one duet run (one file's worth of series).
    pub fn assemble(
        project: impl Into<String>,
        base_commit: impl Into<String>,
        commits: Vec<String>,
        micro: Vec<MeasurementSet>,
        app_runs: Vec<Vec<AppRequestSeries>>,
        trim: TrimConfig,
    ) -> Result<Self> {
        let base_commit = base_commit.into();
        if commits.is_empty() {
            return Err(Error::validation("commit series lists no commits"));
        }
        let mut index = BTreeMap::new();
        for (i, c) in commits.iter().enumerate() {
            if index.insert(c.clone(), i).is_some() {
                return Err(Error::validation(format!("commit `{c}` listed twice")));
            }
        }
        if !index.contains_key(&base_commit) {
            return Err(Error::validation(format!(
                "base commit `{base_commit}` is not in the commit list"
            )));
        }
        let lookup = |c: &str| {
            index
                .get(c)
                .copied()
                .ok_or_else(|| Error::validation(format!("data for unlisted commit `{c}`")))
        };

        type MicroPair = (Option<MeasurementSet>, Option<MeasurementSet>);
        let mut micro_pairs: BTreeMap<(String, usize), MicroPair> = BTreeMap::new();
        for set in micro {
            let ci = lookup(&set.commit)?;
            let slot = micro_pairs.entry((set.benchmark.clone(), ci)).or_default();
            let target = match set.version {
                Version::Base => &mut slot.0,
                Version::Variation => &mut slot.1,
            };
            if target.is_some() {
                return Err(Error::validation(format!(
                    "`{}` at {} {} appears in more than one file",
                    set.benchmark, set.commit, set.version
                )));
            }
            *target = Some(set);
        }

        let mut metrics: BTreeMap<String, MetricSeries> = BTreeMap::new();
        let push = |metrics: &mut BTreeMap<String, MetricSeries>, metric: &str, ci: usize, data: PairData| {
            metrics
                .entry(metric.to_string())
                .or_insert_with(|| MetricSeries {
                    metric: metric.to_string(),
                    points: Vec::new(),
                })
                .points
                .push(CommitPoint {
                    commit: commits[ci].clone(),
                    commit_index: ci,
                    data,
                });
        };

        for ((bench, ci), pair) in micro_pairs {
            match pair {
                (Some(base), Some(variation)) => {
                    if base.shape() != variation.shape() {
                        log_shape_mismatch(&bench, &commits[ci]);
                    }
                    push(&mut metrics, &bench, ci, PairData::Micro { base, variation })
                }
                (b, _) => {
                    let missing = if b.is_none() { "base" } else { "variation" };
                    return Err(Error::validation(format!(
                        "`{bench}` at {} has no {missing} measurements",
                        commits[ci]
                    )));
                }
            }
        }

        let mut app_pairs: BTreeMap<(String, usize), TrimmedPair> = BTreeMap::new();
        for run in app_runs {
            let mut by_key: BTreeMap<(String, String), [Option<AppRequestSeries>; 2]> =
                BTreeMap::new();
            for s in run {
                let slot = by_key
                    .entry((s.request_type.clone(), s.commit.clone()))
                    .or_default();
                let i = usize::from(s.version == Version::Variation);
                slot[i] = Some(s);
            }
            for ((rt, commit), [b, v]) in by_key {
                let (Some(b), Some(v)) = (b, v) else {
                    return Err(Error::validation(format!(
                        "duet run for `{rt}` at {commit} lacks one version"
                    )));
                };
                let ci = lookup(&commit)?;
                let (tb, tv, cut) = trim_duet_pair(&b, &v, trim.head_frac, trim.tail_frac)?;
                let entry = app_pairs.entry((rt, ci)).or_default();
                entry.0.extend(tb.values());
                entry.1.extend(tv.values());
                entry.2.push(cut);
            }
        }
        for ((rt, ci), (base, variation, cuts)) in app_pairs {
            if metrics.get(&rt).is_some_and(|m| {
                m.points
                    .iter()
                    .any(|p| matches!(p.data, PairData::Micro { .. }))
            }) {
                return Err(Error::validation(format!(
                    "`{rt}` names both a microbenchmark and a request type"
                )));
            }
            push(&mut metrics, &rt, ci, PairData::App {
                base,
                variation,
                cuts,
            });
        }

        for m in metrics.values_mut() {
            m.points.sort_by_key(|p| p.commit_index);
        }
        Ok(CommitSeries {
            project: project.into(),
            base_commit,
            commits,
            metrics,
        })
    }

    pub fn load(manifest_path: &Path, trim: TrimConfig) -> Result<Self> {
        let manifest = Manifest::load(manifest_path)?;
        let dir = manifest_path.parent().unwrap_or(Path::new("."));
        let mut micro = Vec::new();
        for rel in &manifest.micro {
            let path = dir.join(rel);
            match ingest_measurements(&path, DataFormat::from_path(&path))? {
                Ingested::Micro(sets) => micro.extend(sets),
                Ingested::App(_) => {
                    return Err(Error::validation(format!(
                        "{} is listed as micro but holds application data",
                        path.display()
                    )))
                }
            }
        }
        let mut app_runs = Vec::new();
        for rel in &manifest.app {
            let path = dir.join(rel);
            match ingest_measurements(&path, DataFormat::from_path(&path))? {
                Ingested::App(series) => app_runs.push(series),
                Ingested::Micro(_) => {
                    return Err(Error::validation(format!(
                        "{} is listed as app but holds microbenchmark data",
                        path.display()
                    )))
                }
            }
        }
        CommitSeries::assemble(
            manifest.project,
            manifest.base_commit,
            manifest.commits,
            micro,
            app_runs,
            trim,
        )
    }
}

fn log_shape_mismatch(bench: &str, commit: &str) {
    eprintln!("warning: `{bench}` at {commit}: base and variation shapes differ");
}
