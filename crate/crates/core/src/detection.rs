//! Jump and trend detection over base-anchored change reports.
//!
//! Every report in a series compares one commit against the same fixed base
//! commit, so consecutive differences of the median changes are
//! commit-to-commit changes. Detection thresholds follow the instability of
//! earlier commits: `max(min_threshold, factor * mean(last window widths))`.
//!
//! A jump at commit `i` is a consecutive difference above the threshold.
//! A trend at commit `i` is a drift over the last `trend_window` reports
//! above the threshold, in a window holding no jump. Of overlapping
//! same-direction trend windows only the one with the largest drift is
//! reported.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurements::{CommitSeries, MetricSeries, PairData};
use crate::rng::cell_seed;
use crate::stats::{
    bootstrap_ci, bootstrap_ci_flat, classify_intensity, BootstrapConfig, ChangeReport, Intensity,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    /// Threshold used while no instability history exists.
    pub initial_threshold_pct: f64,
    /// Per-metric overrides of `initial_threshold_pct`.
    pub metric_initial_threshold_pct: BTreeMap<String, f64>,
    pub threshold_factor: f64,
    pub min_threshold_pct: f64,
    pub instability_window: usize,
    pub trend_window: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            initial_threshold_pct: 1.0,
            metric_initial_threshold_pct: BTreeMap::new(),
            threshold_factor: 0.75,
            min_threshold_pct: 1.0,
            instability_window: 10,
            trend_window: 10,
        }
    }
}

impl DetectorConfig {
    /// Settings for series that only hold every fifth commit.
    pub fn sparse() -> Self {
        DetectorConfig {
            instability_window: 3,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_factor > 0.0 && self.threshold_factor <= 1.0) {
            return Err(Error::invalid(format!(
                "threshold_factor must lie in (0, 1], got {}",
                self.threshold_factor
            )));
        }
        if self.min_threshold_pct.is_nan() || self.min_threshold_pct < 0.0 {
            return Err(Error::invalid("min_threshold_pct must be non-negative"));
        }
        if self.instability_window < 2 || self.trend_window < 2 {
            return Err(Error::invalid("detector windows must be at least 2"));
        }
        Ok(())
    }

    pub fn initial_for(&self, metric: &str) -> f64 {
        self.metric_initial_threshold_pct
            .get(metric)
            .copied()
            .unwrap_or(self.initial_threshold_pct)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Jump,
    Trend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    fn of(delta: f64) -> Self {
        if delta > 0.0 {
            Direction::Up
        } else {
            Direction::Down
        }
    }
}

macro_rules! display_lowercase {
    ($t:ty, $($v:ident => $s:literal),+) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$v => $s),+ })
            }
        }
    };
}
display_lowercase!(Kind, Jump => "jump", Trend => "trend");
display_lowercase!(Direction, Up => "up", Down => "down");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub commit: String,
    /// Position of the commit in the project's commit list.
    pub commit_index: usize,
    pub metric: String,
    pub kind: Kind,
    pub direction: Direction,
    pub intensity: Intensity,
    pub magnitude_pct: f64,
    pub threshold_pct: f64,
    /// First commit of the compared window (previous commit for jumps).
    pub window_start: String,
}

pub const DETECTION_CSV_HEADER: &str =
    "commit,metric,kind,direction,intensity,magnitude_pct,threshold_pct";

impl Detection {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.commit,
            self.metric,
            self.kind,
            self.direction,
            self.intensity,
            self.magnitude_pct,
            self.threshold_pct
        )
    }

    pub fn is_definite_regression(&self) -> bool {
        self.intensity == Intensity::Definite && self.direction == Direction::Up
    }
}

pub fn detections_csv_string(detections: &[Detection]) -> String {
    let mut out = format!("{DETECTION_CSV_HEADER}\n");
    for d in detections {
        out.push_str(&d.csv_row());
        out.push('\n');
    }
    out
}

/// Threshold from the instabilities observed before the current commit.
pub fn dynamic_threshold(history: &[f64], cfg: &DetectorConfig, initial_pct: f64) -> f64 {
    if history.is_empty() {
        return initial_pct.max(cfg.min_threshold_pct);
    }
    let window = &history[history.len().saturating_sub(cfg.instability_window)..];
    let mean = window.iter().sum::<f64>() / window.len() as f64;
    (cfg.threshold_factor * mean).max(cfg.min_threshold_pct)
}

fn thresholds(reports: &[ChangeReport], cfg: &DetectorConfig) -> Vec<f64> {
    let initial = reports
        .first()
        .map_or(cfg.initial_threshold_pct, |r| cfg.initial_for(&r.metric));
    let history: Vec<f64> = reports.iter().map(|r| r.instability_pct).collect();
    (0..reports.len())
        .map(|i| dynamic_threshold(&history[..i], cfg, initial))
        .collect()
}

/// Position identifying a report inside the commit list. Reports carry
/// commit ids; callers that know the list pass the indices explicitly.
fn jumps_with_index(
    reports: &[ChangeReport],
    indices: &[usize],
    thr: &[f64],
) -> Vec<Detection> {
    (1..reports.len())
        .filter_map(|i| {
            let (prev, cur) = (&reports[i - 1], &reports[i]);
            let delta = cur.median_change_pct - prev.median_change_pct;
            (delta.abs() > thr[i]).then(|| Detection {
                commit: cur.commit.clone(),
                commit_index: indices[i],
                metric: cur.metric.clone(),
                kind: Kind::Jump,
                direction: Direction::of(delta),
                intensity: if cur.overlaps(prev) {
                    Intensity::Potential
                } else {
                    Intensity::Definite
                },
                magnitude_pct: delta,
                threshold_pct: thr[i],
                window_start: prev.commit.clone(),
            })
        })
        .collect()
}

fn trends_with_index(
    reports: &[ChangeReport],
    indices: &[usize],
    thr: &[f64],
    jump_positions: &BTreeSet<usize>,
    window: usize,
) -> Vec<Detection> {
    let m: Vec<f64> = reports.iter().map(|r| r.median_change_pct).collect();
    let mut candidates: Vec<(f64, usize)> = (window..reports.len())
        .filter(|&i| jump_positions.range(i - window + 1..=i).next().is_none())
        .map(|i| (m[i] - m[i - window], i))
        .filter(|&(drift, i)| drift.abs() > thr[i])
        .collect();
    candidates.sort_by(|a, b| b.0.abs().total_cmp(&a.0.abs()).then(a.1.cmp(&b.1)));

    // Windows cover the steps (at - window, at]; keep the strongest of
    // overlapping same-direction windows.
    let mut kept: Vec<(f64, usize)> = Vec::new();
    for (drift, at) in candidates {
        let dir = Direction::of(drift);
        let clash = kept
            .iter()
            .any(|&(d, k)| Direction::of(d) == dir && k.abs_diff(at) < window);
        if !clash {
            kept.push((drift, at));
        }
    }
    kept.sort_by_key(|&(_, at)| at);

    kept.into_iter()
        .map(|(drift, at)| {
            let (start, end) = (&reports[at - window], &reports[at]);
            Detection {
                commit: end.commit.clone(),
                commit_index: indices[at],
                metric: end.metric.clone(),
                kind: Kind::Trend,
                direction: Direction::of(drift),
                intensity: if end.overlaps(start) {
                    Intensity::Potential
                } else {
                    Intensity::Definite
                },
                magnitude_pct: drift,
                threshold_pct: thr[at],
                window_start: start.commit.clone(),
            }
        })
        .collect()
}

/// Jumps between successive reports; the series must hold at least two.
pub fn detect_jumps(reports: &[ChangeReport], cfg: &DetectorConfig) -> Result<Vec<Detection>> {
    cfg.validate()?;
    if reports.len() < 2 {
        return Err(Error::invalid("jump detection needs at least two commits"));
    }
    let idx: Vec<usize> = (0..reports.len()).collect();
    Ok(jumps_with_index(reports, &idx, &thresholds(reports, cfg)))
}

/// Trends over `trend_window` reports; windows containing a jump are skipped.
pub fn detect_trends(reports: &[ChangeReport], cfg: &DetectorConfig) -> Result<Vec<Detection>> {
    cfg.validate()?;
    if reports.len() < cfg.trend_window {
        return Err(Error::invalid(format!(
            "trend detection needs at least {} commits, got {}",
            cfg.trend_window,
            reports.len()
        )));
    }
    let idx: Vec<usize> = (0..reports.len()).collect();
    let thr = thresholds(reports, cfg);
    let jumps: BTreeSet<usize> = jumps_with_index(reports, &idx, &thr)
        .iter()
        .map(|d| d.commit_index)
        .collect();
    Ok(trends_with_index(reports, &idx, &thr, &jumps, cfg.trend_window))
}

/// Reports and detections for one metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricAnalysis {
    pub metric: String,
    pub commit_indices: Vec<usize>,
    pub reports: Vec<ChangeReport>,
    pub thresholds: Vec<f64>,
    pub detections: Vec<Detection>,
}

impl MetricAnalysis {
    /// Plot rows: position, commit, change with CI band, threshold, markers.
    pub fn plot_csv_string(&self) -> String {
        let mut out = String::from(
            "index,commit,median_change_pct,ci_low_pct,ci_high_pct,threshold_pct,markers\n",
        );
        for (k, r) in self.reports.iter().enumerate() {
            let markers: Vec<String> = self
                .detections
                .iter()
                .filter(|d| d.commit_index == self.commit_indices[k])
                .map(|d| format!("{}_{}_{}", d.kind, d.direction, d.intensity))
                .collect();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.commit_indices[k],
                r.commit,
                r.median_change_pct,
                r.ci_low_pct,
                r.ci_high_pct,
                self.thresholds[k],
                markers.join(";")
            ));
        }
        out
    }
}

/// Runs detection over precomputed reports. `commit_indices` gives each
/// report's position in the project's commit list.
pub fn analyze_reports(
    reports: Vec<ChangeReport>,
    commit_indices: Vec<usize>,
    cfg: &DetectorConfig,
) -> Result<MetricAnalysis> {
    cfg.validate()?;
    let metric = reports.first().map(|r| r.metric.clone()).unwrap_or_default();
    let thr = thresholds(&reports, cfg);
    let mut detections = Vec::new();
    if reports.len() >= 2 {
        let jumps = jumps_with_index(&reports, &commit_indices, &thr);
        let positions: BTreeSet<usize> = jumps
            .iter()
            .map(|d| commit_indices.iter().position(|&c| c == d.commit_index).unwrap())
            .collect();
        if reports.len() > cfg.trend_window {
            detections.extend(trends_with_index(
                &reports,
                &commit_indices,
                &thr,
                &positions,
                cfg.trend_window,
            ));
        }
        detections.extend(jumps);
    }
    detections.sort_by_key(|d| (d.commit_index, d.kind));
    let flagged: BTreeSet<usize> = detections.iter().map(|d| d.commit_index).collect();
    let reports = reports
        .into_iter()
        .zip(&commit_indices)
        .map(|(r, c)| classify_intensity(r, flagged.contains(c)))
        .collect();
    Ok(MetricAnalysis {
        metric,
        commit_indices,
        reports,
        thresholds: thr,
        detections,
    })
}

fn metric_reports(series: &MetricSeries, bcfg: &BootstrapConfig) -> Result<Vec<ChangeReport>> {
    series
        .points
        .iter()
        .map(|p| {
            let cfg = bcfg.with_seed(cell_seed(bcfg.rng_seed, &p.commit, &series.metric));
            let mut r = match &p.data {
                PairData::Micro { base, variation } => bootstrap_ci(base, variation, &cfg)?,
                PairData::App {
                    base, variation, ..
                } => bootstrap_ci_flat(&p.commit, &series.metric, base, variation, &cfg)?,
            };
            r.commit = p.commit.clone();
            r.metric = series.metric.clone();
            Ok(r)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesAnalysis {
    pub project: String,
    pub base_commit: String,
    pub metrics: Vec<MetricAnalysis>,
}

impl SeriesAnalysis {
    /// All reports, grouped by metric, in commit order.
    pub fn reports(&self) -> Vec<ChangeReport> {
        self.metrics
            .iter()
            .flat_map(|m| m.reports.iter().cloned())
            .collect()
    }

    /// All detections ordered by commit, then metric.
    pub fn detections(&self) -> Vec<Detection> {
        let mut all: Vec<Detection> = self
            .metrics
            .iter()
            .flat_map(|m| m.detections.iter().cloned())
            .collect();
        all.sort_by(|a, b| {
            (a.commit_index, &a.metric, a.kind).cmp(&(b.commit_index, &b.metric, b.kind))
        });
        all
    }
}

/// Bootstrap per commit and metric, then jump and trend detection per
/// metric. Metrics are independent and analysed in parallel.
pub fn analyze_series(
    series: &CommitSeries,
    bcfg: &BootstrapConfig,
    dcfg: &DetectorConfig,
) -> Result<SeriesAnalysis> {
    bcfg.validate()?;
    dcfg.validate()?;
    let metrics = series
        .metrics
        .values()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|m| {
            let reports = metric_reports(m, bcfg)?;
            let indices = m.points.iter().map(|p| p.commit_index).collect();
            analyze_reports(reports, indices, dcfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SeriesAnalysis {
        project: series.project.clone(),
        base_commit: series.base_commit.clone(),
        metrics,
    })
}
