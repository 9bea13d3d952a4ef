//! Median performance change, bootstrap confidence intervals and the
//! definite/potential intensity classification.
//!
//! # Resampling procedure
//!
//! `samples` resamples are split into chunks of [`CHUNK`]; chunk `c` draws
//! from `PortableRng::with_stream(seed, c)`, so chunks can run in parallel
//! and still match a serial run. Within a chunk each resample draws, in
//! order:
//!
//! * hierarchical: for each of the `n` instance slots an instance index,
//!   then for each suite slot of that instance a suite index, then for each
//!   iteration slot an iteration index, all uniform with replacement;
//! * flat: one uniform leaf index per leaf.
//!
//! When base and variation have the same structure (the usual RMIT or duet
//! pairing) one index pattern is drawn and applied to both versions.
//! Otherwise the base pattern is drawn first and the variation pattern
//! second. The resampled change is
//! `100 * (median(variation) - median(base)) / median(base)`; the CI bounds
//! are the order statistics `ceil(alpha * S)` and `floor((1 - alpha) * S)`
//! (1-based) of the sorted changes.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurements::MeasurementSet;
use crate::rng::PortableRng;

pub const CHUNK: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Hierarchical,
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub samples: usize,
    /// Mass cut from each tail; 0.005 gives a 99% interval.
    pub alpha: f64,
    pub rng_seed: u64,
    pub scheme: Scheme,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            samples: 10_000,
            alpha: 0.005,
            rng_seed: 0,
            scheme: Scheme::Hierarchical,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 100 {
            return Err(Error::invalid(format!(
                "bootstrap samples must be at least 100, got {}",
                self.samples
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::invalid(format!(
                "alpha must lie in (0, 0.5), got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    pub fn with_seed(&self, rng_seed: u64) -> Self {
        BootstrapConfig { rng_seed, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Intensity {
    Definite,
    Potential,
    None,
}

impl fmt::Display for Intensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Intensity::Definite => "definite",
            Intensity::Potential => "potential",
            Intensity::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeReport {
    pub commit: String,
    pub metric: String,
    pub median_change_pct: f64,
    pub ci_low_pct: f64,
    pub ci_high_pct: f64,
    pub instability_pct: f64,
    pub intensity: Intensity,
}

pub const REPORT_CSV_HEADER: &str =
    "commit,metric,median_change_pct,ci_low_pct,ci_high_pct,instability_pct,intensity";

impl ChangeReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.commit,
            self.metric,
            self.median_change_pct,
            self.ci_low_pct,
            self.ci_high_pct,
            self.instability_pct,
            self.intensity
        )
    }

    /// True when the two intervals share at least one point.
    pub fn overlaps(&self, other: &ChangeReport) -> bool {
        self.ci_low_pct <= other.ci_high_pct && other.ci_low_pct <= self.ci_high_pct
    }

    pub fn excludes_zero(&self) -> bool {
        (self.ci_low_pct > 0.0 && self.ci_high_pct > 0.0)
            || (self.ci_low_pct < 0.0 && self.ci_high_pct < 0.0)
    }
}

pub fn reports_csv_string(reports: &[ChangeReport]) -> String {
    let mut out = format!("{REPORT_CSV_HEADER}\n");
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Median, averaging the two central order statistics for even lengths.
/// Reorders `values`.
pub fn median_in_place(values: &mut [f64]) -> Option<f64> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mid = n / 2;
    let (left, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        Some(upper)
    } else {
        let lower = left.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some((lower + upper) / 2.0)
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    median_in_place(&mut values.to_vec())
}

fn relative_change(base_median: f64, variation_median: f64) -> f64 {
    100.0 * (variation_median - base_median) / base_median
}

/// Percent change of the variation median relative to the base median.
pub fn median_change(base: &[f64], variation: &[f64]) -> Result<f64> {
    let mb = median(base).ok_or_else(|| Error::invalid("base measurements are empty"))?;
    let mv = median(variation).ok_or_else(|| Error::invalid("variation measurements are empty"))?;
    if mb == 0.0 {
        return Err(Error::invalid("base median is zero"));
    }
    Ok(relative_change(mb, mv))
}

/// 0-based positions of the lower and upper CI bounds in `samples` sorted
/// resampled changes.
pub fn ci_positions(samples: usize, alpha: f64) -> (usize, usize) {
    let s = samples as f64;
    let lo = ((alpha * s - 1e-9).ceil() as usize).clamp(1, samples);
    let hi = (((1.0 - alpha) * s + 1e-9).floor() as usize).clamp(lo, samples);
    (lo - 1, hi - 1)
}

/// Resampling view of one version's measurements.
#[derive(Debug, Clone, Copy)]
pub enum Sample<'a> {
    Nested(&'a [Vec<Vec<f64>>]),
    Flat(&'a [f64]),
}

impl Sample<'_> {
    fn leaf_count(&self) -> usize {
        match self {
            Sample::Nested(v) => v.iter().flatten().map(Vec::len).sum(),
            Sample::Flat(v) => v.len(),
        }
    }

    fn same_structure(&self, other: &Sample<'_>) -> bool {
        match (self, other) {
            (Sample::Flat(a), Sample::Flat(b)) => a.len() == b.len(),
            (Sample::Nested(a), Sample::Nested(b)) => {
                a.len() == b.len()
                    && a.iter().zip(b.iter()).all(|(sa, sb)| {
                        sa.len() == sb.len()
                            && sa.iter().zip(sb.iter()).all(|(x, y)| x.len() == y.len())
                    })
            }
            _ => false,
        }
    }

    /// Appends one resample of `self` (and, when given, of `twin` under the
    /// same draws) to the buffers.
    fn draw(&self, twin: Option<(&Sample<'_>, &mut Vec<f64>)>, rng: &mut PortableRng, out: &mut Vec<f64>) {
        let mut twin = twin;
        match self {
            Sample::Flat(v) => {
                for _ in 0..v.len() {
                    let k = rng.index(v.len());
                    out.push(v[k]);
                    if let Some((Sample::Flat(w), buf)) = twin.as_mut() {
                        buf.push(w[k]);
                    }
                }
            }
            Sample::Nested(inst) => {
                for _ in 0..inst.len() {
                    let i = rng.index(inst.len());
                    let suites = &inst[i];
                    for _ in 0..suites.len() {
                        let s = rng.index(suites.len());
                        let iters = &suites[s];
                        for _ in 0..iters.len() {
                            let t = rng.index(iters.len());
                            out.push(iters[t]);
                            if let Some((Sample::Nested(w), buf)) = twin.as_mut() {
                                buf.push(w[i][s][t]);
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Sorted resampled percent changes.
pub fn resampled_changes(
    base: Sample<'_>,
    variation: Sample<'_>,
    samples: usize,
    seed: u64,
) -> Vec<f64> {
    let paired = base.same_structure(&variation);
    let chunks = samples.div_ceil(CHUNK);
    let mut changes: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let n = CHUNK.min(samples - c * CHUNK);
            let mut rng = PortableRng::with_stream(seed, c as u64);
            let mut bbuf = Vec::with_capacity(base.leaf_count());
            let mut vbuf = Vec::with_capacity(variation.leaf_count());
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                bbuf.clear();
                vbuf.clear();
                if paired {
                    base.draw(Some((&variation, &mut vbuf)), &mut rng, &mut bbuf);
                } else {
                    base.draw(None, &mut rng, &mut bbuf);
                    variation.draw(None, &mut rng, &mut vbuf);
                }
                let mb = median_in_place(&mut bbuf).expect("non-empty resample");
                let mv = median_in_place(&mut vbuf).expect("non-empty resample");
                out.push(relative_change(mb, mv));
            }
            out
        })
        .collect();
    changes.sort_unstable_by(f64::total_cmp);
    changes
}

fn build_report(
    commit: &str,
    metric: &str,
    base: Sample<'_>,
    variation: Sample<'_>,
    base_flat: &[f64],
    variation_flat: &[f64],
    cfg: &BootstrapConfig,
) -> Result<ChangeReport> {
    cfg.validate()?;
    let point = median_change(base_flat, variation_flat)?;
    let changes = resampled_changes(base, variation, cfg.samples, cfg.rng_seed);
    let (lo, hi) = ci_positions(cfg.samples, cfg.alpha);
    let (ci_low_pct, ci_high_pct) = (changes[lo], changes[hi]);
    let report = ChangeReport {
        commit: commit.to_string(),
        metric: metric.to_string(),
        median_change_pct: point,
        ci_low_pct,
        ci_high_pct,
        instability_pct: ci_high_pct - ci_low_pct,
        intensity: Intensity::None,
    };
    Ok(classify_intensity(report, false))
}

/// Bootstrap CI of the change from `base` to `variation`. The report's
/// commit and metric come from `variation`; intensity records only whether
/// the interval excludes zero.
pub fn bootstrap_ci(
    base: &MeasurementSet,
    variation: &MeasurementSet,
    cfg: &BootstrapConfig,
) -> Result<ChangeReport> {
    let bf = base.flatten();
    let vf = variation.flatten();
    let (bs, vs) = match cfg.scheme {
        Scheme::Hierarchical => (Sample::Nested(base.values()), Sample::Nested(variation.values())),
        Scheme::Flat => (Sample::Flat(&bf), Sample::Flat(&vf)),
    };
    build_report(&variation.commit, &variation.benchmark, bs, vs, &bf, &vf, cfg)
}

/// Flat bootstrap over plain latency lists; each resample has the size of
/// its source list.
pub fn bootstrap_ci_flat(
    commit: &str,
    metric: &str,
    base: &[f64],
    variation: &[f64],
    cfg: &BootstrapConfig,
) -> Result<ChangeReport> {
    if base.is_empty() || variation.is_empty() {
        return Err(Error::invalid(format!("`{metric}` at {commit}: empty series")));
    }
    build_report(commit, metric, Sample::Flat(base), Sample::Flat(variation), base, variation, cfg)
}

/// Definite when the CI excludes zero. Otherwise potential if a detector
/// flagged this change, none if not.
pub fn classify_intensity(mut report: ChangeReport, flagged: bool) -> ChangeReport {
    report.intensity = if report.excludes_zero() {
        Intensity::Definite
    } else if flagged {
        Intensity::Potential
    } else {
        Intensity::None
    };
    report
}

/// CI of two measurement sets of the same code version. Its width is the
/// noise floor used to seed detection thresholds.
pub fn aa_instability(
    set_a: &MeasurementSet,
    set_b: &MeasurementSet,
    cfg: &BootstrapConfig,
) -> Result<ChangeReport> {
    bootstrap_ci(set_a, set_b, cfg)
}

/// `factor` of an A/A instability, floored at `min_pct` and rounded up to a
/// multiple of `step_pct` when given.
pub fn initial_threshold(instability_pct: f64, factor: f64, min_pct: f64, step_pct: Option<f64>) -> f64 {
    let raw = factor * instability_pct;
    let rounded = match step_pct {
        Some(step) if step > 0.0 => (raw / step - 1e-9).ceil() * step,
        _ => raw,
    };
    rounded.max(min_pct)
}
