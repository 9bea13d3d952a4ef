//! Greedy redundancy removal for microbenchmark suites.
//!
//! Starting from an empty suite, each step appends the microbenchmark whose
//! call graph covers the most application nodes not yet covered by earlier
//! picks. Selection stops once the best remaining gain is zero, drops below
//! `min_gain`, or `top_k` benchmarks have been chosen. Ties go to the larger
//! reference impact, then to the lexicographically smaller benchmark id.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::callgraph::{union_coverage, CallGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Smallest number of newly covered nodes worth a benchmark slot.
    pub min_gain: usize,
    /// Keep at most this many benchmarks, in selection order.
    pub top_k: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            min_gain: 4,
            top_k: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_gain == 0 {
            return Err(Error::invalid("min_gain must be at least 1"));
        }
        if self.top_k == Some(0) {
            return Err(Error::invalid("top_k must be at least 1 when set"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub benchmark: String,
    pub gain_nodes: usize,
    pub cumulative_nodes: usize,
    pub reference_impact: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    /// Covers no application node at all.
    NoRelevance,
    /// Everything it covers is already covered by the selection.
    Redundant,
    /// Would add fewer than `min_gain` new nodes.
    BelowMinGain,
    /// Cut off by `top_k`.
    TopK,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub benchmark: String,
    pub reason: ExclusionReason,
    pub remaining_gain: usize,
    pub reference_impact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizedSuite {
    pub app_id: String,
    pub app_total_nodes: usize,
    pub steps: Vec<SelectionStep>,
    /// Coverage of the selected benchmarks.
    pub practical_relevance: f64,
    /// Coverage of every input benchmark together.
    pub full_suite_relevance: f64,
    pub full_suite_size: usize,
    pub excluded: Vec<Exclusion>,
}

impl OptimizedSuite {
    pub fn selected(&self) -> impl Iterator<Item = &str> {
        self.steps.iter().map(|s| s.benchmark.as_str())
    }

    pub fn covered_nodes(&self) -> usize {
        self.steps.last().map_or(0, |s| s.cumulative_nodes)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite serializes")
    }

    pub fn to_table(&self) -> String {
        let width = self
            .steps
            .iter()
            .map(|s| s.benchmark.len())
            .chain(self.excluded.iter().map(|e| e.benchmark.len()))
            .chain(["benchmark".len()])
            .max()
            .unwrap_or(9);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>4}  {:<width$}  {:>6}  {:>10}  {:>8}  {:>14}",
            "step", "benchmark", "gain", "cumulative", "coverage", "ref_impact_s"
        );
        for (i, s) in self.steps.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:>4}  {:<width$}  {:>6}  {:>10}  {:>7.1}%  {:>14.3}",
                i + 1,
                s.benchmark,
                s.gain_nodes,
                s.cumulative_nodes,
                100.0 * s.cumulative_nodes as f64 / self.app_total_nodes as f64,
                s.reference_impact
            );
        }
        let _ = writeln!(
            out,
            "selected {} of {} benchmarks; practical relevance {:.1}% (full suite {:.1}%, {} app nodes)",
            self.steps.len(),
            self.full_suite_size,
            100.0 * self.practical_relevance,
            100.0 * self.full_suite_relevance,
            self.app_total_nodes
        );
        for e in &self.excluded {
            let reason = match e.reason {
                ExclusionReason::NoRelevance => "no relevant nodes",
                ExclusionReason::Redundant => "redundant",
                ExclusionReason::BelowMinGain => "below min gain",
                ExclusionReason::TopK => "beyond top-k",
            };
            let _ = writeln!(
                out,
                "excluded  {:<width$}  {reason} (would add {})",
                e.benchmark, e.remaining_gain
            );
        }
        out
    }
}

struct Candidate<'a> {
    id: &'a str,
    covered: Vec<usize>,
    impact: f64,
}

pub fn optimize(
    app: &CallGraph,
    micros: &[CallGraph],
    cfg: &OptimizerConfig,
) -> Result<OptimizedSuite> {
    cfg.validate()?;
    if micros.is_empty() {
        return Err(Error::invalid("no microbenchmark graphs given"));
    }
    if app.node_count() == 0 {
        return Err(Error::invalid("application graph has no nodes"));
    }
    if !app.is_application() {
        return Err(Error::invalid(format!(
            "`{}` is not an application graph",
            app.id()
        )));
    }
    let mut ids = BTreeSet::new();
    for m in micros {
        if !ids.insert(m.id()) {
            return Err(Error::validation(format!(
                "microbenchmark `{}` given twice",
                m.id()
            )));
        }
    }

    let app_nodes: Vec<_> = app.nodes().iter().collect();
    let candidates: Vec<Candidate> = micros
        .iter()
        .map(|m| {
            let covered: Vec<usize> = app_nodes
                .iter()
                .enumerate()
                .filter(|(_, (id, _))| m.contains(id))
                .map(|(i, _)| i)
                .collect();
            let impact = covered.iter().map(|&i| *app_nodes[i].1).sum();
            Candidate {
                id: m.id(),
                covered,
                impact,
            }
        })
        .collect();

    let mut is_covered = vec![false; app_nodes.len()];
    let mut chosen = vec![false; candidates.len()];
    let mut steps: Vec<SelectionStep> = Vec::new();
    let mut cumulative = 0;
    let mut stopped_by_top_k = false;

    loop {
        if cfg.top_k.is_some_and(|k| steps.len() >= k) {
            stopped_by_top_k = true;
            break;
        }
        let best = candidates
            .iter()
            .enumerate()
            .filter(|(i, _)| !chosen[*i])
            .map(|(i, c)| (i, c.covered.iter().filter(|&&n| !is_covered[n]).count()))
            .max_by(|(ia, ga), (ib, gb)| {
                let (a, b) = (&candidates[*ia], &candidates[*ib]);
                ga.cmp(gb)
                    .then(a.impact.total_cmp(&b.impact))
                    .then_with(|| b.id.cmp(a.id))
            });
        let Some((idx, gain)) = best else { break };
        if gain == 0 || gain < cfg.min_gain {
            break;
        }
        let c = &candidates[idx];
        chosen[idx] = true;
        for &n in &c.covered {
            is_covered[n] = true;
        }
        cumulative += gain;
        steps.push(SelectionStep {
            benchmark: c.id.to_string(),
            gain_nodes: gain,
            cumulative_nodes: cumulative,
            reference_impact: c.impact,
        });
    }

    let mut excluded: Vec<Exclusion> = candidates
        .iter()
        .zip(&chosen)
        .filter(|(_, &was_chosen)| !was_chosen)
        .map(|(c, _)| {
            let remaining = c.covered.iter().filter(|&&n| !is_covered[n]).count();
            let reason = if c.covered.is_empty() {
                ExclusionReason::NoRelevance
            } else if remaining == 0 {
                ExclusionReason::Redundant
            } else if stopped_by_top_k {
                ExclusionReason::TopK
            } else {
                ExclusionReason::BelowMinGain
            };
            Exclusion {
                benchmark: c.id.to_string(),
                reason,
                remaining_gain: remaining,
                reference_impact: c.impact,
            }
        })
        .collect();
    excluded.sort_by(|a, b| a.benchmark.cmp(&b.benchmark));

    let total = app_nodes.len();
    Ok(OptimizedSuite {
        app_id: app.id().to_string(),
        app_total_nodes: total,
        practical_relevance: cumulative as f64 / total as f64,
        full_suite_relevance: practical_relevance(app, micros)?,
        full_suite_size: micros.len(),
        steps,
        excluded,
    })
}

/// Fraction of application nodes covered by the union of `micros`.
pub fn practical_relevance(app: &CallGraph, micros: &[CallGraph]) -> Result<f64> {
    if app.node_count() == 0 {
        return Err(Error::invalid("application graph has no nodes"));
    }
    let cov = union_coverage(app, micros)?;
    Ok(cov.common_count as f64 / app.node_count() as f64)
}

/// Summed application duration of the functions `micro` also exercises.
pub fn reference_impact(app: &CallGraph, micro: &CallGraph) -> Result<f64> {
    Ok(crate::callgraph::overlap(app, micro)?.duration_sum)
}
