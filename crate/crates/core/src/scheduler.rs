//! Execution plans for external benchmark runners.
//!
//! An RMIT plan lists, for every (instance run, suite run) pair, a random
//! order of the suite and for each benchmark which version runs first. Both
//! versions of a benchmark run back to back. Plans are generated from one
//! [`PortableRng`] stream: pairs are visited instance-major; for each pair
//! the suite is Fisher-Yates shuffled, then one coin per benchmark in the
//! shuffled order decides the version order (set bit = base first).
//!
//! A duet plan places both versions on one host and runs the application
//! workload against them simultaneously.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurements::{TrimConfig, Version};
use crate::rng::PortableRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RmitParams {
    pub instance_runs: usize,
    pub suite_runs: usize,
    pub iterations: usize,
    /// Seconds per iteration; carried for the runner, not enforced here.
    pub iteration_duration_s: f64,
}

impl Default for RmitParams {
    fn default() -> Self {
        RmitParams {
            instance_runs: 3,
            suite_runs: 3,
            iterations: 5,
            iteration_duration_s: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledBenchmark {
    pub benchmark: String,
    pub first: Version,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteRun {
    pub instance: usize,
    pub suite_run: usize,
    pub order: Vec<ScheduledBenchmark>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmitPlan {
    pub suite: Vec<String>,
    pub instance_runs: usize,
    pub suite_runs: usize,
    pub iterations: usize,
    pub iteration_duration_s: f64,
    pub rng_seed: u64,
    pub runs: Vec<SuiteRun>,
}

impl RmitPlan {
    /// Measurements each benchmark receives per version.
    pub fn measurements_per_benchmark(&self) -> usize {
        self.runs
            .iter()
            .map(|r| r.order.iter().filter(|b| b.benchmark == self.suite[0]).count())
            .sum::<usize>()
            * self.iterations
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

pub fn make_rmit_plan(suite: &[String], params: &RmitParams, seed: u64) -> Result<RmitPlan> {
    if suite.is_empty() {
        return Err(Error::invalid("cannot plan an empty suite"));
    }
    if params.instance_runs == 0 || params.suite_runs == 0 || params.iterations == 0 {
        return Err(Error::invalid("instance runs, suite runs and iterations must be positive"));
    }
    if params.iteration_duration_s.is_nan() || params.iteration_duration_s <= 0.0 {
        return Err(Error::invalid("iteration duration must be positive"));
    }
    let mut seen = std::collections::BTreeSet::new();
    if let Some(dup) = suite.iter().find(|b| !seen.insert(b.as_str())) {
        return Err(Error::invalid(format!("benchmark `{dup}` listed twice")));
    }

    let mut rng = PortableRng::new(seed);
    let mut runs = Vec::with_capacity(params.instance_runs * params.suite_runs);
    for instance in 0..params.instance_runs {
        for suite_run in 0..params.suite_runs {
            let mut order: Vec<&String> = suite.iter().collect();
            rng.shuffle(&mut order);
            let order = order
                .into_iter()
                .map(|b| ScheduledBenchmark {
                    benchmark: b.clone(),
                    first: if rng.coin() { Version::Base } else { Version::Variation },
                })
                .collect();
            runs.push(SuiteRun {
                instance,
                suite_run,
                order,
            });
        }
    }
    Ok(RmitPlan {
        suite: suite.to_vec(),
        instance_runs: params.instance_runs,
        suite_runs: params.suite_runs,
        iterations: params.iterations,
        iteration_duration_s: params.iteration_duration_s,
        rng_seed: seed,
        runs,
    })
}

/// Application workload of a duet experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Workload {
    pub simulated_servers: u64,
    pub sending_interval_s: u64,
    pub simulated_duration_h: u64,
    pub insert_clients: u64,
    pub batch_size: u64,
    pub batches: u64,
    pub simple_queries: u64,
    pub group_by_queries: u64,
    pub query_clients: u64,
}

impl Workload {
    pub fn victoria_metrics() -> Self {
        Workload {
            simulated_servers: 800,
            sending_interval_s: 60,
            simulated_duration_h: 72,
            insert_clients: 4,
            batch_size: 400,
            batches: 259_200,
            simple_queries: 8_640,
            group_by_queries: 1_440,
            query_clients: 10,
        }
    }

    pub fn influxdb() -> Self {
        Workload {
            simulated_servers: 100,
            sending_interval_s: 60,
            simulated_duration_h: 168,
            insert_clients: 10,
            batch_size: 60,
            batches: 113_400,
            simple_queries: 1_008,
            group_by_queries: 168,
            query_clients: 10,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "victoriametrics" | "victoria-metrics" | "vm" => Ok(Workload::victoria_metrics()),
            "influxdb" | "influx" => Ok(Workload::influxdb()),
            other => Err(Error::invalid(format!("unknown workload preset `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Insert,
    SimpleQueries,
    GroupByQueries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuetPlan {
    pub base_ref: String,
    pub variation_ref: String,
    pub co_located: bool,
    pub aa: bool,
    pub warnings: Vec<String>,
    pub phases: Vec<Phase>,
    pub workload: Workload,
    pub repetitions: usize,
    pub trim: TrimConfig,
}

impl DuetPlan {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

pub fn make_duet_plan(
    base_ref: &str,
    variation_ref: &str,
    workload: Workload,
    repetitions: usize,
) -> Result<DuetPlan> {
    if base_ref.is_empty() || variation_ref.is_empty() {
        return Err(Error::invalid("version references must not be empty"));
    }
    if repetitions < 3 {
        return Err(Error::invalid(format!(
            "duet experiments need at least 3 repetitions, got {repetitions}"
        )));
    }
    let aa = base_ref == variation_ref;
    let warnings = if aa {
        vec![format!(
            "base and variation are both `{base_ref}`; this is an A/A experiment"
        )]
    } else {
        Vec::new()
    };
    Ok(DuetPlan {
        base_ref: base_ref.to_string(),
        variation_ref: variation_ref.to_string(),
        co_located: true,
        aa,
        warnings,
        phases: vec![Phase::Insert, Phase::SimpleQueries, Phase::GroupByQueries],
        workload,
        repetitions,
        trim: TrimConfig::default(),
    })
}
