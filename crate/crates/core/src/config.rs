//! JSON documents read by the command-line tool: the project configuration
//! and simulation scenarios. Relative paths resolve against the directory of
//! the file that names them.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::callgraph::{load_callgraph, CallGraph, GraphFormat, GraphKind, GraphOrigin};
use crate::detection::DetectorConfig;
use crate::error::{Error, Result};
use crate::measurements::TrimConfig;
use crate::optimizer::OptimizerConfig;
use crate::scheduler::{RmitParams, Workload};
use crate::simulator::{HistorySpec, MatrixSpec};
use crate::stats::BootstrapConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WorkloadSpec {
    Preset(String),
    Custom(Workload),
}

impl WorkloadSpec {
    pub fn resolve(&self) -> Result<Workload> {
        match self {
            WorkloadSpec::Preset(name) => Workload::preset(name),
            WorkloadSpec::Custom(w) => Ok(w.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DuetConfig {
    pub base_ref: String,
    pub variation_ref: String,
    pub workload: WorkloadSpec,
    #[serde(default = "three")]
    pub repetitions: usize,
}

fn three() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    #[serde(default)]
    pub app_graph: Option<PathBuf>,
    #[serde(default)]
    pub micro_graphs: Vec<PathBuf>,
    #[serde(default)]
    pub manifest: Option<PathBuf>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub bootstrap: BootstrapConfig,
    #[serde(default)]
    pub detector: DetectorConfig,
    #[serde(default)]
    pub trim: TrimConfig,
    #[serde(default)]
    pub rmit: RmitParams,
    /// Benchmarks to schedule; defaults to the optimized suite.
    #[serde(default)]
    pub suite: Vec<String>,
    #[serde(default)]
    pub duet: Option<DuetConfig>,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

impl ProjectConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        let mut cfg: ProjectConfig = serde_json::from_str(&text)
            .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        cfg.app_graph.iter_mut().for_each(resolve);
        cfg.micro_graphs.iter_mut().for_each(resolve);
        cfg.manifest.iter_mut().for_each(resolve);
        resolve(&mut cfg.out_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.optimizer.validate()?;
        self.bootstrap.validate()?;
        self.detector.validate()?;
        crate::measurements::TrimCut::compute(100, self.trim.head_frac, self.trim.tail_frac)?;
        Ok(())
    }

    /// The application graph, forced to application origin, and every
    /// microbenchmark graph.
    pub fn load_graphs(&self) -> Result<(CallGraph, Vec<CallGraph>)> {
        let app_path = self
            .app_graph
            .as_ref()
            .ok_or_else(|| Error::invalid("config has no `app_graph`"))?;
        let app = load_callgraph(app_path, GraphFormat::from_path(app_path))?;
        let app = match app.origin().kind {
            GraphKind::Application => app,
            GraphKind::Microbenchmark => {
                let id = app.id().to_string();
                app.with_origin(GraphOrigin::application(id))
            }
        };
        let micros = self
            .micro_graphs
            .iter()
            .map(|p| load_callgraph(p, GraphFormat::from_path(p)))
            .collect::<Result<Vec<_>>>()?;
        Ok((app, micros))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub history: Option<HistorySpec>,
    #[serde(default)]
    pub seed: u64,
    /// Number of seeded runs, seeds `seed..seed + runs`.
    #[serde(default = "one_run")]
    pub runs: usize,
    #[serde(default)]
    pub bootstrap: BootstrapConfig,
    #[serde(default)]
    pub detector: DetectorConfig,
    #[serde(default)]
    pub matrix: Option<MatrixSpec>,
}

fn one_run() -> usize {
    1
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        let s: Scenario = serde_json::from_str(&text)
            .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.history.is_none() && self.matrix.is_none() {
            return Err(Error::invalid("scenario needs a `history` or a `matrix`"));
        }
        if self.runs == 0 {
            return Err(Error::invalid("scenario runs must be at least 1"));
        }
        if let Some(h) = &self.history {
            h.validate()?;
        }
        self.bootstrap.validate()?;
        self.detector.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_path_resolution() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, r#"{"app_graph": "g/app.json", "micro_graphs": ["g/m1.csv"]}"#).unwrap();
        let cfg = ProjectConfig::load(&path).unwrap();
        assert_eq!(cfg.app_graph.unwrap(), dir.path().join("g/app.json"));
        assert_eq!(cfg.out_dir, dir.path().join("out"));
        assert_eq!(cfg.optimizer.min_gain, 4);
        assert_eq!(cfg.bootstrap.samples, 10_000);
    }

    #[test]
    fn config_rejects_unknown_fields_and_bad_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, r#"{"app_grph": "x"}"#).unwrap();
        assert!(matches!(ProjectConfig::load(&path), Err(Error::Parse { .. })));
        fs::write(&path, r#"{"bootstrap": {"alpha": 0.7}}"#).unwrap();
        assert!(matches!(ProjectConfig::load(&path), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn workload_accepts_preset_or_table() {
        let p: WorkloadSpec = serde_json::from_str(r#""influxdb""#).unwrap();
        assert_eq!(p.resolve().unwrap().simulated_servers, 100);
        let c: WorkloadSpec = serde_json::from_value(serde_json::to_value(Workload::victoria_metrics()).unwrap()).unwrap();
        assert_eq!(c.resolve().unwrap().batches, 259_200);
    }
}
