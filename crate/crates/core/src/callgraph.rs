//! Call graphs recorded during application and microbenchmark runs.
//!
//! A graph is a set of function nodes weighted by recorded execution
//! duration (seconds) plus optional caller/callee edges. Node identity is
//! the exact function name. Durations are kept as recorded; whether the
//! producer wrote self or inclusive times is not interpreted here, so
//! reference impacts are only comparable between graphs that share one
//! recording convention.
//!
//! Two file formats are supported:
//!
//! * JSON: `{"origin": {"kind": "application", "id": "..."},
//!   "nodes": [{"fn": "...", "duration_s": 1.23}], "edges": [["a", "b"]]}`
//! * edge CSV: one `node,<fn>,<duration_s>` or `edge,<caller>,<callee>`
//!   record per line, `#` comment lines and blank lines ignored. An optional
//!   `origin,<kind>,<id>` record sets the origin; without it the graph is a
//!   microbenchmark graph named after the file stem.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FunctionId(String);

impl FunctionId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::validation("function id must not be empty"));
        }
        Ok(FunctionId(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Application,
    Microbenchmark,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::Application => "application",
            GraphKind::Microbenchmark => "microbenchmark",
        })
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "application" => Ok(GraphKind::Application),
            "microbenchmark" => Ok(GraphKind::Microbenchmark),
            other => Err(Error::invalid(format!("unknown graph kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphOrigin {
    pub kind: GraphKind,
    pub id: String,
}

impl GraphOrigin {
    pub fn application(id: impl Into<String>) -> Self {
        GraphOrigin {
            kind: GraphKind::Application,
            id: id.into(),
        }
    }

    pub fn microbenchmark(id: impl Into<String>) -> Self {
        GraphOrigin {
            kind: GraphKind::Microbenchmark,
            id: id.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Json,
    EdgeCsv,
}

impl GraphFormat {
    /// `.csv` means edge CSV, anything else JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => GraphFormat::EdgeCsv,
            _ => GraphFormat::Json,
        }
    }
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(GraphFormat::Json),
            "edge_csv" | "csv" => Ok(GraphFormat::EdgeCsv),
            other => Err(Error::invalid(format!("unknown graph format `{other}`"))),
        }
    }
}

/// A validated call graph. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct CallGraph {
    origin: GraphOrigin,
    nodes: BTreeMap<FunctionId, f64>,
    edges: BTreeSet<(FunctionId, FunctionId)>,
}

impl CallGraph {
    /// Builds a graph, rejecting duplicate nodes, negative or non-finite
    /// durations, dangling edges and empty node sets.
    pub fn new<N, E>(origin: GraphOrigin, nodes: N, edges: E) -> Result<Self>
    where
        N: IntoIterator<Item = (FunctionId, f64)>,
        E: IntoIterator<Item = (FunctionId, FunctionId)>,
    {
        let mut map = BTreeMap::new();
        for (id, duration) in nodes {
            if !duration.is_finite() || duration < 0.0 {
                return Err(Error::validation(format!(
                    "node `{id}` has invalid duration {duration}"
                )));
            }
            if map.insert(id.clone(), duration).is_some() {
                return Err(Error::validation(format!("duplicate node `{id}`")));
            }
        }
        if map.is_empty() {
            return Err(Error::validation(format!(
                "graph `{}` has no nodes",
                origin.id
            )));
        }
        let mut edge_set = BTreeSet::new();
        for (caller, callee) in edges {
            for end in [&caller, &callee] {
                if !map.contains_key(end) {
                    return Err(Error::validation(format!(
                        "edge ({caller}, {callee}) references unknown node `{end}`"
                    )));
                }
            }
            edge_set.insert((caller, callee));
        }
        Ok(CallGraph {
            origin,
            nodes: map,
            edges: edge_set,
        })
    }

    pub fn origin(&self) -> &GraphOrigin {
        &self.origin
    }

    pub fn id(&self) -> &str {
        &self.origin.id
    }

    pub fn is_application(&self) -> bool {
        self.origin.kind == GraphKind::Application
    }

    /// Same nodes and edges under a different origin.
    pub fn with_origin(mut self, origin: GraphOrigin) -> Self {
        self.origin = origin;
        self
    }

    pub fn nodes(&self) -> &BTreeMap<FunctionId, f64> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(FunctionId, FunctionId)> {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, id: &FunctionId) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn duration(&self, id: &FunctionId) -> Option<f64> {
        self.nodes.get(id).copied()
    }

    pub fn total_duration(&self) -> f64 {
        self.nodes.values().sum()
    }

    pub fn from_json_str(text: &str, origin_hint: &str) -> Result<Self> {
        let doc: GraphDoc =
            serde_json::from_str(text).map_err(|e| Error::parse(origin_hint, e.to_string()))?;
        let nodes = doc
            .nodes
            .into_iter()
            .map(|n| Ok((FunctionId::new(n.function)?, n.duration_s)))
            .collect::<Result<Vec<_>>>()?;
        let edges = doc
            .edges
            .into_iter()
            .map(|[a, b]| Ok((FunctionId::new(a)?, FunctionId::new(b)?)))
            .collect::<Result<Vec<_>>>()?;
        CallGraph::new(doc.origin, nodes, edges)
    }

    pub fn to_json_string(&self) -> String {
        let doc = GraphDoc {
            origin: self.origin.clone(),
            nodes: self
                .nodes
                .iter()
                .map(|(id, &d)| NodeDoc {
                    function: id.0.clone(),
                    duration_s: d,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|(a, b)| [a.0.clone(), b.0.clone()])
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("graph serializes")
    }

    pub fn from_edge_csv_str(text: &str, default_origin: GraphOrigin) -> Result<Self> {
        let mut origin = default_origin;
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        let hint = origin.id.clone();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let at = |msg: String| Error::parse(format!("{hint}:{}", lineno + 1), msg);
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(at(format!("expected 3 fields, found {}", fields.len())));
            }
            match fields[0] {
                "node" => {
                    let duration: f64 = fields[2]
                        .trim()
                        .parse()
                        .map_err(|_| at(format!("bad duration `{}`", fields[2])))?;
                    let id = FunctionId::new(fields[1]).map_err(|e| at(e.to_string()))?;
                    nodes.push((id, duration));
                }
                "edge" => {
                    let a = FunctionId::new(fields[1]).map_err(|e| at(e.to_string()))?;
                    let b = FunctionId::new(fields[2]).map_err(|e| at(e.to_string()))?;
                    edges.push((a, b));
                }
                "origin" => {
                    origin = GraphOrigin {
                        kind: fields[1].parse().map_err(|e: Error| at(e.to_string()))?,
                        id: fields[2].to_string(),
                    };
                }
                other => return Err(at(format!("unknown record type `{other}`"))),
            }
        }
        CallGraph::new(origin, nodes, edges)
    }

    /// Edge CSV rendering. Fails if a name contains a comma or line break,
    /// which the format cannot represent.
    pub fn to_edge_csv_string(&self) -> Result<String> {
        let check = |s: &str| {
            if s.contains([',', '\n', '\r']) {
                Err(Error::invalid(format!(
                    "`{s}` cannot be written as edge CSV"
                )))
            } else {
                Ok(())
            }
        };
        check(&self.origin.id)?;
        let mut out = format!("origin,{},{}\n", self.origin.kind, self.origin.id);
        for (id, d) in &self.nodes {
            check(id.as_str())?;
            out.push_str(&format!("node,{id},{d}\n"));
        }
        for (a, b) in &self.edges {
            out.push_str(&format!("edge,{a},{b}\n"));
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    origin: GraphOrigin,
    nodes: Vec<NodeDoc>,
    #[serde(default)]
    edges: Vec<[String; 2]>,
}

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    #[serde(rename = "fn")]
    function: String,
    duration_s: f64,
}

pub fn load_callgraph(path: &Path, format: GraphFormat) -> Result<CallGraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let hint = path.display().to_string();
    match format {
        GraphFormat::Json => CallGraph::from_json_str(&text, &hint),
        GraphFormat::EdgeCsv => {
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("graph")
                .to_string();
            CallGraph::from_edge_csv_str(&text, GraphOrigin::microbenchmark(stem))
                .map_err(|e| match e {
                    Error::Validation(m) => Error::validation(format!("{hint}: {m}")),
                    other => other,
                })
        }
    }
}

pub fn save_callgraph(graph: &CallGraph, path: &Path, format: GraphFormat) -> Result<()> {
    let text = match format {
        GraphFormat::Json => graph.to_json_string(),
        GraphFormat::EdgeCsv => graph.to_edge_csv_string()?,
    };
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Nodes shared between an application graph and one or more
/// microbenchmark graphs, weighted by the application's durations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphOverlap {
    pub common: BTreeSet<FunctionId>,
    pub common_count: usize,
    pub duration_sum: f64,
}

impl GraphOverlap {
    fn from_common(app: &CallGraph, common: BTreeSet<FunctionId>) -> Self {
        let duration_sum = common.iter().map(|id| app.nodes[id]).sum();
        GraphOverlap {
            common_count: common.len(),
            common,
            duration_sum,
        }
    }
}

fn require_application(app: &CallGraph) -> Result<()> {
    if app.is_application() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "`{}` is a {} graph, expected an application graph",
            app.id(),
            app.origin.kind
        )))
    }
}

/// Node intersection of `app` and `micro`; only the application's
/// durations contribute to `duration_sum`.
pub fn overlap(app: &CallGraph, micro: &CallGraph) -> Result<GraphOverlap> {
    require_application(app)?;
    let common = app
        .nodes
        .keys()
        .filter(|id| micro.contains(id))
        .cloned()
        .collect();
    Ok(GraphOverlap::from_common(app, common))
}

/// Application nodes covered by at least one of `micros`.
pub fn union_coverage(app: &CallGraph, micros: &[CallGraph]) -> Result<GraphOverlap> {
    require_application(app)?;
    let common = app
        .nodes
        .keys()
        .filter(|id| micros.iter().any(|m| m.contains(id)))
        .cloned()
        .collect();
    Ok(GraphOverlap::from_common(app, common))
}
