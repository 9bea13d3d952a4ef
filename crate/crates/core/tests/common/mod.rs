#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use benchgate::callgraph::{CallGraph, FunctionId, GraphOrigin};
use benchgate::rng::PortableRng;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn ids<'a>(names: impl IntoIterator<Item = (&'a str, f64)>) -> Vec<(FunctionId, f64)> {
    names
        .into_iter()
        .map(|(n, d)| (FunctionId::new(n).unwrap(), d))
        .collect()
}

pub fn app_graph(nodes: &[(String, f64)]) -> CallGraph {
    CallGraph::new(
        GraphOrigin::application("app"),
        ids(nodes.iter().map(|(n, d)| (n.as_str(), *d))),
        [],
    )
    .unwrap()
}

pub fn micro_graph(id: &str, nodes: &[String]) -> CallGraph {
    let own = format!("bench_{id}");
    let mut all: Vec<(&str, f64)> = vec![(own.as_str(), 0.1)];
    all.extend(nodes.iter().map(|n| (n.as_str(), 0.5)));
    CallGraph::new(GraphOrigin::microbenchmark(id), ids(all), []).unwrap()
}

/// A random optimizer instance: application nodes with small integer
/// durations (to provoke ties) and microbenchmarks drawing from a slightly
/// larger name pool, so some nodes fall outside the application.
#[derive(Debug, Clone)]
pub struct Instance {
    pub app: Vec<(String, f64)>,
    pub micros: Vec<(String, Vec<String>)>,
}

impl Instance {
    pub fn random(rng: &mut PortableRng, max_app: usize, max_micro: usize) -> Self {
        let n_app = 1 + rng.index(max_app);
        let app = (0..n_app)
            .map(|i| (format!("f{i:02}"), rng.index(4) as f64))
            .collect();
        let pool = n_app + 5;
        let n_micro = 1 + rng.index(max_micro);
        let micros = (0..n_micro)
            .map(|m| {
                let k = rng.index(pool.min(10) + 1);
                let nodes: BTreeSet<String> =
                    (0..k).map(|_| format!("f{:02}", rng.index(pool))).collect();
                (format!("MB{m:02}"), nodes.into_iter().collect())
            })
            .collect();
        Instance { app, micros }
    }

    pub fn graphs(&self) -> (CallGraph, Vec<CallGraph>) {
        (
            app_graph(&self.app),
            self.micros.iter().map(|(id, n)| micro_graph(id, n)).collect(),
        )
    }
}

/// Step-wise argmax oracle over plain string sets: at each step take the
/// benchmark with the most not-yet-covered application nodes, ties to the
/// larger reference impact, then the smaller id.
pub fn greedy_oracle(
    app: &[(String, f64)],
    micros: &[(String, Vec<String>)],
    min_gain: usize,
    top_k: Option<usize>,
) -> Vec<(String, usize)> {
    let durations: BTreeMap<&str, f64> = app.iter().map(|(n, d)| (n.as_str(), *d)).collect();
    let mut covered: BTreeSet<&str> = BTreeSet::new();
    let mut remaining: Vec<&(String, Vec<String>)> = micros.iter().collect();
    let mut out = Vec::new();
    while top_k.is_none_or(|k| out.len() < k) {
        let mut best: Option<(usize, f64, &str, usize)> = None;
        for (pos, (id, nodes)) in remaining.iter().copied().map(|m| (&m.0, &m.1)).enumerate() {
            let relevant: BTreeSet<&str> = nodes
                .iter()
                .map(String::as_str)
                .filter(|n| durations.contains_key(n))
                .collect();
            let gain = relevant.iter().filter(|n| !covered.contains(*n)).count();
            let impact: f64 = relevant.iter().map(|n| durations[n]).sum();
            let better = match best {
                None => true,
                Some((g, i, bid, _)) => {
                    gain > g || (gain == g && (impact > i || (impact == i && id.as_str() < bid)))
                }
            };
            if better {
                best = Some((gain, impact, id.as_str(), pos));
            }
        }
        let Some((gain, _, id, pos)) = best else { break };
        if gain == 0 || gain < min_gain {
            break;
        }
        let chosen = remaining.remove(pos);
        covered.extend(
            chosen
                .1
                .iter()
                .map(String::as_str)
                .filter(|n| durations.contains_key(n)),
        );
        out.push((id.to_string(), gain));
    }
    out
}
