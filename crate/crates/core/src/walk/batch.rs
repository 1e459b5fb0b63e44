use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::simulate::{occupation_times, simulate_with_rng, StopRule, WalkPath};
use super::WalkChain;
use crate::error::Result;
use crate::parallel::{map_indexed, Execution};
use crate::rng;
use crate::tree::Vertex;

/// Runs `replicates` independent trajectories, replicate `k` on the stream
/// derived from `(master_seed, k)`, and maps each path through `f`. Results
/// are returned in replicate order whatever the execution mode.
pub fn batch_map<T, F>(
    chain: &WalkChain,
    start: Vertex,
    stop: &StopRule,
    replicates: usize,
    master_seed: u64,
    exec: Execution,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&WalkPath) -> T + Sync + Send,
{
    map_indexed(replicates, exec, |k| {
        let mut rng = rng::replicate_stream(master_seed, k as u64);
        simulate_with_rng(chain, start, stop, &mut rng).map(|p| f(&p))
    })
    .into_iter()
    .collect()
}

/// Per-replicate endpoints, hitting times and occupation vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub replicates: usize,
    pub seed: u64,
    pub hitting_times: Vec<Option<f64>>,
    pub endpoints: Vec<Vertex>,
    pub end_times: Vec<f64>,
    /// `occupation[k][v]`: time replicate `k` spent at vertex `v`.
    #[serde(skip)]
    pub occupation: Vec<Vec<f64>>,
}

impl Ensemble {
    /// Occupation samples of one vertex across replicates.
    pub fn occupation_of(&self, v: Vertex) -> Vec<f64> {
        self.occupation.iter().map(|o| o[v]).collect()
    }

    /// JSON summary: `replicates`, `seed`, `hitting_times[]`, `endpoints[]`
    /// and `occupation[state][]` over the states of `chain`.
    pub fn to_json(&self, chain: &WalkChain) -> serde_json::Value {
        let occupation: BTreeMap<String, Vec<f64>> = chain
            .vertices()
            .iter()
            .map(|&v| (v.to_string(), self.occupation_of(v)))
            .collect();
        serde_json::json!({
            "replicates": self.replicates,
            "seed": self.seed,
            "hitting_times": self.hitting_times,
            "endpoints": self.endpoints,
            "occupation": occupation,
        })
    }
}

pub fn batch_simulate(
    chain: &WalkChain,
    start: Vertex,
    stop: &StopRule,
    replicates: usize,
    master_seed: u64,
    exec: Execution,
) -> Result<Ensemble> {
    if replicates == 0 {
        return Err(crate::Error::InvalidArgument("replicates must be at least 1".into()));
    }
    let n = chain.tree().vertex_count();
    let rows = batch_map(chain, start, stop, replicates, master_seed, exec, |p| {
        let occ = occupation_times(p, n, p.end_time).expect("end time is within the path");
        (p.hitting_time(), p.endpoint(), p.end_time, occ)
    })?;
    let mut e = Ensemble {
        replicates,
        seed: master_seed,
        hitting_times: Vec::with_capacity(replicates),
        endpoints: Vec::with_capacity(replicates),
        end_times: Vec::with_capacity(replicates),
        occupation: Vec::with_capacity(replicates),
    };
    for (h, v, t, o) in rows {
        e.hitting_times.push(h);
        e.endpoints.push(v);
        e.end_times.push(t);
        e.occupation.push(o);
    }
    Ok(e)
}

/// Positions of each replicate on a common time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshots {
    pub times: Vec<f64>,
    /// `positions[k][i]`: vertex of replicate `k` at `times[i]`.
    pub positions: Vec<Vec<Vertex>>,
}

impl Snapshots {
    pub fn at(&self, i: usize) -> Vec<Vertex> {
        self.positions.iter().map(|p| p[i]).collect()
    }
}

/// Samples the walk at `times` (increasing). An optional radius stops paths
/// at the truncation boundary, after which they stay in the absorbing vertex.
pub fn batch_snapshots(
    chain: &WalkChain,
    start: Vertex,
    times: &[f64],
    radius: Option<f64>,
    replicates: usize,
    master_seed: u64,
    exec: Execution,
) -> Result<Snapshots> {
    let horizon = times.last().copied().unwrap_or(0.0);
    let mut stop = StopRule::horizon(horizon);
    stop.radius = radius;
    let positions = batch_map(chain, start, &stop, replicates, master_seed, exec, |p| {
        times.iter().map(|&t| p.state_at(t)).collect()
    })?;
    Ok(Snapshots {
        times: times.to_vec(),
        positions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{RootedMetricTree, SpeedMeasure};
    use crate::walk::simulate;

    fn chain() -> WalkChain {
        let t = RootedMetricTree::path(&[1.0, 0.5, 2.0]).unwrap();
        WalkChain::new(&t, &SpeedMeasure::new(vec![1.0, 0.3, 2.0, 0.7]).unwrap()).unwrap()
    }

    #[test]
    fn single_replicate_matches_simulate() {
        let c = chain();
        let stop = StopRule::hitting([3]);
        let e = batch_simulate(&c, 0, &stop, 1, 77, Execution::Parallel).unwrap();
        let p = simulate(&c, 0, &stop, rng::replicate_seed(77, 0)).unwrap();
        assert_eq!(e.hitting_times[0], p.hitting_time());
        assert_eq!(e.endpoints[0], 3);
    }

    #[test]
    fn reruns_and_modes_are_identical() {
        let c = chain();
        let stop = StopRule::hitting([3]).with_horizon(40.0);
        let a = batch_simulate(&c, 0, &stop, 200, 5, Execution::Parallel).unwrap();
        let b = batch_simulate(&c, 0, &stop, 200, 5, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a.to_json(&c)).unwrap(),
            serde_json::to_string(&b.to_json(&c)).unwrap()
        );
    }

    #[test]
    fn snapshots_follow_paths() {
        let c = chain();
        let s = batch_snapshots(&c, 0, &[0.0, 1.0, 2.0], None, 10, 3, Execution::Parallel).unwrap();
        assert_eq!(s.positions.len(), 10);
        assert!(s.at(0).iter().all(|&v| v == 0));
    }
}
