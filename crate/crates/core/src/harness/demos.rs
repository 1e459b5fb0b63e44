//! Single-family experiments: the binary-tree entrance example, Kesten's
//! tree, Λ-coalescent genealogies and conditioned Galton–Watson trees.

use serde_json::json;

use super::checks::entrance_bound;
use super::config::ExperimentConfig;
use super::{mean_se, SuiteRecord};
use crate::error::Result;
use crate::generators::{
    binary_tree, coalescent_speed_measure, coalescent_tree, gw_conditioned, kesten_excursion, CoalescentKind,
    CoalescentSpec,
};
use crate::metrics::polynomial_lower_bound;
use crate::oracle::{expected_hitting, instance_hash, occupation_rhs};
use crate::parallel::{map_indexed, Execution};
use crate::rng;
use crate::tree::{check_four_point, lower_mass, RootedMetricTree, Vertex};
use crate::walk::{batch_map, StopRule, WalkChain, WalkPath};

const DUMPED_PATHS: usize = 20;

/// Volume-growth rows above this value count as bounded below.
const POLY_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct DemoOutcome {
    pub records: Vec<SuiteRecord>,
    pub tables: serde_json::Value,
    pub paths: Vec<(String, Vec<WalkPath>)>,
}

fn four_point_failed(t: &RootedMetricTree, seed: u64) -> bool {
    let rep = if t.vertex_count() <= crate::tree::EXHAUSTIVE_FOUR_POINT_LIMIT {
        check_four_point(t)
    } else {
        crate::tree::check_four_point_with(t.vertex_count(), |a, b| t.distance(a, b), seed)
    };
    !rep.passed()
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let i = ((sorted.len() - 1) as f64 * p).round() as usize;
    sorted[i]
}

/// Binary trees of growing depth with `ν({x}) = e^{-h(x)}`: exact return
/// times from the leftmost leaf, the occupation formula, the bound and a
/// Monte Carlo estimate.
pub fn run_entrance_demo(cfg: &ExperimentConfig, exec: Execution, dump_paths: bool) -> Result<DemoOutcome> {
    let seed = cfg.master_seed;
    let mut records = Vec::new();
    let mut rows = Vec::new();
    let mut paths = Vec::new();
    let mut prev_bound: Option<f64> = None;
    for (i, &depth) in cfg.n_list.iter().enumerate() {
        let (t, nu) = binary_tree(depth)?;
        let chain = WalkChain::new(&t, &nu)?;
        let hash = instance_hash(&t, Some(&nu));
        let leaf: Vertex = (1 << depth) - 1;
        let h = expected_hitting(&chain, &[t.root()])?;
        let exact = h[chain.try_state(leaf)?];
        let formula = occupation_rhs(&t, &nu, leaf, t.root(), &vec![1.0; t.vertex_count()])?;
        let bound = entrance_bound(depth);
        let max_exact = h.iter().copied().fold(0.0, f64::max);
        let tag = format!("{hash}:depth{depth}");
        records.push(SuiteRecord::relative(
            "entrance.occupation",
            &tag,
            exact,
            formula,
            1e-9,
            seed,
        ));
        records.push(SuiteRecord::at_most(
            "entrance.bound",
            &tag,
            max_exact,
            bound,
            0.0,
            seed,
        ));
        if let Some(p) = prev_bound {
            records.push(SuiteRecord::below("entrance.bound-increasing", &tag, p, bound, seed));
        }
        prev_bound = Some(bound);

        let mc_seed = rng::labelled_seed(seed, "entrance", i as u64);
        let stop = StopRule::hitting([t.root()]);
        let times = batch_map(&chain, leaf, &stop, cfg.replicates, mc_seed, exec, |p| p.end_time)?;
        let (mean, se) = mean_se(&times);
        records.push(SuiteRecord::absolute(
            "entrance.return-mc",
            &tag,
            mean,
            exact,
            3.0 * se,
            mc_seed,
        ));
        rows.push(json!({
            "depth": depth,
            "leaf": leaf,
            "exact_return_time": exact,
            "max_exact_return_time": max_exact,
            "bound": bound,
            "mc_mean": mean,
            "mc_se": se,
        }));
        if dump_paths {
            let count = cfg.replicates.min(DUMPED_PATHS);
            let p = batch_map(&chain, leaf, &stop, count, mc_seed, Execution::Sequential, |p| {
                p.clone()
            })?;
            paths.push((format!("binary_depth{depth}"), p));
        }
    }
    Ok(DemoOutcome {
        records,
        tables: json!({ "entrance": rows }),
        paths,
    })
}

/// Kesten's tree from reflected two-sided walks: root-ball masses across
/// independent realizations (reported, not judged), plus structural checks.
pub fn run_kesten_demo(cfg: &ExperimentConfig, exec: Execution) -> Result<DemoOutcome> {
    let seed = cfg.master_seed;
    let radii = &cfg.family.radii;
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for (i, &n) in cfg.n_list.iter().enumerate() {
        let label = format!("kesten{i}");
        let samples = map_indexed(cfg.replicates, exec, |k| {
            let s = rng::labelled_seed(seed, &label, k as u64);
            kesten_excursion(n as u64, cfg.family.horizon, s).map(|ks| {
                let t = &ks.tree;
                let masses: Vec<f64> = radii
                    .iter()
                    .map(|&r| ks.measure.measure_of(t.vertices().filter(|&v| t.height(v) <= r)))
                    .collect();
                let negative = ks.excursion.samples.iter().any(|&x| x < 0.0);
                (masses, negative || four_point_failed(t, s), t.vertex_count())
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let failures = samples.iter().filter(|s| s.1).count();
        records.push(SuiteRecord::absolute(
            "kesten.structure",
            format!("n{n}:realizations{}", cfg.replicates),
            failures as f64,
            0.0,
            0.0,
            seed,
        ));
        for (j, &r) in radii.iter().enumerate() {
            let mut m: Vec<f64> = samples.iter().map(|s| s.0[j]).collect();
            m.sort_by(|a, b| a.total_cmp(b));
            let positive: Vec<f64> = m.iter().copied().filter(|&x| x > 0.0).collect();
            rows.push(json!({
                "n": n,
                "radius": r,
                "min": m[0],
                "q10": quantile(&m, 0.1),
                "median": quantile(&m, 0.5),
                "q90": quantile(&m, 0.9),
                "max": m[m.len() - 1],
                "log10_spread": positive.last().map(|hi| (hi / positive[0]).log10()),
            }));
        }
        let sizes: Vec<f64> = samples.iter().map(|s| s.2 as f64).collect();
        rows.push(json!({ "n": n, "mean_vertices": mean_se(&sizes).0 }));
    }
    Ok(DemoOutcome {
        records,
        tables: json!({ "ball_mass": rows }),
        paths: Vec::new(),
    })
}

/// `max (r(i, j) - max(r(i, k), r(k, j))) / diam` over leaf triples.
pub(crate) fn ultrametric_excess(t: &RootedMetricTree, leaves: &[Vertex]) -> f64 {
    let diam = t.diameter().max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for &i in leaves {
        for &j in leaves {
            for &k in leaves {
                let e = t.distance(i, j) - t.distance(i, k).max(t.distance(k, j));
                worst = worst.max(e / diam);
            }
        }
    }
    worst
}

/// Λ-coalescent genealogies: ultrametricity and speed-measure mass on every
/// sample, and for Kingman the mean time spent with `b` blocks.
pub fn run_coalescent_demo(cfg: &ExperimentConfig, exec: Execution) -> Result<DemoOutcome> {
    let seed = cfg.master_seed;
    let kind = &cfg.family.coalescent;
    let mut records = Vec::new();
    let mut rows = Vec::new();
    for (i, &n) in cfg.n_list.iter().enumerate() {
        let spec = CoalescentSpec {
            kind: kind.clone(),
            n_leaves: n,
        };
        spec.validate()?;
        let label = format!("coalescent{i}");
        let runs = map_indexed(cfg.replicates, exec, |k| {
            let s = rng::labelled_seed(seed, &label, k as u64);
            let ct = coalescent_tree(&spec, s)?;
            let nu = coalescent_speed_measure(&ct, cfg.family.speed_variant)?;
            let skeleton: f64 = ct.tree.edge_lengths().iter().sum();
            Ok((
                ultrametric_excess(&ct.tree, &ct.leaves),
                nu.total() - (1.0 + skeleton),
                ct.tree.diameter(),
                nu.total(),
                ct.block_times,
                ct.merge_sizes,
            ))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let tag = format!("{}:n{n}", serde_json::to_string(kind).expect("kind serializes"));
        let ultra = runs.iter().map(|r| r.0).fold(0.0, f64::max);
        let excess = runs.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
        records.push(SuiteRecord::at_most(
            "coalescent.ultrametric",
            &tag,
            ultra,
            0.0,
            1e-12,
            seed,
        ));
        records.push(SuiteRecord::at_most(
            "coalescent.speed-mass-bound",
            &tag,
            excess,
            0.0,
            1e-12,
            seed,
        ));
        if *kind == CoalescentKind::Kingman {
            for b in 2..=n {
                let samples: Vec<f64> = runs
                    .iter()
                    .map(|r| r.4.iter().filter(|e| e.0 == b).map(|e| e.1).sum())
                    .collect();
                let rate = (b * (b - 1) / 2) as f64;
                let sigma = 1.0 / rate / (samples.len() as f64).sqrt();
                records.push(SuiteRecord::absolute(
                    "coalescent.kingman-block-time",
                    format!("n{n}:b{b}"),
                    mean_se(&samples).0,
                    1.0 / rate,
                    4.0 * sigma,
                    seed,
                ));
            }
        }
        let diam: Vec<f64> = runs.iter().map(|r| r.2).collect();
        let mass: Vec<f64> = runs.iter().map(|r| r.3).collect();
        let events: Vec<f64> = runs.iter().map(|r| r.5.len() as f64).collect();
        let largest: Vec<f64> = runs.iter().map(|r| *r.5.iter().max().unwrap_or(&0) as f64).collect();
        rows.push(json!({
            "n_leaves": n,
            "mean_diameter": mean_se(&diam).0,
            "mean_speed_mass": mean_se(&mass).0,
            "mean_merge_events": mean_se(&events).0,
            "mean_largest_merge": mean_se(&largest).0,
        }));
    }
    Ok(DemoOutcome {
        records,
        tables: json!({ "coalescent": rows }),
        paths: Vec::new(),
    })
}

/// Conditioned Galton–Watson trees: exit rates, mass identity, mean exit
/// times from root balls (linear solve and Monte Carlo), and the
/// volume-growth table.
pub fn run_crt_demo(cfg: &ExperimentConfig, exec: Execution, dump_paths: bool) -> Result<DemoOutcome> {
    let seed = cfg.master_seed;
    let f = &cfg.family;
    let mut records = Vec::new();
    let mut rows = Vec::new();
    let mut paths = Vec::new();
    for (i, &n) in cfg.n_list.iter().enumerate() {
        let tree_seed = rng::labelled_seed(seed, "crt.tree", i as u64);
        let g = gw_conditioned(f.offspring, n, tree_seed)?;
        let t = &g.tree;
        let chain = WalkChain::new(t, &g.measure)?;
        let hash = instance_hash(t, Some(&g.measure));
        let nf = n as f64;
        let target = nf.powf(1.5) / g.sigma;
        let worst = (0..chain.state_count())
            .map(|s| chain.total_rate(s))
            .max_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
            .expect("nonempty chain");
        records.push(SuiteRecord::relative(
            "crt.exit-rate",
            &hash,
            worst,
            target,
            1e-12,
            tree_seed,
        ));
        records.push(SuiteRecord::relative(
            "crt.handshake",
            &hash,
            g.measure.total(),
            (nf - 1.0) / nf,
            1e-12,
            tree_seed,
        ));
        records.push(SuiteRecord::absolute(
            "crt.four-point",
            &hash,
            if four_point_failed(t, tree_seed) { 1.0 } else { 0.0 },
            0.0,
            0.0,
            tree_seed,
        ));
        let mut exits = Vec::new();
        for (j, &r) in f.radii.iter().enumerate() {
            let outside: Vec<Vertex> = t.vertices().filter(|&v| t.height(v) >= r).collect();
            if outside.is_empty() {
                continue;
            }
            let exact = expected_hitting(&chain, &outside)?[chain.try_state(t.root())?];
            let mc_seed = rng::labelled_seed(seed, &format!("crt.exit{i}"), j as u64);
            let stop = StopRule::hitting(outside);
            let times = batch_map(&chain, t.root(), &stop, cfg.replicates, mc_seed, exec, |p| p.end_time)?;
            let (mean, se) = mean_se(&times);
            records.push(SuiteRecord::absolute(
                "crt.exit-time-mc",
                format!("{hash}:R{r}"),
                mean,
                exact,
                3.0 * se,
                mc_seed,
            ));
            exits.push(json!({ "radius": r, "exact": exact, "mc_mean": mean, "mc_se": se }));
            if dump_paths && j == 0 {
                let count = cfg.replicates.min(DUMPED_PATHS);
                let p = batch_map(&chain, t.root(), &stop, count, mc_seed, Execution::Sequential, |p| {
                    p.clone()
                })?;
                paths.push((format!("crt_n{n}"), p));
            }
        }
        let table = polynomial_lower_bound(t, &g.measure, &f.deltas, &f.kappas, POLY_THRESHOLD)?;
        let m_delta = f
            .deltas
            .iter()
            .map(|&d| lower_mass(t, &g.measure, d, None).map(|m| m.value))
            .collect::<Result<Vec<_>>>()?;
        rows.push(json!({
            "n": n,
            "sigma": g.sigma,
            "attempts": g.attempts,
            "height": t.max_height(),
            "diameter": t.diameter(),
            "exit_times": exits,
            "m_delta": m_delta,
            "volume_growth": table,
        }));
    }
    Ok(DemoOutcome {
        records,
        tables: json!({ "crt": rows }),
        paths,
    })
}
