//! Trend experiments along a family of discretizations.
//!
//! Stone family: level `n` is the Stone tree with `q = 1 + 2/√n` truncated
//! at `±q^K ≈ ±√n`, carrying its length measure. The reference level is a
//! uniform grid on `[-W, W]` with the same kind of measure, and everything
//! lives on one ambient line through the union of all coordinates.
//!
//! Two-point family: `ν_n = δ_0 + n^{-1} δ_1` on a unit edge, compared with
//! the walk of the limit `δ_0`, which never leaves 0.
//!
//! The pass/fail rules on trends are engineering thresholds (strict
//! decrease along `n` under the pinned seed), not a rate of convergence.

use serde::{Deserialize, Serialize};

use super::config::{Experiment, ExperimentConfig};
use super::SuiteRecord;
use crate::error::{Error, Result};
use crate::generators::{stone_tq, StoneTree};
use crate::metrics::{empirical_law, gh_vague_report, kr_distance_tree, ConvergenceReport, FiniteAtomMeasure, Space};
use crate::oracle::heat_kernel;
use crate::parallel::Execution;
use crate::rng;
use crate::tree::{length_measure, lower_mass, RootedMetricTree, SpeedMeasure, Vertex};
use crate::walk::{batch_map, batch_snapshots, Snapshots, StopRule, WalkChain, WalkPath};

/// Number of trajectories kept per level for `--dump-paths`.
const DUMPED_PATHS: usize = 20;

/// A path-shaped tree through sorted real coordinates, rooted at 0.
#[derive(Debug, Clone)]
pub struct LineTree {
    pub tree: RootedMetricTree,
    /// `coords[v]`, increasing in `v`.
    pub coords: Vec<f64>,
}

impl LineTree {
    pub fn vertex_at(&self, x: f64) -> Option<Vertex> {
        self.coords.binary_search_by(|c| c.total_cmp(&x)).ok()
    }

    /// Ambient vertex of every coordinate in `xs`.
    pub fn embedding(&self, xs: &[f64]) -> Result<Vec<Vertex>> {
        xs.iter()
            .map(|&x| {
                self.vertex_at(x)
                    .ok_or_else(|| Error::InvalidArgument(format!("coordinate {x} is not on the line")))
            })
            .collect()
    }
}

/// Line through the given coordinates (duplicates merged). Must contain 0.
pub fn line_tree(coords: &[f64]) -> Result<LineTree> {
    let mut c: Vec<f64> = coords.to_vec();
    if c.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("coordinates must be finite".into()));
    }
    c.sort_by(|a, b| a.total_cmp(b));
    c.dedup();
    let root = c
        .iter()
        .position(|&x| x == 0.0)
        .ok_or_else(|| Error::InvalidArgument("line must pass through 0".into()))?;
    let n = c.len();
    let mut parent = vec![root; n];
    let mut len = vec![0.0; n];
    for i in 0..n {
        if i < root {
            parent[i] = i + 1;
            len[i] = c[i + 1] - c[i];
        } else if i > root {
            parent[i] = i - 1;
            len[i] = c[i] - c[i - 1];
        }
    }
    Ok(LineTree {
        tree: RootedMetricTree::new(parent, len, root)?,
        coords: c,
    })
}

/// Stone level `n`: `q = 1 + 2/√n` and `K = ceil(ln √n / ln q)`, so the
/// outermost points sit near `±√n` and the innermost near `±1/√n`.
pub fn stone_level(n: usize) -> Result<StoneLevel> {
    let nf = n as f64;
    let q = 1.0 + 2.0 / nf.sqrt();
    let k = ((nf.sqrt().ln() / q.ln()).ceil() as usize).max(1);
    Ok(StoneLevel {
        n,
        q,
        k,
        stone: stone_tq(q, k)?,
    })
}

#[derive(Debug, Clone)]
pub struct StoneLevel {
    pub n: usize,
    pub q: f64,
    pub k: usize,
    pub stone: StoneTree,
}

/// Speed-measure pair on the two-point tree `0 -- 1`.
fn two_point(n: usize) -> Result<(RootedMetricTree, SpeedMeasure)> {
    let t = RootedMetricTree::path(&[1.0])?;
    let nu = SpeedMeasure::new(vec![1.0, 1.0 / n as f64])?;
    Ok((t, nu))
}

/// Extra output of the two-point family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPointOutcome {
    /// `m_δ(ν_n)` at `δ = 1/2`, per level.
    pub m_delta: Vec<f64>,
    /// Monte Carlo `P^0{τ_1 <= T}` at the last time, per level.
    pub visit_prob: Vec<f64>,
    /// The exact value `1 - e^{-T/2}`, the same for every level.
    pub visit_prob_exact: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceOutcome {
    pub family: &'static str,
    pub n_list: Vec<usize>,
    pub times: Vec<f64>,
    /// `kr[level][time]` between one-time empirical laws of the level and of
    /// the reference ensemble.
    pub kr: Vec<Vec<f64>>,
    /// Same with exact uniformization laws on both sides.
    pub kr_exact: Vec<Vec<f64>>,
    /// KR between the two halves of the reference ensemble, per time.
    pub noise_floor: Vec<f64>,
    /// Spearman correlation of distance against `n`, per time.
    pub spearman: Vec<f64>,
    pub spaces: ConvergenceReport,
    pub two_point: Option<TwoPointOutcome>,
    pub records: Vec<SuiteRecord>,
    pub paths: Vec<(String, Vec<WalkPath>)>,
}

impl ConvergenceOutcome {
    pub fn tables(&self) -> serde_json::Value {
        serde_json::json!({
            "family": self.family,
            "n_list": self.n_list,
            "times": self.times,
            "kr_mc": self.kr,
            "kr_exact": self.kr_exact,
            "reference_split_kr": self.noise_floor,
            "spearman": self.spearman,
            "two_point": self.two_point,
        })
    }
}

/// Spearman rank correlation (average ranks on ties). `NaN` below two
/// points or for a constant input.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            for &k in &idx[i..=j] {
                r[k] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    }
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return f64::NAN;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Time-`t` law of the walk from `start`, pushed through `embed`.
fn exact_law(chain: &WalkChain, start: Vertex, time: f64, embed: &[Vertex]) -> Result<FiniteAtomMeasure> {
    let mut atoms = Vec::new();
    for (s, p) in chain.entry_law(start)? {
        let law = heat_kernel(chain, s, time)?.law(chain);
        atoms.extend(
            law.into_iter()
                .enumerate()
                .map(|(st, q)| (embed[chain.vertex(st)], p * q)),
        );
    }
    FiniteAtomMeasure::new(atoms)
}

fn one_time_laws(snap: &Snapshots, i: usize, embed: &[Vertex]) -> Result<FiniteAtomMeasure> {
    let pts: Vec<Vertex> = snap.positions.iter().map(|p| embed[p[i]]).collect();
    empirical_law(&pts)
}

fn dumped(chain: &WalkChain, start: Vertex, horizon: f64, count: usize, seed: u64) -> Result<Vec<WalkPath>> {
    batch_map(
        chain,
        start,
        &StopRule::horizon(horizon),
        count,
        seed,
        Execution::Sequential,
        |p| p.clone(),
    )
}

/// Strict decrease of `values[level]` along the levels.
fn decrease_records(id: &str, n_list: &[usize], values: &[f64], what: &str, seed: u64) -> Vec<SuiteRecord> {
    (1..values.len())
        .map(|i| {
            SuiteRecord::below(
                id,
                format!("{what}:n{}->n{}", n_list[i - 1], n_list[i]),
                values[i],
                values[i - 1],
                seed,
            )
        })
        .collect()
}

/// Runs the `stone` or `fdd` experiment.
pub fn run_convergence(cfg: &ExperimentConfig, exec: Execution, dump_paths: bool) -> Result<ConvergenceOutcome> {
    match cfg.experiment {
        Experiment::Stone => run_stone(cfg, exec, dump_paths),
        Experiment::Fdd => run_two_point(cfg, exec, dump_paths),
        other => Err(Error::Config(format!(
            "experiment `{}` is not a convergence family",
            other.name()
        ))),
    }
}

fn run_stone(cfg: &ExperimentConfig, exec: Execution, dump_paths: bool) -> Result<ConvergenceOutcome> {
    let f = &cfg.family;
    let seed = cfg.master_seed;
    let half = (f.reference_half_width / f.reference_step).round() as i64;
    let grid: Vec<f64> = (-half..=half).map(|i| i as f64 * f.reference_step).collect();
    let reference = line_tree(&grid)?;
    let ref_nu = length_measure(&reference.tree);
    let ref_chain = WalkChain::new(&reference.tree, &ref_nu)?;
    let levels = cfg.n_list.iter().map(|&n| stone_level(n)).collect::<Result<Vec<_>>>()?;

    let mut all = grid.clone();
    for l in &levels {
        all.extend_from_slice(&l.stone.coords);
    }
    let ambient = line_tree(&all)?;
    let at = &ambient.tree;
    let ref_embed = ambient.embedding(&reference.coords)?;
    let ref_start = reference.tree.root();
    let ref_seed = rng::labelled_seed(seed, "stone.reference", 0);
    let ref_snap = batch_snapshots(&ref_chain, ref_start, &cfg.times, None, cfg.replicates, ref_seed, exec)?;
    let ref_exact = cfg
        .times
        .iter()
        .map(|&t| exact_law(&ref_chain, ref_start, t, &ref_embed))
        .collect::<Result<Vec<_>>>()?;

    let mut noise_floor = Vec::new();
    if cfg.replicates >= 2 {
        let h = cfg.replicates / 2;
        for i in 0..cfg.times.len() {
            let a = Snapshots {
                times: cfg.times.clone(),
                positions: ref_snap.positions[..h].to_vec(),
            };
            let b = Snapshots {
                times: cfg.times.clone(),
                positions: ref_snap.positions[h..2 * h].to_vec(),
            };
            noise_floor.push(kr_distance_tree(
                at,
                &one_time_laws(&a, i, &ref_embed)?,
                &one_time_laws(&b, i, &ref_embed)?,
            ));
        }
    }

    let mut kr = Vec::new();
    let mut kr_exact = Vec::new();
    let mut spaces = Vec::new();
    let mut paths = Vec::new();
    for (li, level) in levels.iter().enumerate() {
        let st = &level.stone;
        let embed = ambient.embedding(&st.coords)?;
        let chain = WalkChain::new(&st.tree, &st.measure)?;
        let start = st.tree.root();
        let level_seed = rng::labelled_seed(seed, "stone.level", li as u64);
        let snap = batch_snapshots(&chain, start, &cfg.times, None, cfg.replicates, level_seed, exec)?;
        let mut row = Vec::new();
        let mut row_exact = Vec::new();
        for (i, &t) in cfg.times.iter().enumerate() {
            let emp = one_time_laws(&snap, i, &embed)?;
            let emp_ref = one_time_laws(&ref_snap, i, &ref_embed)?;
            row.push(kr_distance_tree(at, &emp, &emp_ref));
            row_exact.push(kr_distance_tree(
                at,
                &exact_law(&chain, start, t, &embed)?,
                &ref_exact[i],
            ));
        }
        kr.push(row);
        kr_exact.push(row_exact);
        spaces.push(Space::embedded(&st.tree, &st.measure, &embed));
        if dump_paths {
            let horizon = *cfg.times.last().expect("times validated nonempty");
            let count = cfg.replicates.min(DUMPED_PATHS);
            paths.push((
                format!("stone_n{}", level.n),
                dumped(&chain, start, horizon, count, level_seed)?,
            ));
        }
    }
    let limit = Space::embedded(&reference.tree, &ref_nu, &ref_embed);
    let report = gh_vague_report(at, &spaces, &limit, &f.radii, &f.deltas)?;

    let ns: Vec<f64> = cfg.n_list.iter().map(|&n| n as f64).collect();
    let mut records = Vec::new();
    let mut rho = Vec::new();
    for (i, &t) in cfg.times.iter().enumerate() {
        let col: Vec<f64> = kr.iter().map(|r| r[i]).collect();
        rho.push(spearman(&ns, &col));
        records.extend(decrease_records(
            "A11.stone-kr-decrease",
            &cfg.n_list,
            &col,
            &format!("t{t}"),
            seed,
        ));
    }
    Ok(ConvergenceOutcome {
        family: "stone",
        n_list: cfg.n_list.clone(),
        times: cfg.times.clone(),
        kr,
        kr_exact,
        noise_floor,
        spearman: rho,
        spaces: report,
        two_point: None,
        records,
        paths,
    })
}

fn run_two_point(cfg: &ExperimentConfig, exec: Execution, dump_paths: bool) -> Result<ConvergenceOutcome> {
    let seed = cfg.master_seed;
    let horizon = *cfg.times.last().expect("times validated nonempty");
    let (t, _) = two_point(1)?;
    let identity: Vec<Vertex> = t.vertices().collect();
    let limit_law = FiniteAtomMeasure::new([(0, 1.0)])?;
    let limit = Space::new(identity.clone(), limit_law.clone());

    let mut kr = Vec::new();
    let mut kr_exact = Vec::new();
    let mut spaces = Vec::new();
    let mut m_delta = Vec::new();
    let mut visit_prob = Vec::new();
    let mut paths = Vec::new();
    let mut records = Vec::new();
    let visit_exact = 1.0 - (-horizon / 2.0).exp();
    for (li, &n) in cfg.n_list.iter().enumerate() {
        let (t, nu) = two_point(n)?;
        let chain = WalkChain::new(&t, &nu)?;
        let level_seed = rng::labelled_seed(seed, "two-point.level", li as u64);
        let snap = batch_snapshots(&chain, 0, &cfg.times, None, cfg.replicates, level_seed, exec)?;
        let mut row = Vec::new();
        let mut row_exact = Vec::new();
        for (i, &time) in cfg.times.iter().enumerate() {
            row.push(kr_distance_tree(&t, &one_time_laws(&snap, i, &identity)?, &limit_law));
            row_exact.push(kr_distance_tree(
                &t,
                &exact_law(&chain, 0, time, &identity)?,
                &limit_law,
            ));
        }
        kr.push(row);
        kr_exact.push(row_exact);
        spaces.push(Space::embedded(&t, &nu, &identity));
        m_delta.push(lower_mass(&t, &nu, 0.5, None)?.value);

        let visits = batch_map(
            &chain,
            0,
            &StopRule::hitting([1]).with_horizon(horizon),
            cfg.replicates,
            rng::labelled_seed(seed, "two-point.visit", li as u64),
            exec,
            |p| p.hitting_time().is_some(),
        )?;
        let reps = visits.len() as f64;
        let p = visits.iter().filter(|&&v| v).count() as f64 / reps;
        let sigma = (visit_exact * (1.0 - visit_exact) / reps).sqrt();
        visit_prob.push(p);
        records.push(SuiteRecord::absolute(
            "A11.two-point-path-stall",
            format!("n{n}:T{horizon}"),
            p,
            visit_exact,
            3.0 * sigma,
            seed,
        ));
        records.push(SuiteRecord::relative(
            "A11.two-point-m-delta",
            format!("n{n}:delta0.5"),
            *m_delta.last().unwrap(),
            1.0 / n as f64,
            1e-12,
            seed,
        ));
        if dump_paths {
            let count = cfg.replicates.min(DUMPED_PATHS);
            paths.push((
                format!("two_point_n{n}"),
                dumped(&chain, 0, horizon, count, level_seed)?,
            ));
        }
    }
    let report = gh_vague_report(&t, &spaces, &limit, &cfg.family.radii, &cfg.family.deltas)?;

    let ns: Vec<f64> = cfg.n_list.iter().map(|&n| n as f64).collect();
    let mut rho = Vec::new();
    records.extend(decrease_records(
        "A11.two-point-m-delta-decrease",
        &cfg.n_list,
        &m_delta,
        "delta0.5",
        seed,
    ));
    for (i, &time) in cfg.times.iter().enumerate() {
        let col: Vec<f64> = kr.iter().map(|r| r[i]).collect();
        rho.push(spearman(&ns, &col));
        records.extend(decrease_records(
            "A11.two-point-kr-decrease",
            &cfg.n_list,
            &col,
            &format!("t{time}"),
            seed,
        ));
    }
    Ok(ConvergenceOutcome {
        family: "two-point",
        n_list: cfg.n_list.clone(),
        times: cfg.times.clone(),
        kr,
        kr_exact,
        noise_floor: Vec::new(),
        spearman: rho,
        spaces: report,
        two_point: Some(TwoPointOutcome {
            m_delta,
            visit_prob,
            visit_prob_exact: visit_exact,
        }),
        records,
        paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_tree_distances() {
        let l = line_tree(&[1.0, -0.5, 0.0, 2.0, 1.0]).unwrap();
        assert_eq!(l.coords, vec![-0.5, 0.0, 1.0, 2.0]);
        let (a, b) = (l.vertex_at(-0.5).unwrap(), l.vertex_at(2.0).unwrap());
        assert!((l.tree.distance(a, b) - 2.5).abs() < 1e-15);
        assert_eq!(l.tree.root(), 1);
        assert!(line_tree(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn spearman_basics() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[0.3, 0.2, 0.1]), -1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[1.0, 5.0, 9.0]), 1.0);
        assert!(spearman(&[1.0], &[1.0]).is_nan());
    }

    #[test]
    fn stone_levels_reach_sqrt_n() {
        for n in [8, 32, 128] {
            let l = stone_level(n).unwrap();
            let outer = l.q.powi(l.k as i32);
            assert!(outer >= (n as f64).sqrt() && outer < l.q * (n as f64).sqrt());
        }
    }
}
