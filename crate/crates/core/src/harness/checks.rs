use rand::seq::SliceRandom;
use rand::Rng;

use super::demos::ultrametric_excess;
use super::{mean_se, SuiteRecord};
use crate::error::Result;
use crate::generators::{
    binary_tree, coalescent_tree, glue_excursion, gw_conditioned, random_measure, random_tree, reflect_walk,
    CoalescentKind, CoalescentSpec, Excursion, Offspring,
};
use crate::metrics::{hausdorff, kr_distance, kr_distance_lp_oracle, prohorov, prohorov_brute, FiniteAtomMeasure};
use crate::oracle::{
    atom_law, expected_hitting, expected_hitting_from, harmonic_extension, heat_kernel, hit_bound, hitting_prob,
    hitting_prob_harmonic, instance_hash, occupation_rhs, set_bound_worst, speed_bound, tree_energy, HitGeometry,
};
use crate::parallel::{map_indexed, Execution};
use crate::rng::{self, StreamRng};
use crate::tree::{
    branch_closure, check_four_point, epsilon_net, induced_subtree, project_psi, RootedMetricTree, SpeedMeasure, Vertex,
};
use crate::walk::{batch_map, batch_simulate, occupation_times, StopRule, WalkChain};

/// Sizes and counts for the verification checks. [`VerifyPlan::new`] gives
/// the standard suite.
#[derive(Debug, Clone)]
pub struct VerifyPlan {
    pub seed: u64,
    pub exec: Execution,
    /// Monte Carlo replicates per estimate.
    pub replicates: usize,
    /// Random instances for the occupation, natural-scale and heat-kernel
    /// checks.
    pub instances: usize,
    /// Vertex counts of the random instances, used cyclically.
    pub sizes: Vec<usize>,
    pub times: Vec<f64>,
    pub atom_configs: usize,
    pub bound_configs: usize,
    pub net_trees: usize,
    pub net_levels: Vec<usize>,
    pub metric_corpus: usize,
    pub trace_sets: usize,
    pub binary_depths: Vec<usize>,
    pub rate_sizes: Vec<usize>,
    pub coalescent_samples: usize,
}

impl VerifyPlan {
    pub fn new(seed: u64, replicates: usize, exec: Execution) -> Self {
        Self {
            seed,
            exec,
            replicates,
            instances: 50,
            sizes: vec![6, 8, 10, 12],
            times: vec![0.01, 0.1, 1.0, 10.0],
            atom_configs: 10,
            bound_configs: 20,
            net_trees: 10,
            net_levels: vec![2, 4, 8, 16],
            metric_corpus: 300,
            trace_sets: 30,
            binary_depths: (2..=12).collect(),
            rate_sizes: vec![2, 8, 32, 128],
            coalescent_samples: 100,
        }
    }
}

struct Instance {
    tree: RootedMetricTree,
    nu: SpeedMeasure,
    hash: String,
    seed: u64,
    rng: StreamRng,
}

/// Random recursive tree with edges in `[0.2, 1.5)` and masses in
/// `[0.1, 1)`. Everything, including the vertices a check picks afterwards
/// from `rng`, follows from `seed`.
fn random_instance(plan: &VerifyPlan, label: &str, k: usize) -> Result<Instance> {
    let seed = rng::labelled_seed(plan.seed, label, k as u64);
    let mut r = rng::stream(seed);
    let n = plan.sizes[k % plan.sizes.len()].max(2);
    let tree = random_tree(n, 0.2, 1.5, r.random())?;
    let nu = random_measure(n, 0.1, 1.0, r.random())?;
    Ok(Instance {
        hash: instance_hash(&tree, Some(&nu)),
        tree,
        nu,
        seed,
        rng: r,
    })
}

fn two_distinct(r: &mut StreamRng, n: usize) -> (Vertex, Vertex) {
    let a = r.random_range(0..n);
    let b = (a + r.random_range(1..n)) % n;
    (a, b)
}

/// Jump rates of the two-point chain and total exit rates of conditioned
/// Galton–Watson chains.
pub fn check_rates(plan: &VerifyPlan) -> Result<Vec<SuiteRecord>> {
    let mut out = Vec::new();
    for (i, &n) in plan.rate_sizes.iter().enumerate() {
        let nf = n as f64;
        let t = RootedMetricTree::path(&[1.0])?;
        let nu = SpeedMeasure::new(vec![1.0, 1.0 / nf])?;
        let chain = WalkChain::new(&t, &nu)?;
        let hash = instance_hash(&t, Some(&nu));
        let out_rate = chain.jump_rates(0)?[&1];
        let back_rate = chain.jump_rates(1)?[&0];
        out.push(SuiteRecord::relative(
            "A1.two-point-rate-out",
            &hash,
            out_rate,
            0.5,
            1e-12,
            plan.seed,
        ));
        out.push(SuiteRecord::relative(
            "A1.two-point-rate-back",
            &hash,
            back_rate,
            nf / 2.0,
            1e-12,
            plan.seed,
        ));
        if n < 2 {
            continue;
        }
        for (j, off) in [Offspring::Geometric, Offspring::Poisson].into_iter().enumerate() {
            let seed = rng::labelled_seed(plan.seed, "A1.gw", (2 * i + j) as u64);
            let g = gw_conditioned(off, n, seed)?;
            let chain = WalkChain::new(&g.tree, &g.measure)?;
            let target = nf.powf(1.5) / g.sigma;
            let worst = (0..chain.state_count())
                .map(|s| chain.total_rate(s))
                .max_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
                .expect("nonempty chain");
            out.push(SuiteRecord::relative(
                "A1.gw-exit-rate",
                instance_hash(&g.tree, Some(&g.measure)),
                worst,
                target,
                1e-12,
                seed,
            ));
        }
    }
    Ok(out)
}

/// Expected hitting times against the occupation formula, and Monte Carlo
/// occupation times per vertex against `2 r(y, c(x, y, z)) ν({z})`.
pub fn check_occupation(plan: &VerifyPlan) -> Result<Vec<SuiteRecord>> {
    let mut out = Vec::new();
    for k in 0..plan.instances {
        let mut inst = random_instance(plan, "A2", k)?;
        let t = &inst.tree;
        let n = t.vertex_count();
        let (x, y) = two_distinct(&mut inst.rng, n);
        let chain = WalkChain::new(t, &inst.nu)?;
        let tag = format!("{}:x{x}y{y}", inst.hash);
        let solve = expected_hitting_from(&chain, x, &[y])?;
        let formula = occupation_rhs(t, &inst.nu, x, y, &vec![1.0; n])?;
        out.push(SuiteRecord::relative(
            "A2.expected-hitting",
            &tag,
            solve,
            formula,
            1e-9,
            inst.seed,
        ));
        let ens = batch_simulate(
            &chain,
            x,
            &StopRule::hitting([y]),
            plan.replicates,
            inst.seed,
            plan.exec,
        )?;
        for z in t.vertices() {
            let target = 2.0 * t.distance(y, t.branch_point(x, y, z)) * inst.nu.mass(z);
            let (mean, se) = mean_se(&ens.occupation_of(z));
            out.push(SuiteRecord::absolute(
                "A2.occupation-mc",
                format!("{tag}z{z}"),
                mean,
                target,
                3.0 * se,
                inst.seed,
            ));
        }
    }
    Ok(out)
}

/// `P^x{τ_a < τ_b} = r(x, b) / r(a, b)` against the harmonic solve and
/// Monte Carlo.
pub fn check_natural_scale(plan: &VerifyPlan) -> Result<Vec<SuiteRecord>> {
    let mut out = Vec::new();
    for k in 0..plan.instances {
        let mut inst = random_instance(plan, "A3", k)?;
        let t = &inst.tree;
        let (a, b) = two_distinct(&mut inst.rng, t.vertex_count());
        let path = t.geodesic(a, b);
        let x = if path.len() > 2 {
            path[inst.rng.random_range(1..path.len() - 1)]
        } else {
            path[inst.rng.random_range(0..path.len())]
        };
        let tag = format!("{}:x{x}a{a}b{b}", inst.hash);
        let chain = WalkChain::new(t, &inst.nu)?;
        let p = hitting_prob(t, x, a, b)?;
        let harmonic = hitting_prob_harmonic(&chain, x, a, b)?;
        out.push(SuiteRecord::relative(
            "A3.harmonic",
            &tag,
            harmonic,
            p,
            1e-10,
            inst.seed,
        ));
        let hits = batch_map(
            &chain,
            x,
            &StopRule::hitting([a, b]),
            plan.replicates,
            inst.seed,
            plan.exec,
            |w| w.endpoint() == a,
        )?;
        let n = hits.len() as f64;
        let freq = hits.iter().filter(|&&h| h).count() as f64 / n;
        let sigma = (p * (1.0 - p) / n).sqrt();
        out.push(SuiteRecord::absolute(
            "A3.hitting-mc",
            &tag,
            freq,
            p,
            3.0 * sigma,
            inst.seed,
        ));
    }
    Ok(out)
}

/// Occupation time of `u` before `τ_v`, started at the entry point of the
/// ball: atom weight and mean of the exponential part.
pub fn check_atom_law(plan: &VerifyPlan) -> Result<Vec<SuiteRecord>> {
    let mut out = Vec::new();
    for k in 0..plan.atom_configs {
        let mut inst = random_instance(plan, "A4", k)?;
        let t = &inst.tree;
        let n = t.vertex_count();
        let (x, v) = two_distinct(&mut inst.rng, n);
        let delta = t.distance(x, v) * inst.rng.random_range(0.3..0.95);
        let g = HitGeometry::new(t, &inst.nu, x, v, delta)?;
        let others: Vec<Vertex> = g.ball.iter().copied().filter(|&u| u != g.entry).collect();
        let pool = if others.is_empty() { &g.ball } else { &others };
        let u = pool[inst.rng.random_range(0..pool.len())];
        let law = atom_law(t, &inst.nu, x, delta, u, v)?;
        let tag = format!("{}:x{x}v{v}u{u}d{delta:.6}", inst.hash);
        let chain = WalkChain::new(t, &inst.nu)?;
        let occ = batch_map(
            &chain,
            law.entry,
            &StopRule::hitting([v]),
            plan.replicates,
            inst.seed,
            plan.exec,
            |w| occupation_times(w, n, w.end_time).expect("end time is on the path")[u],
        )?;
        let reps = occ.len() as f64;
        let zero = occ.iter().filter(|&&o| o == 0.0).count() as f64 / reps;
        let w = law.atom_weight;
        let sigma = (w * (1.0 - w) / reps).sqrt();
        out.push(SuiteRecord::absolute(
            "A4.atom-weight",
            &tag,
            zero,
            w,
            3.0 * sigma,
            inst.seed,
        ));
        let positive: Vec<f64> = occ.iter().copied().filter(|&o| o > 0.0).collect();
        if !positive.is_empty() {
            let mean = positive.iter().sum::<f64>() / positive.len() as f64;
            let sigma = law.exp_mean / (positive.len() as f64).sqrt();
            out.push(SuiteRecord::absolute(
                "A4.exp-mean",
                &tag,
                mean,
                law.exp_mean,
                3.0 * sigma,
                inst.seed,
            ));
        }
    }
    Ok(out)
}

/// Monte Carlo probabilities against the hitting-time and speed bounds,
/// one-sided at bound + 3 SE.
pub fn check_bounds(plan: &VerifyPlan) -> Result<Vec<SuiteRecord>> {
    let mut out = Vec::new();
    let freq = |hits: &[bool]| {
        let n = hits.len() as f64;
        let p = hits.iter().filter(|&&h| h).count() as f64 / n;
        (p, (p * (1.0 - p) / n).sqrt())
    };
    for k in 0..plan.bound_configs {
        let mut inst = random_instance(plan, "A5.hit", k)?;
        let t = &inst.tree;
        let (x, v) = two_distinct(&mut inst.rng, t.vertex_count());
        let delta = t.distance(x, v) * inst.rng.random_range(0.2..0.8);
        let g = HitGeometry::new(t, &inst.nu, x, v, delta)?;
        let time = inst.rng.random_range(0.05..0.5) * g.gap * g.ball_mass;
        let bound = hit_bound(t, &inst.nu, x, v, delta, time)?;
        let chain = WalkChain::new(t, &inst.nu)?;
        let stop = StopRule::hitting([v]).with_horizon(time);
        let hits = batch_map(&chain, x, &stop, plan.replicates, inst.seed, plan.exec, |w| {
            w.hitting_time().is_some()
        })?;
        let (p, se) = freq(&hits);
        let tag = format!("{}:x{x}v{v}d{delta:.6}t{time:.6}", inst.hash);
        out.push(SuiteRecord::at_most("A5.hit-bound", tag, p, bound, 3.0 * se, inst.seed));
    }
    for k in 0..plan.bound_configs {
        let mut inst = random_instance(plan, "A5.speed", k)?;
        let t = &inst.tree;
        let x = inst.rng.random_range(0..t.vertex_count());
        let far = t.vertices().map(|y| t.distance(x, y)).fold(0.0, f64::max);
        let eps = 0.5 * far * inst.rng.random_range(0.3..0.95);
        let delta = eps * inst.rng.random_range(0.2..0.8);
        let m = inst.nu.measure_of(t.open_ball(x, delta));
        let time = inst.rng.random_range(0.1..0.9) * (eps - delta) * m;
        let bound = speed_bound(t, &inst.nu, x, eps, delta, time)?.expect("time is inside the stated range");
        let chain = WalkChain::new(t, &inst.nu)?;
        let outside: Vec<Vertex> = t.vertices().filter(|&y| t.distance(x, y) >= 2.0 * eps).collect();
        let stop = StopRule::hitting(outside).with_horizon(time);
        let hits = batch_map(&chain, x, &stop, plan.replicates, inst.seed, plan.exec, |w| {
            w.hitting_time().is_some()
        })?;
        let (p, se) = freq(&hits);
        let tag = format!("{}:x{x}e{eps:.6}d{delta:.6}t{time:.6}", inst.hash);
        out.push(SuiteRecord::at_most(
            "A5.speed-bound",
            tag,
            p,
            bound,
            3.0 * se,
            inst.seed,
        ));
    }
    Ok(out)
}

/// Uniformization heat kernels: total mass, symmetry, the L² bound and the
/// set bound, on every start state.
pub fn check_heat_kernel(plan: &VerifyPlan) -> Result<Vec<SuiteRecord>> {
    let mut out = Vec::new();
    for k in 0..plan.instances {
        let inst = random_instance(plan, "A6", k)?;
        let chain = WalkChain::new(&inst.tree, &inst.nu)?;
        let s = chain.state_count();
        for &time in &plan.times {
            let tag = format!("{}:t{time}", inst.hash);
            let rows = (0..s)
                .map(|x| heat_kernel(&chain, x, time))
                .collect::<Result<Vec<_>>>()?;
            let mass_err = rows
                .iter()
                .map(|h| (h.law(&chain).iter().sum::<f64>() - 1.0).abs())
                .fold(0.0, f64::max);
            out.push(SuiteRecord::at_most(
                "A6.total-mass",
                &tag,
                mass_err,
                0.0,
                1e-10,
                inst.seed,
            ));
            let mut asym: f64 = 0.0;
            for x in 0..s {
                for y in 0..x {
                    let (a, b) = (rows[x].density[y], rows[y].density[x]);
                    asym = asym.max((a - b).abs() / a.abs().max(1.0));
                }
            }
            out.push(SuiteRecord::at_most("A6.symmetry", &tag, asym, 0.0, 1e-10, inst.seed));
            let l2 = rows.iter().map(|h| h.l2_norm_sq).fold(0.0, f64::max);
            out.push(SuiteRecord::at_most(
                "A6.l2-bound",
                &tag,
                l2,
                rows[0].bound,
                0.0,
                inst.seed,
            ));
            let excess = rows
                .iter()
                .map(|h| set_bound_worst(&chain, h).0)
                .fold(f64::NEG_INFINITY, f64::max);
            out.push(SuiteRecord::at_most("A6.set-bound", &tag, excess, 0.0, 0.0, inst.seed));
        }
    }
    Ok(out)
}

/// `Σ_{k=1}^n k 2^k e^{-k}`.
pub(crate) fn entrance_bound(depth: usize) -> f64 {
    (1..=depth)
        .map(|k| k as f64 * 2f64.powi(k as i32) * (-(k as f64)).exp())
        .sum()
}

/// Binary tree with `ν({x}) = e^{-h(x)}`: the linear solve for `E^x[τ_ρ]`
/// against the occupation formula at every vertex, and the bound.
pub fn check_entrance(plan: &VerifyPlan) -> Result<Vec<SuiteRecord>> {
    let mut out = Vec::new();
    for &depth in &plan.binary_depths {
        let (t, nu) = binary_tree(depth)?;
        let chain = WalkChain::new(&t, &nu)?;
        let hash = instance_hash(&t, Some(&nu));
        let h = expected_hitting(&chain, &[t.root()])?;
        let ones = vec![1.0; t.vertex_count()];
        let pairs = map_indexed(t.vertex_count(), plan.exec, |x| {
            occupation_rhs(&t, &nu, x, t.root(), &ones).map(|f| (h[chain.state(x).expect("positive mass")], f))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let worst = pairs
            .iter()
            .copied()
            .max_by(|a, b| ((a.0 - a.1).abs() / a.1.max(1.0)).total_cmp(&((b.0 - b.1).abs() / b.1.max(1.0))))
            .expect("nonempty tree");
        let tag = format!("{hash}:depth{depth}");
        out.push(SuiteRecord::relative(
            "A7.occupation",
            &tag,
            worst.0,
            worst.1,
            1e-9,
            plan.seed,
        ));
        let max_h = h.iter().copied().fold(0.0, f64::max);
        out.push(SuiteRecord::at_most(
            "A7.bound",
            &tag,
            max_h,
            entrance_bound(depth),
            0.0,
            plan.seed,
        ));
    }
    Ok(out)
}

/// Branch-closed `1/n`-nets of the root ball `B(ρ, n)`: Hausdorff distance
/// to the ball and Prohorov distance of the pushforward, both at most `1/n`.
pub fn check_discretization(plan: &VerifyPlan) -> Result<Vec<SuiteRecord>> {
    let mut out = Vec::new();
    for k in 0..plan.net_trees {
        let seed = rng::labelled_seed(plan.seed, "A8", k as u64);
        let mut r = rng::stream(seed);
        let t = random_tree(40, 0.05, 0.6, r.random())?;
        let nu = random_measure(40, 0.1, 1.0, r.random())?;
        let hash = instance_hash(&t, Some(&nu));
        let d = |a: &Vertex, b: &Vertex| t.distance(*a, *b);
        for &n in &plan.net_levels {
            let eps = 1.0 / n as f64;
            let radius = n as f64;
            let tag = format!("{hash}:n{n}");
            let net = epsilon_net(&t, eps, Some(radius))?;
            let proj = project_psi(&t, &net)?;
            out.push(SuiteRecord::absolute(
                "A8.branch-closed",
                &tag,
                if proj.branch_closed { 1.0 } else { 0.0 },
                1.0,
                0.0,
                seed,
            ));
            let ball: Vec<Vertex> = t.vertices().filter(|&v| t.height(v) < radius).collect();
            let restricted = FiniteAtomMeasure::new(ball.iter().map(|&v| (v, nu.mass(v))))?;
            let pushed = FiniteAtomMeasure::from_speed_measure(&proj.pushforward(&t, &nu, Some(radius)), None);
            let members: Vec<Vertex> = net.iter().copied().filter(|&v| t.height(v) < radius).collect();
            out.push(SuiteRecord::at_most(
                "A8.hausdorff",
                &tag,
                hausdorff(&members, &ball, d)?,
                eps,
                1e-12,
                seed,
            ));
            out.push(SuiteRecord::at_most(
                "A8.prohorov",
                &tag,
                prohorov(&restricted, &pushed, d),
                eps,
                1e-12,
                seed,
            ));
        }
    }
    Ok(out)
}

fn random_atoms(r: &mut StreamRng, pool: &[Vertex], max_atoms: usize, normalize: bool) -> Result<FiniteAtomMeasure> {
    let k = r.random_range(1..=max_atoms);
    let mut atoms: Vec<(Vertex, f64)> = (0..k)
        .map(|_| (pool[r.random_range(0..pool.len())], r.random_range(0.05..1.0)))
        .collect();
    if normalize {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        atoms.iter_mut().for_each(|a| a.1 /= total);
    }
    FiniteAtomMeasure::new(atoms)
}

/// Flow-based Prohorov against subset enumeration (up to 4 atoms a side)
/// and min-cost-flow KR against LP vertex enumeration (3 support points).
pub fn check_metric_oracles(plan: &VerifyPlan) -> Result<Vec<SuiteRecord>> {
    let mut out = Vec::new();
    for k in 0..plan.metric_corpus {
        let seed = rng::labelled_seed(plan.seed, "A9", k as u64);
        let mut r = rng::stream(seed);
        let t = random_tree(8, 0.1, 1.0, r.random())?;
        let hash = instance_hash(&t, None);
        let d = |a: &Vertex, b: &Vertex| t.distance(*a, *b);
        let all: Vec<Vertex> = t.vertices().collect();
        let normalize = k % 2 == 0;
        let mu = random_atoms(&mut r, &all, 4, normalize)?;
        let nu = random_atoms(&mut r, &all, 4, normalize)?;
        let tag = format!("{hash}:corpus{k}");
        out.push(SuiteRecord::absolute(
            "A9.prohorov",
            &tag,
            prohorov(&mu, &nu, d),
            prohorov_brute(&mu, &nu, d),
            1e-9,
            seed,
        ));
        let mut pool = all.clone();
        pool.shuffle(&mut r);
        pool.truncate(3);
        let mu = random_atoms(&mut r, &pool, 3, normalize)?;
        let nu = random_atoms(&mut r, &pool, 3, normalize)?;
        out.push(SuiteRecord::absolute(
            "A9.kr",
            &tag,
            kr_distance(&mu, &nu, d),
            kr_distance_lp_oracle(&mu, &nu, d),
            1e-9,
            seed,
        ));
    }
    Ok(out)
}

/// Trace property of the tree energy: the energy of `f` on the induced
/// tree of `S` equals the energy of its harmonic extension to `S' ⊇ S`.
pub fn check_trace(plan: &VerifyPlan) -> Result<Vec<SuiteRecord>> {
    let mut out = Vec::new();
    for k in 0..plan.trace_sets {
        let seed = rng::labelled_seed(plan.seed, "A10", k as u64);
        let mut r = rng::stream(seed);
        let t = random_tree(16, 0.1, 1.0, r.random())?;
        let root = t.root();
        let pick = |from: &[Vertex], count: usize, r: &mut StreamRng| {
            let mut v: Vec<Vertex> = from.to_vec();
            v.shuffle(r);
            v.truncate(count);
            v.push(root);
            v
        };
        let all: Vec<Vertex> = t.vertices().collect();
        let big = branch_closure(&t, &pick(&all, 7, &mut r))?;
        let small = branch_closure(&t, &pick(&big, 3, &mut r))?;
        let (ts, old_s) = induced_subtree(&t, &small)?;
        let f: Vec<f64> = (0..ts.vertex_count()).map(|_| r.random_range(-1.0..1.0)).collect();
        let (tb, old_b) = induced_subtree(&t, &big)?;
        let boundary: Vec<Vertex> = old_s
            .iter()
            .map(|v| {
                old_b
                    .iter()
                    .position(|w| w == v)
                    .expect("small set is inside the big one")
            })
            .collect();
        let ext = harmonic_extension(&tb, &boundary, &f)?;
        let tag = format!("{}:S{:?}:S'{:?}", instance_hash(&t, None), small, big);
        out.push(SuiteRecord::relative(
            "A10.trace",
            tag,
            tree_energy(&tb, &ext),
            tree_energy(&ts, &f),
            1e-10,
            seed,
        ));
    }
    Ok(out)
}

/// Random lattice excursion of `2m` steps that moves up from 0 and is
/// forced down when the remaining steps equal the height.
fn lattice_excursion(r: &mut StreamRng, m: usize) -> Vec<f64> {
    let mut h = 0i64;
    let mut out = vec![0.0];
    for left in (1..=2 * m as i64).rev() {
        h += if h == 0 || (h < left && r.random::<bool>()) {
            1
        } else {
            -1
        };
        out.push(h as f64);
    }
    out
}

/// Coalescent ultrametricity, Kingman block times, the Galton–Watson mass
/// identity and four-point checks of glued trees.
pub fn check_generators(plan: &VerifyPlan) -> Result<Vec<SuiteRecord>> {
    let mut out = Vec::new();
    let kinds = [
        CoalescentKind::Kingman,
        CoalescentKind::Beta { a: 1.0, b: 1.0 },
        CoalescentKind::Beta { a: 0.5, b: 1.5 },
        CoalescentKind::PointMasses {
            atoms: vec![(0.5, 1.0), (1.0, 0.2)],
        },
    ];
    for (i, kind) in kinds.iter().enumerate() {
        let spec = CoalescentSpec {
            kind: kind.clone(),
            n_leaves: 10,
        };
        let label = format!("A12.ultrametric{i}");
        let worst = map_indexed(plan.coalescent_samples, plan.exec, |s| {
            let seed = rng::labelled_seed(plan.seed, &label, s as u64);
            coalescent_tree(&spec, seed).map(|ct| ultrametric_excess(&ct.tree, &ct.leaves))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
        let tag = serde_json::to_string(kind).expect("kind serializes");
        out.push(SuiteRecord::at_most(
            "A12.ultrametric",
            tag,
            worst,
            0.0,
            1e-12,
            plan.seed,
        ));
    }

    let n_leaves = 8;
    let spec = CoalescentSpec {
        kind: CoalescentKind::Kingman,
        n_leaves,
    };
    let runs = map_indexed(plan.replicates, plan.exec, |s| {
        coalescent_tree(&spec, rng::labelled_seed(plan.seed, "A12.kingman", s as u64)).map(|ct| ct.block_times)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    for b in 2..=n_leaves {
        let samples: Vec<f64> = runs
            .iter()
            .map(|bt| bt.iter().filter(|e| e.0 == b).map(|e| e.1).sum())
            .collect();
        let (mean, _) = mean_se(&samples);
        let rate = (b * (b - 1) / 2) as f64;
        let sigma = 1.0 / rate / (samples.len() as f64).sqrt();
        out.push(SuiteRecord::absolute(
            "A12.kingman-block-time",
            format!("n{n_leaves}:b{b}"),
            mean,
            1.0 / rate,
            4.0 * sigma,
            plan.seed,
        ));
    }

    for (i, &n) in plan.rate_sizes.iter().filter(|&&n| n >= 2).enumerate() {
        for (j, off) in [Offspring::Geometric, Offspring::Poisson].into_iter().enumerate() {
            let seed = rng::labelled_seed(plan.seed, "A12.gw", (2 * i + j) as u64);
            let g = gw_conditioned(off, n, seed)?;
            let hash = instance_hash(&g.tree, Some(&g.measure));
            let target = (n - 1) as f64 / n as f64;
            out.push(SuiteRecord::relative(
                "A12.gw-handshake",
                &hash,
                g.measure.total(),
                target,
                1e-12,
                seed,
            ));
            out.push(four_point_record("A12.gw-four-point", &hash, &g.tree, seed));
        }
    }

    for k in 0..50 {
        let seed = rng::labelled_seed(plan.seed, "A12.glue", k as u64);
        let mut r = rng::stream(seed);
        let e = if k % 2 == 0 {
            let m = r.random_range(2..=20);
            Excursion::one_sided(lattice_excursion(&mut r, m), 0.05)?
        } else {
            let mut side = |len: usize| {
                let mut w = vec![0.0];
                for _ in 0..len {
                    w.push(w.last().unwrap() + if r.random::<bool>() { 1.0 } else { -1.0 });
                }
                reflect_walk(&w)
            };
            let right = side(7);
            let left = side(7);
            let mut samples: Vec<f64> = left.iter().rev().copied().collect();
            samples.extend_from_slice(&right[1..]);
            Excursion::two_sided(samples, 0.1)?
        };
        let g = glue_excursion(&e)?;
        let hash = instance_hash(&g.tree, Some(&g.measure));
        out.push(four_point_record("A12.glue-four-point", &hash, &g.tree, seed));
        let mut worst: f64 = 0.0;
        for i in 0..e.samples.len() {
            let row = e.distance_row(i);
            for (j, dij) in row.iter().enumerate() {
                let d = g.tree.distance(g.vertex_of_sample[i], g.vertex_of_sample[j]);
                worst = worst.max((d - dij).abs());
            }
        }
        out.push(SuiteRecord::at_most("A12.glue-metric", &hash, worst, 0.0, 1e-10, seed));
    }
    Ok(out)
}

/// Exhaustive four-point check up to 30 vertices. The statistic is 1 for
/// a violation; a sampled check on a small tree also fails.
fn four_point_record(id: &str, hash: &str, t: &RootedMetricTree, seed: u64) -> SuiteRecord {
    let rep = check_four_point(t);
    let ok = rep.passed() && (rep.exhaustive || t.vertex_count() > crate::tree::EXHAUSTIVE_FOUR_POINT_LIMIT);
    SuiteRecord::absolute(
        id,
        format!("{hash}:checked{}", rep.checked),
        if ok { 0.0 } else { 1.0 },
        0.0,
        0.0,
        seed,
    )
}
