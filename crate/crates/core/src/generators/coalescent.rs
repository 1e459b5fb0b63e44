use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::rng;
use crate::tree::{RootedMetricTree, SpeedMeasure, Vertex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoalescentKind {
    /// `Λ = δ_0`.
    Kingman,
    /// `Λ = Beta(a, b)`.
    Beta { a: f64, b: f64 },
    /// `Λ = Σ w δ_x` with atoms `(x, w)`, `x` in `(0, 1]`.
    PointMasses { atoms: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalescentSpec {
    #[serde(flatten)]
    pub kind: CoalescentKind,
    pub n_leaves: usize,
}

impl CoalescentSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n_leaves < 2 {
            return bad("coalescent needs at least 2 leaves".into());
        }
        match &self.kind {
            CoalescentKind::Kingman => Ok(()),
            CoalescentKind::Beta { a, b } => {
                if !(*a > 0.0 && *b > 0.0) {
                    return bad(format!("Beta parameters must be positive, got ({a}, {b})"));
                }
                Ok(())
            }
            CoalescentKind::PointMasses { atoms } => {
                if atoms.is_empty() {
                    return bad("point-mass Λ needs at least one atom".into());
                }
                for &(x, w) in atoms {
                    if !(x > 0.0 && x <= 1.0 && w > 0.0 && w.is_finite()) {
                        return bad(format!("atom ({x}, {w}) needs x in (0, 1] and positive weight"));
                    }
                }
                Ok(())
            }
        }
    }
}

/// `λ_{k,b} = ∫ x^{k-2} (1-x)^{b-k} Λ(dx)`: the rate at which a given
/// `k`-subset of `b` blocks merges.
pub fn merge_rate(kind: &CoalescentKind, k: usize, b: usize) -> f64 {
    assert!(2 <= k && k <= b);
    match kind {
        CoalescentKind::Kingman => {
            if k == 2 {
                1.0
            } else {
                0.0
            }
        }
        CoalescentKind::Beta { a, b: bb } => {
            (ln_beta(k as f64 - 2.0 + a, (b - k) as f64 + bb) - ln_beta(*a, *bb)).exp()
        }
        CoalescentKind::PointMasses { atoms } => atoms
            .iter()
            .map(|&(x, w)| w * x.powi(k as i32 - 2) * (1.0 - x).powi((b - k) as i32))
            .sum(),
    }
}

#[derive(Debug, Clone)]
pub struct CoalescentTree {
    /// Leaves are vertices `0..n_leaves`; the root is the last merge.
    pub tree: RootedMetricTree,
    pub leaves: Vec<Vertex>,
    /// `(number of blocks, time spent with that many blocks)` per event.
    pub block_times: Vec<(usize, f64)>,
    /// Number of blocks merged at each event.
    pub merge_sizes: Vec<usize>,
}

/// Genealogy of the block-merging chain: `r(i, j)` is the time at which
/// `i` and `j` first share a block, so a merge at time `t` is a vertex at
/// distance `t/2` from its leaves. The final merge is the root, at distance
/// `diam/2` from every leaf.
pub fn coalescent_tree(spec: &CoalescentSpec, seed: u64) -> Result<CoalescentTree> {
    spec.validate()?;
    let n = spec.n_leaves;
    let mut rng = rng::stream(seed);
    // leaf-height (half merge time) of each vertex, and parent links
    let mut level = vec![0.0; n];
    let mut parent: Vec<Vertex> = (0..n).collect();
    let mut blocks: Vec<Vertex> = (0..n).collect();
    let mut t = 0.0;
    let mut block_times = Vec::new();
    let mut merge_sizes = Vec::new();
    while blocks.len() >= 2 {
        let b = blocks.len();
        let rates: Vec<f64> = (2..=b)
            .map(|k| {
                let r = merge_rate(&spec.kind, k, b);
                if r == 0.0 {
                    0.0
                } else {
                    (ln_binomial(b as u64, k as u64) + r.ln()).exp()
                }
            })
            .collect();
        let total: f64 = rates.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "total merge rate {total} with {b} blocks is not usable"
            )));
        }
        let dt = Exp::new(total).expect("positive rate").sample(&mut rng);
        t += dt;
        block_times.push((b, dt));
        let u: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut k = b;
        for (i, &r) in rates.iter().enumerate() {
            acc += r;
            if u < acc {
                k = i + 2;
                break;
            }
        }
        let mut chosen = index::sample(&mut rng, b, k).into_vec();
        chosen.sort_unstable();
        let v = level.len();
        level.push(t / 2.0);
        parent.push(v);
        for &i in &chosen {
            parent[blocks[i]] = v;
        }
        for &i in chosen.iter().rev() {
            blocks.swap_remove(i);
        }
        blocks.push(v);
        merge_sizes.push(k);
    }
    let root = blocks[0];
    let lengths: Vec<f64> = (0..level.len())
        .map(|v| if v == root { 0.0 } else { level[parent[v]] - level[v] })
        .collect();
    let tree = RootedMetricTree::new(parent, lengths, root)?;
    Ok(CoalescentTree {
        tree,
        leaves: (0..n).collect(),
        block_times,
        merge_sizes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeedVariant {
    /// The density `μⁿ(S^x)` against length, integrated along each edge and
    /// lumped at the endpoint away from the root.
    SkeletonDensity,
    /// Atoms `μⁿ(S^x) ℓ(x)` at internal vertices plus a unit atom at the root.
    BranchAtomic,
}

/// Speed measures built from `μⁿ`, the uniform law on the leaves, where
/// `S^x` is the set of leaves below `x`.
pub fn coalescent_speed_measure(ct: &CoalescentTree, variant: SpeedVariant) -> Result<SpeedMeasure> {
    let t = &ct.tree;
    if ct.leaves.is_empty() {
        return Err(Error::InvalidArgument("coalescent tree has no marked leaves".into()));
    }
    let mut is_leaf = vec![false; t.vertex_count()];
    for &l in &ct.leaves {
        t.check_vertex(l)?;
        is_leaf[l] = true;
    }
    let n = ct.leaves.len() as f64;
    let mut below = vec![0usize; t.vertex_count()];
    for &v in t.preorder().iter().rev() {
        if is_leaf[v] {
            below[v] += 1;
        }
        if !t.is_root(v) {
            below[t.parent(v)] += below[v];
        }
    }
    let share = |v: Vertex| below[v] as f64 / n;
    let mass = t
        .vertices()
        .map(|v| match variant {
            SpeedVariant::SkeletonDensity => share(v) * t.edge_length(v),
            SpeedVariant::BranchAtomic => {
                if t.is_root(v) {
                    1.0
                } else if is_leaf[v] {
                    0.0
                } else {
                    share(v) * t.edge_length(v)
                }
            }
        })
        .collect();
    SpeedMeasure::new(mass)
}
