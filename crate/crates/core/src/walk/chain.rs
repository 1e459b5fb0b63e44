use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::tree::{RootedMetricTree, SpeedMeasure, Vertex};

/// Reversible continuous-time chain on the positive-mass vertices of a tree.
///
/// A direct edge of length `ℓ` has conductance `1/ℓ`; zero-mass vertices are
/// removed by star-mesh elimination, which replaces a junction with incident
/// conductances `c_i` by pairwise conductances `c_i c_j / Σ c`. The rate from
/// `u` to `v` is `c(u, v) / (2 m(u))`.
#[derive(Debug, Clone)]
pub struct WalkChain {
    tree: RootedMetricTree,
    nu: SpeedMeasure,
    vertex_of: Vec<Vertex>,
    state_of: Vec<Option<usize>>,
    mass: Vec<f64>,
    conductance: Vec<Vec<(usize, f64)>>,
    rates: Vec<Vec<(usize, f64)>>,
    total_rate: Vec<f64>,
}

impl WalkChain {
    pub fn new(tree: &RootedMetricTree, nu: &SpeedMeasure) -> Result<Self> {
        nu.matches(tree)?;
        if nu.total() <= 0.0 {
            return Err(Error::AllZeroMeasure);
        }
        let n = tree.vertex_count();
        let mut adj: Vec<BTreeMap<Vertex, f64>> = vec![BTreeMap::new(); n];
        for (v, p, l) in tree.edges() {
            adj[v].insert(p, 1.0 / l);
            adj[p].insert(v, 1.0 / l);
        }
        // eliminate zero-mass vertices, smallest current degree first
        let mut zeros: Vec<Vertex> = tree.vertices().filter(|&v| nu.mass(v) == 0.0).collect();
        let mut removed = vec![false; n];
        while !zeros.is_empty() {
            let (idx, _) = zeros
                .iter()
                .enumerate()
                .min_by_key(|(_, &z)| (adj[z].len(), z))
                .unwrap();
            let z = zeros.swap_remove(idx);
            let star: Vec<(Vertex, f64)> = std::mem::take(&mut adj[z]).into_iter().collect();
            removed[z] = true;
            let sum: f64 = star.iter().map(|(_, c)| c).sum();
            for &(a, _) in &star {
                adj[a].remove(&z);
            }
            for (i, &(a, ca)) in star.iter().enumerate() {
                for &(b, cb) in &star[i + 1..] {
                    let c = ca * cb / sum;
                    *adj[a].entry(b).or_insert(0.0) += c;
                    *adj[b].entry(a).or_insert(0.0) += c;
                }
            }
        }
        let vertex_of: Vec<Vertex> = tree.vertices().filter(|&v| !removed[v]).collect();
        let mut state_of = vec![None; n];
        for (s, &v) in vertex_of.iter().enumerate() {
            state_of[v] = Some(s);
        }
        let mass: Vec<f64> = vertex_of.iter().map(|&v| nu.mass(v)).collect();
        let conductance: Vec<Vec<(usize, f64)>> = vertex_of
            .iter()
            .map(|&v| adj[v].iter().map(|(&w, &c)| (state_of[w].unwrap(), c)).collect())
            .collect();
        let rates: Vec<Vec<(usize, f64)>> = conductance
            .iter()
            .enumerate()
            .map(|(s, row)| row.iter().map(|&(w, c)| (w, c / (2.0 * mass[s]))).collect())
            .collect();
        let total_rate = rates.iter().map(|r| r.iter().map(|x| x.1).sum()).collect();
        let chain = Self {
            tree: tree.clone(),
            nu: nu.clone(),
            vertex_of,
            state_of,
            mass,
            conductance,
            rates,
            total_rate,
        };
        if !chain.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(chain)
    }

    fn is_connected(&self) -> bool {
        let k = self.state_count();
        let mut seen = vec![false; k];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(s) = stack.pop() {
            for &(w, _) in &self.conductance[s] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|x| x)
    }

    pub fn tree(&self) -> &RootedMetricTree {
        &self.tree
    }

    pub fn measure(&self) -> &SpeedMeasure {
        &self.nu
    }

    pub fn state_count(&self) -> usize {
        self.vertex_of.len()
    }

    pub fn vertex(&self, state: usize) -> Vertex {
        self.vertex_of[state]
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertex_of
    }

    pub fn state(&self, v: Vertex) -> Option<usize> {
        self.state_of.get(v).copied().flatten()
    }

    pub fn try_state(&self, v: Vertex) -> Result<usize> {
        self.tree.check_vertex(v)?;
        self.state(v)
            .ok_or_else(|| Error::InvalidArgument(format!("vertex {v} carries no mass and is not a state")))
    }

    pub fn mass(&self, state: usize) -> f64 {
        self.mass[state]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn conductances(&self, state: usize) -> &[(usize, f64)] {
        &self.conductance[state]
    }

    pub fn conductance(&self, a: usize, b: usize) -> f64 {
        self.conductance[a].iter().find(|x| x.0 == b).map_or(0.0, |x| x.1)
    }

    /// Outgoing rates of a state, keyed by target state.
    pub fn rates(&self, state: usize) -> &[(usize, f64)] {
        &self.rates[state]
    }

    pub fn total_rate(&self, state: usize) -> f64 {
        self.total_rate[state]
    }

    pub fn max_total_rate(&self) -> f64 {
        self.total_rate.iter().copied().fold(0.0, f64::max)
    }

    /// Jump rates out of tree vertex `v`, keyed by target vertex.
    pub fn jump_rates(&self, v: Vertex) -> Result<BTreeMap<Vertex, f64>> {
        let s = self.try_state(v)?;
        Ok(self.rates[s].iter().map(|&(w, r)| (self.vertex_of[w], r)).collect())
    }

    /// Law of the first positive-mass vertex reached from `v` (a point mass
    /// when `v` is itself a state). Zero-mass vertices are left in zero time,
    /// so this is the law of the walk at time 0+.
    pub fn entry_law(&self, v: Vertex) -> Result<Vec<(usize, f64)>> {
        self.tree.check_vertex(v)?;
        if let Some(s) = self.state(v) {
            return Ok(vec![(s, 1.0)]);
        }
        let t = &self.tree;
        // zero-mass component of v and its positive boundary
        let mut comp = vec![v];
        let mut index = BTreeMap::from([(v, 0usize)]);
        let mut boundary: Vec<Vertex> = Vec::new();
        let mut i = 0;
        while i < comp.len() {
            let u = comp[i];
            for w in t.neighbors(u) {
                if self.state(w).is_some() {
                    if !boundary.contains(&w) {
                        boundary.push(w);
                    }
                } else if let Entry::Vacant(e) = index.entry(w) {
                    e.insert(comp.len());
                    comp.push(w);
                }
            }
            i += 1;
        }
        boundary.sort_unstable();
        let k = comp.len();
        let mut a = SparseMatrix::new(k);
        for (i, &u) in comp.iter().enumerate() {
            for w in t.neighbors(u) {
                let c = 1.0 / t.distance(u, w);
                a.add(i, i, c);
                if let Some(&j) = index.get(&w) {
                    a.add(i, j, -c);
                }
            }
        }
        let mut law = Vec::with_capacity(boundary.len());
        for &b in &boundary {
            let rhs: Vec<f64> = comp
                .iter()
                .map(|&u| {
                    if t.neighbors(u).any(|w| w == b) {
                        1.0 / t.distance(u, b)
                    } else {
                        0.0
                    }
                })
                .collect();
            let h = a.solve(&rhs)?;
            law.push((self.state(b).unwrap(), h[0]));
        }
        Ok(law)
    }

    /// `(Ωf)(u) = Σ_v rate(u→v) (f(v) - f(u))`, with `f` indexed by state.
    pub fn generator_apply(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.state_count());
        (0..self.state_count())
            .map(|u| self.rates[u].iter().map(|&(v, r)| r * (f[v] - f[u])).sum())
            .collect()
    }

    /// `E(f, g) = ¼ Σ_u Σ_{v~u} c(u,v) (f(v)-f(u)) (g(v)-g(u))`, which equals
    /// `-Σ_u m(u) (Ωf)(u) g(u)`.
    pub fn dirichlet_energy(&self, f: &[f64], g: &[f64]) -> f64 {
        assert_eq!(f.len(), self.state_count());
        assert_eq!(g.len(), self.state_count());
        let mut e = 0.0;
        for u in 0..self.state_count() {
            for &(v, c) in &self.conductance[u] {
                e += c * (f[v] - f[u]) * (g[v] - g[u]);
            }
        }
        0.25 * e
    }

    /// `<f, g>_ν` over states.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.mass.iter().zip(f).zip(g).map(|((m, a), b)| m * a * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::RootedMetricTree;

    fn two_point(n: f64) -> WalkChain {
        let t = RootedMetricTree::path(&[1.0]).unwrap();
        WalkChain::new(&t, &SpeedMeasure::new(vec![1.0, 1.0 / n]).unwrap()).unwrap()
    }

    #[test]
    fn two_point_rates() {
        for n in [1.0, 3.0, 10.0, 1000.0] {
            let c = two_point(n);
            assert_eq!(c.jump_rates(0).unwrap()[&1], 0.5);
            assert!((c.jump_rates(1).unwrap()[&0] - n / 2.0).abs() <= 1e-12 * n);
        }
    }

    #[test]
    fn interior_path_vertex() {
        let t = RootedMetricTree::path(&[1.0, 1.0]).unwrap();
        let c = WalkChain::new(&t, &SpeedMeasure::uniform(3, 1.0)).unwrap();
        let r = c.jump_rates(1).unwrap();
        assert_eq!(r[&0], 0.5);
        assert_eq!(r[&2], 0.5);
    }

    #[test]
    fn star_mesh_on_y_tree() {
        let t = RootedMetricTree::new(vec![0, 0, 0, 0], vec![0.0, 1.0, 1.0, 1.0], 0).unwrap();
        let nu = SpeedMeasure::new(vec![0.0, 1.0, 1.0, 1.0]).unwrap();
        let c = WalkChain::new(&t, &nu).unwrap();
        assert_eq!(c.state_count(), 3);
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    assert!((c.conductance(a, b) - 1.0 / 3.0).abs() < 1e-15);
                }
            }
        }
        let law = c.entry_law(0).unwrap();
        assert_eq!(law.len(), 3);
        for (_, p) in law {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn generator_and_energy() {
        let n = 4.0;
        let c = two_point(n);
        assert_eq!(c.generator_apply(&[2.0, 2.0]), vec![0.0, 0.0]);
        let of = c.generator_apply(&[0.0, 1.0]);
        assert_eq!(of[0], 0.5);
        assert_eq!(of[1], -n / 2.0);
        let t = RootedMetricTree::path(&[1.0]).unwrap();
        let unit = WalkChain::new(&t, &SpeedMeasure::uniform(2, 1.0)).unwrap();
        let f = [0.0, 1.0];
        assert_eq!(unit.dirichlet_energy(&f, &f), 0.5);
        let of = unit.generator_apply(&f);
        assert!((unit.dirichlet_energy(&f, &f) + unit.inner(&of, &f)).abs() < 1e-15);
        assert_eq!(unit.dirichlet_energy(&[3.0, 3.0], &f), 0.0);
    }

    #[test]
    fn errors() {
        let t = RootedMetricTree::path(&[1.0, 1.0]).unwrap();
        assert!(matches!(
            WalkChain::new(&t, &SpeedMeasure::new_allow_zero(vec![0.0; 3]).unwrap()),
            Err(Error::AllZeroMeasure)
        ));
        let c = WalkChain::new(&t, &SpeedMeasure::new(vec![1.0, 0.0, 1.0]).unwrap()).unwrap();
        assert!(c.jump_rates(1).is_err());
        assert!(c.jump_rates(7).is_err());
        // eliminated middle vertex: series conductance 1/2
        assert!((c.conductance(0, 1) - 0.5).abs() < 1e-15);
    }
}
