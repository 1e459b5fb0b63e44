//! Finite rooted metric trees and speed measures.
//!
//! A tree is stored through its parent map and edge lengths. Heights and a
//! binary-lifting ancestor table are derived once at construction, so that
//! `r(x, y) = h(x) + h(y) - 2 h(lca(x, y))` is available without storing a
//! distance matrix.

mod discretize;
mod geometry;
mod io;

pub use discretize::{branch_closure, epsilon_net, induced_subtree, project_psi, restrict, Projection};
pub use geometry::{
    check_four_point, check_four_point_with, epsilon_degree, length_measure, lower_mass, max_epsilon_degree,
    FourPointReport, MassBoundReport, EXHAUSTIVE_FOUR_POINT_LIMIT, SAMPLED_QUADRUPLES,
};
pub use io::{read_tree, write_tree, TreeFile};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = usize;

/// Absolute slack for geometric identities on length scales of order one.
pub const GEOM_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct RootedMetricTree {
    root: Vertex,
    parent: Vec<Vertex>,
    edge_length: Vec<f64>,
    height: Vec<f64>,
    depth: Vec<usize>,
    children: Vec<Vec<Vertex>>,
    // preorder position and subtree size, for O(1) ancestor tests
    pre: Vec<usize>,
    size: Vec<usize>,
    preorder: Vec<Vertex>,
    // up[k][v] = 2^k-th ancestor of v
    up: Vec<Vec<Vertex>>,
}

impl RootedMetricTree {
    /// Builds a tree from a parent map (`parent[root] == root`) and the
    /// length of the edge from each vertex to its parent. `edge_length[root]`
    /// is ignored.
    pub fn new(parent: Vec<Vertex>, edge_length: Vec<f64>, root: Vertex) -> Result<Self> {
        let n = parent.len();
        if n == 0 {
            return Err(Error::InvalidArgument("tree needs at least one vertex".into()));
        }
        if edge_length.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{} parents but {} edge lengths",
                n,
                edge_length.len()
            )));
        }
        if root >= n {
            return Err(Error::UnknownVertex(root));
        }
        if parent[root] != root {
            return Err(Error::InvalidArgument(format!("root {root} must be its own parent")));
        }
        let mut children = vec![Vec::new(); n];
        for v in 0..n {
            if v == root {
                continue;
            }
            let p = parent[v];
            if p >= n {
                return Err(Error::DanglingVertex(v));
            }
            if p == v {
                return Err(Error::Cycle(v));
            }
            let l = edge_length[v];
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::NonPositiveLength { vertex: v, length: l });
            }
            children[p].push(v);
        }
        let mut edge_length = edge_length;
        edge_length[root] = 0.0;

        let mut height = vec![0.0; n];
        let mut depth = vec![0usize; n];
        let mut pre = vec![usize::MAX; n];
        let mut size = vec![1usize; n];
        let mut preorder = Vec::with_capacity(n);
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            pre[v] = preorder.len();
            preorder.push(v);
            for &c in children[v].iter().rev() {
                height[c] = height[v] + edge_length[c];
                depth[c] = depth[v] + 1;
                stack.push(c);
            }
        }
        if preorder.len() != n {
            let stray = (0..n).find(|&v| pre[v] == usize::MAX).unwrap();
            return Err(Error::Cycle(stray));
        }
        for &v in preorder.iter().rev() {
            if v != root {
                size[parent[v]] += size[v];
            }
        }
        let levels = (usize::BITS - n.leading_zeros()).max(1) as usize;
        let mut up = vec![parent.clone()];
        for k in 1..levels {
            let prev = &up[k - 1];
            let next: Vec<Vertex> = (0..n).map(|v| prev[prev[v]]).collect();
            up.push(next);
        }
        Ok(Self {
            root,
            parent,
            edge_length,
            height,
            depth,
            children,
            pre,
            size,
            preorder,
            up,
        })
    }

    pub fn single() -> Self {
        Self::new(vec![0], vec![0.0], 0).expect("single vertex tree")
    }

    /// Path `0 - 1 - ... - k` rooted at 0 with the given edge lengths.
    pub fn path(lengths: &[f64]) -> Result<Self> {
        let n = lengths.len() + 1;
        let parent = (0..n).map(|v| v.saturating_sub(1)).collect();
        let mut len = vec![0.0];
        len.extend_from_slice(lengths);
        Self::new(parent, len, 0)
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    pub fn vertices(&self) -> std::ops::Range<Vertex> {
        0..self.vertex_count()
    }

    pub fn root(&self) -> Vertex {
        self.root
    }

    pub fn parent(&self, v: Vertex) -> Vertex {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Vertex] {
        &self.parent
    }

    pub fn edge_length(&self, v: Vertex) -> f64 {
        self.edge_length[v]
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_length
    }

    pub fn height(&self, v: Vertex) -> f64 {
        self.height[v]
    }

    pub fn heights(&self) -> &[f64] {
        &self.height
    }

    pub fn depth(&self, v: Vertex) -> usize {
        self.depth[v]
    }

    pub fn children(&self, v: Vertex) -> &[Vertex] {
        &self.children[v]
    }

    /// Root-first depth-first order.
    pub fn preorder(&self) -> &[Vertex] {
        &self.preorder
    }

    pub fn preorder_index(&self, v: Vertex) -> usize {
        self.pre[v]
    }

    pub fn subtree_size(&self, v: Vertex) -> usize {
        self.size[v]
    }

    pub fn is_root(&self, v: Vertex) -> bool {
        v == self.root
    }

    /// Graph degree (number of tree neighbours).
    pub fn degree(&self, v: Vertex) -> usize {
        self.children[v].len() + usize::from(v != self.root)
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        let up = (v != self.root).then_some(self.parent[v]);
        up.into_iter().chain(self.children[v].iter().copied())
    }

    /// Undirected edges as `(child, parent, length)`.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex, f64)> + '_ {
        self.vertices()
            .filter(move |&v| v != self.root)
            .map(move |v| (v, self.parent[v], self.edge_length[v]))
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    /// `a` lies on `[root, x]` (every vertex is its own ancestor).
    pub fn is_ancestor(&self, a: Vertex, x: Vertex) -> bool {
        self.pre[a] <= self.pre[x] && self.pre[x] < self.pre[a] + self.size[a]
    }

    pub fn lca(&self, x: Vertex, y: Vertex) -> Vertex {
        if self.is_ancestor(x, y) {
            return x;
        }
        if self.is_ancestor(y, x) {
            return y;
        }
        let mut x = x;
        for k in (0..self.up.len()).rev() {
            let a = self.up[k][x];
            if !self.is_ancestor(a, y) {
                x = a;
            }
        }
        self.parent[x]
    }

    pub fn distance(&self, x: Vertex, y: Vertex) -> f64 {
        let c = self.lca(x, y);
        self.height[x] + self.height[y] - 2.0 * self.height[c]
    }

    pub fn try_distance(&self, x: Vertex, y: Vertex) -> Result<f64> {
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        Ok(self.distance(x, y))
    }

    /// The median `c(x, y, z)`: the deepest of the three pairwise LCAs.
    pub fn branch_point(&self, x: Vertex, y: Vertex, z: Vertex) -> Vertex {
        let a = self.lca(x, y);
        let b = self.lca(y, z);
        let c = self.lca(x, z);
        let mut best = a;
        for v in [b, c] {
            if self.depth[v] > self.depth[best] {
                best = v;
            }
        }
        best
    }

    pub fn try_branch_point(&self, x: Vertex, y: Vertex, z: Vertex) -> Result<Vertex> {
        for v in [x, y, z] {
            self.check_vertex(v)?;
        }
        Ok(self.branch_point(x, y, z))
    }

    /// `x` lies on the segment `[a, b]` up to [`GEOM_TOL`].
    pub fn on_segment(&self, a: Vertex, b: Vertex, x: Vertex) -> bool {
        (self.distance(a, x) + self.distance(x, b) - self.distance(a, b)).abs() <= GEOM_TOL
    }

    /// Vertices on the geodesic `[x, y]`, from `x` to `y`.
    pub fn geodesic(&self, x: Vertex, y: Vertex) -> Vec<Vertex> {
        let c = self.lca(x, y);
        let mut left = vec![];
        let mut v = x;
        while v != c {
            left.push(v);
            v = self.parent[v];
        }
        left.push(c);
        let mut right = vec![];
        let mut v = y;
        while v != c {
            right.push(v);
            v = self.parent[v];
        }
        left.extend(right.into_iter().rev());
        left
    }

    pub fn diameter(&self) -> f64 {
        // two sweeps: farthest from root, then farthest from that vertex
        let far = |from: Vertex| {
            self.vertices()
                .map(|v| (self.distance(from, v), v))
                .fold((0.0, from), |a, b| if b.0 > a.0 { b } else { a })
        };
        let (_, a) = far(self.root);
        far(a).0
    }

    pub fn max_height(&self) -> f64 {
        self.height.iter().copied().fold(0.0, f64::max)
    }

    /// Vertices of the subtree rooted at `v` (preorder slice).
    pub fn subtree(&self, v: Vertex) -> &[Vertex] {
        &self.preorder[self.pre[v]..self.pre[v] + self.size[v]]
    }

    /// Vertices within closed distance `radius` of `x`.
    pub fn closed_ball(&self, x: Vertex, radius: f64) -> Vec<Vertex> {
        self.vertices().filter(|&v| self.distance(x, v) <= radius).collect()
    }

    /// Vertices within open distance `radius` of `x`.
    pub fn open_ball(&self, x: Vertex, radius: f64) -> Vec<Vertex> {
        self.vertices().filter(|&v| self.distance(x, v) < radius).collect()
    }
}

/// Nonnegative atom masses on the vertices of a tree (the measure ν).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedMeasure {
    mass: Vec<f64>,
}

impl SpeedMeasure {
    /// Validates finiteness, nonnegativity and a positive atom.
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        let m = Self::new_allow_zero(mass)?;
        if m.total() <= 0.0 {
            return Err(Error::AllZeroMeasure);
        }
        Ok(m)
    }

    /// Like [`SpeedMeasure::new`] but accepts the zero measure, which shows up
    /// as an intermediate (length measure of a single vertex, empty
    /// restrictions).
    pub fn new_allow_zero(mass: Vec<f64>) -> Result<Self> {
        for (v, &m) in mass.iter().enumerate() {
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::InvalidMeasure(format!("mass {m} at vertex {v}")));
            }
        }
        Ok(Self { mass })
    }

    pub fn uniform(n: usize, value: f64) -> Self {
        Self { mass: vec![value; n] }
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mass(&self, v: Vertex) -> f64 {
        self.mass[v]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn measure_of<I: IntoIterator<Item = Vertex>>(&self, set: I) -> f64 {
        set.into_iter().map(|v| self.mass[v]).sum()
    }

    pub fn support(&self) -> Vec<Vertex> {
        (0..self.mass.len()).filter(|&v| self.mass[v] > 0.0).collect()
    }

    pub fn matches(&self, tree: &RootedMetricTree) -> Result<()> {
        if self.mass.len() == tree.vertex_count() {
            Ok(())
        } else {
            Err(Error::InvalidMeasure(format!(
                "{} atoms for a tree with {} vertices",
                self.mass.len(),
                tree.vertex_count()
            )))
        }
    }
}
