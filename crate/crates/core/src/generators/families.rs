use crate::error::{Error, Result};
use crate::tree::{length_measure, RootedMetricTree, SpeedMeasure, Vertex};

pub const MAX_BINARY_DEPTH: usize = 20;

/// Complete binary tree of the given depth with unit edges, vertices in
/// heap order (children of `v` are `2v+1` and `2v+2`), and
/// `ν({x}) = e^{-h(x)}`.
pub fn binary_tree(depth: usize) -> Result<(RootedMetricTree, SpeedMeasure)> {
    if depth > MAX_BINARY_DEPTH {
        return Err(Error::InvalidArgument(format!(
            "binary tree depth {depth} exceeds {MAX_BINARY_DEPTH}"
        )));
    }
    let n = (1usize << (depth + 1)) - 1;
    let parent = (0..n).map(|v| if v == 0 { 0 } else { (v - 1) / 2 }).collect();
    let t = RootedMetricTree::new(parent, vec![1.0; n], 0)?;
    let nu = SpeedMeasure::new(t.vertices().map(|v| (-t.height(v)).exp()).collect())?;
    Ok((t, nu))
}

/// Stone's linear tree `{0} ∪ {±q^k : -K <= k <= K}` as two paths leaving
/// the root 0, with its length measure.
#[derive(Debug, Clone)]
pub struct StoneTree {
    pub tree: RootedMetricTree,
    pub measure: SpeedMeasure,
    /// Position on the real line of every vertex.
    pub coords: Vec<f64>,
}

impl StoneTree {
    /// Vertex at position `x`, if any (exact match).
    pub fn vertex_at(&self, x: f64) -> Option<Vertex> {
        self.coords.iter().position(|&c| c == x)
    }
}

pub fn stone_tq(q: f64, k: usize) -> Result<StoneTree> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidArgument(format!("q must exceed 1, got {q}")));
    }
    let k = k as i32;
    let levels: Vec<f64> = (-k..=k).map(|j| q.powi(j)).collect();
    let m = levels.len();
    // 0: root; 1..=m: positive side inward to outward; m+1..=2m: negative side
    let mut parent = vec![0; 2 * m + 1];
    let mut len = vec![0.0; 2 * m + 1];
    let mut coords = vec![0.0; 2 * m + 1];
    for side in 0..2 {
        let sign = if side == 0 { 1.0 } else { -1.0 };
        for (i, &x) in levels.iter().enumerate() {
            let v = 1 + side * m + i;
            coords[v] = sign * x;
            if i == 0 {
                parent[v] = 0;
                len[v] = x;
            } else {
                parent[v] = v - 1;
                len[v] = x - levels[i - 1];
            }
        }
    }
    let tree = RootedMetricTree::new(parent, len, 0)?;
    let measure = length_measure(&tree);
    Ok(StoneTree { tree, measure, coords })
}
