use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{RootedMetricTree, SpeedMeasure, Vertex, GEOM_TOL};
use crate::error::Result;
use crate::rng;

/// Below this many points every quadruple is checked.
pub const EXHAUSTIVE_FOUR_POINT_LIMIT: usize = 30;
/// Number of random quadruples checked above the exhaustive limit.
pub const SAMPLED_QUADRUPLES: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct FourPointReport {
    pub checked: usize,
    pub exhaustive: bool,
    pub violation: Option<[usize; 4]>,
}

impl FourPointReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

fn four_point_holds(d: &impl Fn(usize, usize) -> f64, q: [usize; 4]) -> bool {
    let [a, b, c, e] = q;
    let s1 = d(a, b) + d(c, e);
    let s2 = d(a, c) + d(b, e);
    let s3 = d(a, e) + d(b, c);
    s1 <= s2.max(s3) + GEOM_TOL && s2 <= s1.max(s3) + GEOM_TOL && s3 <= s1.max(s2) + GEOM_TOL
}

/// Four-point check on an arbitrary finite metric given by `d`.
pub fn check_four_point_with(n: usize, d: impl Fn(usize, usize) -> f64, seed: u64) -> FourPointReport {
    if n <= EXHAUSTIVE_FOUR_POINT_LIMIT {
        let mut checked = 0;
        for a in 0..n {
            for b in a..n {
                for c in b..n {
                    for e in c..n {
                        checked += 1;
                        if !four_point_holds(&d, [a, b, c, e]) {
                            return FourPointReport {
                                checked,
                                exhaustive: true,
                                violation: Some([a, b, c, e]),
                            };
                        }
                    }
                }
            }
        }
        FourPointReport {
            checked,
            exhaustive: true,
            violation: None,
        }
    } else {
        let mut rng = rng::stream(seed);
        for k in 0..SAMPLED_QUADRUPLES {
            let q = [
                rng.random_range(0..n),
                rng.random_range(0..n),
                rng.random_range(0..n),
                rng.random_range(0..n),
            ];
            if !four_point_holds(&d, q) {
                return FourPointReport {
                    checked: k + 1,
                    exhaustive: false,
                    violation: Some(q),
                };
            }
        }
        FourPointReport {
            checked: SAMPLED_QUADRUPLES,
            exhaustive: false,
            violation: None,
        }
    }
}

pub fn check_four_point(t: &RootedMetricTree) -> FourPointReport {
    check_four_point_with(t.vertex_count(), |x, y| t.distance(x, y), 0x4f50_4f49_4e54)
}

/// Atom at each non-root vertex equal to the length of the edge towards
/// the root; zero at the root.
pub fn length_measure(t: &RootedMetricTree) -> SpeedMeasure {
    SpeedMeasure::new_allow_zero(t.edge_lengths().to_vec()).expect("edge lengths are finite")
}

/// Number of vertices `v` outside the open ball `B(x, eps)` adjacent to a
/// vertex `u` inside it such that `v` lies on `[u, w]` for some `w` outside
/// `B(x, 2 eps)`.
pub fn epsilon_degree(t: &RootedMetricTree, x: Vertex, eps: f64) -> usize {
    let inside = |v: Vertex| t.distance(x, v) < eps;
    let mut count = 0;
    for v in t.vertices() {
        if inside(v) {
            continue;
        }
        let escapes = t.neighbors(v).filter(|&u| inside(u)).any(|u| {
            // the side of edge (u, v) that contains v
            let side: Box<dyn Iterator<Item = Vertex>> = if t.parent(v) == u && v != t.root() {
                Box::new(t.subtree(v).iter().copied())
            } else {
                let below = u;
                Box::new(t.vertices().filter(move |&w| !t.is_ancestor(below, w)))
            };
            side.into_iter().any(|w| t.distance(x, w) >= 2.0 * eps)
        });
        if escapes {
            count += 1;
        }
    }
    count
}

/// `deg_eps(T)`, the maximum of [`epsilon_degree`] over all vertices.
pub fn max_epsilon_degree(t: &RootedMetricTree, eps: f64) -> usize {
    t.vertices().map(|x| epsilon_degree(t, x, eps)).max().unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassBoundReport {
    pub delta: f64,
    pub radius: Option<f64>,
    /// `f64::INFINITY` when no vertex lies in the open root ball.
    pub value: f64,
}

/// Infimum of `ν(B̄(x, δ))` over all vertices, or over those with
/// `r(ρ, x) < R` when a radius is given.
pub fn lower_mass(t: &RootedMetricTree, nu: &SpeedMeasure, delta: f64, radius: Option<f64>) -> Result<MassBoundReport> {
    nu.matches(t)?;
    if !(delta > 0.0) {
        return Err(crate::Error::InvalidArgument(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let value = t
        .vertices()
        .filter(|&x| radius.is_none_or(|r| t.height(x) < r))
        .map(|x| {
            t.vertices()
                .filter(|&y| t.distance(x, y) <= delta)
                .map(|y| nu.mass(y))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    Ok(MassBoundReport { delta, radius, value })
}
