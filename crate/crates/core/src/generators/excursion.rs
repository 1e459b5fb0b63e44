use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::tree::{RootedMetricTree, SpeedMeasure, Vertex};

/// Heights sampled at equally spaced abscissae. A one-sided excursion
/// starts and ends at 0; a two-sided one has an odd number of samples with
/// the middle one (abscissa 0) equal to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Excursion {
    pub samples: Vec<f64>,
    pub step: f64,
    pub two_sided: bool,
}

impl Excursion {
    pub fn one_sided(samples: Vec<f64>, step: f64) -> Result<Self> {
        let e = Self {
            samples,
            step,
            two_sided: false,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn two_sided(samples: Vec<f64>, step: f64) -> Result<Self> {
        let e = Self {
            samples,
            step,
            two_sided: true,
        };
        e.validate()?;
        Ok(e)
    }

    /// Index of abscissa 0.
    pub fn origin(&self) -> usize {
        if self.two_sided {
            self.samples.len() / 2
        } else {
            0
        }
    }

    pub fn abscissa(&self, i: usize) -> f64 {
        (i as f64 - self.origin() as f64) * self.step
    }

    fn tolerance(&self) -> f64 {
        1e-12 * self.samples.iter().copied().fold(1.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(format!("malformed excursion: {m}")));
        if self.samples.is_empty() {
            return bad("no samples");
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad("step must be positive");
        }
        if self.samples.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return bad("samples must be finite and nonnegative");
        }
        if self.two_sided {
            if self.samples.len().is_multiple_of(2) {
                return bad("two-sided excursions need an odd number of samples");
            }
            if self.samples[self.origin()] != 0.0 {
                return bad("sample at abscissa 0 must be 0");
            }
        } else if self.samples[0] != 0.0 || *self.samples.last().unwrap() != 0.0 {
            return bad("first and last samples must be 0");
        }
        Ok(())
    }

    /// `r_e(i, j)` for one `i` and every `j`, by running minima.
    pub fn distance_row(&self, i: usize) -> Vec<f64> {
        let e = &self.samples;
        let n = e.len();
        let mut row = vec![0.0; n];
        let mut m = e[i];
        for j in i..n {
            m = m.min(e[j]);
            row[j] = e[i] + e[j] - 2.0 * m;
        }
        m = e[i];
        for j in (0..i).rev() {
            m = m.min(e[j]);
            row[j] = e[i] + e[j] - 2.0 * m;
        }
        if self.two_sided {
            // pairs on opposite sides of 0 take the infimum outside [x, y]
            let z = self.origin();
            let mut prefix = vec![0.0; n];
            let mut suffix = vec![0.0; n];
            let mut acc = f64::INFINITY;
            for k in 0..n {
                acc = acc.min(e[k]);
                prefix[k] = acc;
            }
            acc = f64::INFINITY;
            for k in (0..n).rev() {
                acc = acc.min(e[k]);
                suffix[k] = acc;
            }
            let across: Box<dyn Iterator<Item = usize>> = if i < z {
                Box::new(z + 1..n)
            } else if i > z {
                Box::new(0..z)
            } else {
                Box::new(std::iter::empty())
            };
            for j in across {
                let (a, b) = (i.min(j), i.max(j));
                row[j] = e[i] + e[j] - 2.0 * prefix[a].min(suffix[b]);
            }
        }
        row
    }
}

/// The glued tree with the map from sample index to vertex.
#[derive(Debug, Clone)]
pub struct GluedTree {
    pub tree: RootedMetricTree,
    /// Pushforward of mass `step` per sample.
    pub measure: SpeedMeasure,
    pub vertex_of_sample: Vec<Vertex>,
}

/// Quotient of the sample abscissae by `r_e = 0`, with the induced metric.
/// Each class hangs from its highest strict ancestor `u`, the class with
/// `e(u) + r_e(u, v) = e(v)` of largest height.
pub fn glue_excursion(e: &Excursion) -> Result<GluedTree> {
    e.validate()?;
    let n = e.samples.len();
    let tol = e.tolerance();
    let mut class = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for i in 0..n {
        if class[i] != usize::MAX {
            continue;
        }
        let c = reps.len();
        reps.push(i);
        for (j, d) in e.distance_row(i).into_iter().enumerate() {
            if d <= tol {
                class[j] = c;
            }
        }
    }
    let k = reps.len();
    let root = class[e.origin()];
    let h = |c: usize| e.samples[reps[c]];
    let mut parent = vec![0; k];
    let mut len = vec![0.0; k];
    for c in 0..k {
        if c == root {
            parent[c] = c;
            continue;
        }
        let row = e.distance_row(reps[c]);
        let mut best: Option<usize> = None;
        for (j, &d) in row.iter().enumerate() {
            let u = class[j];
            if h(u) < h(c) - tol && (h(u) + d - h(c)).abs() <= tol && best.is_none_or(|b| h(u) > h(b)) {
                best = Some(u);
            }
        }
        let p = best.ok_or_else(|| {
            Error::InvalidArgument(format!("malformed excursion: sample {} has no ancestor", reps[c]))
        })?;
        parent[c] = p;
        len[c] = h(c) - h(p);
    }
    let tree = RootedMetricTree::new(parent, len, root)?;
    let mut mass = vec![0.0; k];
    for &c in &class {
        mass[c] += e.step;
    }
    Ok(GluedTree {
        tree,
        measure: SpeedMeasure::new(mass)?,
        vertex_of_sample: class,
    })
}

/// `W̃_t = W_t - 2 inf_{s<=t} W_s` for a walk started at `W_0 = 0`.
pub fn reflect_walk(w: &[f64]) -> Vec<f64> {
    let mut inf = f64::INFINITY;
    w.iter()
        .map(|&x| {
            inf = inf.min(x);
            x - 2.0 * inf
        })
        .collect()
}

/// A two-sided reflected-walk excursion and its rescaled glued tree.
#[derive(Debug, Clone)]
pub struct KestenSample {
    /// Lattice excursion (integer heights, unit step).
    pub excursion: Excursion,
    /// Glued tree with edges scaled by `n^{-1/3}`.
    pub tree: RootedMetricTree,
    /// `n^{-2/3} Σ ½ deg(v)`.
    pub measure: SpeedMeasure,
    pub vertex_of_sample: Vec<Vertex>,
}

/// Two independent simple random walks of `ceil(n^{2/3} horizon)` steps,
/// reflected and placed on either side of 0, glued on the lattice and then
/// rescaled to `e_n = n^{-1/3} e(n^{2/3} ·)`.
pub fn kesten_excursion(n: u64, horizon: f64, seed: u64) -> Result<KestenSample> {
    if n == 0 || !(horizon > 0.0) {
        return Err(Error::InvalidArgument("need n >= 1 and a positive horizon".into()));
    }
    let nf = n as f64;
    let steps = (nf.powf(2.0 / 3.0) * horizon).ceil() as usize;
    let mut r = rng::stream(seed);
    let mut side = || {
        let mut w = vec![0.0];
        for _ in 0..steps {
            let s = if r.random::<bool>() { 1.0 } else { -1.0 };
            w.push(w.last().unwrap() + s);
        }
        reflect_walk(&w)
    };
    let right = side();
    let left = side();
    let mut samples: Vec<f64> = left.iter().rev().copied().collect();
    samples.extend_from_slice(&right[1..]);
    let excursion = Excursion::two_sided(samples, 1.0)?;
    let glued = glue_excursion(&excursion)?;
    let scale = nf.powf(-1.0 / 3.0);
    let t = &glued.tree;
    let lengths: Vec<f64> = t.edge_lengths().iter().map(|l| l * scale).collect();
    let tree = RootedMetricTree::new(t.parents().to_vec(), lengths, t.root())?;
    let w = nf.powf(-2.0 / 3.0);
    let measure = SpeedMeasure::new(tree.vertices().map(|v| w * 0.5 * tree.degree(v) as f64).collect())?;
    Ok(KestenSample {
        excursion,
        tree,
        measure,
        vertex_of_sample: glued.vertex_of_sample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::check_four_point;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn flat_excursion_is_a_point() {
        let g = glue_excursion(&Excursion::one_sided(vec![0.0; 3], 0.25).unwrap()).unwrap();
        assert_eq!(g.tree.vertex_count(), 1);
        assert_eq!(g.measure.masses(), &[0.75]);
    }

    #[test]
    fn tent() {
        let g = glue_excursion(&Excursion::one_sided(vec![0.0, 0.5, 0.0], 0.5).unwrap()).unwrap();
        assert_eq!(g.tree.vertex_count(), 2);
        let (a, b) = (g.vertex_of_sample[0], g.vertex_of_sample[1]);
        assert_eq!(g.vertex_of_sample[2], a);
        assert_relative_eq!(g.tree.distance(a, b), 0.5);
        assert_eq!(g.measure.mass(a), 1.0);
        assert_eq!(g.measure.mass(b), 0.5);
    }

    #[test]
    fn parent_may_sit_to_the_right() {
        let g = glue_excursion(&Excursion::one_sided(vec![0.0, 5.0, 2.0, 0.0], 1.0).unwrap()).unwrap();
        let v = &g.vertex_of_sample;
        assert_eq!(g.tree.parent(v[1]), v[2]);
        assert_relative_eq!(g.tree.distance(v[1], v[2]), 3.0);
    }

    #[test]
    fn reflection() {
        assert_eq!(reflect_walk(&[0.0, -1.0]), vec![0.0, 1.0]);
        assert_eq!(reflect_walk(&[0.0, 1.0, 0.0, -1.0, 0.0]), vec![0.0, 1.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn two_sided_crossing_distance() {
        // abscissae -2..2: e = (3, 1, 0, 2, 4)
        let e = Excursion::two_sided(vec![3.0, 1.0, 0.0, 2.0, 4.0], 1.0).unwrap();
        let row = e.distance_row(1);
        // x = -1, y = 1: the infimum off (-1, 1) is min(3, 1, 2, 4) = 1
        assert_eq!(row[3], 1.0 + 2.0 - 2.0 * 1.0f64.min(2.0));
        let g = glue_excursion(&e).unwrap();
        for i in 0..5 {
            let ri = e.distance_row(i);
            for (j, &rij) in ri.iter().enumerate() {
                let d = g.tree.distance(g.vertex_of_sample[i], g.vertex_of_sample[j]);
                assert_relative_eq!(d, rij, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn kesten_measure_and_scaling() {
        let k = kesten_excursion(1000, 2.0, 9).unwrap();
        assert!(k.excursion.samples.iter().all(|&x| x >= 0.0));
        let total: f64 = k.measure.total();
        // half-degree sum is the edge count
        let edges = (k.tree.vertex_count() - 1) as f64;
        assert_relative_eq!(total, edges * 1000f64.powf(-2.0 / 3.0), epsilon = 1e-12);
        for (v, _, l) in k.tree.edges() {
            assert!(v != k.tree.root());
            assert_relative_eq!(l, 0.1, epsilon = 1e-12);
        }
    }

    fn lattice_excursion() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(any::<bool>(), 1..24).prop_map(|steps| {
            let mut w = vec![0.0];
            for s in steps {
                let x: f64 = *w.last().unwrap();
                w.push(if s || x == 0.0 { x + 1.0 } else { x - 1.0 });
            }
            let mut x = *w.last().unwrap();
            while x > 0.0 {
                x -= 1.0;
                w.push(x);
            }
            w
        })
    }

    proptest! {
        #[test]
        fn glued_metric_matches_raw(samples in lattice_excursion(), step in 0.01f64..2.0) {
            let e = Excursion::one_sided(samples, step).unwrap();
            let g = glue_excursion(&e).unwrap();
            prop_assert!(check_four_point(&g.tree).passed());
            for i in 0..e.samples.len() {
                let row = e.distance_row(i);
                for (j, r) in row.iter().enumerate() {
                    let d = g.tree.distance(g.vertex_of_sample[i], g.vertex_of_sample[j]);
                    prop_assert!((d - r).abs() <= 1e-10);
                }
            }
        }

        #[test]
        fn real_valued_excursions_glue(inner in prop::collection::vec(0.0f64..3.0, 0..12)) {
            let mut samples = vec![0.0];
            samples.extend(inner);
            samples.push(0.0);
            let e = Excursion::one_sided(samples, 0.1).unwrap();
            let g = glue_excursion(&e).unwrap();
            prop_assert!(check_four_point(&g.tree).passed());
            for i in 0..e.samples.len() {
                for (j, r) in e.distance_row(i).iter().enumerate() {
                    let d = g.tree.distance(g.vertex_of_sample[i], g.vertex_of_sample[j]);
                    prop_assert!((d - r).abs() <= 1e-10);
                }
            }
        }
    }
}
