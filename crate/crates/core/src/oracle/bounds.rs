use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{epsilon_degree, RootedMetricTree, SpeedMeasure, Vertex};

/// The configuration behind the hitting bound: the open ball
/// `S = B(x, δ)`, its vertex `w` closest to the target and `R = r(w, v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitGeometry {
    pub ball: Vec<Vertex>,
    pub entry: Vertex,
    pub gap: f64,
    pub ball_mass: f64,
}

impl HitGeometry {
    pub fn new(t: &RootedMetricTree, nu: &SpeedMeasure, x: Vertex, v: Vertex, delta: f64) -> Result<Self> {
        nu.matches(t)?;
        let d = t.try_distance(x, v)?;
        if !(delta > 0.0 && delta < d) {
            return Err(Error::InvalidArgument(format!(
                "delta must lie in (0, r(x, v)) = (0, {d}), got {delta}"
            )));
        }
        let ball = t.open_ball(x, delta);
        let entry = *ball
            .iter()
            .min_by(|&&a, &&b| t.distance(a, v).total_cmp(&t.distance(b, v)).then(a.cmp(&b)))
            .expect("ball contains its centre");
        Ok(Self {
            gap: t.distance(entry, v),
            ball_mass: nu.measure_of(ball.iter().copied()),
            ball,
            entry,
        })
    }
}

/// Law of the time spent at `u` before `τ_v` when started from the entry
/// point `w`: an atom at 0 plus an exponential part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomLaw {
    /// `r_u / (R + r_u)`.
    pub atom_weight: f64,
    /// `2 (R + r_u) m_u`.
    pub exp_mean: f64,
    pub entry: Vertex,
    pub gap: f64,
}

impl AtomLaw {
    pub fn mean(&self) -> f64 {
        (1.0 - self.atom_weight) * self.exp_mean
    }
}

/// Occupation-atom law for `u` in the open ball `B(x, δ)` with target `v`.
pub fn atom_law(
    t: &RootedMetricTree,
    nu: &SpeedMeasure,
    x: Vertex,
    delta: f64,
    u: Vertex,
    v: Vertex,
) -> Result<AtomLaw> {
    let g = HitGeometry::new(t, nu, x, v, delta)?;
    t.check_vertex(u)?;
    if !g.ball.contains(&u) {
        return Err(Error::InvalidArgument(format!(
            "vertex {u} is not in the ball B({x}, {delta})"
        )));
    }
    let r_u = t.distance(g.entry, u);
    Ok(AtomLaw {
        atom_weight: r_u / (g.gap + r_u),
        exp_mean: 2.0 * (g.gap + r_u) * nu.mass(u),
        entry: g.entry,
        gap: g.gap,
    })
}

/// Upper bound `2 (1 - R/(R+2δ) exp(-t / (R ν(S))))` on `P^x{τ_v <= t}`.
pub fn hit_bound(t: &RootedMetricTree, nu: &SpeedMeasure, x: Vertex, v: Vertex, delta: f64, time: f64) -> Result<f64> {
    if !(time >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be nonnegative, got {time}")));
    }
    let g = HitGeometry::new(t, nu, x, v, delta)?;
    if g.ball_mass == 0.0 {
        return Ok(2.0);
    }
    let r = g.gap;
    Ok(2.0 * (1.0 - r / (r + 2.0 * delta) * (-time / (r * g.ball_mass)).exp()))
}

/// Upper bound on `P^x{sup_{s<=t} r(X_s, x) > 2ε}`:
/// `2 deg_ε(x) (1 - (ε-δ)/(ε+δ) exp(-t / (ε m)))` with `m = ν(B(x, δ))`.
/// `None` outside the range `t < (ε - δ) m` where it is stated.
pub fn speed_bound(
    t: &RootedMetricTree,
    nu: &SpeedMeasure,
    x: Vertex,
    eps: f64,
    delta: f64,
    time: f64,
) -> Result<Option<f64>> {
    nu.matches(t)?;
    t.check_vertex(x)?;
    if !(delta > 0.0 && delta < eps) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < delta < eps, got delta={delta}, eps={eps}"
        )));
    }
    if !(time >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be nonnegative, got {time}")));
    }
    let m = nu.measure_of(t.open_ball(x, delta));
    if time >= (eps - delta) * m {
        return Ok(None);
    }
    let deg = epsilon_degree(t, x, eps) as f64;
    Ok(Some(
        2.0 * deg * (1.0 - (eps - delta) / (eps + delta) * (-time / (eps * m)).exp()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn path3() -> (RootedMetricTree, SpeedMeasure) {
        // 0 - 1 - 2 - 3, unit edges
        let t = RootedMetricTree::path(&[1.0, 1.0, 1.0]).unwrap();
        (t, SpeedMeasure::uniform(4, 1.0))
    }

    #[test]
    fn atom_law_formula() {
        let (t, nu) = path3();
        // S = B(1, 1.5) = {0, 1, 2}, target 3: w = 2, R = 1
        let at_w = atom_law(&t, &nu, 1, 1.5, 2, 3).unwrap();
        assert_eq!(at_w.entry, 2);
        assert_eq!(at_w.atom_weight, 0.0);
        assert_eq!(at_w.exp_mean, 2.0);
        let far = atom_law(&t, &nu, 1, 1.5, 1, 3).unwrap();
        assert_relative_eq!(far.atom_weight, 0.5);
        assert_relative_eq!(far.exp_mean, 4.0);
        assert!(atom_law(&t, &nu, 1, 1.5, 3, 3).is_err());
        assert!(atom_law(&t, &nu, 1, 2.5, 1, 3).is_err());
    }

    #[test]
    fn hit_bound_limits() {
        let (t, nu) = path3();
        let b0 = hit_bound(&t, &nu, 0, 3, 0.5, 0.0).unwrap();
        // S = {0}, R = 3
        assert_relative_eq!(b0, 2.0 * (1.0 - 3.0 / 4.0));
        assert_relative_eq!(hit_bound(&t, &nu, 0, 3, 0.5, 1e9).unwrap(), 2.0);
        let mut prev = b0;
        for k in 1..20 {
            let b = hit_bound(&t, &nu, 0, 3, 0.5, k as f64).unwrap();
            assert!(b >= prev);
            prev = b;
        }
        assert!(hit_bound(&t, &nu, 0, 3, 3.0, 1.0).is_err());
    }

    #[test]
    fn speed_bound_cases() {
        let (t, nu) = path3();
        // deg_eps(0) with eps = 1: v = 1 leads beyond distance 2
        let b = speed_bound(&t, &nu, 0, 1.0, 0.5, 0.0).unwrap().unwrap();
        assert_relative_eq!(b, 2.0 * (1.0 - 0.5 / 1.5));
        assert_eq!(speed_bound(&t, &nu, 0, 1.0, 0.5, 0.5).unwrap(), None);
        // nothing lies beyond 2 eps
        let far = speed_bound(&t, &nu, 0, 2.0, 0.5, 0.1).unwrap().unwrap();
        assert_eq!(far, 0.0);
        assert!(speed_bound(&t, &nu, 0, 1.0, 1.0, 0.1).is_err());
    }
}
