use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::WalkChain;
use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::tree::Vertex;

/// Maximum number of jumps recorded per trajectory.
pub const JUMP_CAP: usize = 10_000_000;

/// When to end a trajectory. Any combination may be set; the first rule to
/// fire ends the path. Zero-mass vertices are never visited by the reduced
/// chain, so targets must be states; the radius rule fires on the first
/// state at height `>= R`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct StopRule {
    pub horizon: Option<f64>,
    pub targets: Vec<Vertex>,
    pub radius: Option<f64>,
}

impl StopRule {
    pub fn horizon(t: f64) -> Self {
        Self {
            horizon: Some(t),
            ..Self::default()
        }
    }

    pub fn hitting<I: IntoIterator<Item = Vertex>>(targets: I) -> Self {
        Self {
            targets: targets.into_iter().collect(),
            ..Self::default()
        }
    }

    pub fn radius(r: f64) -> Self {
        Self {
            radius: Some(r),
            ..Self::default()
        }
    }

    pub fn with_horizon(mut self, t: f64) -> Self {
        self.horizon = Some(t);
        self
    }

    pub fn with_targets<I: IntoIterator<Item = Vertex>>(mut self, targets: I) -> Self {
        self.targets.extend(targets);
        self
    }

    pub fn with_radius(mut self, r: f64) -> Self {
        self.radius = Some(r);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StopReason {
    Horizon,
    Hit(Vertex),
    /// Reached the truncation boundary `r(ρ, ·) >= R` (absorbed in the
    /// sentinel state).
    Boundary(Vertex),
}

/// A càdlàg trajectory: the walk sits in `states[k]` on
/// `[times[k], times[k+1])`, and the last state until `end_time`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkPath {
    pub times: Vec<f64>,
    pub states: Vec<Vertex>,
    pub end_time: f64,
    pub stop: StopReason,
}

impl WalkPath {
    pub fn start(&self) -> Vertex {
        self.states[0]
    }

    pub fn jump_count(&self) -> usize {
        self.states.len() - 1
    }

    pub fn endpoint(&self) -> Vertex {
        *self.states.last().unwrap()
    }

    pub fn hitting_time(&self) -> Option<f64> {
        match self.stop {
            StopReason::Hit(_) => Some(self.end_time),
            _ => None,
        }
    }

    pub fn absorbed_at(&self) -> Option<(f64, Vertex)> {
        match self.stop {
            StopReason::Boundary(v) => Some((self.end_time, v)),
            _ => None,
        }
    }

    /// Position at time `t <= end_time`; after absorption the walk stays in
    /// the absorbing vertex.
    pub fn state_at(&self, t: f64) -> Vertex {
        let k = self.times.partition_point(|&s| s <= t);
        self.states[k.saturating_sub(1)]
    }

    /// Holding times of completed visits, as `(state, duration)`.
    pub fn holding_times(&self) -> impl Iterator<Item = (Vertex, f64)> + '_ {
        self.times.windows(2).zip(&self.states).map(|(w, &s)| (s, w[1] - w[0]))
    }
}

fn pick_start(chain: &WalkChain, start: Vertex, rng: &mut StreamRng) -> Result<usize> {
    if let Some(s) = chain.state(start) {
        return Ok(s);
    }
    let law = chain.entry_law(start)?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(s, p) in &law {
        acc += p;
        if u < acc {
            return Ok(s);
        }
    }
    Ok(law.last().unwrap().0)
}

/// Simulates with the stream seeded by `seed`.
pub fn simulate(chain: &WalkChain, start: Vertex, stop: &StopRule, seed: u64) -> Result<WalkPath> {
    simulate_with_rng(chain, start, stop, &mut rng::stream(seed))
}

/// Exact sampling: exponential holding time with the state's total rate,
/// then a jump to a neighbour chosen proportionally to its rate. A
/// zero-mass start vertex is replaced by a draw from its entry law.
pub fn simulate_with_rng(chain: &WalkChain, start: Vertex, stop: &StopRule, rng: &mut StreamRng) -> Result<WalkPath> {
    let tree = chain.tree();
    tree.check_vertex(start)?;
    let mut target = vec![false; chain.state_count()];
    for &v in &stop.targets {
        target[chain.try_state(v)?] = true;
    }
    if let Some(h) = stop.horizon {
        if !(h >= 0.0) {
            return Err(Error::InvalidArgument(format!("horizon must be nonnegative, got {h}")));
        }
    }
    let boundary = |s: usize| stop.radius.is_some_and(|r| tree.height(chain.vertex(s)) >= r);

    let mut s = pick_start(chain, start, rng)?;
    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut states = vec![chain.vertex(s)];
    let finish = |times, states, end_time, stop| {
        Ok(WalkPath {
            times,
            states,
            end_time,
            stop,
        })
    };
    if target[s] {
        return finish(times, states, 0.0, StopReason::Hit(chain.vertex(s)));
    }
    if boundary(s) {
        return finish(times, states, 0.0, StopReason::Boundary(chain.vertex(s)));
    }
    if stop.horizon == Some(0.0) {
        return finish(times, states, 0.0, StopReason::Horizon);
    }
    loop {
        let total = chain.total_rate(s);
        let hold = if total > 0.0 {
            Exp::new(total).expect("positive rate").sample(rng)
        } else {
            f64::INFINITY
        };
        let next_t = t + hold;
        if let Some(h) = stop.horizon {
            if next_t >= h {
                return finish(times, states, h, StopReason::Horizon);
            }
        }
        if !next_t.is_finite() {
            return Err(Error::InvalidArgument(
                "walk is stuck in a state without exits and no horizon is set".into(),
            ));
        }
        let u: f64 = rng.random::<f64>() * total;
        let rates = chain.rates(s);
        let mut acc = 0.0;
        let mut next = rates.last().unwrap().0;
        for &(w, r) in rates {
            acc += r;
            if u < acc {
                next = w;
                break;
            }
        }
        s = next;
        t = next_t;
        times.push(t);
        states.push(chain.vertex(s));
        if states.len() > JUMP_CAP {
            return Err(Error::JumpCapExceeded(JUMP_CAP));
        }
        if target[s] {
            return finish(times, states, t, StopReason::Hit(chain.vertex(s)));
        }
        if boundary(s) {
            return finish(times, states, t, StopReason::Boundary(chain.vertex(s)));
        }
    }
}

/// Time spent in each tree vertex during `[0, until]`, indexed by vertex.
pub fn occupation_times(path: &WalkPath, vertex_count: usize, until: f64) -> Result<Vec<f64>> {
    if !(0.0..=path.end_time).contains(&until) {
        return Err(Error::InvalidArgument(format!(
            "occupation until {until} outside the recorded path [0, {}]",
            path.end_time
        )));
    }
    let mut occ = vec![0.0; vertex_count];
    for (k, &v) in path.states.iter().enumerate() {
        let a = path.times[k];
        if a >= until {
            break;
        }
        let b = path.times.get(k + 1).copied().unwrap_or(path.end_time).min(until);
        occ[v] += b - a;
    }
    Ok(occ)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{RootedMetricTree, SpeedMeasure};

    fn two_point(n: f64) -> WalkChain {
        let t = RootedMetricTree::path(&[1.0]).unwrap();
        WalkChain::new(&t, &SpeedMeasure::new(vec![1.0, 1.0 / n]).unwrap()).unwrap()
    }

    #[test]
    fn zero_horizon_is_still() {
        let p = simulate(&two_point(1.0), 0, &StopRule::horizon(0.0), 1).unwrap();
        assert_eq!(p.states, vec![0]);
        assert_eq!(p.times, vec![0.0]);
        assert_eq!(p.end_time, 0.0);
        assert_eq!(occupation_times(&p, 2, 0.0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn determinism_and_time_order() {
        let c = two_point(3.0);
        let a = simulate(&c, 0, &StopRule::horizon(50.0), 9).unwrap();
        let b = simulate(&c, 0, &StopRule::horizon(50.0), 9).unwrap();
        assert_eq!(a, b);
        assert!(a.times.windows(2).all(|w| w[0] < w[1]));
        let occ = occupation_times(&a, 2, 50.0).unwrap();
        assert!((occ.iter().sum::<f64>() - 50.0).abs() < 1e-9);
        assert!(occupation_times(&a, 2, 51.0).is_err());
    }

    #[test]
    fn hitting_time_is_first_visit() {
        let t = RootedMetricTree::path(&[1.0; 4]).unwrap();
        let c = WalkChain::new(&t, &SpeedMeasure::uniform(5, 1.0)).unwrap();
        for seed in 0..20 {
            let p = simulate(&c, 0, &StopRule::hitting([3]), seed).unwrap();
            let first = p.states.iter().position(|&s| s == 3).unwrap();
            assert_eq!(first, p.states.len() - 1);
            assert_eq!(p.hitting_time(), Some(p.times[first]));
        }
    }

    #[test]
    fn radius_rule_absorbs() {
        let t = RootedMetricTree::path(&[1.0; 6]).unwrap();
        let c = WalkChain::new(&t, &SpeedMeasure::uniform(7, 1.0)).unwrap();
        let p = simulate(&c, 0, &StopRule::radius(3.0), 4).unwrap();
        let (time, v) = p.absorbed_at().unwrap();
        assert_eq!(v, 3);
        assert_eq!(time, p.end_time);
        assert_eq!(p.state_at(time + 10.0), 3);
    }

    #[test]
    fn holding_time_mean_matches_rate() {
        // state 0 leaves at rate 1/2
        let c = two_point(1.0);
        let mut rng = rng::stream(11);
        let mut holds = Vec::new();
        while holds.len() < 10_000 {
            let p = simulate_with_rng(&c, 0, &StopRule::hitting([1]), &mut rng).unwrap();
            holds.extend(p.holding_times().filter(|x| x.0 == 0).map(|x| x.1));
        }
        let n = holds.len() as f64;
        let mean = holds.iter().sum::<f64>() / n;
        let sd = (holds.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((mean - 2.0).abs() <= 3.0 * sd / n.sqrt(), "mean {mean}");
    }

    #[test]
    fn unknown_target_is_rejected() {
        let t = RootedMetricTree::path(&[1.0, 1.0]).unwrap();
        let c = WalkChain::new(&t, &SpeedMeasure::new(vec![1.0, 0.0, 1.0]).unwrap()).unwrap();
        assert!(simulate(&c, 0, &StopRule::hitting([1]), 0).is_err());
    }
}
