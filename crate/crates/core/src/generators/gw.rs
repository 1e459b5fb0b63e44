use rand_distr::{Distribution, Geometric, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};
use crate::tree::{length_measure, RootedMetricTree, SpeedMeasure};

/// Rejection attempts before [`gw_conditioned`] gives up.
pub const GW_ATTEMPT_CAP: usize = 1_000_000;

/// Critical offspring laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Offspring {
    /// `P(k) = 2^{-(k+1)}`.
    Geometric,
    /// Poisson with mean 1.
    Poisson,
}

impl Offspring {
    pub fn mean(self) -> f64 {
        1.0
    }

    pub fn variance(self) -> f64 {
        match self {
            Offspring::Geometric => 2.0,
            Offspring::Poisson => 1.0,
        }
    }

    pub fn sigma(self) -> f64 {
        self.variance().sqrt()
    }

    fn sample(self, rng: &mut StreamRng) -> usize {
        match self {
            Offspring::Geometric => Geometric::new(0.5).expect("valid").sample(rng) as usize,
            Offspring::Poisson => Poisson::new(1.0).expect("valid").sample(rng) as usize,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GwTree {
    pub tree: RootedMetricTree,
    /// `ν_n({v}) = deg(v) / (2n)`.
    pub measure: SpeedMeasure,
    /// Length measure of the rescaled tree.
    pub skeleton: SpeedMeasure,
    pub sigma: f64,
    pub attempts: usize,
}

/// One unconditioned tree in breadth-first order, abandoned as soon as it
/// exceeds `limit` vertices.
fn grow(offspring: Offspring, limit: usize, rng: &mut StreamRng) -> Option<Vec<usize>> {
    let mut parent = vec![0];
    let mut next = 0;
    while next < parent.len() {
        let k = offspring.sample(rng);
        if parent.len() + k > limit {
            return None;
        }
        parent.extend(std::iter::repeat_n(next, k));
        next += 1;
    }
    Some(parent)
}

/// Galton–Watson tree conditioned to have exactly `n` vertices, by
/// rejection. Edges have length `σ/√n`.
pub fn gw_conditioned(offspring: Offspring, n: usize, seed: u64) -> Result<GwTree> {
    if n < 2 {
        return Err(Error::InvalidArgument("conditioned GW trees need n >= 2".into()));
    }
    if (offspring.mean() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument("offspring law is not critical".into()));
    }
    let mut rng = rng::stream(seed);
    for attempt in 1..=GW_ATTEMPT_CAP {
        let Some(parent) = grow(offspring, n, &mut rng) else {
            continue;
        };
        if parent.len() != n {
            continue;
        }
        let sigma = offspring.sigma();
        let len = sigma / (n as f64).sqrt();
        let mut lengths = vec![len; n];
        lengths[0] = 0.0;
        let tree = RootedMetricTree::new(parent, lengths, 0)?;
        let measure = SpeedMeasure::new(
            tree.vertices()
                .map(|v| tree.degree(v) as f64 / (2.0 * n as f64))
                .collect(),
        )?;
        let skeleton = length_measure(&tree);
        return Ok(GwTree {
            tree,
            measure,
            skeleton,
            sigma,
            attempts: attempt,
        });
    }
    Err(Error::AttemptCapExceeded {
        attempts: GW_ATTEMPT_CAP,
        // no success seen: report the usual 95% upper bound 3/attempts
        acceptance: 3.0 / GW_ATTEMPT_CAP as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_vertices() {
        let g = gw_conditioned(Offspring::Geometric, 2, 1).unwrap();
        assert_eq!(g.tree.vertex_count(), 2);
        assert_relative_eq!(g.tree.distance(0, 1), 2f64.sqrt() / 2f64.sqrt());
        assert_eq!(g.measure.masses(), &[0.25, 0.25]);
        assert!(gw_conditioned(Offspring::Poisson, 1, 1).is_err());
    }

    #[test]
    fn handshake_identity() {
        for (seed, law) in [(3, Offspring::Geometric), (4, Offspring::Poisson)] {
            for n in [5, 17, 60] {
                let g = gw_conditioned(law, n, seed).unwrap();
                assert_eq!(g.tree.vertex_count(), n);
                let total: f64 = g.measure.total();
                assert_relative_eq!(total, (n - 1) as f64 / n as f64, epsilon = 1e-12);
            }
        }
    }
}
