//! Distances between finite measures and point sets inside one ambient
//! tree, and the convergence diagnostics built on them.

mod flow;
mod kr;
mod prohorov;
mod report;

pub use flow::Network;
pub use kr::{kr_distance, kr_distance_lp_oracle, kr_distance_tree};
pub use prohorov::{prohorov, prohorov_brute};
pub use report::{
    fdd_compare, gh_vague_report, polynomial_lower_bound, ConvergenceReport, ConvergenceRow, FddReport,
    PolynomialBoundTable, Space,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{SpeedMeasure, Vertex};

/// Finitely many atoms with positive masses on distinct points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteAtomMeasure<P = Vertex> {
    atoms: Vec<(P, f64)>,
}

impl<P: Ord + Clone> FiniteAtomMeasure<P> {
    /// Merges repeated points and drops zero atoms; masses must be finite
    /// and nonnegative.
    pub fn new(atoms: impl IntoIterator<Item = (P, f64)>) -> Result<Self> {
        let mut merged: BTreeMap<P, f64> = BTreeMap::new();
        for (p, m) in atoms {
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::InvalidMeasure(format!(
                    "atom mass {m} is not a finite nonnegative number"
                )));
            }
            *merged.entry(p).or_insert(0.0) += m;
        }
        Ok(Self {
            atoms: merged.into_iter().filter(|a| a.1 > 0.0).collect(),
        })
    }

    /// Atoms whose point satisfies `keep`.
    pub fn restrict(&self, keep: impl Fn(&P) -> bool) -> Self {
        Self {
            atoms: self.atoms.iter().filter(|a| keep(&a.0)).cloned().collect(),
        }
    }

    /// Relabels points through `f`, merging atoms that land together.
    pub fn map<Q: Ord + Clone>(&self, f: impl Fn(&P) -> Q) -> FiniteAtomMeasure<Q> {
        FiniteAtomMeasure::new(self.atoms.iter().map(|(p, m)| (f(p), *m))).expect("masses already valid")
    }

    pub fn mass_of(&self, p: &P) -> f64 {
        self.atoms
            .binary_search_by(|a| a.0.cmp(p))
            .map_or(0.0, |i| self.atoms[i].1)
    }
}

impl<P> FiniteAtomMeasure<P> {
    pub fn zero() -> Self {
        Self { atoms: Vec::new() }
    }

    pub fn atoms(&self) -> &[(P, f64)] {
        &self.atoms
    }

    pub fn points(&self) -> impl Iterator<Item = &P> {
        self.atoms.iter().map(|a| &a.0)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }
}

impl FiniteAtomMeasure<Vertex> {
    /// Positive atoms of a speed measure, optionally relabelled into an
    /// ambient tree by `embed[v]`.
    pub fn from_speed_measure(nu: &SpeedMeasure, embed: Option<&[Vertex]>) -> Self {
        Self::new(
            nu.masses()
                .iter()
                .enumerate()
                .map(|(v, &m)| (embed.map_or(v, |e| e[v]), m)),
        )
        .expect("speed measures have valid masses")
    }
}

/// Relative frequencies of the samples.
pub fn empirical_law<P: Ord + Clone>(samples: &[P]) -> Result<FiniteAtomMeasure<P>> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("empirical law of an empty sample".into()));
    }
    let w = 1.0 / samples.len() as f64;
    let mut counts: BTreeMap<&P, usize> = BTreeMap::new();
    for s in samples {
        *counts.entry(s).or_insert(0) += 1;
    }
    FiniteAtomMeasure::new(counts.into_iter().map(|(p, c)| (p.clone(), c as f64 * w)))
}

/// Hausdorff distance `max(sup_a d(a, B), sup_b d(b, A))`.
pub fn hausdorff<P>(a: &[P], b: &[P], metric: impl Fn(&P, &P) -> f64) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("Hausdorff distance of an empty set".into()));
    }
    let one_sided = |x: &[P], y: &[P]| {
        x.iter()
            .map(|p| y.iter().map(|q| metric(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(one_sided(a, b).max(one_sided(b, a)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_merge_and_sort() {
        let m = FiniteAtomMeasure::new([(3, 1.0), (1, 0.5), (3, 0.25), (2, 0.0)]).unwrap();
        assert_eq!(m.atoms(), &[(1, 0.5), (3, 1.25)]);
        assert_eq!(m.mass_of(&3), 1.25);
        assert_eq!(m.mass_of(&2), 0.0);
        assert!(FiniteAtomMeasure::new([(0, -1.0)]).is_err());
    }

    #[test]
    fn empirical() {
        let e = empirical_law(&[4]).unwrap();
        assert_eq!(e.atoms(), &[(4, 1.0)]);
        let e = empirical_law(&[7, 7, 2]).unwrap();
        assert_eq!(e.atoms(), &[(2, 1.0 / 3.0), (7, 2.0 / 3.0)]);
        assert!(empirical_law::<usize>(&[]).is_err());
    }

    #[test]
    fn hausdorff_sets() {
        let d = |a: &f64, b: &f64| (a - b).abs();
        assert_eq!(hausdorff(&[0.0, 1.0], &[1.0, 0.0], d).unwrap(), 0.0);
        assert_eq!(hausdorff(&[0.0], &[0.0, 2.5], d).unwrap(), 2.5);
        assert!(hausdorff(&[], &[1.0], d).is_err());
    }
}
