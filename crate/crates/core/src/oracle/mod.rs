//! Deterministic computations used as references for simulation output.

mod bounds;
mod heat;
mod potential;

pub use bounds::{atom_law, hit_bound, speed_bound, AtomLaw, HitGeometry};
pub use heat::{heat_kernel, heat_kernel_matrix, set_bound_worst, HeatKernelResult, POISSON_TAIL};
pub use potential::{
    capacity, capacity_variational, expected_hitting, expected_hitting_from, green_kernel, harmonic_extension,
    harmonic_on_chain, hitting_prob, hitting_prob_harmonic, occupation_rhs, tree_energy,
};

use serde::{Deserialize, Serialize};

use crate::rng;
use crate::tree::{write_tree, RootedMetricTree, SpeedMeasure};

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub check: String,
    pub instance_hash: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
    pub pass: bool,
}

impl VerificationRecord {
    /// Equality check `|lhs - rhs| <= tol * max(1, |rhs|)`.
    pub fn equal(check: impl Into<String>, instance_hash: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let pass = (lhs - rhs).abs() <= tol * rhs.abs().max(1.0);
        Self {
            check: check.into(),
            instance_hash: instance_hash.into(),
            lhs,
            rhs,
            tol,
            pass,
        }
    }

    /// One-sided check `lhs <= rhs + tol`.
    pub fn at_most(check: impl Into<String>, instance_hash: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self {
            check: check.into(),
            instance_hash: instance_hash.into(),
            lhs,
            rhs,
            tol,
            pass: lhs <= rhs + tol,
        }
    }
}

/// Short stable hash of a tree and optional measure, taken over the
/// interchange file text.
pub fn instance_hash(t: &RootedMetricTree, nu: Option<&SpeedMeasure>) -> String {
    rng::fingerprint(write_tree(t, nu).as_bytes())
}
