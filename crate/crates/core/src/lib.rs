//! Speed-measure random walks on rooted metric measure trees.
//!
//! The crate is organised bottom-up:
//!
//! * [`tree`]: rooted metric trees, speed measures and the geometric
//!   primitives on them (distances, branch points, length measure,
//!   ε-degree, mass-bound functions, nets and projections).
//! * [`walk`]: the continuous-time walk that jumps from `v` to a neighbour
//!   `v'` at rate `1 / (2 ν({v}) r(v, v'))`, exact simulation and ensembles.
//! * [`oracle`]: deterministic closed forms and linear-algebra routes
//!   (Green kernel, occupation formula, hitting quantities, heat kernel).
//! * [`metrics`]: Prohorov, Kantorovich–Rubinshtein and Hausdorff distances
//!   inside a common ambient tree, and convergence reports.
//! * [`generators`]: excursion trees, conditioned Galton–Watson trees,
//!   Stone trees, binary trees and Λ-coalescent genealogies.
//! * [`harness`]: experiment configuration and the verification suite used
//!   by the `treeflow` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod generators;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod parallel;
pub mod rng;
pub mod tree;
pub mod walk;

pub use error::{Error, Result};
pub use tree::{RootedMetricTree, SpeedMeasure, Vertex};
pub use walk::{StopRule, WalkChain, WalkPath};
