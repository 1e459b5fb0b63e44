//! Tree families: excursion trees, conditioned Galton–Watson trees, the
//! exponential binary tree, Stone trees and Λ-coalescent genealogies.

mod coalescent;
mod excursion;
mod families;
mod gw;
mod random;

pub use coalescent::{
    coalescent_speed_measure, coalescent_tree, merge_rate, CoalescentKind, CoalescentSpec, CoalescentTree, SpeedVariant,
};
pub use excursion::{glue_excursion, kesten_excursion, reflect_walk, Excursion, GluedTree, KestenSample};
pub use families::{binary_tree, stone_tq, StoneTree, MAX_BINARY_DEPTH};
pub use gw::{gw_conditioned, GwTree, Offspring, GW_ATTEMPT_CAP};
pub use random::{random_measure, random_tree};

use serde::{Deserialize, Serialize};

/// Record of how a generated instance was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(kind: impl Into<String>, params: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            kind: kind.into(),
            params,
            seed,
        }
    }
}
