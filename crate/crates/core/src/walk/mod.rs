//! The speed-ν random walk: chain construction, exact simulation and
//! seeded ensembles.

mod batch;
mod chain;
mod export;
mod simulate;

pub use batch::{batch_map, batch_simulate, batch_snapshots, Ensemble, Snapshots};
pub use chain::WalkChain;
pub use export::{paths_csv, write_paths_csv};
pub use simulate::{occupation_times, simulate, simulate_with_rng, StopReason, StopRule, WalkPath, JUMP_CAP};
