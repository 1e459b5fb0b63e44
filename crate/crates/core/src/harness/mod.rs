//! Experiment configuration, the verification checks and the runners used
//! by the `treeflow` binary.
//!
//! Every check returns [`SuiteRecord`]s. A record names the check, the
//! instance (a hash of the tree file plus the vertices involved), the
//! statistic, the target or bound it was compared with, the tolerance and
//! the seed that regenerates the instance.

mod checks;
mod config;
mod convergence;
mod demos;
mod output;

pub use checks::{
    check_atom_law, check_bounds, check_discretization, check_entrance, check_generators, check_heat_kernel,
    check_metric_oracles, check_natural_scale, check_occupation, check_rates, check_trace, VerifyPlan,
};
pub use config::{Experiment, ExperimentConfig, FamilyParams};
pub use convergence::{
    line_tree, run_convergence, spearman, stone_level, ConvergenceOutcome, LineTree, StoneLevel, TwoPointOutcome,
};
pub use demos::{run_coalescent_demo, run_crt_demo, run_entrance_demo, run_kesten_demo, DemoOutcome};
pub use output::{run_experiment, run_verify, write_outputs, RunOutput};

use serde::{Deserialize, Serialize};

/// One compared quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRecord {
    pub check_id: String,
    pub instance: String,
    pub statistic: f64,
    pub bound_or_target: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: u64,
}

impl SuiteRecord {
    /// `|statistic - target| <= tolerance * max(1, |target|)`.
    pub fn relative(
        id: &str,
        instance: impl Into<String>,
        statistic: f64,
        target: f64,
        tolerance: f64,
        seed: u64,
    ) -> Self {
        let pass = (statistic - target).abs() <= tolerance * target.abs().max(1.0);
        Self::raw(id, instance, statistic, target, tolerance, pass, seed)
    }

    /// `|statistic - target| <= tolerance`.
    pub fn absolute(
        id: &str,
        instance: impl Into<String>,
        statistic: f64,
        target: f64,
        tolerance: f64,
        seed: u64,
    ) -> Self {
        let pass = (statistic - target).abs() <= tolerance;
        Self::raw(id, instance, statistic, target, tolerance, pass, seed)
    }

    /// `statistic <= bound + tolerance`.
    pub fn at_most(
        id: &str,
        instance: impl Into<String>,
        statistic: f64,
        bound: f64,
        tolerance: f64,
        seed: u64,
    ) -> Self {
        let pass = statistic <= bound + tolerance;
        Self::raw(id, instance, statistic, bound, tolerance, pass, seed)
    }

    /// `statistic < bound` strictly, used by the trend checks.
    pub fn below(id: &str, instance: impl Into<String>, statistic: f64, bound: f64, seed: u64) -> Self {
        let pass = statistic < bound;
        Self::raw(id, instance, statistic, bound, 0.0, pass, seed)
    }

    fn raw(
        id: &str,
        instance: impl Into<String>,
        statistic: f64,
        target: f64,
        tolerance: f64,
        pass: bool,
        seed: u64,
    ) -> Self {
        Self {
            check_id: id.to_string(),
            instance: instance.into(),
            statistic,
            bound_or_target: target,
            tolerance,
            pass: pass && !statistic.is_nan(),
            seed,
        }
    }
}

/// The records of one run plus free-form tables for the demos.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub experiment: String,
    pub master_seed: u64,
    pub all_pass: bool,
    pub records: Vec<SuiteRecord>,
    /// Estimates reported without pass/fail.
    pub tables: serde_json::Value,
}

impl SuiteResult {
    pub fn new(experiment: &str, master_seed: u64, records: Vec<SuiteRecord>, tables: serde_json::Value) -> Self {
        Self {
            experiment: experiment.to_string(),
            master_seed,
            all_pass: records.iter().all(|r| r.pass),
            records,
            tables,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &SuiteRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Mean and standard error of a sample.
pub(crate) fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
