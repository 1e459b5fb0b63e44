use std::fs;
use std::path::Path;

use serde_json::json;

use super::checks::{
    check_atom_law, check_bounds, check_discretization, check_entrance, check_heat_kernel, check_metric_oracles,
    check_natural_scale, check_occupation, check_rates, check_trace, VerifyPlan,
};
use super::config::{Experiment, ExperimentConfig};
use super::convergence::run_convergence;
use super::demos::{run_coalescent_demo, run_crt_demo, run_entrance_demo, run_kesten_demo};
use super::SuiteResult;
use crate::error::Result;
use crate::parallel::Execution;
use crate::walk::{write_paths_csv, WalkPath};

/// Everything an experiment writes.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub suite: SuiteResult,
    /// `distances.csv`, for the convergence families.
    pub distances: Option<String>,
    /// `paths/<name>.csv`, filled with `--dump-paths`.
    pub paths: Vec<(String, Vec<WalkPath>)>,
}

/// The verification checks on instances sized by the config: `n_list`
/// gives the vertex counts of the random trees, `times` the heat-kernel
/// times and `family.instances` the number of random instances.
pub fn run_verify(cfg: &ExperimentConfig, exec: Execution) -> Result<SuiteResult> {
    let mut plan = VerifyPlan::new(cfg.master_seed, cfg.replicates, exec);
    plan.sizes = cfg.n_list.clone();
    plan.times = cfg.times.clone();
    plan.instances = cfg.family.instances;
    let mut records = Vec::new();
    for check in [
        check_rates,
        check_occupation,
        check_natural_scale,
        check_atom_law,
        check_bounds,
        check_heat_kernel,
        check_entrance,
        check_discretization,
        check_metric_oracles,
        check_trace,
    ] {
        records.extend(check(&plan)?);
    }
    Ok(SuiteResult::new("verify", cfg.master_seed, records, json!({})))
}

pub fn run_experiment(cfg: &ExperimentConfig, exec: Execution, dump_paths: bool) -> Result<RunOutput> {
    let name = cfg.experiment.name();
    let seed = cfg.master_seed;
    let demo = |d: super::demos::DemoOutcome| RunOutput {
        suite: SuiteResult::new(name, seed, d.records, d.tables),
        distances: None,
        paths: d.paths,
    };
    Ok(match cfg.experiment {
        Experiment::Verify => RunOutput {
            suite: run_verify(cfg, exec)?,
            distances: None,
            paths: Vec::new(),
        },
        Experiment::Stone | Experiment::Fdd => {
            let c = run_convergence(cfg, exec, dump_paths)?;
            RunOutput {
                suite: SuiteResult::new(name, seed, c.records.clone(), c.tables()),
                distances: Some(c.spaces.to_csv()),
                paths: c.paths,
            }
        }
        Experiment::BinaryEntrance => demo(run_entrance_demo(cfg, exec, dump_paths)?),
        Experiment::Kesten => demo(run_kesten_demo(cfg, exec)?),
        Experiment::Coalescent => demo(run_coalescent_demo(cfg, exec)?),
        Experiment::Crt => demo(run_crt_demo(cfg, exec, dump_paths)?),
    })
}

/// Writes `report.json`, `distances.csv` when present and one CSV per
/// dumped path set under `paths/`.
pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), out.suite.to_json())?;
    if let Some(csv) = &out.distances {
        fs::write(dir.join("distances.csv"), csv)?;
    }
    if !out.paths.is_empty() {
        let pdir = dir.join("paths");
        fs::create_dir_all(&pdir)?;
        for (name, paths) in &out.paths {
            let file = fs::File::create(pdir.join(format!("{name}.csv")))?;
            write_paths_csv(std::io::BufWriter::new(file), paths)?;
        }
    }
    Ok(())
}
