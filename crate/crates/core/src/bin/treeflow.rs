use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use treeflow::harness::{run_experiment, write_outputs, Experiment, ExperimentConfig};
use treeflow::parallel::{configure_threads, Execution};

/// Run a treeflow experiment or verification suite.
#[derive(Debug, Parser)]
#[command(name = "treeflow", version)]
struct Cli {
    /// verify | stone | crt | binary-entrance | kesten | coalescent | fdd
    experiment: String,
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: the config's output_dir, else ./out/<experiment>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    threads: Option<usize>,
    /// Write sample trajectories to paths/*.csv.
    #[arg(long)]
    dump_paths: bool,
}

fn run(cli: Cli) -> Result<bool, String> {
    let experiment = Experiment::parse(&cli.experiment).map_err(|e| e.to_string())?;
    let mut cfg = ExperimentConfig::from_file(&cli.config).map_err(|e| e.to_string())?;
    if cfg.experiment != experiment {
        return Err(format!(
            "config {} is for `{}`, not `{}`",
            cli.config.display(),
            cfg.experiment.name(),
            experiment.name()
        ));
    }
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    let exec = match cli.threads {
        Some(0) => return Err("--threads must be at least 1".into()),
        Some(1) => Execution::Sequential,
        Some(k) => {
            configure_threads(k);
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    let dir = cli
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(experiment.name()));
    let out = run_experiment(&cfg, exec, cli.dump_paths).map_err(|e| e.to_string())?;
    write_outputs(&out, &dir).map_err(|e| e.to_string())?;
    let failures: Vec<_> = out.suite.failures().collect();
    eprintln!(
        "{}: {} records, {} failed, seed {}, written to {}",
        experiment.name(),
        out.suite.records.len(),
        failures.len(),
        cfg.master_seed,
        dir.display()
    );
    for r in failures.iter().take(10) {
        eprintln!(
            "  FAIL {} {} statistic={:.6e} target={:.6e} tol={:.3e} seed={}",
            r.check_id, r.instance, r.statistic, r.bound_or_target, r.tolerance, r.seed
        );
    }
    Ok(failures.is_empty())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("treeflow: {e}");
            ExitCode::from(2)
        }
    }
}
