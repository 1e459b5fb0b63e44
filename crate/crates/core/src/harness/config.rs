use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{CoalescentKind, Offspring, SpeedVariant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Verify,
    Stone,
    Crt,
    BinaryEntrance,
    Kesten,
    Coalescent,
    Fdd,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Verify => "verify",
            Experiment::Stone => "stone",
            Experiment::Crt => "crt",
            Experiment::BinaryEntrance => "binary-entrance",
            Experiment::Kesten => "kesten",
            Experiment::Coalescent => "coalescent",
            Experiment::Fdd => "fdd",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(name.to_string()))
            .map_err(|_| Error::Config(format!("unknown experiment `{name}`")))
    }

    fn needs_times(self) -> bool {
        matches!(self, Experiment::Stone | Experiment::Fdd | Experiment::Verify)
    }
}

/// Generator-specific settings. Every field has a default, and fields that
/// an experiment does not use are ignored by it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FamilyParams {
    /// Random instances per verification check (`verify`).
    pub instances: usize,
    /// Offspring law (`crt`).
    pub offspring: Offspring,
    /// Λ of the coalescent (`coalescent`).
    pub coalescent: CoalescentKind,
    pub speed_variant: SpeedVariant,
    /// Abscissa horizon of the two-sided walk (`kesten`).
    pub horizon: f64,
    /// Root-ball radii for restricted distances and mass diagnostics.
    pub radii: Vec<f64>,
    pub deltas: Vec<f64>,
    pub kappas: Vec<f64>,
    /// Grid step and half width of the reference level (`stone`).
    pub reference_step: f64,
    pub reference_half_width: f64,
}

impl Default for FamilyParams {
    fn default() -> Self {
        Self {
            instances: 50,
            offspring: Offspring::Geometric,
            coalescent: CoalescentKind::Kingman,
            speed_variant: SpeedVariant::BranchAtomic,
            horizon: 1.0,
            radii: vec![1.0, 2.0, 4.0],
            deltas: vec![0.25, 0.5],
            kappas: vec![0.0, 0.5, 1.0, 1.5, 2.0, 3.0],
            reference_step: 1.0 / 64.0,
            reference_half_width: 12.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub family: FamilyParams,
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub times: Vec<f64>,
    pub replicates: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses and validates. Errors carry the line and column reported by
    /// the JSON reader, and name the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_list.is_empty() {
            return bad("n_list: must be nonempty");
        }
        if self.n_list.contains(&0) {
            return bad("n_list: sizes must be positive");
        }
        if self.replicates == 0 {
            return bad("replicates: must be at least 1");
        }
        if self.times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return bad("times: must be positive and finite");
        }
        if self.times.windows(2).any(|w| w[0] >= w[1]) {
            return bad("times: must be strictly increasing");
        }
        if self.experiment.needs_times() && self.times.is_empty() {
            return bad("times: must be nonempty for this experiment");
        }
        let f = &self.family;
        if f.instances == 0 {
            return bad("family.instances: must be at least 1");
        }
        if f.radii.is_empty() || f.radii.iter().any(|r| !(*r > 0.0)) {
            return bad("family.radii: must be nonempty and positive");
        }
        if f.deltas.is_empty() || f.deltas.iter().any(|d| !(*d > 0.0)) {
            return bad("family.deltas: must be nonempty and positive");
        }
        if f.kappas.is_empty() {
            return bad("family.kappas: must be nonempty");
        }
        if !(f.horizon > 0.0) {
            return bad("family.horizon: must be positive");
        }
        if !(f.reference_step > 0.0 && f.reference_half_width > f.reference_step) {
            return bad("family.reference_step: need 0 < step < reference_half_width");
        }
        match self.experiment {
            Experiment::Crt | Experiment::Coalescent if self.n_list.contains(&1) => {
                bad("n_list: sizes must be at least 2 for this experiment")
            }
            Experiment::BinaryEntrance if self.n_list.iter().any(|&d| d > crate::generators::MAX_BINARY_DEPTH) => {
                bad("n_list: binary depth too large")
            }
            _ => Ok(()),
        }
    }
}
