use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constructions::catalog;
use crate::error::SimError;
use crate::pda::Pda;
use crate::protocol::{DeliveryMode, FileSet, SystemConfig};

/// Default exhaustive-enumeration cap, `2^20` realizations.
pub const DEFAULT_CAP: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    MonteCarlo,
    Exhaustive,
    /// One round with the plan's explicit randomness.
    Fixed,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandPolicy {
    Fixed(Vec<usize>),
    #[default]
    Uniform,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditFlags {
    /// Run the exact privacy audit.
    #[serde(default)]
    pub exact: bool,
    /// Samples for the empirical audit; 0 skips it.
    #[serde(default)]
    pub empirical_samples: u64,
    /// Demand vectors to compare; defaults to all-`0` against all-`N-1`.
    #[serde(default)]
    pub demands: Vec<Vec<usize>>,
}

/// The on-disk form of an experiment plan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub servers: usize,
    pub files: usize,
    /// A `.pda` path (relative to the plan) or `catalog:NAME`.
    pub pda: String,
    #[serde(default = "default_file_len")]
    pub file_len: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub demands: DemandPolicy,
    #[serde(default)]
    pub delivery: DeliveryMode,
    #[serde(default)]
    pub randomness: Option<Vec<Vec<u32>>>,
    #[serde(default = "default_cap")]
    pub cap: u64,
    /// Directory of library files; synthetic files otherwise.
    #[serde(default)]
    pub library: Option<PathBuf>,
    /// Number of round transcripts to keep.
    #[serde(default = "default_keep")]
    pub keep_transcripts: usize,
    #[serde(default)]
    pub raw_dump: bool,
    #[serde(default)]
    pub audit: AuditFlags,
}

fn default_file_len() -> usize {
    4096
}

fn default_trials() -> u64 {
    100
}

fn default_cap() -> u64 {
    DEFAULT_CAP
}

fn default_keep() -> usize {
    1
}

/// A validated experiment.
#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub config: SystemConfig,
    pub trials: u64,
    pub mode: Mode,
    pub demands: DemandPolicy,
    pub delivery: DeliveryMode,
    pub randomness: Option<Vec<Vec<u32>>>,
    pub cap: u64,
    pub library: Option<Vec<Vec<u8>>>,
    pub keep_transcripts: usize,
    pub raw_dump: bool,
    pub audit: AuditFlags,
}

/// `B^{K(N-1)}`, saturating.
pub fn realization_count(config: &SystemConfig) -> u128 {
    let exp = config.users() * (config.files() - 1);
    let mut n: u128 = 1;
    for _ in 0..exp {
        n = n.saturating_mul(config.servers() as u128);
    }
    n
}

pub fn resolve_pda(spec: &str, base: &Path) -> Result<Pda, SimError> {
    if let Some(name) = spec.strip_prefix("catalog:") {
        return catalog(name).map_err(|e| SimError::Plan(e.to_string()));
    }
    let path = base.join(spec);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| SimError::Plan(format!("{}: {e}", path.display())))?;
    Pda::parse(&text).map_err(|e| SimError::Plan(format!("{}: {e}", path.display())))
}

impl ExperimentPlan {
    /// A Monte Carlo plan with uniform demands.
    pub fn new(config: SystemConfig, trials: u64) -> Self {
        Self {
            config,
            trials,
            mode: Mode::MonteCarlo,
            demands: DemandPolicy::Uniform,
            delivery: DeliveryMode::Pda,
            randomness: None,
            cap: DEFAULT_CAP,
            library: None,
            keep_transcripts: 1,
            raw_dump: false,
            audit: AuditFlags::default(),
        }
    }

    /// Resolves a plan file; relative paths are taken from `base`.
    /// `default_seed` applies when the file has no seed.
    pub fn from_file(file: PlanFile, base: &Path, default_seed: u64) -> Result<Self, SimError> {
        let pda = Arc::new(resolve_pda(&file.pda, base)?);
        let library = match &file.library {
            Some(dir) => {
                let dir = base.join(dir);
                Some(
                    FileSet::read_dir(&dir)
                        .map_err(|e| SimError::Plan(format!("library {}: {e}", dir.display())))?,
                )
            }
            None => None,
        };
        let file_len = match &library {
            Some(lib) => lib.iter().map(Vec::len).max().unwrap_or(0),
            None => file.file_len,
        };
        let config = SystemConfig::new(
            file.servers,
            file.files,
            pda.k(),
            file_len,
            pda,
            file.seed.unwrap_or(default_seed),
        )?;
        let plan = Self {
            config,
            trials: file.trials,
            mode: file.mode,
            demands: file.demands,
            delivery: file.delivery,
            randomness: file.randomness,
            cap: file.cap,
            library,
            keep_transcripts: file.keep_transcripts,
            raw_dump: file.raw_dump,
            audit: file.audit,
        };
        plan.check()?;
        Ok(plan)
    }

    pub fn check(&self) -> Result<(), SimError> {
        let c = &self.config;
        if let DemandPolicy::Fixed(d) = &self.demands {
            if d.len() != c.users() || d.iter().any(|&x| x >= c.files()) {
                return Err(SimError::Plan(format!(
                    "fixed demands need {} entries in [0:{}]",
                    c.users(),
                    c.files() - 1
                )));
            }
        }
        match self.mode {
            Mode::MonteCarlo if self.trials == 0 => Err(SimError::Plan(
                "Monte Carlo needs at least one trial".into(),
            )),
            Mode::Exhaustive if !matches!(self.demands, DemandPolicy::Fixed(_)) => {
                Err(SimError::Plan("exhaustive mode needs fixed demands".into()))
            }
            Mode::Exhaustive => {
                let needed = realization_count(c);
                if needed > self.cap as u128 {
                    Err(SimError::CapExceeded {
                        needed,
                        cap: self.cap,
                    })
                } else {
                    Ok(())
                }
            }
            Mode::Fixed if self.randomness.is_none() => Err(SimError::Plan(
                "fixed mode needs explicit randomness".into(),
            )),
            Mode::Fixed if !matches!(self.demands, DemandPolicy::Fixed(_)) => {
                Err(SimError::Plan("fixed mode needs fixed demands".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn file_set(&self) -> Result<FileSet, SimError> {
        Ok(match &self.library {
            Some(lib) => FileSet::from_bytes(&self.config, lib.clone())?,
            None => FileSet::synthetic(&self.config),
        })
    }
}
