use crate::error::{Error, Result};
use crate::maps::MapSpec;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Lsv,
    Lsv0,
}

/// Experiment parameters shared by all subcommands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub family: Family,
    /// LSV exponent; ignored for LSV0.
    pub alpha: f64,
    /// Number of Ulam cells on `Y`.
    pub grid: usize,
    /// Largest return time kept as a separate branch.
    pub ntrunc: usize,
    pub nmax: usize,
    /// Kernel window exponent; the per-sequence default when absent.
    pub gamma: Option<f64>,
    pub kernel_p: u32,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "experiment".into(),
            family: Family::Lsv,
            alpha: 2.0,
            grid: 256,
            ntrunc: 2000,
            nmax: 1000,
            gamma: None,
            kernel_p: 2,
            out: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config fields serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("name {:?} must be a non-empty file stem", self.name));
        }
        if self.family == Family::Lsv && !(self.alpha >= 1.0 && self.alpha <= 100.0) {
            return bad(format!("alpha must lie in [1, 100], got {}", self.alpha));
        }
        if !(8..=65536).contains(&self.grid) {
            return bad(format!("grid must lie in [8, 65536], got {}", self.grid));
        }
        if !(10..=1_000_000).contains(&self.ntrunc) {
            return bad(format!("ntrunc must lie in [10, 10^6], got {}", self.ntrunc));
        }
        if !(1..=100_000_000).contains(&self.nmax) {
            return bad(format!("nmax must lie in [1, 10^8], got {}", self.nmax));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g < 0.5) {
                return bad(format!("gamma must lie in (0, 1/2), got {g}"));
            }
        }
        if !(1..=4).contains(&self.kernel_p) {
            return bad(format!("kernel_p must lie in [1, 4], got {}", self.kernel_p));
        }
        Ok(())
    }

    pub fn map_spec(&self) -> Result<MapSpec> {
        match self.family {
            Family::Lsv => MapSpec::lsv(self.alpha),
            Family::Lsv0 => Ok(MapSpec::lsv0()),
        }
    }
}
