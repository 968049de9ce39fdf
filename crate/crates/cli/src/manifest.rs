//! Run manifests: everything one benchmark needs, in a single JSON file.

use airamg::hierarchy::SolverConfig;
use airamg::io::fnv1a64;
use airamg::krylov::KrylovConfig;
use airamg::problems::ProblemSpec;
use airamg::{AmgError, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    pub report_json: Option<PathBuf>,
    pub residuals_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub problem: ProblemSpec,
    pub solver: SolverConfig,
    pub krylov: KrylovConfig,
    /// Seed of the portable LCG that draws the random initial guess.
    pub seed: u64,
    #[serde(default)]
    pub output: OutputPaths,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialization");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| AmgError::Parse(format!("manifest: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Stable fingerprint carried into every report row.
    pub fn hash(&self) -> String {
        format!("{:016x}", fnv1a64(self.to_json().as_bytes()))
    }
}
