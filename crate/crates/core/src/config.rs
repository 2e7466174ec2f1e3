//! Run configuration: JSON schema, validation, and manifest emission.
//!
//! Every command materializes all defaults into the manifest it writes, so
//! a run can be reproduced from its manifest alone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid3, Phantom};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Nodes per axis.
    pub n: usize,
    /// Half-width of the cubic box.
    pub box_half: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n: 32, box_half: 1.5 }
    }
}

impl GridConfig {
    pub fn build(&self) -> Grid3 {
        Grid3::centered(self.box_half, self.n)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: crate::dirac::DEFAULT_TOL,
            max_iter: crate::dirac::DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReconConfig {
    /// Inner annulus radius.
    pub r: f64,
    pub n_radial: usize,
    pub n_angular: usize,
    /// Frequency-lattice truncation for the reconstruction.
    pub xi_max: f64,
}

impl Default for ReconConfig {
    fn default() -> Self {
        ReconConfig {
            r: 32.0,
            n_radial: 6,
            n_angular: 64,
            xi_max: 4.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForwardConfig {
    /// Frequencies at which scattering data are synthesized, one per row.
    pub xis: Vec<[f64; 3]>,
    /// Spectral parameters paired with every frequency.
    pub ks: Vec<[f64; 3]>,
    /// Also evaluate the boundary form on admissible pairs and record the
    /// cross-check statistics.
    pub cross_check: bool,
    /// Icosphere refinement level for the boundary form.
    pub mesh_level: u32,
}

impl Default for ForwardConfig {
    fn default() -> Self {
        ForwardConfig {
            xis: vec![[2.0943951023931953, 0.0, 0.0]],
            ks: vec![[0.0, 0.0, 32.0], [0.0, 32.0, 0.0]],
            cross_check: false,
            mesh_level: 4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub phantom: Phantom,
    pub solver: SolverConfig,
    pub recon: ReconConfig,
    pub forward: ForwardConfig,
    /// Verification suites to run for the `verify` command.
    pub suites: Vec<String>,
    /// Seed for randomized verification properties.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: GridConfig::default(),
            phantom: Phantom::default_smooth(),
            solver: SolverConfig::default(),
            recon: ReconConfig::default(),
            forward: ForwardConfig::default(),
            suites: vec!["all".into()],
            seed: 7,
        }
    }
}

pub const SUITE_NAMES: [&str; 8] = [
    "algebra",
    "calculus",
    "cgo",
    "dirac",
    "scatter",
    "recon",
    "consistency",
    "all",
];

impl RunConfig {
    /// Parse and validate a JSON configuration. Unknown keys and invalid
    /// values report the offending path.
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.n < 4 || self.grid.n % 2 != 0 {
            return Err(Error::Config(format!(
                "grid.n must be even and >= 4, got {}",
                self.grid.n
            )));
        }
        if !(self.grid.box_half > 0.0) {
            return Err(Error::Config(format!(
                "grid.box_half must be > 0, got {}",
                self.grid.box_half
            )));
        }
        if !(self.solver.tol > 0.0) {
            return Err(Error::Config(format!(
                "solver.tol must be > 0, got {}",
                self.solver.tol
            )));
        }
        if self.solver.max_iter == 0 {
            return Err(Error::Config("solver.max_iter must be > 0".into()));
        }
        if !(self.recon.r > 0.0) {
            return Err(Error::Config(format!(
                "recon.r must be > 0, got {}",
                self.recon.r
            )));
        }
        if self.recon.n_radial == 0 || self.recon.n_angular == 0 {
            return Err(Error::Config(
                "recon.n_radial and recon.n_angular must be > 0".into(),
            ));
        }
        if !(self.recon.xi_max > 0.0) {
            return Err(Error::Config(format!(
                "recon.xi_max must be > 0, got {}",
                self.recon.xi_max
            )));
        }
        for b in &self.phantom.bumps {
            if !(b.radius > 0.0) {
                return Err(Error::Config(format!(
                    "phantom.bumps[].radius must be > 0, got {}",
                    b.radius
                )));
            }
        }
        for s in &self.suites {
            if !SUITE_NAMES.contains(&s.as_str()) {
                return Err(Error::Config(format!(
                    "suites: unknown suite '{s}' (expected one of {SUITE_NAMES:?})"
                )));
            }
        }
        Ok(())
    }
}

/// Manifest written next to every command's outputs: the fully
/// materialized configuration plus run metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config: RunConfig,
    pub package_version: String,
    /// Free-form per-command statistics.
    pub stats: serde_json::Value,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig, stats: serde_json::Value) -> Manifest {
        Manifest {
            command: command.to_string(),
            config: config.clone(),
            package_version: env!("CARGO_PKG_VERSION").to_string(),
            stats,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        let back = RunConfig::from_json(&json).unwrap();
        assert_eq!(back.grid.n, cfg.grid.n);
        assert_eq!(back.suites, cfg.suites);
    }

    #[test]
    fn empty_object_materializes_all_defaults() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg.grid.n, 32);
        assert_eq!(cfg.recon.n_angular, 64);
    }

    #[test]
    fn unknown_key_names_the_path() {
        let err = RunConfig::from_json("{\"grid\":{\"m\":32}}").unwrap_err();
        match err {
            Error::Config(msg) => assert!(msg.contains('m'), "message: {msg}"),
            other => panic!("expected Config error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_values_are_rejected() {
        let mut cfg = RunConfig::default();
        cfg.grid.n = 7;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.suites = vec!["bogus".into()];
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.solver.tol = 0.0;
        assert!(cfg.validate().is_err());
    }
}
