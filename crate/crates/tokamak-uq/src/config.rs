//! Campaign configuration: a TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tokamak_uq_core::solver::{ProfileParams, SolverOptions};

use crate::io::IoError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EvaluatorKind {
    Direct,
    #[default]
    Surrogate,
}

impl EvaluatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EvaluatorKind::Direct => "direct",
            EvaluatorKind::Surrogate => "surrogate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Relative half-width p of the uniform perturbation.
    pub fraction: f64,
    /// Perturbed coil indices (0-based); empty means all coils.
    pub coils: Vec<usize>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig { fraction: 0.01, coils: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateConfig {
    pub level: u32,
    /// Relative to the output directory.
    pub file: PathBuf,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig { level: 2, file: "surrogate.bin".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    pub seed: u64,
    pub stop_eps: f64,
    pub batch: usize,
    pub max_samples: usize,
    pub radii: [f64; 3],
    pub evaluator: EvaluatorKind,
}

impl Default for McSection {
    fn default() -> Self {
        let d = tokamak_uq_core::uq::McConfig::default();
        McSection {
            seed: d.seed,
            stop_eps: d.stop_eps,
            batch: d.batch,
            max_samples: d.max_samples,
            radii: d.radii,
            evaluator: EvaluatorKind::Surrogate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub samples: usize,
    pub max_level: u32,
    pub seed: u64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig { samples: 100, max_level: 3, seed: 7 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub geometry: PathBuf,
    pub mesh: PathBuf,
    pub out: PathBuf,
    /// Worker threads; 0 defers to TOKAMAK_UQ_THREADS, then to the core count.
    pub jobs: usize,
    /// Start perturbed solves from the reference equilibrium.
    pub warm_start: bool,
    pub profile: ProfileParams,
    pub solver: SolverOptions,
    pub noise: NoiseConfig,
    pub surrogate: SurrogateConfig,
    pub mc: McSection,
    pub compare: CompareConfig,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            geometry: "data/iter_like.geom".into(),
            mesh: "data/iter_like_coarse.mesh".into(),
            out: "out".into(),
            jobs: 0,
            warm_start: true,
            profile: ProfileParams::reference(),
            solver: SolverOptions::default(),
            noise: NoiseConfig::default(),
            surrogate: SurrogateConfig::default(),
            mc: McSection::default(),
            compare: CompareConfig::default(),
        }
    }
}

impl CampaignConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self, IoError> {
        toml::from_str(text).map_err(|e| IoError::Parse { path: path.to_path_buf(), msg: e.to_string() })
    }

    /// Reads a config and makes its paths relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self, IoError> {
        let mut c = Self::parse(&crate::io::read(path)?, path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut c.geometry, &mut c.mesh, &mut c.out] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn surrogate_path(&self) -> PathBuf {
        if self.surrogate.file.is_absolute() {
            self.surrogate.file.clone()
        } else {
            self.out.join(&self.surrogate.file)
        }
    }

    /// Thread count: config, then the environment, then the machine.
    pub fn resolve_jobs(&self) -> usize {
        if self.jobs > 0 {
            return self.jobs;
        }
        std::env::var("TOKAMAK_UQ_THREADS")
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
    }

    /// Range checks beyond what deserialization enforces.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.noise.fraction >= 0.0 && self.noise.fraction < 1.0) {
            return Err(format!("noise fraction {} outside [0, 1)", self.noise.fraction));
        }
        if self.profile.validate().is_err() {
            return Err("profile parameters out of range".into());
        }
        let [a, b, c] = self.mc.radii;
        if !(a > 0.0 && a < b && b < c) {
            return Err("mc radii must satisfy 0 < r1 < r2 < r3".into());
        }
        if self.mc.batch == 0 || self.mc.max_samples == 0 {
            return Err("mc batch and max_samples must be positive".into());
        }
        if !(self.mc.stop_eps > 0.0) {
            return Err("mc stop_eps must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = CampaignConfig::default();
        let back = CampaignConfig::parse(&c.to_toml(), Path::new("x.toml")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let c = CampaignConfig::parse("geometry = \"g.geom\"\n[noise]\ncoils = [6, 7]\n", Path::new("x.toml")).unwrap();
        assert_eq!(c.noise.coils, vec![6, 7]);
        assert_eq!(c.noise.fraction, 0.01);
        assert_eq!(c.solver, SolverOptions::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(CampaignConfig::parse("[noise]\nfractoin = 0.1\n", Path::new("x.toml")).is_err());
    }
}
