use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::CircuitTopology;
use crate::data::SweepSpec;
use crate::error::{Error, Result};
use crate::matching::{AdamMatchConfig, SapsoConfig};
use crate::nn::TrainingConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Desk,
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Sapso,
    Adadam,
    Ims,
    Grid,
    Ideal,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] =
        [StrategyKind::Sapso, StrategyKind::Adadam, StrategyKind::Ims, StrategyKind::Grid, StrategyKind::Ideal];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Sapso => "sapso",
            StrategyKind::Adadam => "adadam",
            StrategyKind::Ims => "ims",
            StrategyKind::Grid => "grid",
            StrategyKind::Ideal => "ideal",
        }
    }
}

impl std::str::FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown strategy {s:?}")))
    }
}

/// Sweep lattice steps, in GHz and pF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSteps {
    pub f_step_ghz: f64,
    pub c_step_pf: f64,
}

impl SweepSteps {
    pub fn spec(&self, topology: &CircuitTopology) -> SweepSpec {
        SweepSpec::with_steps(topology, self.f_step_ghz * 1e9, self.c_step_pf * 1e-12)
    }
}

/// Everything a command needs. Missing fields take the profile's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: Profile,
    /// Circuit description; the built-in reference circuit when absent.
    pub circuit: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Forward model used as surrogate; the exact circuit when absent.
    pub recbm_model: Option<PathBuf>,
    pub ims_model: Option<PathBuf>,
    /// Existing scenario file; otherwise scenarios are generated from `seed`.
    pub scenario_file: Option<PathBuf>,
    pub scenarios: usize,
    pub seed: u64,
    pub noise_sigma: f64,
    /// Runs per scenario for stochastic strategies.
    pub repeat: usize,
    pub workers: usize,
    pub strategies: Vec<StrategyKind>,
    pub grid_step_pf: f64,
    pub compliance_threshold: f64,
    /// Optional cost of one surrogate inference, echoed next to evaluation counts.
    pub inference_cost: Option<f64>,
    pub width_scale: f64,
    pub sweep: SweepSteps,
    pub training: TrainingConfig,
    pub sapso: SapsoConfig,
    pub adadam: AdamMatchConfig,
}

impl RunConfig {
    pub fn for_profile(profile: Profile) -> Self {
        let desk = RunConfig {
            profile,
            circuit: None,
            output_dir: PathBuf::from("out"),
            recbm_model: None,
            ims_model: None,
            scenario_file: None,
            scenarios: 500,
            seed: 42,
            noise_sigma: 0.0,
            repeat: 5,
            workers: 1,
            strategies: StrategyKind::ALL.to_vec(),
            grid_step_pf: 0.05,
            compliance_threshold: 0.2,
            inference_cost: None,
            width_scale: 0.125,
            sweep: SweepSteps { f_step_ghz: 0.05, c_step_pf: 0.2 },
            training: TrainingConfig::desk(),
            sapso: SapsoConfig::default(),
            adadam: AdamMatchConfig::default(),
        };
        match profile {
            Profile::Desk => desk,
            Profile::Paper => RunConfig {
                scenarios: 9000,
                repeat: 30,
                grid_step_pf: 0.01,
                width_scale: 1.0,
                sweep: SweepSteps { f_step_ghz: 0.02, c_step_pf: 0.02 },
                training: TrainingConfig::paper(),
                ..desk
            },
        }
    }

    /// Parses TOML, filling gaps from the profile named in the file
    /// (desk when absent).
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Validation(e.to_string()))?;
        let profile = match file.get("profile") {
            None => Profile::Desk,
            Some(v) => v.clone().try_into().map_err(|e: toml::de::Error| Error::Validation(e.to_string()))?,
        };
        let defaults = toml::Table::try_from(RunConfig::for_profile(profile))
            .map_err(|e| Error::Validation(format!("cannot encode defaults: {e}")))?;
        let merged = merge(defaults, file);
        let cfg: RunConfig =
            toml::Value::Table(merged).try_into().map_err(|e: toml::de::Error| Error::Validation(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is representable in TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        if self.scenarios == 0 {
            return bad("scenario count must be at least 1".into());
        }
        if !(1..=1024).contains(&self.repeat) {
            return bad(format!("repeat must lie in 1..=1024, got {}", self.repeat));
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise sigma must be non-negative, got {}", self.noise_sigma));
        }
        if !(self.grid_step_pf > 0.0) {
            return bad(format!("grid step must be positive, got {}", self.grid_step_pf));
        }
        if !(self.compliance_threshold > 0.0) {
            return bad(format!("compliance threshold must be positive, got {}", self.compliance_threshold));
        }
        if !(self.width_scale > 0.0 && self.width_scale <= 1.0) {
            return bad(format!("width scale must lie in (0, 1], got {}", self.width_scale));
        }
        if self.strategies.is_empty() {
            return bad("select at least one strategy".into());
        }
        self.training.validate().map_err(|e| Error::Validation(e.to_string()))?;
        self.sapso.validate()?;
        self.adadam.validate()?;
        for p in [&self.circuit, &self.recbm_model, &self.ims_model, &self.scenario_file].into_iter().flatten() {
            if !p.exists() {
                return bad(format!("{} does not exist", p.display()));
            }
        }
        Ok(())
    }

    pub fn topology(&self) -> Result<CircuitTopology> {
        match &self.circuit {
            Some(p) => CircuitTopology::load(p),
            None => Ok(crate::circuit::reference_practical_circuit()),
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(json).iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn merge(mut base: toml::Table, over: toml::Table) -> toml::Table {
    for (k, v) in over {
        match (base.remove(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => {
                base.insert(k, toml::Value::Table(merge(b, o)));
            }
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
    base
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_desk_defaults() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::for_profile(Profile::Desk));
    }

    #[test]
    fn partial_sections_merge_over_profile() {
        let cfg = RunConfig::from_toml("profile = \"paper\"\nrepeat = 3\n[sapso]\nparticles = 20\n").unwrap();
        assert_eq!(cfg.repeat, 3);
        assert_eq!(cfg.scenarios, 9000);
        assert_eq!(cfg.sapso.particles, 20);
        assert_eq!(cfg.sapso.kappa1, 2.05);
        assert_eq!(cfg.training.batch_size, 512);
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = RunConfig::for_profile(Profile::Paper);
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(RunConfig::from_toml("colour = 1"), Err(Error::Validation(_))));
        assert!(matches!(RunConfig::from_toml("repeat = 0"), Err(Error::Validation(_))));
        assert!(matches!(RunConfig::from_toml("[sapso]\nkappa1 = 1.0"), Err(Error::Validation(_))));
        assert!(matches!(RunConfig::from_toml("ims_model = \"/nonexistent/m.bin\""), Err(Error::Validation(_))));
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::for_profile(Profile::Desk);
        let b = RunConfig { seed: 43, ..a.clone() };
        assert_eq!(a.hash(), a.clone().hash());
        assert_ne!(a.hash(), b.hash());
    }
}
