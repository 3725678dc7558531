use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::agents::{is_known_agent, ClockMode, RunSettings};
use crate::episode::MAX_ATTEMPTS;
use crate::network::{verify, CalibrationTargets, SliceCalibration, VerifyOptions};
use crate::scenario::Scenario;
use crate::seeding::{DEFAULT_EPISODE_SEEDS, DEFAULT_GLOBAL_SEED};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Scenario file or directory of `*.json` scenarios.
    pub scenarios: PathBuf,
    pub agents: Vec<String>,
    pub episodes_per_scenario: usize,
    pub seed: u64,
    pub episode_seeds: Vec<u64>,
    pub max_turn_tokens: u64,
    pub temperature: f64,
    pub max_attempts: u32,
    pub out: PathBuf,
    pub parallel: usize,
    pub calibration: Option<PathBuf>,
    pub canonical: bool,
    pub clock: ClockMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenarios: PathBuf::from("scenarios"),
            agents: vec!["safe_pilot".into()],
            episodes_per_scenario: 50,
            seed: DEFAULT_GLOBAL_SEED,
            episode_seeds: DEFAULT_EPISODE_SEEDS.to_vec(),
            max_turn_tokens: 10_000,
            temperature: 0.0,
            max_attempts: MAX_ATTEMPTS,
            out: PathBuf::from("out"),
            parallel: 1,
            calibration: None,
            canonical: false,
            clock: ClockMode::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))
    }

    pub fn check(&self) -> Result<(), HarnessError> {
        if self.episodes_per_scenario == 0 {
            return Err(HarnessError::Usage("episodes_per_scenario must be at least 1".into()));
        }
        if self.episode_seeds.is_empty() {
            return Err(HarnessError::Usage("episode seed set must not be empty".into()));
        }
        if self.agents.is_empty() {
            return Err(HarnessError::Usage("no agents given".into()));
        }
        if let Some(a) = self.agents.iter().find(|a| !is_known_agent(a)) {
            return Err(HarnessError::Usage(format!("unknown agent '{a}'")));
        }
        let mut seen = std::collections::BTreeSet::new();
        if let Some(a) = self.agents.iter().find(|a| !seen.insert(a.as_str())) {
            return Err(HarnessError::Usage(format!("agent '{a}' listed twice")));
        }
        if !(1..=MAX_ATTEMPTS).contains(&self.max_attempts) {
            return Err(HarnessError::Usage(format!("max_attempts must lie in 1..={MAX_ATTEMPTS}")));
        }
        if !(self.temperature >= 0.0) {
            return Err(HarnessError::Usage("temperature must be non-negative".into()));
        }
        Ok(())
    }

    pub fn settings(&self) -> RunSettings {
        RunSettings {
            max_attempts: self.max_attempts,
            max_turn_tokens: self.max_turn_tokens,
            temperature: self.temperature,
            clock: self.clock,
            canonical: self.canonical,
            ..RunSettings::default()
        }
    }

    /// Fingerprint of everything that determines corpus bytes. Output location
    /// and thread count are excluded.
    pub fn fingerprint(&self, scenarios: &[Scenario], calibration: &CalibrationConfig) -> String {
        let mut cfg = serde_json::to_value(self).expect("config serializes");
        if let Some(m) = cfg.as_object_mut() {
            for k in ["out", "parallel", "scenarios", "calibration"] {
                m.remove(k);
            }
        }
        let doc = json!({"config": cfg, "scenarios": scenarios, "calibration": calibration});
        hex(&Sha256::digest(doc.to_string().as_bytes()))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Network calibration file: targets, evolution knobs and an optional
/// sampling check run before generation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    #[serde(default)]
    pub targets: CalibrationTargets,
    #[serde(default = "default_switch")]
    pub switch_probability: f64,
    #[serde(default = "default_mixing")]
    pub mixing_weight: f64,
    #[serde(default)]
    pub verify: Option<VerifyOptions>,
}

fn default_switch() -> f64 {
    0.05
}

fn default_mixing() -> f64 {
    0.5
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            targets: CalibrationTargets::default(),
            switch_probability: default_switch(),
            mixing_weight: default_mixing(),
            verify: None,
        }
    }
}

impl CalibrationConfig {
    pub fn load(path: &Path) -> Result<CalibrationConfig, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))
    }

    pub fn build(&self) -> Result<SliceCalibration, HarnessError> {
        let mut calib = SliceCalibration::fit(&self.targets).map_err(|e| HarnessError::Input(e.to_string()))?;
        calib.switch_probability = self.switch_probability;
        calib.mixing_weight = self.mixing_weight;
        if let Some(opts) = &self.verify {
            verify(&calib, &self.targets, opts).map_err(|e| HarnessError::Input(e.to_string()))?;
        }
        Ok(calib)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fingerprint_ignores_placement() {
        let a = RunConfig::default();
        let b = RunConfig {
            out: "elsewhere".into(),
            parallel: 8,
            ..RunConfig::default()
        };
        let c = RunConfig {
            seed: 7,
            ..RunConfig::default()
        };
        let cal = CalibrationConfig::default();
        assert_eq!(a.fingerprint(&[], &cal), b.fingerprint(&[], &cal));
        assert_ne!(a.fingerprint(&[], &cal), c.fingerprint(&[], &cal));
    }

    #[test]
    fn config_checks() {
        assert!(RunConfig::default().check().is_ok());
        let bad = [
            RunConfig {
                episodes_per_scenario: 0,
                ..RunConfig::default()
            },
            RunConfig {
                episode_seeds: vec![],
                ..RunConfig::default()
            },
            RunConfig {
                agents: vec!["nobody".into()],
                ..RunConfig::default()
            },
        ];
        for c in bad {
            assert!(matches!(c.check(), Err(HarnessError::Usage(_))));
        }
        assert!(serde_json::from_str::<RunConfig>(r#"{"sed": 1}"#).is_err());
    }
}
