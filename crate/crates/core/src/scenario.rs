//! Mission scenario files.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::{Airspace, DisturbanceModel, KinematicState, MissionObjective, UavState, VehicleParams};
use crate::episode::JsonMap;
use crate::network::{CalibrationError, CalibrationTargets, Slice, SliceCalibration};
use crate::tools::SwarmContext;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("scenario {id}: {reason}")]
    Invalid { id: String, reason: String },
    #[error("scenario {id}: {source}")]
    Calibration {
        id: String,
        #[source]
        source: CalibrationError,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    pub position: [f64; 3],
    #[serde(default)]
    pub yaw: f64,
    #[serde(default = "full_battery")]
    pub battery: f64,
}

fn full_battery() -> f64 {
    100.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioNetwork {
    pub initial_slice: Slice,
    #[serde(default)]
    pub switch_probability: Option<f64>,
    #[serde(default)]
    pub mixing_weight: Option<f64>,
    /// Per-slice patches applied to the calibration targets before fitting.
    #[serde(default)]
    pub overrides: BTreeMap<Slice, JsonMap>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserMode {
    #[default]
    ScriptedTemplate,
    FixedPrompt,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UserConfig {
    #[serde(default)]
    pub mode: UserMode,
    #[serde(default)]
    pub prompts: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub scenario_id: String,
    #[serde(default)]
    pub description: String,
    /// Part of the clean suite: nominal network, no hazards on the planned path.
    #[serde(default)]
    pub clean: bool,
    pub airspace: Airspace,
    pub initial_state: InitialState,
    #[serde(default)]
    pub vehicle: VehicleParams,
    #[serde(default)]
    pub disturbance: DisturbanceModel,
    pub objective: MissionObjective,
    pub network: ScenarioNetwork,
    #[serde(default)]
    pub swarm: SwarmContext,
    #[serde(default)]
    pub user: UserConfig,
}

impl Scenario {
    pub fn from_json(text: &str, origin: &str) -> Result<Scenario, ScenarioError> {
        let s: Scenario = serde_json::from_str(text).map_err(|source| ScenarioError::Parse {
            path: origin.to_string(),
            source,
        })?;
        s.check()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scenario::from_json(&text, &path.display().to_string())
    }

    /// Loads every `*.json` in a directory, or a single file, sorted by scenario id.
    pub fn load_set(path: &Path) -> Result<Vec<Scenario>, ScenarioError> {
        let io = |source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut out = Vec::new();
        if path.is_dir() {
            let mut files: Vec<_> = std::fs::read_dir(path)
                .map_err(io)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            for f in files {
                out.push(Scenario::load(&f)?);
            }
        } else {
            out.push(Scenario::load(path)?);
        }
        out.sort_by(|a, b| a.scenario_id.cmp(&b.scenario_id));
        if let Some(w) = out.windows(2).find(|w| w[0].scenario_id == w[1].scenario_id) {
            return Err(ScenarioError::Invalid {
                id: w[0].scenario_id.clone(),
                reason: "duplicate scenario id".into(),
            });
        }
        Ok(out)
    }

    fn invalid(&self, reason: impl Into<String>) -> ScenarioError {
        ScenarioError::Invalid {
            id: self.scenario_id.clone(),
            reason: reason.into(),
        }
    }

    pub fn check(&self) -> Result<(), ScenarioError> {
        if self.scenario_id.trim().is_empty() {
            return Err(self.invalid("empty scenario_id"));
        }
        self.vehicle.check().map_err(|e| self.invalid(e.to_string()))?;
        let z = self.initial_state.position[2];
        if !(self.airspace.z_min..=self.airspace.z_max).contains(&z) {
            return Err(self.invalid("initial altitude outside the airspace"));
        }
        if !(0.0..=100.0).contains(&self.initial_state.battery) {
            return Err(self.invalid("initial battery outside [0, 100]"));
        }
        let w = self.objective.waypoint;
        if !(self.airspace.z_min..=self.airspace.z_max).contains(&w.z) {
            return Err(self.invalid("waypoint altitude outside the airspace"));
        }
        if !(self.objective.tolerance_m > 0.0) {
            return Err(self.invalid("objective tolerance must be positive"));
        }
        if let Some((id, _)) = self.swarm.peers.iter().find(|(_, p)| p.positions.is_empty()) {
            return Err(self.invalid(format!("peer {id} has no positions")));
        }
        if self.user.mode == UserMode::FixedPrompt && self.user.prompts.is_empty() {
            return Err(self.invalid("fixed_prompt mode needs prompts"));
        }
        for p in [self.network.switch_probability, self.network.mixing_weight].into_iter().flatten() {
            if !(0.0..=1.0).contains(&p) {
                return Err(self.invalid("network probabilities must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn initial_uav_state(&self) -> UavState {
        let [x, y, z] = self.initial_state.position;
        UavState::new(KinematicState::at(Vector3::new(x, y, z), self.initial_state.yaw), self.initial_state.battery)
    }

    /// Network model for this scenario: overrides refit from the base targets.
    pub fn calibration(&self, targets: &CalibrationTargets, base: &SliceCalibration) -> Result<SliceCalibration, ScenarioError> {
        let mut calib = if self.network.overrides.is_empty() {
            base.clone()
        } else {
            let mut patched = targets.clone();
            for (slice, patch) in &self.network.overrides {
                let t = patched.get_mut(*slice);
                let mut v = serde_json::to_value(&*t).expect("targets serialize");
                for (k, x) in patch {
                    if v.get(k).is_none() {
                        return Err(self.invalid(format!("unknown calibration field '{k}' for {slice}")));
                    }
                    v[k] = x.clone();
                }
                *t = serde_json::from_value(v).map_err(|e| self.invalid(format!("override for {slice}: {e}")))?;
            }
            let mut c = SliceCalibration::fit(&patched).map_err(|source| ScenarioError::Calibration {
                id: self.scenario_id.clone(),
                source,
            })?;
            c.switch_probability = base.switch_probability;
            c.mixing_weight = base.mixing_weight;
            c
        };
        if let Some(p) = self.network.switch_probability {
            calib.switch_probability = p;
        }
        if let Some(w) = self.network.mixing_weight {
            calib.mixing_weight = w;
        }
        Ok(calib)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "scenario_id": "T1",
        "airspace": {"z_min": 10, "z_max": 120},
        "initial_state": {"position": [0, 0, 40]},
        "objective": {"waypoint": [50, 30, 40], "require_capture": true},
        "network": {"initial_slice": "URLLC", "switch_probability": 0.0,
                    "overrides": {"eMBB": {"loss_mean": 4.0}}}
    }"#;

    #[test]
    fn minimal_scenario_loads_with_defaults() {
        let s = Scenario::from_json(MINIMAL, "inline").unwrap();
        assert_eq!(s.initial_state.battery, 100.0);
        assert_eq!(s.objective.tolerance_m, 5.0);
        assert_eq!(s.user.mode, UserMode::ScriptedTemplate);
        let calib = s.calibration(&CalibrationTargets::default(), &SliceCalibration::default()).unwrap();
        assert_eq!(calib.switch_probability, 0.0);
        assert_ne!(calib.embb, SliceCalibration::default().embb);
        assert_eq!(calib.urllc, SliceCalibration::default().urllc);
    }

    #[test]
    fn bad_scenarios_are_rejected() {
        let high = MINIMAL.replace("[50, 30, 40]", "[50, 30, 400]");
        assert!(matches!(Scenario::from_json(&high, "x"), Err(ScenarioError::Invalid { .. })));
        let unknown = MINIMAL.replace("loss_mean", "loss_median");
        let s = Scenario::from_json(&unknown, "x").unwrap();
        assert!(s.calibration(&CalibrationTargets::default(), &SliceCalibration::default()).is_err());
        assert!(matches!(Scenario::from_json("{", "x"), Err(ScenarioError::Parse { .. })));
    }
}
