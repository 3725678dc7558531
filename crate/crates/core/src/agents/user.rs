use super::DraftTurn;
use crate::environment::{MissionObjective, UavState};
use crate::network::{classify_hard, NetworkState};
use crate::scenario::{UserConfig, UserMode};

/// Mission supervisor speaking on even turns. Never issues structured actions.
#[derive(Clone, Debug, PartialEq)]
pub struct UserSimulator {
    mode: UserMode,
    prompts: Vec<String>,
    objective: MissionObjective,
}

const STATUS_PROMPTS: [&str; 3] = [
    "report progress toward the waypoint",
    "status check: confirm altitude, heading and link quality",
    "continue to the objective and keep separation from other aircraft",
];

impl UserSimulator {
    pub fn new(config: &UserConfig, objective: &MissionObjective) -> UserSimulator {
        UserSimulator {
            mode: config.mode,
            prompts: config.prompts.clone(),
            objective: objective.clone(),
        }
    }

    pub fn mode(&self) -> UserMode {
        self.mode
    }

    pub fn intent(&self, turn_index: usize, state: &UavState, network: &NetworkState) -> String {
        let user_turn = turn_index / 2;
        if self.mode == UserMode::FixedPrompt && !self.prompts.is_empty() {
            return self.prompts[user_turn % self.prompts.len()].clone();
        }
        let w = self.objective.waypoint;
        if turn_index == 0 {
            let task = if self.objective.require_capture {
                let sensor = self.objective.capture_sensor.map_or("RGB", |s| s.as_str());
                format!(", then capture {sensor} imagery there")
            } else {
                String::new()
            };
            return format!(
                "initiate mission and check telemetry, then fly to waypoint ({:.0}, {:.0}, {:.0}){task}",
                w.x, w.y, w.z
            );
        }
        if state.mission_completed {
            return "objective confirmed; verify final status before we close the mission".to_string();
        }
        if state.battery < 15.0 && !state.landed {
            return format!("battery is at {:.1}%, return and land now", state.battery);
        }
        if state.waypoint_reached && self.objective.require_capture && !self.objective.capture_satisfied(&state.captures) {
            return "you are on station, capture the imagery now".to_string();
        }
        if state.waypoint_reached && self.objective.require_landing && !state.landing {
            return "imagery received, bring the aircraft down and land".to_string();
        }
        if classify_hard(network) {
            return format!(
                "link looks degraded on {} ({:.0} ms), keep the mission safe",
                network.slice, network.latency_ms
            );
        }
        STATUS_PROMPTS[(user_turn - 1) % STATUS_PROMPTS.len()].to_string()
    }

    pub fn simulate_user_turn(&self, turn_index: usize, state: &UavState, network: &NetworkState) -> DraftTurn {
        DraftTurn {
            role: "user".into(),
            intent: self.intent(turn_index, state, network),
            action: None,
            observation: None,
            network: network.clone(),
        }
    }
}
