//! Agent policies, the simulated user and the retrying episode generator.

mod external;
mod pilots;
mod runner;
mod user;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::{MissionObjective, UavState};
use crate::episode::{Action, Observation};
use crate::network::NetworkState;
use crate::tools::{Protocol, ToolRegistry};

pub use external::ExternalAgent;
pub use pilots::{AdaptivePilot, FaultMode, FaultyAgent, GreedyStreamer, SafePilot};
pub use runner::{
    run_episode, ClockMode, EpisodeJob, GenTimeModel, PreparedScenario, RunSettings, TokenModel, CANONICAL_TIMESTAMP,
};
pub use user::UserSimulator;

pub const BUILTIN_AGENTS: [&str; 5] = [
    "safe_pilot",
    "greedy_streamer",
    "adaptive_pilot",
    "faulty_always",
    "faulty_once",
];

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("unknown agent '{0}'")]
    Unknown(String),
    #[error("external agent: {0}")]
    External(String),
}

/// A turn as assembled during generation, before validation. The role is
/// free text so misbehaving agents can be recorded faithfully.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DraftTurn {
    pub role: String,
    pub intent: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<Action>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observation: Option<Observation>,
    pub network: NetworkState,
}

/// What a policy sees when it is asked for the next agent turn.
pub struct PolicyContext<'a> {
    pub turn_index: usize,
    pub history: &'a [DraftTurn],
    pub state: &'a UavState,
    pub network: &'a NetworkState,
    pub mission: &'a MissionObjective,
    pub peers: &'a [String],
    pub geofences: usize,
    /// 0 on the first attempt, rising with each retry.
    pub strictness: u8,
    pub registry: &'a ToolRegistry,
}

impl PolicyContext<'_> {
    pub fn agent_actions(&self) -> impl Iterator<Item = &Action> {
        self.history
            .iter()
            .filter(|t| t.role == "agent")
            .filter_map(|t| t.action.as_ref())
    }

    pub fn has_called(&self, name: &str) -> bool {
        self.agent_actions().any(|a| a.identifier() == Some(name))
    }

    pub fn last_observation(&self) -> Option<&Observation> {
        self.history.iter().rev().find_map(|t| t.observation.as_ref())
    }

    pub fn distance_to_waypoint(&self) -> f64 {
        (self.state.position() - self.mission.waypoint).norm()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AgentReply {
    pub intent: String,
    #[serde(default)]
    pub action: Option<Action>,
    /// Speaker override; well-behaved agents leave this unset.
    #[serde(default)]
    pub role: Option<String>,
}

impl AgentReply {
    pub fn new(intent: impl Into<String>, action: Action) -> AgentReply {
        AgentReply {
            intent: intent.into(),
            action: Some(action),
            role: None,
        }
    }
}

pub trait AgentPolicy: Send {
    fn name(&self) -> &str;
    fn next_turn(&mut self, ctx: &PolicyContext<'_>) -> AgentReply;
}

/// Communication-safe subset of actions under a degraded link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveActionFilter {
    pub latency_ms: f64,
    pub loss_pct: f64,
    pub permitted: Vec<String>,
}

impl Default for AdaptiveActionFilter {
    fn default() -> Self {
        AdaptiveActionFilter {
            latency_ms: 40.0,
            loss_pct: 1.0,
            permitted: ["switch_network_slice", "read_telemetry", "land", "hover"]
                .map(String::from)
                .to_vec(),
        }
    }
}

impl AdaptiveActionFilter {
    pub fn degraded(&self, n: &NetworkState) -> bool {
        n.latency_ms > self.latency_ms || n.loss_pct >= self.loss_pct
    }

    /// Deferrals (no structured action) are always allowed.
    pub fn permits(&self, a: Option<&Action>, n: &NetworkState) -> bool {
        match a {
            Some(Action::McpCall(c)) if self.degraded(n) => self.permitted.iter().any(|p| p == &c.name),
            Some(Action::A2aTask(_)) => !self.degraded(n),
            _ => true,
        }
    }
}

/// Action-space narrowing applied by the generator on retries.
pub fn constrain(reply: AgentReply, strictness: u8, registry: &ToolRegistry, network: &NetworkState) -> AgentReply {
    let known = |a: &Action| match a {
        Action::McpCall(c) => registry.contains(&c.name, Protocol::Mcp),
        Action::A2aTask(t) => registry.contains(&t.task, Protocol::A2a),
        Action::IntentOnly => true,
    };
    let mut reply = reply;
    if strictness >= 1 && reply.action.as_ref().is_some_and(|a| !known(a)) {
        reply.action = Some(Action::IntentOnly);
    }
    if strictness >= 2 && !AdaptiveActionFilter::default().permits(reply.action.as_ref(), network) {
        reply.action = Some(Action::IntentOnly);
    }
    reply
}

/// Builds a fresh policy by name. `external:<command>` spawns a subprocess.
pub fn make_agent(name: &str) -> Result<Box<dyn AgentPolicy>, AgentError> {
    if let Some(cmd) = name.strip_prefix("external:") {
        return Ok(Box::new(ExternalAgent::spawn(name, cmd)?));
    }
    Ok(match name {
        "safe_pilot" => Box::new(SafePilot::new()),
        "greedy_streamer" => Box::new(GreedyStreamer::new()),
        "adaptive_pilot" => Box::new(AdaptivePilot::new()),
        "faulty_always" => Box::new(FaultyAgent::new(name, FaultMode::SystemRoleAlways)),
        "faulty_once" => Box::new(FaultyAgent::new(name, FaultMode::SystemRoleAtStrictnessZero)),
        other => return Err(AgentError::Unknown(other.to_string())),
    })
}

/// Checks an agent name without starting anything.
pub fn is_known_agent(name: &str) -> bool {
    BUILTIN_AGENTS.contains(&name) || name.starts_with("external:")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::episode::JsonMap;
    use crate::network::Slice;

    fn net(latency: f64, loss: f64) -> NetworkState {
        NetworkState {
            slice: Slice::Embb,
            latency_ms: latency,
            jitter_ms: 1.0,
            loss_pct: loss,
            throughput_mbps: 500.0,
            edge_load: 0.5,
        }
    }

    #[test]
    fn filter_subset() {
        let f = AdaptiveActionFilter::default();
        let cap = Action::mcp("capture_image", JsonMap::new());
        let tel = Action::mcp("read_telemetry", JsonMap::new());
        let a2a = Action::a2a("collision_avoidance", "P2", JsonMap::new());
        assert!(f.permits(Some(&cap), &net(20.0, 0.5)));
        assert!(!f.permits(Some(&cap), &net(40.1, 0.5)));
        assert!(!f.permits(Some(&cap), &net(20.0, 1.0)));
        assert!(f.permits(Some(&cap), &net(40.0, 0.99)));
        assert!(f.permits(Some(&tel), &net(90.0, 5.0)));
        assert!(!f.permits(Some(&a2a), &net(90.0, 0.0)));
        assert!(f.permits(Some(&Action::IntentOnly), &net(90.0, 5.0)));
        assert!(f.permits(None, &net(90.0, 5.0)));
    }

    #[test]
    fn constrain_levels() {
        let reg = ToolRegistry::builtin();
        let bogus = AgentReply::new("x", Action::mcp("teleport", JsonMap::new()));
        assert_eq!(constrain(bogus.clone(), 0, &reg, &net(10.0, 0.0)).action, bogus.action);
        assert_eq!(constrain(bogus, 1, &reg, &net(10.0, 0.0)).action, Some(Action::IntentOnly));
        let cap = AgentReply::new("x", Action::mcp("capture_image", JsonMap::new()));
        assert_eq!(constrain(cap.clone(), 1, &reg, &net(90.0, 0.0)).action, cap.action);
        assert_eq!(constrain(cap, 2, &reg, &net(90.0, 0.0)).action, Some(Action::IntentOnly));
    }

    #[test]
    fn factory_names() {
        for name in BUILTIN_AGENTS {
            assert_eq!(make_agent(name).unwrap().name(), name);
        }
        assert!(matches!(make_agent("gpt-9"), Err(AgentError::Unknown(_))));
    }
}
