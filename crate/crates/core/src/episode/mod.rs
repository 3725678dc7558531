//! Episode data model, on-disk records and structural validation.

mod codec;
mod validate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::network::NetworkState;

pub use codec::{canonicalize, parse_episode, quantize, serialize_episode, serialize_episode_pretty, to_canonical_line};
pub use validate::{validate_episode, validate_value, ValidationMode, ValidationReport, Violation, ViolationCode};

/// Free-form argument/payload/result map. Keys are kept sorted.
pub type JsonMap = BTreeMap<String, Value>;

/// Minimum and maximum number of turns in an episode (inclusive).
pub const MIN_TURNS: usize = 8;
pub const MAX_TURNS: usize = 12;
pub const MAX_ATTEMPTS: u32 = 3;
/// Battery level below which the depletion flag is raised.
pub const BATTERY_DEPLETED_PCT: f64 = 5.0;

/// JSON Schema (draft 2020-12) for a single episode in strict mode.
pub const EPISODE_SCHEMA: &str = include_str!("../../schema/episode.schema.json");

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("document does not match the episode structure: {0}")]
    Shape(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Agent,
    User,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Agent => "agent",
            Role::User => "user",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        match s {
            "agent" => Some(Role::Agent),
            "user" => Some(Role::User),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McpCall {
    pub name: String,
    #[serde(default)]
    pub args: JsonMap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct A2aTask {
    pub task: String,
    pub to: String,
    #[serde(default)]
    pub payload: JsonMap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol")]
pub enum Action {
    #[serde(rename = "mcp")]
    McpCall(McpCall),
    #[serde(rename = "a2a")]
    A2aTask(A2aTask),
    #[serde(rename = "intent_only")]
    IntentOnly,
}

impl Action {
    pub fn mcp(name: &str, args: JsonMap) -> Action {
        Action::McpCall(McpCall {
            name: name.to_string(),
            args,
        })
    }

    pub fn a2a(task: &str, to: &str, payload: JsonMap) -> Action {
        Action::A2aTask(A2aTask {
            task: task.to_string(),
            to: to.to_string(),
            payload,
        })
    }

    /// MCP calls and A2A tasks; intent-only decisions are not structured.
    pub fn is_structured(&self) -> bool {
        !matches!(self, Action::IntentOnly)
    }

    /// Tool or task identifier for structured actions.
    pub fn identifier(&self) -> Option<&str> {
        match self {
            Action::McpCall(c) => Some(&c.name),
            Action::A2aTask(t) => Some(&t.task),
            Action::IntentOnly => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AckStatus {
    Ok,
    Degraded,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McpResult {
    pub tool: String,
    #[serde(default)]
    pub result: JsonMap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct A2aAck {
    pub task: String,
    pub from: String,
    pub status: AckStatus,
    #[serde(default)]
    pub payload: JsonMap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Observation {
    #[serde(rename = "mcp_result")]
    McpResult(McpResult),
    #[serde(rename = "a2a_ack")]
    A2aAck(A2aAck),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub role: Role,
    pub intent: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<Action>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observation: Option<Observation>,
    pub network: NetworkState,
}

impl Turn {
    pub fn structured_action(&self) -> Option<&Action> {
        self.action.as_ref().filter(|a| a.is_structured())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalState {
    pub position: [f64; 3],
    /// Speed magnitude in m/s.
    pub velocity: f64,
    pub yaw: f64,
    pub battery: f64,
    pub mission_completed: bool,
    pub altitude_violation: bool,
    pub nfz_violation: bool,
    pub separation_breach: bool,
    pub battery_depleted: bool,
}

impl FinalState {
    pub fn any_violation(&self) -> bool {
        self.altitude_violation || self.nfz_violation || self.separation_breach || self.battery_depleted
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetadata {
    pub model: String,
    pub seed: u64,
    pub scenario_id: String,
    pub gen_time_s: f64,
    pub attempts_used: u32,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub total_tokens: u64,
    pub timestamp: String,
    #[serde(default)]
    pub temperature: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub episode_id: String,
    pub metadata: EpisodeMetadata,
    pub turns: Vec<Turn>,
    pub final_state: FinalState,
}

impl Episode {
    pub fn structured_actions(&self) -> impl Iterator<Item = &Action> {
        self.turns.iter().filter_map(Turn::structured_action)
    }

    pub fn agent_turns(&self) -> impl Iterator<Item = (usize, &Turn)> {
        self.turns.iter().enumerate().filter(|(_, t)| t.role == Role::Agent)
    }
}

/// Terminal reason recorded on a failure stub.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    SchemaInvalid,
    AlternationViolation,
    TurnBounds,
    RoleDisallowed,
    Internal,
}

/// Persisted record of a generation that failed every attempt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureStub {
    pub kind: StubTag,
    pub episode_id: String,
    pub scenario_id: String,
    pub model: String,
    pub seed: u64,
    pub attempts_used: u32,
    pub error_kind: ErrorKind,
    pub timestamp: String,
}

/// Serializes as the literal `"failure_stub"`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum StubTag {
    #[default]
    #[serde(rename = "failure_stub")]
    FailureStub,
}

pub fn make_failure_stub(
    episode_id: &str,
    scenario_id: &str,
    model: &str,
    seed: u64,
    error_kind: ErrorKind,
    timestamp: &str,
) -> FailureStub {
    FailureStub {
        kind: StubTag::FailureStub,
        episode_id: episode_id.to_string(),
        scenario_id: scenario_id.to_string(),
        model: model.to_string(),
        seed,
        attempts_used: MAX_ATTEMPTS,
        error_kind,
        timestamp: timestamp.to_string(),
    }
}

/// One line of a corpus file.
#[derive(Clone, Debug, PartialEq)]
pub enum CorpusRecord {
    Episode(Box<Episode>),
    Stub(FailureStub),
}

impl CorpusRecord {
    pub fn episode_id(&self) -> &str {
        match self {
            CorpusRecord::Episode(e) => &e.episode_id,
            CorpusRecord::Stub(s) => &s.episode_id,
        }
    }

    pub fn model(&self) -> &str {
        match self {
            CorpusRecord::Episode(e) => &e.metadata.model,
            CorpusRecord::Stub(s) => &s.model,
        }
    }

    pub fn attempts_used(&self) -> u32 {
        match self {
            CorpusRecord::Episode(e) => e.metadata.attempts_used,
            CorpusRecord::Stub(s) => s.attempts_used,
        }
    }

    pub fn to_line(&self) -> String {
        match self {
            CorpusRecord::Episode(e) => to_canonical_line(e.as_ref()),
            CorpusRecord::Stub(s) => to_canonical_line(s),
        }
    }
}

/// True when a raw record carries the `"kind": "failure_stub"` marker.
pub fn is_stub_value(v: &Value) -> bool {
    v.get("kind").and_then(Value::as_str) == Some("failure_stub")
}

pub fn parse_stub(v: Value) -> Result<FailureStub, ParseError> {
    serde_json::from_value(v).map_err(|e| ParseError::Shape(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failure_stub_constructor() {
        let stub = make_failure_stub("S17__g__0000", "S17", "scripted-greedy", 77, ErrorKind::SchemaInvalid, "t");
        assert_eq!(stub.attempts_used, 3);
        let line = to_canonical_line(&stub);
        assert!(line.contains(r#""kind":"failure_stub""#));
        assert!(!line.contains("turns"));
        let v: Value = serde_json::from_str(&line).unwrap();
        assert!(is_stub_value(&v));
        assert_eq!(parse_stub(v).unwrap(), stub);
    }

    #[test]
    fn action_wire_shape() {
        let a = Action::mcp("read_telemetry", JsonMap::new());
        let v = serde_json::to_value(&a).unwrap();
        assert_eq!(v["protocol"], "mcp");
        assert_eq!(v["name"], "read_telemetry");
        let i = serde_json::to_value(Action::IntentOnly).unwrap();
        assert_eq!(i, serde_json::json!({"protocol": "intent_only"}));
    }
}
