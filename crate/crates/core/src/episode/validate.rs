use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{ErrorKind, ParseError, BATTERY_DEPLETED_PCT, MAX_ATTEMPTS, MAX_TURNS, MIN_TURNS};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationMode {
    /// Unknown fields are violations.
    #[default]
    Strict,
    /// Unknown fields are ignored.
    Lenient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationCode {
    WrongType,
    MissingField,
    UnknownField,
    InvalidValue,
    EmptyIntent,
    RoleDisallowed,
    FirstRole,
    AlternationViolation,
    TurnBounds,
    UserAction,
    NetworkRange,
    BatteryRange,
    FlagInconsistent,
    TokenMismatch,
    AttemptsRange,
}

impl ViolationCode {
    pub const ALL: [ViolationCode; 15] = [
        ViolationCode::WrongType,
        ViolationCode::MissingField,
        ViolationCode::UnknownField,
        ViolationCode::InvalidValue,
        ViolationCode::EmptyIntent,
        ViolationCode::RoleDisallowed,
        ViolationCode::FirstRole,
        ViolationCode::AlternationViolation,
        ViolationCode::TurnBounds,
        ViolationCode::UserAction,
        ViolationCode::NetworkRange,
        ViolationCode::BatteryRange,
        ViolationCode::FlagInconsistent,
        ViolationCode::TokenMismatch,
        ViolationCode::AttemptsRange,
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    /// Offending turn index, or -1 for episode-level problems.
    pub turn: i64,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    /// Collapse violations to the terminal error kind recorded on stubs.
    pub fn error_kind(&self) -> Option<ErrorKind> {
        if self.valid {
            return None;
        }
        Some(if self.has(ViolationCode::RoleDisallowed) {
            ErrorKind::RoleDisallowed
        } else if self.has(ViolationCode::AlternationViolation) || self.has(ViolationCode::FirstRole) {
            ErrorKind::AlternationViolation
        } else if self.has(ViolationCode::TurnBounds) {
            ErrorKind::TurnBounds
        } else {
            ErrorKind::SchemaInvalid
        })
    }
}

/// Parse and validate a raw document.
pub fn validate_episode(text: &str, mode: ValidationMode) -> Result<ValidationReport, ParseError> {
    let v: Value = serde_json::from_str(text)?;
    Ok(validate_value(&v, mode))
}

/// Validate an already-parsed document. Total over every JSON value.
pub fn validate_value(doc: &Value, mode: ValidationMode) -> ValidationReport {
    let mut w = Walker { mode, out: Vec::new() };
    w.episode(doc);
    ValidationReport {
        valid: w.out.is_empty(),
        violations: w.out,
    }
}

const EPISODE_KEYS: &[&str] = &["episode_id", "metadata", "turns", "final_state"];
const METADATA_KEYS: &[&str] = &[
    "model",
    "seed",
    "scenario_id",
    "gen_time_s",
    "attempts_used",
    "prompt_tokens",
    "completion_tokens",
    "total_tokens",
    "timestamp",
    "temperature",
];
const TURN_KEYS: &[&str] = &["role", "intent", "action", "observation", "network"];
const NETWORK_KEYS: &[&str] = &["slice", "latency_ms", "jitter_ms", "loss_pct", "throughput_mbps", "edge_load"];
const FINAL_KEYS: &[&str] = &[
    "position",
    "velocity",
    "yaw",
    "battery",
    "mission_completed",
    "altitude_violation",
    "nfz_violation",
    "separation_breach",
    "battery_depleted",
];

struct Walker {
    mode: ValidationMode,
    out: Vec<Violation>,
}

impl Walker {
    fn push(&mut self, code: ViolationCode, turn: i64, message: impl Into<String>) {
        self.out.push(Violation {
            code,
            turn,
            message: message.into(),
        });
    }

    fn object<'a>(&mut self, v: &'a Value, path: &str, turn: i64) -> Option<&'a Map<String, Value>> {
        match v.as_object() {
            Some(m) => Some(m),
            None => {
                self.push(ViolationCode::WrongType, turn, format!("{path}: expected object"));
                None
            }
        }
    }

    fn keys(&mut self, m: &Map<String, Value>, allowed: &[&str], path: &str, turn: i64) {
        if self.mode == ValidationMode::Lenient {
            return;
        }
        for k in m.keys() {
            if !allowed.contains(&k.as_str()) {
                self.push(ViolationCode::UnknownField, turn, format!("{path}.{k}: unknown field"));
            }
        }
    }

    fn required<'a>(&mut self, m: &'a Map<String, Value>, key: &str, path: &str, turn: i64) -> Option<&'a Value> {
        let v = m.get(key);
        if v.is_none() {
            self.push(ViolationCode::MissingField, turn, format!("{path}.{key}: missing"));
        }
        v
    }

    fn string<'a>(&mut self, m: &'a Map<String, Value>, key: &str, path: &str, turn: i64) -> Option<&'a str> {
        let v = self.required(m, key, path, turn)?;
        match v.as_str() {
            Some(s) => Some(s),
            None => {
                self.push(ViolationCode::WrongType, turn, format!("{path}.{key}: expected string"));
                None
            }
        }
    }

    fn nonempty(&mut self, m: &Map<String, Value>, key: &str, path: &str, turn: i64) {
        if let Some(s) = self.string(m, key, path, turn) {
            if s.trim().is_empty() {
                self.push(ViolationCode::InvalidValue, turn, format!("{path}.{key}: empty"));
            }
        }
    }

    fn number(&mut self, m: &Map<String, Value>, key: &str, path: &str, turn: i64) -> Option<f64> {
        let v = self.required(m, key, path, turn)?;
        match v.as_f64() {
            Some(x) => Some(x),
            None => {
                self.push(ViolationCode::WrongType, turn, format!("{path}.{key}: expected number"));
                None
            }
        }
    }

    fn count(&mut self, m: &Map<String, Value>, key: &str, path: &str, turn: i64) -> Option<u64> {
        let v = self.required(m, key, path, turn)?;
        match v.as_u64() {
            Some(x) => Some(x),
            None => {
                self.push(
                    ViolationCode::WrongType,
                    turn,
                    format!("{path}.{key}: expected non-negative integer"),
                );
                None
            }
        }
    }

    fn boolean(&mut self, m: &Map<String, Value>, key: &str, path: &str, turn: i64) -> Option<bool> {
        let v = self.required(m, key, path, turn)?;
        match v.as_bool() {
            Some(b) => Some(b),
            None => {
                self.push(ViolationCode::WrongType, turn, format!("{path}.{key}: expected boolean"));
                None
            }
        }
    }

    fn map_field(&mut self, m: &Map<String, Value>, key: &str, path: &str, turn: i64) {
        if let Some(v) = self.required(m, key, path, turn) {
            if !v.is_object() {
                self.push(ViolationCode::WrongType, turn, format!("{path}.{key}: expected object"));
            }
        }
    }

    fn episode(&mut self, doc: &Value) {
        let Some(root) = self.object(doc, "$", -1) else {
            return;
        };
        self.keys(root, EPISODE_KEYS, "$", -1);
        self.nonempty(root, "episode_id", "$", -1);
        if let Some(meta) = self.required(root, "metadata", "$", -1) {
            self.metadata(meta);
        }
        if let Some(turns) = self.required(root, "turns", "$", -1) {
            self.turns(turns);
        }
        if let Some(fs) = self.required(root, "final_state", "$", -1) {
            self.final_state(fs);
        }
    }

    fn metadata(&mut self, v: &Value) {
        let path = "$.metadata";
        let Some(m) = self.object(v, path, -1) else {
            return;
        };
        self.keys(m, METADATA_KEYS, path, -1);
        self.nonempty(m, "model", path, -1);
        self.count(m, "seed", path, -1);
        self.nonempty(m, "scenario_id", path, -1);
        if let Some(t) = self.number(m, "gen_time_s", path, -1) {
            if t < 0.0 {
                self.push(ViolationCode::InvalidValue, -1, format!("{path}.gen_time_s: negative"));
            }
        }
        if let Some(a) = self.count(m, "attempts_used", path, -1) {
            if a < 1 || a > MAX_ATTEMPTS as u64 {
                self.push(
                    ViolationCode::AttemptsRange,
                    -1,
                    format!("{path}.attempts_used: {a} outside [1, {MAX_ATTEMPTS}]"),
                );
            }
        }
        let prompt = self.count(m, "prompt_tokens", path, -1);
        let completion = self.count(m, "completion_tokens", path, -1);
        let total = self.count(m, "total_tokens", path, -1);
        if let (Some(p), Some(c), Some(t)) = (prompt, completion, total) {
            if p.checked_add(c) != Some(t) {
                self.push(
                    ViolationCode::TokenMismatch,
                    -1,
                    format!("{path}: total_tokens {t} != prompt {p} + completion {c}"),
                );
            }
        }
        if let Some(ts) = self.string(m, "timestamp", path, -1) {
            if chrono::DateTime::parse_from_rfc3339(ts).is_err() {
                self.push(
                    ViolationCode::InvalidValue,
                    -1,
                    format!("{path}.timestamp: not an ISO-8601 date-time"),
                );
            }
        }
        if let Some(temp) = m.get("temperature") {
            if !temp.as_f64().is_some_and(|t| t >= 0.0) {
                self.push(
                    ViolationCode::InvalidValue,
                    -1,
                    format!("{path}.temperature: expected number >= 0"),
                );
            }
        }
    }

    fn turns(&mut self, v: &Value) {
        let Some(turns) = v.as_array() else {
            self.push(ViolationCode::WrongType, -1, "$.turns: expected array");
            return;
        };
        if !(MIN_TURNS..=MAX_TURNS).contains(&turns.len()) {
            self.push(
                ViolationCode::TurnBounds,
                -1,
                format!("$.turns: {} turns outside [{MIN_TURNS}, {MAX_TURNS}]", turns.len()),
            );
        }
        let mut prev_role: Option<&str> = None;
        for (i, t) in turns.iter().enumerate() {
            let role = self.turn(i, t);
            if let (Some(prev), Some(cur)) = (prev_role, role) {
                if prev == cur {
                    self.push(
                        ViolationCode::AlternationViolation,
                        i as i64,
                        format!("$.turns[{i}]: role '{cur}' repeats the previous speaker"),
                    );
                }
            }
            if i == 0 && role == Some("agent") {
                self.push(ViolationCode::FirstRole, 0, "$.turns[0]: first speaker must be user");
            }
            prev_role = role;
        }
    }

    /// Returns the raw role string when present.
    fn turn<'a>(&mut self, i: usize, v: &'a Value) -> Option<&'a str> {
        let idx = i as i64;
        let path = format!("$.turns[{i}]");
        let m = self.object(v, &path, idx)?;
        self.keys(m, TURN_KEYS, &path, idx);
        let role = self.string(m, "role", &path, idx);
        if let Some(r) = role {
            if r != "agent" && r != "user" {
                self.push(
                    ViolationCode::RoleDisallowed,
                    idx,
                    format!("{path}.role: '{r}' is not an allowed speaker"),
                );
            }
        }
        if let Some(intent) = self.string(m, "intent", &path, idx) {
            if intent.trim().is_empty() {
                self.push(ViolationCode::EmptyIntent, idx, format!("{path}.intent: empty"));
            }
        }
        let structured = match m.get("action") {
            None | Some(Value::Null) => false,
            Some(a) => self.action(a, &format!("{path}.action"), idx),
        };
        let observed = match m.get("observation") {
            None | Some(Value::Null) => false,
            Some(o) => {
                self.observation(o, &format!("{path}.observation"), idx);
                true
            }
        };
        if role == Some("user") && (structured || observed) {
            self.push(
                ViolationCode::UserAction,
                idx,
                format!("{path}: user turns carry no structured action or observation"),
            );
        }
        if let Some(n) = self.required(m, "network", &path, idx) {
            self.network(n, &format!("{path}.network"), idx);
        }
        role
    }

    /// Returns true for MCP/A2A actions.
    fn action(&mut self, v: &Value, path: &str, idx: i64) -> bool {
        let Some(m) = self.object(v, path, idx) else {
            return false;
        };
        let Some(protocol) = self.string(m, "protocol", path, idx) else {
            return false;
        };
        match protocol {
            "mcp" => {
                self.keys(m, &["protocol", "name", "args"], path, idx);
                self.nonempty(m, "name", path, idx);
                self.map_field(m, "args", path, idx);
                true
            }
            "a2a" => {
                self.keys(m, &["protocol", "task", "to", "payload"], path, idx);
                self.nonempty(m, "task", path, idx);
                self.nonempty(m, "to", path, idx);
                self.map_field(m, "payload", path, idx);
                true
            }
            "intent_only" => {
                self.keys(m, &["protocol"], path, idx);
                false
            }
            other => {
                self.push(
                    ViolationCode::InvalidValue,
                    idx,
                    format!("{path}.protocol: unknown protocol '{other}'"),
                );
                false
            }
        }
    }

    fn observation(&mut self, v: &Value, path: &str, idx: i64) {
        let Some(m) = self.object(v, path, idx) else {
            return;
        };
        let Some(kind) = self.string(m, "kind", path, idx) else {
            return;
        };
        match kind {
            "mcp_result" => {
                self.keys(m, &["kind", "tool", "result"], path, idx);
                self.nonempty(m, "tool", path, idx);
                self.map_field(m, "result", path, idx);
            }
            "a2a_ack" => {
                self.keys(m, &["kind", "task", "from", "status", "payload"], path, idx);
                self.nonempty(m, "task", path, idx);
                self.nonempty(m, "from", path, idx);
                if let Some(s) = self.string(m, "status", path, idx) {
                    if !matches!(s, "ok" | "degraded" | "failed") {
                        self.push(
                            ViolationCode::InvalidValue,
                            idx,
                            format!("{path}.status: unknown status '{s}'"),
                        );
                    }
                }
                self.map_field(m, "payload", path, idx);
            }
            other => self.push(
                ViolationCode::InvalidValue,
                idx,
                format!("{path}.kind: unknown observation kind '{other}'"),
            ),
        }
    }

    fn network(&mut self, v: &Value, path: &str, idx: i64) {
        let Some(m) = self.object(v, path, idx) else {
            return;
        };
        self.keys(m, NETWORK_KEYS, path, idx);
        if let Some(s) = self.string(m, "slice", path, idx) {
            if crate::network::Slice::parse(s).is_none() {
                self.push(ViolationCode::InvalidValue, idx, format!("{path}.slice: unknown slice '{s}'"));
            }
        }
        let range = |w: &mut Walker, key: &str, ok: fn(f64) -> bool, expect: &str| {
            if let Some(x) = w.number(m, key, path, idx) {
                if !ok(x) {
                    w.push(ViolationCode::NetworkRange, idx, format!("{path}.{key}: {x} not {expect}"));
                }
            }
        };
        range(self, "latency_ms", |x| x > 0.0, "> 0");
        range(self, "jitter_ms", |x| x >= 0.0, ">= 0");
        range(self, "loss_pct", |x| (0.0..=100.0).contains(&x), "in [0, 100]");
        range(self, "throughput_mbps", |x| x >= 0.0, ">= 0");
        range(self, "edge_load", |x| (0.0..=1.0).contains(&x), "in [0, 1]");
    }

    fn final_state(&mut self, v: &Value) {
        let path = "$.final_state";
        let Some(m) = self.object(v, path, -1) else {
            return;
        };
        self.keys(m, FINAL_KEYS, path, -1);
        if let Some(p) = self.required(m, "position", path, -1) {
            let ok = p
                .as_array()
                .is_some_and(|a| a.len() == 3 && a.iter().all(Value::is_number));
            if !ok {
                self.push(
                    ViolationCode::WrongType,
                    -1,
                    format!("{path}.position: expected 3 numbers"),
                );
            }
        }
        if let Some(speed) = self.number(m, "velocity", path, -1) {
            if speed < 0.0 {
                self.push(ViolationCode::InvalidValue, -1, format!("{path}.velocity: negative speed"));
            }
        }
        self.number(m, "yaw", path, -1);
        let battery = self.number(m, "battery", path, -1);
        if let Some(b) = battery {
            if !(0.0..=100.0).contains(&b) {
                self.push(ViolationCode::BatteryRange, -1, format!("{path}.battery: {b} outside [0, 100]"));
            }
        }
        for flag in [
            "mission_completed",
            "altitude_violation",
            "nfz_violation",
            "separation_breach",
        ] {
            self.boolean(m, flag, path, -1);
        }
        let depleted = self.boolean(m, "battery_depleted", path, -1);
        if let (Some(b), Some(false)) = (battery, depleted) {
            if b < BATTERY_DEPLETED_PCT {
                self.push(
                    ViolationCode::FlagInconsistent,
                    -1,
                    format!("{path}: battery {b} below {BATTERY_DEPLETED_PCT} without battery_depleted"),
                );
            }
        }
    }
}
