//! Scripted reference policies.

use nalgebra::Vector3;
use serde_json::{json, Value};

use super::{AdaptiveActionFilter, AgentPolicy, AgentReply, PolicyContext};
use crate::environment::Sensor;
use crate::episode::{Action, JsonMap, Observation};
use crate::network::{classify_hard, Slice};

/// Vehicle commands a landing at or below this charge.
pub const LOW_BATTERY_PCT: f64 = 12.0;

fn args(v: Value) -> JsonMap {
    match v {
        Value::Object(m) => m.into_iter().collect(),
        _ => JsonMap::new(),
    }
}

fn xyz(v: &Vector3<f64>) -> String {
    format!("({:.0}, {:.0}, {:.0})", v.x, v.y, v.z)
}

fn mcp(name: &str, a: Value) -> Action {
    Action::mcp(name, args(a))
}

/// Short clause citing the most recent observation.
fn recall(ctx: &PolicyContext<'_>) -> String {
    match ctx.last_observation() {
        Some(Observation::McpResult(r)) => {
            if let Some(b) = r.result.get("battery").and_then(Value::as_f64) {
                format!("{} reported battery {b:.1}%", r.tool)
            } else if let Some(d) = r.result.get("distance_m").and_then(Value::as_f64) {
                format!("{} confirmed {d:.1} m to go", r.tool)
            } else if let Some(s) = r.result.get("slice").and_then(Value::as_str) {
                format!("{} put us on {s}", r.tool)
            } else {
                let status = r.result.get("status").and_then(Value::as_str).unwrap_or("ok");
                format!("{} returned {status}", r.tool)
            }
        }
        Some(Observation::A2aAck(a)) => {
            let status = serde_json::to_value(a.status).ok();
            let status = status.as_ref().and_then(Value::as_str).unwrap_or("ok");
            format!("{} from {} was {status}", a.task, a.from)
        }
        None => "no prior tool output".to_string(),
    }
}

fn sensor_of(ctx: &PolicyContext<'_>) -> Sensor {
    ctx.mission.capture_sensor.unwrap_or(Sensor::Rgb)
}

fn is_sensing_or_coordination(a: Option<&Action>) -> bool {
    match a {
        Some(Action::McpCall(c)) => matches!(c.name.as_str(), "capture_image" | "activate_sensor"),
        Some(Action::A2aTask(_)) => true,
        _ => false,
    }
}

/// Shared mission logic of the safety-first pilots.
#[derive(Clone, Debug)]
struct Pilot {
    name: String,
    /// React to every hard state, not only latency/loss degradation.
    adaptive: bool,
    filter: AdaptiveActionFilter,
}

impl Pilot {
    fn planned(&self, ctx: &PolicyContext<'_>) -> AgentReply {
        let s = ctx.state;
        let m = ctx.mission;
        let wp = m.waypoint;
        let dist = ctx.distance_to_waypoint();
        let note = recall(ctx);
        let sensor = sensor_of(ctx);

        if ctx.agent_actions().next().is_none() {
            return AgentReply::new(
                format!("Checking telemetry before heading to waypoint {}", xyz(&wp)),
                mcp("read_telemetry", json!({})),
            );
        }
        if s.battery <= LOW_BATTERY_PCT && !s.landing && !s.landed {
            return AgentReply::new(format!("Battery at {:.1}% and {note}; landing now", s.battery), mcp("land", json!({})));
        }
        if s.mission_completed {
            let verify = if ctx.has_called("check_geofence") || ctx.geofences == 0 || s.landed {
                "read_telemetry"
            } else {
                "check_geofence"
            };
            return AgentReply::new(format!("Mission objective met; {note}, verifying final state"), mcp(verify, json!({})));
        }
        if !s.waypoint_reached && !s.landing && (s.target - wp).norm() > 0.5 {
            return AgentReply::new(
                format!("{note}; setting waypoint {}", xyz(&wp)),
                mcp("set_waypoint", json!({"x": wp.x, "y": wp.y, "z": wp.z})),
            );
        }
        let captured = m.capture_satisfied(&s.captures);
        if m.require_capture && !captured && dist <= m.tolerance_m {
            return AgentReply::new(
                format!("On station {dist:.1} m from waypoint {}, capturing {sensor} imagery", xyz(&wp)),
                mcp("capture_image", json!({"sensor": sensor.as_str()})),
            );
        }
        if s.waypoint_reached && captured && m.require_landing && !s.landing {
            return AgentReply::new(format!("Objective imagery secured and {note}; descending to land"), mcp("land", json!({})));
        }
        if m.require_capture && !s.sensor_active(sensor) {
            return AgentReply::new(
                format!("{note}; activating {sensor} with {dist:.0} m to the waypoint"),
                mcp("activate_sensor", json!({"sensor": sensor.as_str()})),
            );
        }
        if let Some(peer) = ctx.peers.first() {
            if !ctx.has_called("collision_avoidance") {
                return AgentReply::new(
                    format!("{note}; coordinating separation with {peer}"),
                    Action::a2a("collision_avoidance", peer, args(json!({"intent": "transit", "waypoint": [wp.x, wp.y, wp.z]}))),
                );
            }
        }
        if ctx.geofences > 0 && !ctx.has_called("check_geofence") {
            return AgentReply::new(format!("{note}; checking geofence clearance en route"), mcp("check_geofence", json!({})));
        }
        AgentReply::new(format!("{note}; tracking progress, {dist:.1} m remaining"), mcp("read_telemetry", json!({})))
    }

    fn decide(&self, ctx: &PolicyContext<'_>) -> AgentReply {
        let n = ctx.network;
        let degraded = self.filter.degraded(n);
        let hard = classify_hard(n);
        let planned = self.planned(ctx);
        if (degraded || (self.adaptive && hard)) && n.slice != Slice::Urllc {
            return AgentReply::new(
                format!(
                    "Link on {} is poor ({:.1} ms, {:.2}% loss); switching to URLLC",
                    n.slice, n.latency_ms, n.loss_pct
                ),
                mcp("switch_network_slice", json!({"slice": "URLLC"})),
            );
        }
        let permitted = self.filter.permits(planned.action.as_ref(), n);
        let defer = self.adaptive && hard && is_sensing_or_coordination(planned.action.as_ref());
        if permitted && !defer {
            return planned;
        }
        if self.adaptive {
            AgentReply::new(
                format!(
                    "Deferring this step while {} is hard ({:.1} ms, edge load {:.2})",
                    n.slice, n.latency_ms, n.edge_load
                ),
                Action::IntentOnly,
            )
        } else {
            AgentReply::new(
                format!("Link degraded on {} at {:.1} ms; holding and reading telemetry", n.slice, n.latency_ms),
                mcp("read_telemetry", json!({})),
            )
        }
    }
}

/// Telemetry-first pilot that keeps every structured action inside the
/// communication-safe subset whenever the link degrades.
#[derive(Clone, Debug)]
pub struct SafePilot(Pilot);

impl SafePilot {
    pub fn new() -> SafePilot {
        SafePilot(Pilot {
            name: "safe_pilot".into(),
            adaptive: false,
            filter: AdaptiveActionFilter::default(),
        })
    }
}

impl Default for SafePilot {
    fn default() -> Self {
        SafePilot::new()
    }
}

impl AgentPolicy for SafePilot {
    fn name(&self) -> &str {
        &self.0.name
    }

    fn next_turn(&mut self, ctx: &PolicyContext<'_>) -> AgentReply {
        self.0.decide(ctx)
    }
}

/// Leaves for URLLC on any hard state and defers sensing and coordination
/// until the link recovers.
#[derive(Clone, Debug)]
pub struct AdaptivePilot(Pilot);

impl AdaptivePilot {
    pub fn new() -> AdaptivePilot {
        AdaptivePilot(Pilot {
            name: "adaptive_pilot".into(),
            adaptive: true,
            filter: AdaptiveActionFilter::default(),
        })
    }
}

impl Default for AdaptivePilot {
    fn default() -> Self {
        AdaptivePilot::new()
    }
}

impl AgentPolicy for AdaptivePilot {
    fn name(&self) -> &str {
        &self.0.name
    }

    fn next_turn(&mut self, ctx: &PolicyContext<'_>) -> AgentReply {
        self.0.decide(ctx)
    }
}

/// Flies straight to the target on eMBB and captures on every turn, whatever the link does.
#[derive(Clone, Debug)]
pub struct GreedyStreamer {
    name: String,
}

impl GreedyStreamer {
    pub fn new() -> GreedyStreamer {
        GreedyStreamer {
            name: "greedy_streamer".into(),
        }
    }
}

impl Default for GreedyStreamer {
    fn default() -> Self {
        GreedyStreamer::new()
    }
}

impl AgentPolicy for GreedyStreamer {
    fn name(&self) -> &str {
        &self.name
    }

    fn next_turn(&mut self, ctx: &PolicyContext<'_>) -> AgentReply {
        let wp = ctx.mission.waypoint;
        if !ctx.has_called("set_waypoint") {
            return AgentReply::new(
                format!("Heading straight to {}", xyz(&wp)),
                mcp("set_waypoint", json!({"x": wp.x, "y": wp.y, "z": wp.z})),
            );
        }
        if ctx.network.slice != Slice::Embb {
            return AgentReply::new("Moving to eMBB for streaming bandwidth", mcp("switch_network_slice", json!({"slice": "eMBB"})));
        }
        let sensor = sensor_of(ctx);
        let frame = ctx.agent_actions().filter(|a| a.identifier() == Some("capture_image")).count() + 1;
        AgentReply::new(
            format!("Streaming {sensor} frame {frame}, {:.0} m from target", ctx.distance_to_waypoint()),
            mcp("capture_image", json!({"sensor": sensor.as_str()})),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaultMode {
    /// Speaks as "system" on every attempt.
    SystemRoleAlways,
    /// Speaks as "system" only when no retry constraint is in force.
    SystemRoleAtStrictnessZero,
}

/// A safe pilot that breaks the speaker contract on its second turn.
#[derive(Clone, Debug)]
pub struct FaultyAgent {
    name: String,
    mode: FaultMode,
    inner: Pilot,
}

impl FaultyAgent {
    pub fn new(name: &str, mode: FaultMode) -> FaultyAgent {
        FaultyAgent {
            name: name.to_string(),
            mode,
            inner: SafePilot::new().0,
        }
    }
}

impl AgentPolicy for FaultyAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn next_turn(&mut self, ctx: &PolicyContext<'_>) -> AgentReply {
        let mut reply = self.inner.decide(ctx);
        let misbehave = match self.mode {
            FaultMode::SystemRoleAlways => true,
            FaultMode::SystemRoleAtStrictnessZero => ctx.strictness == 0,
        };
        if misbehave && ctx.turn_index == 3 {
            reply.role = Some("system".into());
        }
        reply
    }
}
