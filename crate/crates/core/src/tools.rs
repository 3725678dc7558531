//! MCP tool and A2A task semantics against the simulated world.

use std::collections::BTreeMap;

use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::environment::{check_geofence, ActionClass, Airspace, Capture, Sensor, UavState};
use crate::episode::{A2aAck, A2aTask, AckStatus, Action, JsonMap, McpCall, McpResult, Observation};
use crate::network::{classify_hard, sample_network_state, NetworkState, Slice, SliceCalibration};

/// Nominal payload size reported by image captures.
/// Descent aim point below the floor, so touchdown is reached in a few steps.
pub const LANDING_AIM_BELOW_M: f64 = 6.0;

pub const IMAGE_PAYLOAD_KB: f64 = 850.0;

#[derive(Debug, Error, PartialEq)]
pub enum ToolError {
    #[error("unknown tool '{0}'")]
    UnknownTool(String),
    #[error("{tool}: {reason}")]
    ArgError { tool: String, reason: String },
    #[error("unknown peer '{0}'")]
    UnknownPeer(String),
    #[error("duplicate tool '{0}'")]
    Duplicate(String),
    #[error("registry file: {0}")]
    Registry(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Mcp,
    A2a,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effect {
    StateQuery,
    StateMutation,
    PayloadOnly,
    NetworkMutation,
    Coordination,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgType {
    Number,
    String,
    Slice,
    Sensor,
    Object,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArgSpec {
    #[serde(rename = "type")]
    pub kind: ArgType,
    #[serde(default = "yes")]
    pub required: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToolSpec {
    pub name: String,
    pub protocol: Protocol,
    pub action_class: ActionClass,
    #[serde(default)]
    pub args: BTreeMap<String, ArgSpec>,
    pub effect: Effect,
}

impl ToolSpec {
    fn new(name: &str, protocol: Protocol, action_class: ActionClass, effect: Effect, args: &[(&str, ArgType, bool)]) -> ToolSpec {
        ToolSpec {
            name: name.to_string(),
            protocol,
            action_class,
            effect,
            args: args
                .iter()
                .map(|(k, kind, required)| {
                    (
                        k.to_string(),
                        ArgSpec {
                            kind: *kind,
                            required: *required,
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn validate_args(&self, args: &JsonMap) -> Result<(), ToolError> {
        let err = |reason: String| ToolError::ArgError {
            tool: self.name.clone(),
            reason,
        };
        for key in args.keys() {
            if !self.args.contains_key(key) {
                return Err(err(format!("unexpected argument '{key}'")));
            }
        }
        for (key, spec) in &self.args {
            let Some(v) = args.get(key) else {
                if spec.required {
                    return Err(err(format!("missing argument '{key}'")));
                }
                continue;
            };
            let ok = match spec.kind {
                ArgType::Number => v.as_f64().is_some_and(f64::is_finite),
                ArgType::String => v.as_str().is_some_and(|s| !s.is_empty()),
                ArgType::Slice => v.as_str().and_then(Slice::parse).is_some(),
                ArgType::Sensor => v.as_str().and_then(Sensor::parse).is_some(),
                ArgType::Object => v.is_object(),
            };
            if !ok {
                return Err(err(format!("argument '{key}' is not a valid {:?}", spec.kind)));
            }
        }
        Ok(())
    }
}

/// Immutable set of tools and tasks agents may invoke.
#[derive(Clone, Debug, PartialEq)]
pub struct ToolRegistry {
    tools: BTreeMap<String, ToolSpec>,
}

impl Default for ToolRegistry {
    fn default() -> Self {
        ToolRegistry::builtin()
    }
}

impl ToolRegistry {
    pub fn empty() -> ToolRegistry {
        ToolRegistry { tools: BTreeMap::new() }
    }

    pub fn builtin() -> ToolRegistry {
        use ActionClass::*;
        use ArgType as T;
        use Effect::*;
        use Protocol::*;
        let specs = [
            ToolSpec::new("read_telemetry", Mcp, Transmit, StateQuery, &[]),
            ToolSpec::new(
                "set_waypoint",
                Mcp,
                Maneuver,
                StateMutation,
                &[("x", T::Number, true), ("y", T::Number, true), ("z", T::Number, true)],
            ),
            ToolSpec::new(
                "navigate_to",
                Mcp,
                Maneuver,
                StateMutation,
                &[("x", T::Number, true), ("y", T::Number, true), ("z", T::Number, false)],
            ),
            ToolSpec::new("set_altitude", Mcp, Maneuver, StateMutation, &[("altitude", T::Number, true)]),
            ToolSpec::new("activate_sensor", Mcp, Sense, PayloadOnly, &[("sensor", T::Sensor, true)]),
            ToolSpec::new("capture_image", Mcp, Sense, PayloadOnly, &[("sensor", T::Sensor, false)]),
            ToolSpec::new("switch_network_slice", Mcp, Transmit, NetworkMutation, &[("slice", T::Slice, true)]),
            ToolSpec::new("check_geofence", Mcp, Transmit, StateQuery, &[]),
            ToolSpec::new(
                "execute_maneuver",
                Mcp,
                Maneuver,
                StateMutation,
                &[("maneuver", T::String, true), ("yaw_rate", T::Number, false)],
            ),
            ToolSpec::new("land", Mcp, Maneuver, StateMutation, &[]),
            ToolSpec::new("hover", Mcp, Hover, StateMutation, &[]),
            ToolSpec::new("collision_avoidance", A2a, Transmit, Coordination, &[]),
            ToolSpec::new("swarm_status_check", A2a, Transmit, Coordination, &[]),
            ToolSpec::new("request_weather_update", A2a, Transmit, Coordination, &[]),
            ToolSpec::new("request_thermal_data", A2a, Transmit, Coordination, &[]),
        ];
        let mut reg = ToolRegistry::empty();
        for s in specs {
            reg.register(s).expect("builtin names are unique");
        }
        reg
    }

    pub fn register(&mut self, spec: ToolSpec) -> Result<(), ToolError> {
        if self.tools.contains_key(&spec.name) {
            return Err(ToolError::Duplicate(spec.name));
        }
        self.tools.insert(spec.name.clone(), spec);
        Ok(())
    }

    /// Adds tools from a JSON array of tool specs.
    pub fn extend_from_json(&mut self, text: &str) -> Result<(), ToolError> {
        let specs: Vec<ToolSpec> = serde_json::from_str(text).map_err(|e| ToolError::Registry(e.to_string()))?;
        for s in specs {
            self.register(s)?;
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&ToolSpec> {
        self.tools.get(name)
    }

    pub fn lookup(&self, name: &str, protocol: Protocol) -> Option<&ToolSpec> {
        self.get(name).filter(|s| s.protocol == protocol)
    }

    pub fn contains(&self, name: &str, protocol: Protocol) -> bool {
        self.lookup(name, protocol).is_some()
    }

    pub fn names(&self, protocol: Protocol) -> Vec<&str> {
        self.tools
            .values()
            .filter(|s| s.protocol == protocol)
            .map(|s| s.name.as_str())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.tools.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tools.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peer {
    /// Scripted position per turn; the last entry holds afterwards.
    pub positions: Vec<[f64; 3]>,
    #[serde(default = "default_peer_status")]
    pub status: String,
}

fn default_peer_status() -> String {
    "nominal".to_string()
}

impl Peer {
    pub fn position_at(&self, turn: usize) -> Option<Vector3<f64>> {
        let p = self.positions.get(turn).or_else(|| self.positions.last())?;
        Some(Vector3::new(p[0], p[1], p[2]))
    }
}

/// Cooperative peers and the scripted records they answer with.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwarmContext {
    pub peers: BTreeMap<String, Peer>,
    pub weather: JsonMap,
    pub thermal: JsonMap,
}

impl SwarmContext {
    pub fn positions_at(&self, turn: usize) -> Vec<Vector3<f64>> {
        self.peers.values().filter_map(|p| p.position_at(turn)).collect()
    }

    pub fn peer_ids(&self) -> impl Iterator<Item = &str> {
        self.peers.keys().map(String::as_str)
    }
}

/// Read-only episode context tools run against.
#[derive(Clone, Copy)]
pub struct ToolContext<'a> {
    pub registry: &'a ToolRegistry,
    pub swarm: &'a SwarmContext,
    pub airspace: &'a Airspace,
    pub calibration: &'a SliceCalibration,
    pub turn_index: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ToolOutcome {
    pub observation: Option<Observation>,
    pub state: UavState,
    pub network: Option<NetworkState>,
    pub class: ActionClass,
}

impl ToolOutcome {
    pub fn passive(state: &UavState) -> ToolOutcome {
        ToolOutcome {
            observation: None,
            state: state.clone(),
            network: None,
            class: ActionClass::Idle,
        }
    }
}

fn map(v: Value) -> JsonMap {
    match v {
        Value::Object(m) => m.into_iter().collect(),
        _ => JsonMap::new(),
    }
}

fn vec3(v: &Vector3<f64>) -> Value {
    json!([v.x, v.y, v.z])
}

fn num(args: &JsonMap, key: &str) -> Option<f64> {
    args.get(key).and_then(Value::as_f64)
}

fn failed(reason: &str) -> JsonMap {
    map(json!({"status": "failed", "error": reason}))
}

fn telemetry(state: &UavState, network: &NetworkState) -> JsonMap {
    map(json!({
        "status": "ok",
        "position": vec3(state.position()),
        "velocity": state.speed(),
        "yaw": state.kinematics.yaw(),
        "battery": state.battery,
        "slice": network.slice.as_str(),
        "latency_ms": network.latency_ms,
        "loss_pct": network.loss_pct,
        "throughput_mbps": network.throughput_mbps,
    }))
}

/// Executes a structured action; intent-only decisions leave the world untouched.
pub fn execute_action<R: Rng + ?Sized>(
    action: &Action,
    state: &UavState,
    network: &NetworkState,
    ctx: &ToolContext<'_>,
    rng: &mut R,
) -> ToolOutcome {
    match action {
        Action::McpCall(call) => execute_mcp(call, state, network, ctx, rng),
        Action::A2aTask(task) => ToolOutcome {
            observation: Some(Observation::A2aAck(execute_a2a(task, state, network, ctx, rng))),
            state: state.clone(),
            network: None,
            class: ctx
                .registry
                .lookup(&task.task, Protocol::A2a)
                .map_or(ActionClass::Transmit, |s| s.action_class),
        },
        Action::IntentOnly => ToolOutcome::passive(state),
    }
}

pub fn execute_mcp<R: Rng + ?Sized>(
    call: &McpCall,
    state: &UavState,
    network: &NetworkState,
    ctx: &ToolContext<'_>,
    rng: &mut R,
) -> ToolOutcome {
    let mut next = state.clone();
    let result = |result: JsonMap| {
        Some(Observation::McpResult(McpResult {
            tool: call.name.clone(),
            result,
        }))
    };
    let Some(spec) = ctx.registry.lookup(&call.name, Protocol::Mcp) else {
        let err = ToolError::UnknownTool(call.name.clone());
        return ToolOutcome {
            observation: result(failed(&err.to_string())),
            ..ToolOutcome::passive(state)
        };
    };
    if let Err(err) = spec.validate_args(&call.args) {
        return ToolOutcome {
            observation: result(failed(&err.to_string())),
            ..ToolOutcome::passive(state)
        };
    }
    let airspace = ctx.airspace;
    let args = &call.args;
    let mut new_network = None;

    let body = match call.name.as_str() {
        "read_telemetry" => telemetry(state, network),
        "set_waypoint" | "navigate_to" => {
            let x = num(args, "x").unwrap_or_default();
            let y = num(args, "y").unwrap_or_default();
            let z_req = num(args, "z").unwrap_or(state.target.z);
            let z = airspace.clamp_altitude(z_req);
            next.target = Vector3::new(x, y, z);
            next.landing = false;
            next.landed = false;
            next.kinematics.angular_rate = Vector3::zeros();
            let distance = (next.target - state.position()).norm();
            map(json!({
                "status": "ok",
                "target": vec3(&next.target),
                "clamped": z != z_req,
                "distance_m": distance,
            }))
        }
        "set_altitude" => {
            let requested = num(args, "altitude").unwrap_or_default();
            let z = airspace.clamp_altitude(requested);
            next.target.z = z;
            next.landing = false;
            next.landed = false;
            map(json!({"status": "ok", "target_altitude": z, "clamped": z != requested}))
        }
        "activate_sensor" => {
            let sensor = args.get("sensor").and_then(Value::as_str).and_then(Sensor::parse).unwrap_or(Sensor::Rgb);
            next.sensors.insert(sensor, true);
            map(json!({"status": "ok", "sensor": sensor.as_str(), "active": true}))
        }
        "capture_image" => {
            let sensor = args.get("sensor").and_then(Value::as_str).and_then(Sensor::parse).unwrap_or(Sensor::Rgb);
            next.sensors.insert(sensor, true);
            next.captures.push(Capture {
                position: *state.position(),
                sensor,
            });
            let mut r = map(json!({
                "status": "ok",
                "sensor": sensor.as_str(),
                "image_id": format!("img_{:02}_{}", ctx.turn_index, sensor.as_str().to_lowercase()),
                "position": vec3(state.position()),
                "payload_kb": IMAGE_PAYLOAD_KB,
            }));
            if sensor == Sensor::Thermal && !ctx.swarm.thermal.is_empty() {
                r.insert("thermal".into(), Value::Object(ctx.swarm.thermal.clone().into_iter().collect()));
            }
            r
        }
        "switch_network_slice" => {
            let target = args.get("slice").and_then(Value::as_str).and_then(Slice::parse).unwrap_or(Slice::Urllc);
            let fresh = sample_network_state(target, ctx.calibration, rng);
            let r = map(json!({
                "status": "ok",
                "previous_slice": network.slice.as_str(),
                "slice": target.as_str(),
                "latency_ms": fresh.latency_ms,
                "loss_pct": fresh.loss_pct,
                "throughput_mbps": fresh.throughput_mbps,
            }));
            new_network = Some(fresh);
            r
        }
        "check_geofence" => {
            let c = check_geofence(state.position(), airspace);
            let clearance = if c.min_clearance.is_finite() {
                json!(c.min_clearance)
            } else {
                Value::Null
            };
            map(json!({
                "status": "ok",
                "compliant": c.compliant,
                "min_clearance_m": clearance,
                "fences": airspace.geofences.len(),
            }))
        }
        "execute_maneuver" => {
            let maneuver = args.get("maneuver").and_then(Value::as_str).unwrap_or_default();
            let default_rate = if matches!(maneuver, "yaw" | "orbit" | "scan") { 0.2 } else { 0.0 };
            let yaw_rate = num(args, "yaw_rate").unwrap_or(default_rate);
            next.kinematics.angular_rate.z = yaw_rate;
            match maneuver {
                "climb" => next.target.z = airspace.clamp_altitude(state.target.z + 10.0),
                "descend" => next.target.z = airspace.clamp_altitude(state.target.z - 10.0),
                "hold" => next.target = *state.position(),
                _ => {}
            }
            map(json!({"status": "ok", "maneuver": maneuver, "yaw_rate": yaw_rate, "target": vec3(&next.target)}))
        }
        "land" => {
            next.target = Vector3::new(state.position().x, state.position().y, airspace.z_min - LANDING_AIM_BELOW_M);
            next.landing = true;
            next.kinematics.angular_rate = Vector3::zeros();
            map(json!({"status": "ok", "target_altitude": airspace.z_min, "terminal": true}))
        }
        "hover" => {
            next.target = *state.position();
            next.landing = false;
            next.kinematics.angular_rate = Vector3::zeros();
            map(json!({"status": "ok", "hold": vec3(state.position())}))
        }
        _ => generic(spec, args, state, network, &mut next, &mut new_network, ctx, rng),
    };

    ToolOutcome {
        observation: result(body),
        state: next,
        network: new_network,
        class: spec.action_class,
    }
}

/// Handler for registry extensions, dispatched on the declared effect.
#[allow(clippy::too_many_arguments)]
fn generic<R: Rng + ?Sized>(
    spec: &ToolSpec,
    args: &JsonMap,
    state: &UavState,
    network: &NetworkState,
    next: &mut UavState,
    new_network: &mut Option<NetworkState>,
    ctx: &ToolContext<'_>,
    rng: &mut R,
) -> JsonMap {
    match spec.effect {
        Effect::StateQuery => telemetry(state, network),
        Effect::StateMutation => {
            if let (Some(x), Some(y)) = (num(args, "x"), num(args, "y")) {
                let z = ctx.airspace.clamp_altitude(num(args, "z").unwrap_or(state.target.z));
                next.target = Vector3::new(x, y, z);
            }
            map(json!({"status": "ok", "target": vec3(&next.target)}))
        }
        Effect::NetworkMutation => match args.get("slice").and_then(Value::as_str).and_then(Slice::parse) {
            Some(slice) => {
                let fresh = sample_network_state(slice, ctx.calibration, rng);
                *new_network = Some(fresh);
                map(json!({"status": "ok", "slice": slice.as_str()}))
            }
            None => map(json!({"status": "ok", "slice": network.slice.as_str()})),
        },
        Effect::PayloadOnly | Effect::Coordination => {
            let mut r = args.clone();
            r.insert("status".into(), json!("ok"));
            r
        }
    }
}

/// Cooperative peer response. Exactly one uniform is drawn per call.
pub fn execute_a2a<R: Rng + ?Sized>(
    task: &A2aTask,
    state: &UavState,
    network: &NetworkState,
    ctx: &ToolContext<'_>,
    rng: &mut R,
) -> A2aAck {
    let u: f64 = rng.random();
    let ack = |status, payload| A2aAck {
        task: task.task.clone(),
        from: task.to.clone(),
        status,
        payload,
    };
    let Some(peer) = ctx.swarm.peers.get(&task.to) else {
        return ack(AckStatus::Failed, failed(&ToolError::UnknownPeer(task.to.clone()).to_string()));
    };
    if !ctx.registry.contains(&task.task, Protocol::A2a) {
        return ack(AckStatus::Failed, failed(&format!("unknown task '{}'", task.task)));
    }
    let status = if classify_hard(network) && u < network.loss_pct / 100.0 {
        AckStatus::Degraded
    } else {
        AckStatus::Ok
    };
    let peer_pos = peer.position_at(ctx.turn_index);
    let payload = match task.task.as_str() {
        "collision_avoidance" => match peer_pos {
            Some(q) => {
                let rel = q - state.position();
                let distance = rel.norm();
                let advisory = if distance < 2.0 * ctx.airspace.separation_margin {
                    "increase_separation"
                } else {
                    "maintain_course"
                };
                map(json!({
                    "peer_position": vec3(&q),
                    "relative_position": vec3(&rel),
                    "distance_m": distance,
                    "advisory": advisory,
                }))
            }
            None => map(json!({"advisory": "no_track"})),
        },
        "swarm_status_check" => map(json!({
            "peer_status": peer.status,
            "peer_position": peer_pos.as_ref().map(vec3),
            "peers": ctx.swarm.peers.len(),
        })),
        "request_weather_update" => ctx.swarm.weather.clone(),
        "request_thermal_data" => ctx.swarm.thermal.clone(),
        _ => task.payload.clone(),
    };
    ack(status, payload)
}

/// Pairing rule behind tool consistency.
pub fn match_action_observation(a: &Action, o: Option<&Observation>) -> bool {
    match (a, o) {
        (Action::McpCall(c), Some(Observation::McpResult(r))) => r.tool == c.name,
        (Action::A2aTask(t), Some(Observation::A2aAck(k))) => k.task == t.task && k.from == t.to,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::KinematicState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct World {
        registry: ToolRegistry,
        swarm: SwarmContext,
        airspace: Airspace,
        calibration: SliceCalibration,
    }

    impl World {
        fn new() -> World {
            let mut peers = BTreeMap::new();
            peers.insert(
                "P2".to_string(),
                Peer {
                    positions: vec![[30.0, 0.0, 40.0], [32.0, 0.0, 40.0]],
                    status: "nominal".into(),
                },
            );
            World {
                registry: ToolRegistry::builtin(),
                swarm: SwarmContext {
                    peers,
                    weather: map(json!({"wind_mps": 4.0})),
                    thermal: JsonMap::new(),
                },
                airspace: Airspace::new(10.0, 120.0, vec![], 10.0).unwrap(),
                calibration: SliceCalibration::default(),
            }
        }

        fn ctx(&self, turn: usize) -> ToolContext<'_> {
            ToolContext {
                registry: &self.registry,
                swarm: &self.swarm,
                airspace: &self.airspace,
                calibration: &self.calibration,
                turn_index: turn,
            }
        }
    }

    fn state() -> UavState {
        UavState::new(KinematicState::at(Vector3::new(10.0, 20.0, 55.0), 0.0), 87.4)
    }

    fn net(slice: Slice, latency: f64, loss: f64) -> NetworkState {
        NetworkState {
            slice,
            latency_ms: latency,
            jitter_ms: 2.0,
            loss_pct: loss,
            throughput_mbps: 100.0,
            edge_load: 0.4,
        }
    }

    fn call(name: &str, args: Value) -> McpCall {
        McpCall {
            name: name.into(),
            args: map(args),
        }
    }

    fn result_of(o: &ToolOutcome) -> &JsonMap {
        match o.observation.as_ref().unwrap() {
            Observation::McpResult(r) => &r.result,
            _ => panic!("expected mcp result"),
        }
    }

    #[test]
    fn builtin_registry_shape() {
        let r = ToolRegistry::builtin();
        assert_eq!(r.names(Protocol::Mcp).len(), 11);
        assert_eq!(r.names(Protocol::A2a).len(), 4);
        assert!(r.contains("hover", Protocol::Mcp));
        assert!(!r.contains("hover", Protocol::A2a));
    }

    #[test]
    fn telemetry_is_a_pure_projection() {
        let w = World::new();
        let s = state();
        let out = execute_mcp(&call("read_telemetry", json!({})), &s, &net(Slice::Urllc, 7.0, 0.1), &w.ctx(1), &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(out.state, s);
        let r = result_of(&out);
        assert_eq!(r["battery"], json!(87.4));
        assert_eq!(r["position"], json!([10.0, 20.0, 55.0]));
    }

    #[test]
    fn slice_switch_resamples_from_target() {
        let w = World::new();
        let s = state();
        let out = execute_mcp(
            &call("switch_network_slice", json!({"slice": "URLLC"})),
            &s,
            &net(Slice::Embb, 22.0, 0.6),
            &w.ctx(3),
            &mut ChaCha8Rng::seed_from_u64(5),
        );
        let n = out.network.unwrap();
        assert_eq!(n.slice, Slice::Urllc);
        let expected = sample_network_state(Slice::Urllc, &w.calibration, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(n, expected);
        assert_eq!(out.state, s);
    }

    #[test]
    fn altitude_commands_are_clamped() {
        let w = World::new();
        let out = execute_mcp(&call("set_altitude", json!({"altitude": 170.0})), &state(), &net(Slice::Urllc, 7.0, 0.0), &w.ctx(1), &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(out.state.target.z, w.airspace.z_max);
        assert_eq!(result_of(&out)["clamped"], json!(true));
    }

    #[test]
    fn bad_calls_degrade_instead_of_failing() {
        let w = World::new();
        let s = state();
        let n = net(Slice::Urllc, 7.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for c in [
            call("teleport", json!({})),
            call("set_waypoint", json!({"x": 1.0})),
            call("switch_network_slice", json!({"slice": "6G-ultra"})),
            call("read_telemetry", json!({"verbose": true})),
        ] {
            let out = execute_mcp(&c, &s, &n, &w.ctx(1), &mut rng);
            assert_eq!(out.state, s);
            assert_eq!(result_of(&out)["status"], json!("failed"));
        }
    }

    #[test]
    fn a2a_examples() {
        let w = World::new();
        let s = state();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = A2aTask {
            task: "collision_avoidance".into(),
            to: "P2".into(),
            payload: JsonMap::new(),
        };
        let ack = execute_a2a(&t, &s, &net(Slice::Urllc, 7.0, 0.05), &w.ctx(1), &mut rng);
        assert_eq!(ack.status, AckStatus::Ok);
        assert_eq!(ack.payload["peer_position"], json!([32.0, 0.0, 40.0]));
        let lost = A2aTask { to: "P9".into(), ..t.clone() };
        assert_eq!(execute_a2a(&lost, &s, &net(Slice::Urllc, 7.0, 0.05), &w.ctx(1), &mut rng).status, AckStatus::Failed);
    }

    #[test]
    fn a2a_never_mutates_state() {
        let w = World::new();
        let s = state();
        let a = Action::a2a("swarm_status_check", "P2", JsonMap::new());
        let out = execute_action(&a, &s, &net(Slice::Embb, 60.0, 30.0), &w.ctx(2), &mut ChaCha8Rng::seed_from_u64(8));
        assert_eq!(out.state, s);
        assert!(out.network.is_none());
    }

    #[test]
    fn registry_extension() {
        let mut r = ToolRegistry::builtin();
        r.extend_from_json(
            r#"[{"name": "scan_area", "protocol": "mcp", "action_class": "sense", "effect": "payload_only",
                 "args": {"radius": {"type": "number"}}}]"#,
        )
        .unwrap();
        assert!(r.contains("scan_area", Protocol::Mcp));
        let dup = r#"[{"name": "land", "protocol": "mcp", "action_class": "maneuver", "effect": "state_mutation"}]"#;
        assert_eq!(r.extend_from_json(dup), Err(ToolError::Duplicate("land".into())));
    }

    #[test]
    fn matching_rule() {
        let tel = Action::mcp("read_telemetry", JsonMap::new());
        let obs = |tool: &str| {
            Observation::McpResult(McpResult {
                tool: tool.into(),
                result: JsonMap::new(),
            })
        };
        assert!(match_action_observation(&tel, Some(&obs("read_telemetry"))));
        assert!(!match_action_observation(&Action::mcp("set_waypoint", JsonMap::new()), Some(&obs("read_telemetry"))));
        assert!(!match_action_observation(&tel, None));
        let a = Action::a2a("collision_avoidance", "P2", JsonMap::new());
        let ack = Observation::A2aAck(A2aAck {
            task: "collision_avoidance".into(),
            from: "P2".into(),
            status: AckStatus::Ok,
            payload: JsonMap::new(),
        });
        assert!(match_action_observation(&a, Some(&ack)));
        assert!(!match_action_observation(&tel, Some(&ack)));
    }
}
