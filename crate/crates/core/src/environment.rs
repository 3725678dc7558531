//! Point-mass UAV physics, airspace constraints, battery drain and the
//! sticky safety flags evaluated after every turn.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Matrix6, Rotation3, SymmetricEigen, Vector3, Vector6};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::episode::{Action, FinalState, Observation, BATTERY_DEPLETED_PCT};
use crate::network::NetworkState;
use crate::tools::{self, ToolContext};

pub const STANDARD_GRAVITY: f64 = 9.81;
/// Descent stops and the vehicle is considered landed within this height of `z_min`.
pub const TOUCHDOWN_BAND_M: f64 = 2.0;

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub fn normalize_angle(a: f64) -> f64 {
    let x = a.rem_euclid(2.0 * PI);
    if x > PI {
        x - 2.0 * PI
    } else {
        x
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KinematicState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    /// (roll, pitch, yaw) in radians.
    pub attitude: Vector3<f64>,
    pub angular_rate: Vector3<f64>,
}

impl KinematicState {
    pub fn at(position: Vector3<f64>, yaw: f64) -> KinematicState {
        KinematicState {
            position,
            velocity: Vector3::zeros(),
            attitude: Vector3::new(0.0, 0.0, normalize_angle(yaw)),
            angular_rate: Vector3::zeros(),
        }
    }

    pub fn yaw(&self) -> f64 {
        self.attitude.z
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }

    pub fn rotation(&self) -> Rotation3<f64> {
        Rotation3::from_euler_angles(self.attitude.x, self.attitude.y, self.attitude.z)
    }

    pub fn is_finite(&self) -> bool {
        [self.position, self.velocity, self.attitude, self.angular_rate]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VehicleParams {
    pub mass: f64,
    pub gravity: Vector3<f64>,
    pub max_thrust: f64,
    pub battery_capacity: f64,
    pub idle_draw: f64,
    pub hover_draw: f64,
    pub sense_draw: f64,
    pub transmit_draw: f64,
    pub maneuver_draw: f64,
    /// Horizontal and vertical speed cap used by waypoint guidance (m/s).
    pub cruise_speed: f64,
    /// Proportional gain from position error to commanded velocity (1/s).
    pub position_gain: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        VehicleParams {
            mass: 1.5,
            gravity: Vector3::new(0.0, 0.0, -STANDARD_GRAVITY),
            max_thrust: 45.0,
            battery_capacity: 100.0,
            idle_draw: 0.05,
            hover_draw: 0.10,
            sense_draw: 0.15,
            transmit_draw: 0.12,
            maneuver_draw: 0.30,
            cruise_speed: 15.0,
            position_gain: 1.0 / 3.0,
        }
    }
}

impl VehicleParams {
    pub fn check(&self) -> Result<(), EnvError> {
        let draws = [
            self.idle_draw,
            self.hover_draw,
            self.sense_draw,
            self.transmit_draw,
            self.maneuver_draw,
        ];
        if !(self.mass > 0.0) {
            return Err(EnvError::InvalidInput(format!("mass must be positive, got {}", self.mass)));
        }
        if draws.iter().any(|d| !(*d >= 0.0)) {
            return Err(EnvError::InvalidInput("battery draws must be non-negative".into()));
        }
        if !(self.max_thrust > self.mass * self.gravity.norm()) {
            return Err(EnvError::InvalidInput("max_thrust cannot hold hover".into()));
        }
        Ok(())
    }

    pub fn draw(&self, class: ActionClass) -> f64 {
        match class {
            ActionClass::Idle => self.idle_draw,
            ActionClass::Hover => self.hover_draw,
            ActionClass::Sense => self.sense_draw,
            ActionClass::Transmit => self.transmit_draw,
            ActionClass::Maneuver => self.maneuver_draw,
        }
    }

    /// Largest acceleration magnitude guidance may request while staying under `max_thrust`.
    pub fn max_accel(&self) -> f64 {
        (self.max_thrust / self.mass - self.gravity.norm()).max(0.0)
    }
}

/// Battery consumption class of a turn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionClass {
    Idle,
    Hover,
    Sense,
    Transmit,
    Maneuver,
}

/// Closed-form constant-acceleration step. Thrust is given in the body frame.
pub fn step_kinematics(
    k: &KinematicState,
    thrust: &Vector3<f64>,
    params: &VehicleParams,
    dt: f64,
) -> Result<KinematicState, EnvError> {
    if !(dt > 0.0) {
        return Err(EnvError::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    if !(thrust.norm() <= params.max_thrust * (1.0 + 1e-12)) {
        return Err(EnvError::InvalidInput(format!(
            "thrust {:.3} N exceeds max_thrust {:.3} N",
            thrust.norm(),
            params.max_thrust
        )));
    }
    let accel = k.rotation() * thrust / params.mass + params.gravity;
    let mut attitude = k.attitude;
    attitude.z = normalize_angle(attitude.z + k.angular_rate.z * dt);
    Ok(KinematicState {
        position: k.position + k.velocity * dt + 0.5 * accel * dt * dt,
        velocity: k.velocity + accel * dt,
        attitude,
        angular_rate: k.angular_rate,
    })
}

/// Body-frame thrust steering toward `target` with a saturated proportional law.
pub fn guidance_thrust(k: &KinematicState, target: &Vector3<f64>, params: &VehicleParams, dt: f64) -> Vector3<f64> {
    let mut v_des = (target - k.position) * params.position_gain;
    if v_des.norm() > params.cruise_speed {
        v_des *= params.cruise_speed / v_des.norm();
    }
    let mut accel = (v_des - k.velocity) / dt;
    let a_max = params.max_accel();
    if accel.norm() > a_max {
        accel *= a_max / accel.norm();
    }
    let world = params.mass * (accel - params.gravity);
    k.rotation().inverse() * world
}

/// Zero-mean Gaussian perturbation of (position, velocity) with per-component clipping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DisturbanceSpec", into = "DisturbanceSpec")]
pub struct DisturbanceModel {
    covariance: Matrix6<f64>,
    bounds: Vector6<f64>,
    factor: Matrix6<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum DisturbanceSpec {
    Diagonal {
        sigma_pos: f64,
        sigma_vel: f64,
        #[serde(default = "default_clip_sigmas")]
        clip_sigmas: f64,
    },
    Full {
        covariance: [[f64; 6]; 6],
        bounds: [f64; 6],
    },
}

fn default_clip_sigmas() -> f64 {
    3.0
}

impl TryFrom<DisturbanceSpec> for DisturbanceModel {
    type Error = EnvError;

    fn try_from(spec: DisturbanceSpec) -> Result<Self, EnvError> {
        match spec {
            DisturbanceSpec::Diagonal {
                sigma_pos,
                sigma_vel,
                clip_sigmas,
            } => DisturbanceModel::diagonal(sigma_pos, sigma_vel, clip_sigmas),
            DisturbanceSpec::Full { covariance, bounds } => {
                DisturbanceModel::new(Matrix6::from_fn(|i, j| covariance[i][j]), Vector6::from(bounds))
            }
        }
    }
}

impl From<DisturbanceModel> for DisturbanceSpec {
    fn from(m: DisturbanceModel) -> Self {
        DisturbanceSpec::Full {
            covariance: std::array::from_fn(|i| std::array::from_fn(|j| m.covariance[(i, j)])),
            bounds: std::array::from_fn(|i| m.bounds[i]),
        }
    }
}

impl DisturbanceModel {
    pub fn new(covariance: Matrix6<f64>, bounds: Vector6<f64>) -> Result<DisturbanceModel, EnvError> {
        if covariance.iter().any(|x| !x.is_finite()) {
            return Err(EnvError::InvalidInput("covariance has non-finite entries".into()));
        }
        let scale = covariance.amax().max(1.0);
        if (covariance - covariance.transpose()).amax() > 1e-12 * scale {
            return Err(EnvError::InvalidInput("covariance is not symmetric".into()));
        }
        if bounds.iter().any(|b| !(*b >= 0.0)) {
            return Err(EnvError::InvalidInput("clip bounds must be non-negative".into()));
        }
        let eig = SymmetricEigen::new(covariance);
        if eig.eigenvalues.min() < -1e-9 * scale {
            return Err(EnvError::InvalidInput("covariance is not positive semi-definite".into()));
        }
        let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        let factor = eig.eigenvectors * Matrix6::from_diagonal(&roots);
        Ok(DisturbanceModel {
            covariance,
            bounds,
            factor,
        })
    }

    pub fn diagonal(sigma_pos: f64, sigma_vel: f64, clip_sigmas: f64) -> Result<DisturbanceModel, EnvError> {
        if !(sigma_pos >= 0.0 && sigma_vel >= 0.0 && clip_sigmas >= 0.0) {
            return Err(EnvError::InvalidInput("disturbance sigmas must be non-negative".into()));
        }
        let sig = Vector6::new(sigma_pos, sigma_pos, sigma_pos, sigma_vel, sigma_vel, sigma_vel);
        DisturbanceModel::new(Matrix6::from_diagonal(&sig.component_mul(&sig)), sig * clip_sigmas)
    }

    pub fn zero() -> DisturbanceModel {
        DisturbanceModel::new(Matrix6::zeros(), Vector6::zeros()).expect("zero covariance is PSD")
    }

    /// Unclipped covariance with effectively infinite bounds; used for moment checks.
    pub fn unbounded(covariance: Matrix6<f64>) -> Result<DisturbanceModel, EnvError> {
        DisturbanceModel::new(covariance, Vector6::repeat(f64::MAX))
    }

    pub fn covariance(&self) -> &Matrix6<f64> {
        &self.covariance
    }

    pub fn bounds(&self) -> &Vector6<f64> {
        &self.bounds
    }

    /// Draws six standard normals and returns the clipped correlated sample.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector6<f64> {
        let z = Vector6::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        let mut x = self.factor * z;
        for i in 0..6 {
            x[i] = x[i].clamp(-self.bounds[i], self.bounds[i]);
        }
        x
    }
}

impl Default for DisturbanceModel {
    fn default() -> Self {
        DisturbanceModel::diagonal(0.5, 0.2, 3.0).expect("default sigmas are valid")
    }
}

pub fn apply_disturbance<R: Rng + ?Sized>(k: &KinematicState, model: &DisturbanceModel, rng: &mut R) -> KinematicState {
    let xi = model.sample(rng);
    KinematicState {
        position: k.position + xi.fixed_rows::<3>(0),
        velocity: k.velocity + xi.fixed_rows::<3>(3),
        ..k.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geofence {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum GeofenceSpec {
    Circle { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

impl Geofence {
    /// Bounding circle of a polygonal exclusion zone: vertex centroid and farthest vertex.
    pub fn from_polygon(vertices: &[[f64; 2]]) -> Option<Geofence> {
        if vertices.is_empty() {
            return None;
        }
        let n = vertices.len() as f64;
        let cx = vertices.iter().map(|v| v[0]).sum::<f64>() / n;
        let cy = vertices.iter().map(|v| v[1]).sum::<f64>() / n;
        let radius = vertices
            .iter()
            .map(|v| (v[0] - cx).hypot(v[1] - cy))
            .fold(0.0, f64::max);
        Some(Geofence {
            center: [cx, cy],
            radius,
        })
    }

    pub fn horizontal_distance(&self, p: &Vector3<f64>) -> f64 {
        (p.x - self.center[0]).hypot(p.y - self.center[1])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AirspaceSpec")]
pub struct Airspace {
    pub z_min: f64,
    pub z_max: f64,
    pub geofences: Vec<Geofence>,
    pub separation_margin: f64,
}

#[derive(Deserialize)]
struct AirspaceSpec {
    z_min: f64,
    z_max: f64,
    #[serde(default)]
    geofences: Vec<GeofenceSpec>,
    #[serde(default = "default_margin")]
    separation_margin: f64,
}

fn default_margin() -> f64 {
    10.0
}

impl TryFrom<AirspaceSpec> for Airspace {
    type Error = EnvError;

    fn try_from(spec: AirspaceSpec) -> Result<Self, EnvError> {
        let geofences = spec
            .geofences
            .into_iter()
            .map(|g| match g {
                GeofenceSpec::Circle { center, radius } => Ok(Geofence { center, radius }),
                GeofenceSpec::Polygon { vertices } => {
                    Geofence::from_polygon(&vertices).ok_or_else(|| EnvError::InvalidInput("empty polygon".into()))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Airspace::new(spec.z_min, spec.z_max, geofences, spec.separation_margin)
    }
}

impl Airspace {
    pub fn new(z_min: f64, z_max: f64, geofences: Vec<Geofence>, separation_margin: f64) -> Result<Airspace, EnvError> {
        if !(z_min < z_max) {
            return Err(EnvError::InvalidInput(format!("z_min {z_min} must be below z_max {z_max}")));
        }
        if let Some(g) = geofences.iter().find(|g| !(g.radius > 0.0)) {
            return Err(EnvError::InvalidInput(format!("geofence radius must be positive, got {}", g.radius)));
        }
        if !(separation_margin >= 0.0) {
            return Err(EnvError::InvalidInput("separation margin must be non-negative".into()));
        }
        Ok(Airspace {
            z_min,
            z_max,
            geofences,
            separation_margin,
        })
    }

    pub fn clamp_altitude(&self, z: f64) -> f64 {
        z.clamp(self.z_min, self.z_max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeofenceCheck {
    pub compliant: bool,
    /// Signed distance to the nearest fence edge; `+inf` without fences.
    pub min_clearance: f64,
}

pub fn check_geofence(p: &Vector3<f64>, airspace: &Airspace) -> GeofenceCheck {
    let min_clearance = airspace
        .geofences
        .iter()
        .map(|g| g.horizontal_distance(p) - g.radius)
        .fold(f64::INFINITY, f64::min);
    GeofenceCheck {
        compliant: airspace.geofences.iter().all(|g| g.horizontal_distance(p) >= g.radius),
        min_clearance,
    }
}

pub fn check_altitude(p: &Vector3<f64>, airspace: &Airspace) -> bool {
    airspace.z_min <= p.z && p.z <= airspace.z_max
}

pub fn check_separation(p: &Vector3<f64>, peers: &[Vector3<f64>], margin: f64) -> bool {
    peers.iter().all(|q| (p - q).norm() >= margin)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sensor {
    #[serde(rename = "LiDAR")]
    Lidar,
    #[serde(rename = "RGB")]
    Rgb,
    #[serde(rename = "Thermal")]
    Thermal,
    #[serde(rename = "IMU")]
    Imu,
}

impl Sensor {
    pub const ALL: [Sensor; 4] = [Sensor::Lidar, Sensor::Rgb, Sensor::Thermal, Sensor::Imu];

    pub fn as_str(self) -> &'static str {
        match self {
            Sensor::Lidar => "LiDAR",
            Sensor::Rgb => "RGB",
            Sensor::Thermal => "Thermal",
            Sensor::Imu => "IMU",
        }
    }

    pub fn parse(s: &str) -> Option<Sensor> {
        Sensor::ALL.into_iter().find(|x| x.as_str().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Sensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SafetyFlags {
    pub altitude_violation: bool,
    pub nfz_violation: bool,
    pub separation_breach: bool,
    pub battery_depleted: bool,
}

impl SafetyFlags {
    pub fn any(&self) -> bool {
        self.altitude_violation || self.nfz_violation || self.separation_breach || self.battery_depleted
    }

    /// Sticky union.
    pub fn merge(&self, other: &SafetyFlags) -> SafetyFlags {
        SafetyFlags {
            altitude_violation: self.altitude_violation || other.altitude_violation,
            nfz_violation: self.nfz_violation || other.nfz_violation,
            separation_breach: self.separation_breach || other.separation_breach,
            battery_depleted: self.battery_depleted || other.battery_depleted,
        }
    }

    pub fn dominates(&self, earlier: &SafetyFlags) -> bool {
        (self.altitude_violation || !earlier.altitude_violation)
            && (self.nfz_violation || !earlier.nfz_violation)
            && (self.separation_breach || !earlier.separation_breach)
            && (self.battery_depleted || !earlier.battery_depleted)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Capture {
    pub position: Vector3<f64>,
    pub sensor: Sensor,
}

/// What a scenario asks the vehicle to accomplish.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MissionObjective {
    pub waypoint: Vector3<f64>,
    #[serde(default = "default_tolerance")]
    pub tolerance_m: f64,
    #[serde(default)]
    pub require_capture: bool,
    #[serde(default)]
    pub capture_sensor: Option<Sensor>,
    #[serde(default)]
    pub require_landing: bool,
}

fn default_tolerance() -> f64 {
    5.0
}

impl MissionObjective {
    pub fn at_waypoint(&self, p: &Vector3<f64>) -> bool {
        (p - self.waypoint).norm() <= self.tolerance_m
    }

    pub fn capture_satisfied(&self, captures: &[Capture]) -> bool {
        !self.require_capture
            || captures.iter().any(|c| {
                self.at_waypoint(&c.position) && self.capture_sensor.is_none_or(|s| s == c.sensor)
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    pub kinematics: KinematicState,
    pub battery: f64,
    pub flags: SafetyFlags,
    pub sensors: BTreeMap<Sensor, bool>,
    /// Position the guidance law steers toward; the hold point when hovering.
    pub target: Vector3<f64>,
    pub landing: bool,
    pub landed: bool,
    pub captures: Vec<Capture>,
    pub waypoint_reached: bool,
    pub mission_completed: bool,
}

impl UavState {
    pub fn new(kinematics: KinematicState, battery: f64) -> UavState {
        let target = kinematics.position;
        UavState {
            kinematics,
            battery,
            flags: SafetyFlags {
                battery_depleted: battery < BATTERY_DEPLETED_PCT,
                ..SafetyFlags::default()
            },
            sensors: Sensor::ALL.into_iter().map(|s| (s, s == Sensor::Imu)).collect(),
            target,
            landing: false,
            landed: false,
            captures: Vec::new(),
            waypoint_reached: false,
            mission_completed: false,
        }
    }

    pub fn position(&self) -> &Vector3<f64> {
        &self.kinematics.position
    }

    pub fn speed(&self) -> f64 {
        self.kinematics.speed()
    }

    pub fn sensor_active(&self, s: Sensor) -> bool {
        self.sensors.get(&s).copied().unwrap_or(false)
    }

    /// Projection onto the scalar record kept in episodes.
    pub fn final_state(&self) -> FinalState {
        let p = self.kinematics.position;
        FinalState {
            position: [p.x, p.y, p.z],
            velocity: self.speed(),
            yaw: self.kinematics.yaw(),
            battery: self.battery,
            mission_completed: self.mission_completed,
            altitude_violation: self.flags.altitude_violation,
            nfz_violation: self.flags.nfz_violation,
            separation_breach: self.flags.separation_breach,
            battery_depleted: self.flags.battery_depleted,
        }
    }

    fn moving(&self) -> bool {
        !self.landed && ((self.target - self.kinematics.position).norm() > 1.0 || self.speed() > 0.5)
    }
}

pub fn update_battery(state: &UavState, class: ActionClass, params: &VehicleParams, dt: f64) -> UavState {
    let mut next = state.clone();
    next.battery = (state.battery - params.draw(class) * dt).max(0.0);
    if next.battery < BATTERY_DEPLETED_PCT {
        next.flags.battery_depleted = true;
    }
    next
}

/// Everything fixed for the duration of one episode that a turn needs.
pub struct EnvContext<'a> {
    pub tools: ToolContext<'a>,
    pub params: &'a VehicleParams,
    pub disturbance: &'a DisturbanceModel,
    pub objective: Option<&'a MissionObjective>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: UavState,
    pub observation: Option<Observation>,
    /// Replacement network when the turn's tool switched slices.
    pub network: Option<NetworkState>,
}

/// One dialogue turn of world evolution: tool effect, guidance, disturbance,
/// battery drain, then flag and mission bookkeeping.
pub fn evolve_state<R: Rng + ?Sized, D: Rng + ?Sized>(
    state: &UavState,
    action: Option<&Action>,
    network: &NetworkState,
    ctx: &EnvContext<'_>,
    tool_rng: &mut R,
    disturbance_rng: &mut D,
    dt: f64,
) -> Transition {
    let outcome = match action {
        Some(a) => tools::execute_action(a, state, network, &ctx.tools, tool_rng),
        None => tools::ToolOutcome::passive(state),
    };
    let mut next = outcome.state;
    let airspace = ctx.tools.airspace;

    if !next.landed {
        let thrust = guidance_thrust(&next.kinematics, &next.target, ctx.params, dt);
        if let Ok(k) = step_kinematics(&next.kinematics, &thrust, ctx.params, dt) {
            next.kinematics = k;
        }
        if next.landing && next.kinematics.position.z <= airspace.z_min + TOUCHDOWN_BAND_M {
            next.kinematics.position.z = airspace.z_min;
            next.kinematics.velocity = Vector3::zeros();
            next.kinematics.angular_rate = Vector3::zeros();
            next.target = next.kinematics.position;
            next.landed = true;
        } else {
            next.kinematics = apply_disturbance(&next.kinematics, ctx.disturbance, disturbance_rng);
        }
    }

    let motion = if next.landed {
        ActionClass::Idle
    } else if state.moving() || next.moving() {
        ActionClass::Maneuver
    } else {
        ActionClass::Hover
    };
    next = update_battery(&next, outcome.class.max(motion), ctx.params, dt);

    let p = next.kinematics.position;
    let peers = ctx.tools.swarm.positions_at(ctx.tools.turn_index);
    let observed = SafetyFlags {
        altitude_violation: !check_altitude(&p, airspace),
        nfz_violation: !check_geofence(&p, airspace).compliant,
        separation_breach: !check_separation(&p, &peers, airspace.separation_margin),
        battery_depleted: next.flags.battery_depleted,
    };
    next.flags = next.flags.merge(&observed);

    if let Some(obj) = ctx.objective {
        next.waypoint_reached |= obj.at_waypoint(&p);
        let done = next.waypoint_reached
            && obj.capture_satisfied(&next.captures)
            && (!obj.require_landing || next.landed);
        next.mission_completed |= done;
    }

    Transition {
        state: next,
        observation: outcome.observation,
        network: outcome.network,
    }
}
