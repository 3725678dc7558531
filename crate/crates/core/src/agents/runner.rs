//! The turn loop and its three-attempt retry envelope.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{constrain, AgentError, AgentPolicy, DraftTurn, PolicyContext, UserSimulator};
use crate::environment::{evolve_state, EnvContext, UavState};
use crate::episode::{
    make_failure_stub, validate_value, Action, CorpusRecord, Episode, ErrorKind, Observation, ValidationMode,
    MAX_ATTEMPTS, MAX_TURNS, MIN_TURNS,
};
use crate::network::{classify_hard, evolve_network, sample_network_state, CalibrationTargets, SliceCalibration};
use crate::scenario::{Scenario, ScenarioError};
use crate::seeding::sub_stream;
use crate::tools::{ToolContext, ToolRegistry};

pub const CANONICAL_TIMESTAMP: &str = "1970-01-01T00:00:00Z";

/// Deterministic token accounting for scripted agents.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TokenModel {
    pub system_prompt: u64,
    pub mission_brief: u64,
    pub chars_per_token: u64,
    /// Prompt cost of each image already returned in the dialogue.
    pub image_tokens: u64,
    pub reply_overhead: u64,
}

impl Default for TokenModel {
    fn default() -> Self {
        TokenModel {
            system_prompt: 320,
            mission_brief: 60,
            chars_per_token: 4,
            image_tokens: 850,
            reply_overhead: 24,
        }
    }
}

impl TokenModel {
    fn tokens_of(&self, text: &str) -> u64 {
        (text.len() as u64).div_ceil(self.chars_per_token.max(1))
    }

    pub fn prompt_tokens(&self, history: &[DraftTurn]) -> u64 {
        let images = history
            .iter()
            .filter(|t| matches!(&t.observation, Some(Observation::McpResult(r)) if r.tool == "capture_image"))
            .count() as u64;
        self.system_prompt
            + self.mission_brief
            + history
                .iter()
                .map(|t| self.tokens_of(&serde_json::to_string(t).unwrap_or_default()))
                .sum::<u64>()
            + images * self.image_tokens
    }

    pub fn completion_tokens(&self, intent: &str, action: Option<&Action>) -> u64 {
        let reply = json!({"intent": intent, "action": action});
        self.tokens_of(&reply.to_string()) + self.reply_overhead
    }
}

/// Synthetic per-agent-turn latency so efficiency metrics are reproducible.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenTimeModel {
    pub base_s: f64,
    pub per_completion_token_s: f64,
    /// Multiplier on the one-way network latency (round trip = 2).
    pub latency_factor: f64,
}

impl Default for GenTimeModel {
    fn default() -> Self {
        GenTimeModel {
            base_s: 0.6,
            per_completion_token_s: 0.004,
            latency_factor: 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum ClockMode {
    Simulated(GenTimeModel),
    WallClock,
}

impl Default for ClockMode {
    fn default() -> Self {
        ClockMode::Simulated(GenTimeModel::default())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSettings {
    pub max_attempts: u32,
    /// Completion-token cap per agent reply; longer replies count as truncated output.
    pub max_turn_tokens: u64,
    pub temperature: f64,
    pub clock: ClockMode,
    pub tokens: TokenModel,
    /// Fixed timestamp so corpora compare byte for byte.
    pub canonical: bool,
    pub dt: f64,
    /// Consecutive hard turns without a slice switch that end an episode.
    pub degraded_window: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            max_attempts: MAX_ATTEMPTS,
            max_turn_tokens: 10_000,
            temperature: 0.0,
            clock: ClockMode::default(),
            tokens: TokenModel::default(),
            canonical: false,
            dt: 1.0,
            degraded_window: 4,
        }
    }
}

/// A scenario with its network model and tool set resolved once for many episodes.
#[derive(Clone, Debug)]
pub struct PreparedScenario {
    pub scenario: Scenario,
    pub calibration: SliceCalibration,
    pub registry: ToolRegistry,
    pub user: UserSimulator,
    peers: Vec<String>,
}

impl PreparedScenario {
    pub fn new(
        scenario: Scenario,
        targets: &CalibrationTargets,
        base: &SliceCalibration,
        registry: ToolRegistry,
    ) -> Result<PreparedScenario, ScenarioError> {
        scenario.check()?;
        let calibration = scenario.calibration(targets, base)?;
        let user = UserSimulator::new(&scenario.user, &scenario.objective);
        let peers = scenario.swarm.peer_ids().map(String::from).collect();
        Ok(PreparedScenario {
            scenario,
            calibration,
            registry,
            user,
            peers,
        })
    }

    pub fn with_defaults(scenario: Scenario) -> Result<PreparedScenario, ScenarioError> {
        PreparedScenario::new(
            scenario,
            &CalibrationTargets::default(),
            &SliceCalibration::default(),
            ToolRegistry::builtin(),
        )
    }
}

/// Identity and seeds of one generation job.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeJob {
    pub episode_id: String,
    pub agent: String,
    pub index: usize,
    /// Seed recorded in metadata.
    pub episode_seed: u64,
    /// Root of the job's private random streams.
    pub stream_seed: u64,
}

struct Attempt {
    turns: Vec<DraftTurn>,
    state: UavState,
    prompt_tokens: u64,
    completion_tokens: u64,
    gen_time_s: f64,
    over_cap: bool,
}

fn should_stop(turns: &[DraftTurn], state: &UavState, window: usize) -> bool {
    if state.mission_completed {
        return true;
    }
    let f = &state.flags;
    if f.nfz_violation || f.separation_breach || f.battery_depleted {
        return true;
    }
    if window == 0 || turns.len() < window {
        return false;
    }
    let tail = &turns[turns.len() - window..];
    let all_hard = tail.iter().all(|t| classify_hard(&t.network));
    let switched = turns
        .iter()
        .rev()
        .find(|t| t.role == "agent")
        .and_then(|t| t.action.as_ref())
        .is_some_and(|a| a.identifier() == Some("switch_network_slice"));
    all_hard && !switched
}

fn simulate(prep: &PreparedScenario, job: &EpisodeJob, agent: &mut dyn AgentPolicy, strictness: u8, settings: &RunSettings) -> Attempt {
    let scenario = &prep.scenario;
    let calib = &prep.calibration;
    let mut net_rng = sub_stream(job.stream_seed, "network");
    let mut tool_rng = sub_stream(job.stream_seed, "tools");
    let mut dist_rng = sub_stream(job.stream_seed, "disturbance");

    let mut state = scenario.initial_uav_state();
    let mut network = sample_network_state(scenario.network.initial_slice, calib, &mut net_rng);
    let mut turns: Vec<DraftTurn> = Vec::with_capacity(MAX_TURNS);
    let mut attempt = Attempt {
        turns: Vec::new(),
        state: state.clone(),
        prompt_tokens: 0,
        completion_tokens: 0,
        gen_time_s: 0.0,
        over_cap: false,
    };

    for t in 0..MAX_TURNS {
        let (role, intent, action) = if t % 2 == 0 {
            let u = prep.user.simulate_user_turn(t, &state, &network);
            (u.role, u.intent, None)
        } else {
            let ctx = PolicyContext {
                turn_index: t,
                history: &turns,
                state: &state,
                network: &network,
                mission: &scenario.objective,
                peers: &prep.peers,
                geofences: scenario.airspace.geofences.len(),
                strictness,
                registry: &prep.registry,
            };
            let started = Instant::now();
            let reply = constrain(agent.next_turn(&ctx), strictness, &prep.registry, &network);
            let elapsed = started.elapsed().as_secs_f64();
            let prompt = settings.tokens.prompt_tokens(&turns);
            let completion = settings.tokens.completion_tokens(&reply.intent, reply.action.as_ref());
            attempt.prompt_tokens += prompt;
            attempt.completion_tokens += completion;
            attempt.over_cap |= completion > settings.max_turn_tokens;
            attempt.gen_time_s += match settings.clock {
                ClockMode::Simulated(g) => {
                    g.base_s + g.per_completion_token_s * completion as f64 + g.latency_factor * network.latency_ms / 1000.0
                }
                ClockMode::WallClock => elapsed,
            };
            (reply.role.unwrap_or_else(|| "agent".into()), reply.intent, reply.action)
        };

        let env = EnvContext {
            tools: ToolContext {
                registry: &prep.registry,
                swarm: &scenario.swarm,
                airspace: &scenario.airspace,
                calibration: calib,
                turn_index: t,
            },
            params: &scenario.vehicle,
            disturbance: &scenario.disturbance,
            objective: Some(&scenario.objective),
        };
        let tr = evolve_state(&state, action.as_ref(), &network, &env, &mut tool_rng, &mut dist_rng, settings.dt);
        turns.push(DraftTurn {
            role,
            intent,
            action,
            observation: tr.observation,
            network: network.clone(),
        });
        state = tr.state;
        network = match tr.network {
            Some(n) => n,
            None => evolve_network(&network, calib, &mut net_rng),
        };
        if turns.len() >= MIN_TURNS && should_stop(&turns, &state, settings.degraded_window) {
            break;
        }
    }
    attempt.turns = turns;
    attempt.state = state;
    attempt
}

struct Totals {
    prompt: u64,
    completion: u64,
    gen_time_s: f64,
}

fn assemble(prep: &PreparedScenario, job: &EpisodeJob, attempt: &Attempt, totals: &Totals, attempts_used: u32, timestamp: &str, settings: &RunSettings) -> Value {
    json!({
        "episode_id": job.episode_id,
        "metadata": {
            "model": job.agent,
            "seed": job.episode_seed,
            "scenario_id": prep.scenario.scenario_id,
            "gen_time_s": totals.gen_time_s,
            "attempts_used": attempts_used,
            "prompt_tokens": totals.prompt,
            "completion_tokens": totals.completion,
            "total_tokens": totals.prompt + totals.completion,
            "timestamp": timestamp,
            "temperature": settings.temperature,
        },
        "turns": attempt.turns,
        "final_state": attempt.state.final_state(),
    })
}

/// Generates one episode, retrying up to `max_attempts` times with rising
/// strictness. Every attempt replays the same seeded world with a fresh policy.
pub fn run_episode(
    prep: &PreparedScenario,
    job: &EpisodeJob,
    settings: &RunSettings,
    factory: &dyn Fn() -> Result<Box<dyn AgentPolicy>, AgentError>,
) -> CorpusRecord {
    let timestamp = if settings.canonical {
        CANONICAL_TIMESTAMP.to_string()
    } else {
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
    };
    let mut totals = Totals {
        prompt: 0,
        completion: 0,
        gen_time_s: 0.0,
    };
    let mut last_error = ErrorKind::Internal;
    let max_attempts = settings.max_attempts.clamp(1, MAX_ATTEMPTS);
    for attempt_no in 0..max_attempts {
        let mut agent = match factory() {
            Ok(a) => a,
            Err(e) => {
                log::warn!("{}: cannot start agent: {e}", job.episode_id);
                last_error = ErrorKind::Internal;
                continue;
            }
        };
        let attempt = simulate(prep, job, agent.as_mut(), attempt_no as u8, settings);
        totals.prompt += attempt.prompt_tokens;
        totals.completion += attempt.completion_tokens;
        totals.gen_time_s += attempt.gen_time_s;
        let doc = assemble(prep, job, &attempt, &totals, attempt_no + 1, &timestamp, settings);
        let report = validate_value(&doc, ValidationMode::Strict);
        if !report.valid {
            last_error = report.error_kind().unwrap_or(ErrorKind::SchemaInvalid);
            log::debug!("{} attempt {}: {:?}", job.episode_id, attempt_no + 1, report.violations);
            continue;
        }
        if attempt.over_cap {
            last_error = ErrorKind::SchemaInvalid;
            continue;
        }
        match serde_json::from_value::<Episode>(doc) {
            Ok(e) => return CorpusRecord::Episode(Box::new(e)),
            Err(e) => {
                log::warn!("{}: validated document did not parse: {e}", job.episode_id);
                last_error = ErrorKind::Internal;
            }
        }
    }
    CorpusRecord::Stub(make_failure_stub(
        &job.episode_id,
        &prep.scenario.scenario_id,
        &job.agent,
        job.episode_seed,
        last_error,
        &timestamp,
    ))
}
