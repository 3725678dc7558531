//! Six-pillar episode scoring, the weighted composite, generation efficiency
//! and reliability-adjusted model aggregates.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::episode::{Action, Episode, FinalState, Observation, Role, ValidationReport};
use crate::network::{classify_hard, Slice};
use crate::tools::match_action_observation;

pub const DEFAULT_T_OPT: u32 = 10;

#[derive(Debug, Error, PartialEq)]
pub enum ScoringError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum AggregateError {
    /// No valid episodes; the aggregate still carries its factors with `alpha3_rel = 0`.
    #[error("model '{}' has no valid episodes", .0.model)]
    DegenerateInput(Box<ModelAggregate>),
    #[error("invalid aggregation input: {0}")]
    InvalidInput(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 6]", into = "[f64; 6]")]
pub struct ScoringWeights {
    w: [f64; 6],
}

impl ScoringWeights {
    /// Weights in pillar order TO, SP, TC, IQ, NR, CC.
    pub fn new(w: [f64; 6]) -> Result<ScoringWeights, ScoringError> {
        if w.iter().any(|x| !(*x >= 0.0)) {
            return Err(ScoringError::InvalidWeights(format!("{w:?} has a negative entry")));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(ScoringError::InvalidWeights(format!("{w:?} sums to {sum}")));
        }
        Ok(ScoringWeights { w })
    }

    pub fn as_array(&self) -> [f64; 6] {
        self.w
    }
}

impl Default for ScoringWeights {
    fn default() -> Self {
        ScoringWeights {
            w: [0.30, 0.20, 0.20, 0.15, 0.10, 0.05],
        }
    }
}

impl TryFrom<[f64; 6]> for ScoringWeights {
    type Error = ScoringError;

    fn try_from(w: [f64; 6]) -> Result<Self, ScoringError> {
        ScoringWeights::new(w)
    }
}

impl From<ScoringWeights> for [f64; 6] {
    fn from(w: ScoringWeights) -> Self {
        w.w
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    pub tokens: f64,
    pub tools: f64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            tokens: 10_000.0,
            tools: 25.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NrParams {
    pub base_weight: f64,
    pub adapt_weight: f64,
    pub slice_weight: f64,
    pub bonus: f64,
    /// Minimum hard fraction for the completion bonus.
    pub bonus_hard_fraction: f64,
}

impl Default for NrParams {
    fn default() -> Self {
        NrParams {
            base_weight: 0.6,
            adapt_weight: 0.2,
            slice_weight: 0.2,
            bonus: 0.05,
            bonus_hard_fraction: 0.3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoringContext {
    pub t_opt: u32,
    pub budgets: Budgets,
    pub weights: ScoringWeights,
    pub nr: NrParams,
}

impl Default for ScoringContext {
    fn default() -> Self {
        ScoringContext {
            t_opt: DEFAULT_T_OPT,
            budgets: Budgets::default(),
            weights: ScoringWeights::default(),
            nr: NrParams::default(),
        }
    }
}

impl ScoringContext {
    pub fn with_t_opt(t_opt: u32) -> ScoringContext {
        ScoringContext {
            t_opt: t_opt.max(1),
            ..ScoringContext::default()
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PillarScores {
    #[serde(rename = "TO")]
    pub to: f64,
    #[serde(rename = "SP")]
    pub sp: f64,
    #[serde(rename = "TC")]
    pub tc: f64,
    #[serde(rename = "IQ")]
    pub iq: f64,
    #[serde(rename = "NR")]
    pub nr: f64,
    #[serde(rename = "CC")]
    pub cc: f64,
    pub alpha3: f64,
}

impl PillarScores {
    pub fn from_pillars(p: [f64; 6], w: &ScoringWeights) -> PillarScores {
        PillarScores {
            to: p[0],
            sp: p[1],
            tc: p[2],
            iq: p[3],
            nr: p[4],
            cc: p[5],
            alpha3: composite(&p, w),
        }
    }

    pub fn pillars(&self) -> [f64; 6] {
        [self.to, self.sp, self.tc, self.iq, self.nr, self.cc]
    }
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

pub fn composite(pillars: &[f64; 6], w: &ScoringWeights) -> f64 {
    pillars.iter().zip(w.w.iter()).map(|(p, w)| p * w).sum()
}

pub fn score_task_outcome(e: &Episode, v: &ValidationReport) -> f64 {
    let f = &e.final_state;
    if v.valid && f.mission_completed && !f.any_violation() {
        1.0
    } else {
        0.0
    }
}

pub fn safety_penalty(altitude: bool, nfz: bool, separation: bool, battery: bool) -> f64 {
    let v = |b: bool| if b { 1.0 } else { 0.0 };
    clamp01(1.0 - 0.25 * v(altitude) - 0.5 * v(nfz) - 0.5 * v(separation) - 0.25 * v(battery))
}

pub fn score_safety_policy(f: &FinalState) -> f64 {
    safety_penalty(f.altitude_violation, f.nfz_violation, f.separation_breach, f.battery_depleted)
}

pub fn score_tool_consistency(e: &Episode) -> f64 {
    let (structured, matched) = e.turns.iter().fold((0usize, 0usize), |(s, m), t| match t.structured_action() {
        Some(a) => (s + 1, m + usize::from(match_action_observation(a, t.observation.as_ref()))),
        None => (s, m),
    });
    if structured == 0 {
        1.0
    } else {
        matched as f64 / structured as f64
    }
}

pub fn strict_alternation(e: &Episode) -> bool {
    e.turns.windows(2).all(|w| w[0].role != w[1].role)
}

/// Numbers that appear in free text, e.g. `"battery 87.4%, turn 3"` gives `[87.4, 3.0]`.
pub fn extract_numbers(text: &str) -> Vec<f64> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let starts_number = bytes[i].is_ascii_digit()
            || (bytes[i] == b'-' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit));
        if !starts_number {
            i += 1;
            continue;
        }
        let start = i;
        i += 1;
        let mut seen_dot = false;
        while i < bytes.len() {
            let c = bytes[i];
            if c.is_ascii_digit() {
                i += 1;
            } else if c == b'.' && !seen_dot && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
                seen_dot = true;
                i += 1;
            } else {
                break;
            }
        }
        if let Ok(x) = text[start..i].parse::<f64>() {
            out.push(x);
        }
    }
    out
}

#[derive(Default)]
struct References {
    words: Vec<String>,
    numbers: Vec<f64>,
}

impl References {
    fn collect_value(&mut self, v: &Value) {
        match v {
            Value::String(s) if s.len() >= 3 => self.words.push(s.to_lowercase()),
            Value::Number(n) => self.numbers.extend(n.as_f64()),
            Value::Array(items) => items.iter().for_each(|x| self.collect_value(x)),
            Value::Object(m) => m.values().for_each(|x| self.collect_value(x)),
            _ => {}
        }
    }

    fn collect_observation(&mut self, o: &Observation) {
        match o {
            Observation::McpResult(r) => {
                self.words.push(r.tool.to_lowercase());
                r.result.values().for_each(|v| self.collect_value(v));
            }
            Observation::A2aAck(a) => {
                self.words.push(a.task.to_lowercase());
                self.words.push(a.from.to_lowercase());
                a.payload.values().for_each(|v| self.collect_value(v));
            }
        }
    }

    fn number_hit(&self, x: f64) -> bool {
        self.numbers.iter().any(|y| (x - y).abs() <= 0.05 + 1e-3 * y.abs())
    }
}

fn action_strings(a: &Action) -> (Vec<String>, Vec<f64>) {
    let mut refs = References::default();
    match a {
        Action::McpCall(c) => c.args.values().for_each(|v| refs.collect_value(v)),
        Action::A2aTask(t) => {
            refs.words.push(t.to.to_lowercase());
            t.payload.values().for_each(|v| refs.collect_value(v));
        }
        Action::IntentOnly => {}
    }
    (refs.words, refs.numbers)
}

fn mentions_turn(text: &str, before: usize) -> bool {
    let lower = text.to_lowercase();
    lower.match_indices("turn ").any(|(i, m)| {
        let rest = &lower[i + m.len()..];
        let digits: String = rest.chars().take_while(char::is_ascii_digit).collect();
        digits.parse::<usize>().is_ok_and(|n| n < before)
    })
}

/// Whether the agent turn at `index` references earlier context: a prior
/// observation's tool, strings or numbers, a slice name, a number from a
/// user request, or an explicit earlier turn number.
pub fn is_grounded(e: &Episode, index: usize) -> bool {
    let turn = &e.turns[index];
    let mut refs = References::default();
    for prior in &e.turns[..index] {
        if let Some(o) = &prior.observation {
            refs.collect_observation(o);
        }
        if prior.role == Role::User {
            refs.numbers.extend(extract_numbers(&prior.intent));
        }
        refs.words.push(prior.network.slice.as_str().to_lowercase());
    }
    refs.words.push(turn.network.slice.as_str().to_lowercase());

    let intent = turn.intent.to_lowercase();
    if refs.words.iter().any(|w| intent.contains(w.as_str())) {
        return true;
    }
    if extract_numbers(&turn.intent).into_iter().any(|x| refs.number_hit(x)) {
        return true;
    }
    if mentions_turn(&turn.intent, index) {
        return true;
    }
    if let Some(a) = &turn.action {
        if a.identifier().is_some_and(|id| refs.words.iter().any(|w| w == &id.to_lowercase())) {
            return true;
        }
        let (words, numbers) = action_strings(a);
        if words.iter().any(|s| refs.words.contains(s)) || numbers.into_iter().any(|x| refs.number_hit(x)) {
            return true;
        }
    }
    false
}

pub fn grounded_fraction(e: &Episode) -> f64 {
    let agent: Vec<usize> = e.agent_turns().map(|(i, _)| i).collect();
    if agent.is_empty() {
        return 0.0;
    }
    agent.iter().filter(|&&i| is_grounded(e, i)).count() as f64 / agent.len() as f64
}

pub fn score_interaction_quality(e: &Episode, ctx: &ScoringContext) -> f64 {
    let t = e.turns.len().max(1) as f64;
    let ratio = (f64::from(ctx.t_opt.max(1)) / t).min(1.0);
    let alt = if strict_alternation(e) { 1.0 } else { 0.0 };
    (ratio + alt + grounded_fraction(e)) / 3.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NrBreakdown {
    pub hard_fraction: f64,
    pub base: f64,
    pub adapt: f64,
    pub slice: f64,
    pub bonus: f64,
}

pub fn network_robustness_parts(e: &Episode, p: &NrParams) -> NrBreakdown {
    let total = e.turns.len();
    let mut hard = 0usize;
    let mut hard_actions = 0usize;
    let mut normal_actions = 0usize;
    let mut hard_off_embb = 0usize;
    for t in &e.turns {
        let structured = usize::from(t.structured_action().is_some());
        if classify_hard(&t.network) {
            hard += 1;
            hard_actions += structured;
            hard_off_embb += usize::from(t.network.slice != Slice::Embb);
        } else {
            normal_actions += structured;
        }
    }
    let hard_fraction = if total == 0 { 0.0 } else { hard as f64 / total as f64 };
    let normal = total - hard;
    let (adapt, slice) = if hard == 0 {
        (1.0, 1.0)
    } else {
        let rate_hard = hard_actions as f64 / hard as f64;
        let rate_normal = if normal == 0 { 0.0 } else { normal_actions as f64 / normal as f64 };
        let adapt = if rate_normal == 0.0 {
            if rate_hard > 0.0 {
                0.0
            } else {
                1.0
            }
        } else {
            clamp01(1.0 - rate_hard / rate_normal)
        };
        (adapt, hard_off_embb as f64 / hard as f64)
    };
    let bonus = if e.final_state.mission_completed && hard_fraction >= p.bonus_hard_fraction {
        p.bonus
    } else {
        0.0
    };
    NrBreakdown {
        hard_fraction,
        base: 1.0 - hard_fraction,
        adapt,
        slice,
        bonus,
    }
}

pub fn score_network_robustness(e: &Episode, ctx: &ScoringContext) -> f64 {
    let p = &ctx.nr;
    let b = network_robustness_parts(e, p);
    clamp01(p.base_weight * b.base + p.adapt_weight * b.adapt + p.slice_weight * b.slice + b.bonus)
}

pub fn score_communication_cost(e: &Episode, b: &Budgets) -> f64 {
    let tokens = (e.metadata.total_tokens as f64).max(1.0);
    let tools = (e.structured_actions().count() as f64).max(1.0);
    0.5 * (clamp01(b.tokens / tokens) + clamp01(b.tools / tools))
}

/// All pillars and the composite. Invalid episodes are discarded with every score at 0.
pub fn score_episode(e: &Episode, v: &ValidationReport, ctx: &ScoringContext) -> PillarScores {
    if !v.valid {
        return PillarScores::default();
    }
    let pillars = [
        score_task_outcome(e, v),
        score_safety_policy(&e.final_state),
        score_tool_consistency(e),
        score_interaction_quality(e, ctx),
        score_network_robustness(e, ctx),
        score_communication_cost(e, &ctx.budgets),
    ];
    PillarScores::from_pillars(pillars, &ctx.weights)
}

/// Lower median of turn counts, with a fallback when nothing succeeded.
pub fn t_opt_from_counts(mut counts: Vec<usize>) -> u32 {
    if counts.is_empty() {
        return DEFAULT_T_OPT;
    }
    counts.sort_unstable();
    (counts[(counts.len() - 1) / 2].max(1)) as u32
}

pub fn compute_t_opt<'a>(episodes: impl IntoIterator<Item = &'a Episode>) -> u32 {
    t_opt_from_counts(
        episodes
            .into_iter()
            .filter(|e| e.final_state.mission_completed)
            .map(|e| e.turns.len())
            .collect(),
    )
}

/// `(alpha3 per second, alpha3 per 1k tokens)`.
pub fn generation_efficiency(alpha3: f64, gen_time_s: f64, total_tokens: f64) -> Result<(f64, f64), ScoringError> {
    if !(gen_time_s > 0.0) {
        return Err(ScoringError::DegenerateInput(format!("gen_time_s = {gen_time_s}")));
    }
    if !(total_tokens > 0.0) {
        return Err(ScoringError::DegenerateInput(format!("total_tokens = {total_tokens}")));
    }
    Ok((alpha3 / gen_time_s, alpha3 / (total_tokens / 1000.0)))
}

/// Per-episode inputs to model aggregation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeScore {
    pub scores: PillarScores,
    pub mission_completed: bool,
    pub gen_time_s: f64,
    pub total_tokens: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelAggregate {
    pub model: String,
    pub n: usize,
    pub n_fail: usize,
    pub episode_budget: usize,
    pub total_attempt_calls: usize,
    pub mean_alpha3: f64,
    pub mean_pillars: PillarScores,
    pub reliability: f64,
    pub coverage: f64,
    pub call_efficiency: f64,
    pub alpha3_rel: f64,
    pub mean_gen_time_s: f64,
    pub mean_total_tokens: f64,
    pub alpha3_per_sec: f64,
    pub alpha3_per_1k: f64,
    pub success_rate: f64,
    pub gen_fail_rate: f64,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub fn aggregate_model(
    model: &str,
    episodes: &[EpisodeScore],
    n_fail: usize,
    episode_budget: usize,
    total_attempt_calls: usize,
) -> Result<ModelAggregate, AggregateError> {
    let n = episodes.len();
    if episode_budget == 0 {
        return Err(AggregateError::InvalidInput("episode budget must be positive".into()));
    }
    if total_attempt_calls < n {
        return Err(AggregateError::InvalidInput(format!(
            "{total_attempt_calls} attempt calls cannot produce {n} episodes"
        )));
    }
    let attempts = n + n_fail;
    let reliability = if attempts == 0 { 0.0 } else { n as f64 / attempts as f64 };
    let coverage = (n as f64 / episode_budget as f64).min(1.0);
    let call_efficiency = if total_attempt_calls == 0 {
        0.0
    } else {
        (episode_budget as f64 / total_attempt_calls as f64).min(1.0)
    };
    let mean_alpha3 = mean(episodes.iter().map(|e| e.scores.alpha3));
    let mean_pillars = PillarScores {
        to: mean(episodes.iter().map(|e| e.scores.to)),
        sp: mean(episodes.iter().map(|e| e.scores.sp)),
        tc: mean(episodes.iter().map(|e| e.scores.tc)),
        iq: mean(episodes.iter().map(|e| e.scores.iq)),
        nr: mean(episodes.iter().map(|e| e.scores.nr)),
        cc: mean(episodes.iter().map(|e| e.scores.cc)),
        alpha3: mean_alpha3,
    };
    let alpha3_rel = mean_alpha3 * reliability * coverage * call_efficiency;
    let mean_gen_time_s = mean(episodes.iter().map(|e| e.gen_time_s));
    let mean_total_tokens = mean(episodes.iter().map(|e| e.total_tokens));
    let per = |denominator: f64| if denominator > 0.0 { alpha3_rel / denominator } else { 0.0 };
    let agg = ModelAggregate {
        model: model.to_string(),
        n,
        n_fail,
        episode_budget,
        total_attempt_calls,
        mean_alpha3,
        mean_pillars,
        reliability,
        coverage,
        call_efficiency,
        alpha3_rel,
        mean_gen_time_s,
        mean_total_tokens,
        alpha3_per_sec: per(mean_gen_time_s),
        alpha3_per_1k: per(mean_total_tokens / 1000.0),
        success_rate: mean(episodes.iter().map(|e| if e.mission_completed { 1.0 } else { 0.0 })),
        gen_fail_rate: if attempts == 0 { 0.0 } else { n_fail as f64 / attempts as f64 },
    };
    if n == 0 {
        return Err(AggregateError::DegenerateInput(Box::new(agg)));
    }
    Ok(agg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::episode::{EpisodeMetadata, JsonMap, McpResult, Turn};
    use crate::network::NetworkState;

    fn net(slice: Slice, hard: bool) -> NetworkState {
        NetworkState {
            slice,
            latency_ms: if hard { 60.0 } else { 7.0 },
            jitter_ms: 1.0,
            loss_pct: 0.05,
            throughput_mbps: 90.0,
            edge_load: 0.3,
        }
    }

    fn turn(role: Role, intent: &str, action: Option<Action>, obs: Option<Observation>, network: NetworkState) -> Turn {
        Turn {
            role,
            intent: intent.into(),
            action,
            observation: obs,
            network,
        }
    }

    fn mcp_obs(tool: &str, result: Value) -> Observation {
        Observation::McpResult(McpResult {
            tool: tool.into(),
            result: serde_json::from_value(result).unwrap(),
        })
    }

    fn episode(turns: Vec<Turn>) -> Episode {
        Episode {
            episode_id: "e".into(),
            metadata: EpisodeMetadata {
                model: "m".into(),
                seed: 42,
                scenario_id: "S".into(),
                gen_time_s: 1.0,
                attempts_used: 1,
                prompt_tokens: 900,
                completion_tokens: 100,
                total_tokens: 1000,
                timestamp: "1970-01-01T00:00:00Z".into(),
                temperature: 0.0,
            },
            turns,
            final_state: FinalState {
                position: [0.0; 3],
                velocity: 0.0,
                yaw: 0.0,
                battery: 90.0,
                mission_completed: true,
                altitude_violation: false,
                nfz_violation: false,
                separation_breach: false,
                battery_depleted: false,
            },
        }
    }

    #[test]
    fn table_rows_composite() {
        let w = ScoringWeights::default();
        let claude = composite(&[1.000, 0.965, 1.000, 0.961, 0.871, 0.492], &w);
        let gpt4o = composite(&[1.000, 0.990, 1.000, 0.995, 0.855, 0.874], &w);
        assert!((claude - 0.94885).abs() < 1e-12);
        assert!((gpt4o - 0.97645).abs() < 1e-12);
        assert!((composite(&[1.0; 6], &w) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weights_must_sum_to_one() {
        assert!(ScoringWeights::new([0.5, 0.5, 0.1, 0.0, 0.0, 0.0]).is_err());
        assert!(ScoringWeights::new([1.1, -0.1, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(serde_json::from_str::<ScoringWeights>("[0.3,0.2,0.2,0.15,0.1,0.05]").is_ok());
    }

    #[test]
    fn safety_examples() {
        assert_eq!(safety_penalty(false, false, false, false), 1.0);
        assert_eq!(safety_penalty(false, true, true, false), 0.0);
        assert_eq!(safety_penalty(true, false, false, false), 0.75);
    }

    #[test]
    fn t_opt_rules() {
        assert_eq!(t_opt_from_counts(vec![8, 10, 12]), 10);
        assert_eq!(t_opt_from_counts(vec![]), 10);
        assert_eq!(t_opt_from_counts(vec![12, 8, 12, 8]), 8);
    }

    #[test]
    fn efficiency_examples() {
        let (_, per_1k) = generation_efficiency(0.976, 10.0, 4032.1).unwrap();
        assert!((per_1k - 0.2421).abs() < 5e-5);
        let (per_sec, _) = generation_efficiency(0.976, 10.581, 1000.0).unwrap();
        assert!((per_sec - 0.0922).abs() < 5e-5);
        assert_eq!(generation_efficiency(0.0, 3.0, 10.0).unwrap(), (0.0, 0.0));
        assert!(generation_efficiency(0.5, 0.0, 10.0).is_err());
        assert!(generation_efficiency(0.5, 1.0, 0.0).is_err());
    }

    fn scores(alpha3: f64) -> EpisodeScore {
        EpisodeScore {
            scores: PillarScores {
                alpha3,
                ..PillarScores::default()
            },
            mission_completed: true,
            gen_time_s: 10.581,
            total_tokens: 4032.1,
        }
    }

    #[test]
    fn aggregation_examples() {
        let all = vec![scores(0.976); 50];
        let a = aggregate_model("m", &all, 0, 50, 50).unwrap();
        assert_eq!((a.reliability, a.coverage, a.call_efficiency), (1.0, 1.0, 1.0));
        assert!((a.alpha3_rel - 0.976).abs() < 1e-12);

        let a = aggregate_model("m", &vec![scores(1.0); 33], 17, 50, 50).unwrap();
        assert!((a.reliability - 0.66).abs() < 1e-12);

        let a = aggregate_model("m", &all, 0, 50, 100).unwrap();
        assert_eq!(a.call_efficiency, 0.5);

        match aggregate_model("m", &[], 5, 50, 15) {
            Err(AggregateError::DegenerateInput(a)) => {
                assert_eq!(a.alpha3_rel, 0.0);
                assert_eq!(a.reliability, 0.0);
                assert_eq!(a.gen_fail_rate, 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nr_worked_example() {
        let mut turns = Vec::new();
        for i in 0..8 {
            let hard = i >= 4;
            let role = if i % 2 == 0 { Role::User } else { Role::Agent };
            let structured = if hard { i == 5 } else { i == 1 || i == 3 };
            let action = structured.then(|| Action::mcp("read_telemetry", JsonMap::new()));
            let slice = if hard { Slice::Urllc } else { Slice::Embb };
            turns.push(turn(role, "x", action, None, net(slice, hard)));
        }
        let e = episode(turns);
        let b = network_robustness_parts(&e, &NrParams::default());
        assert_eq!(b.hard_fraction, 0.5);
        assert_eq!(b.adapt, 0.5);
        assert_eq!(b.slice, 1.0);
        assert_eq!(b.bonus, 0.05);
        assert!((score_network_robustness(&e, &ScoringContext::default()) - 0.65).abs() < 1e-12);
    }

    #[test]
    fn nr_extremes() {
        let calm = episode((0..8).map(|_| turn(Role::User, "x", None, None, net(Slice::Urllc, false))).collect());
        assert_eq!(score_network_robustness(&calm, &ScoringContext::default()), 1.0);
        let mut stormy = episode(
            (0..8)
                .map(|_| {
                    turn(
                        Role::Agent,
                        "x",
                        Some(Action::mcp("capture_image", JsonMap::new())),
                        None,
                        net(Slice::Embb, true),
                    )
                })
                .collect(),
        );
        stormy.final_state.mission_completed = false;
        assert_eq!(score_network_robustness(&stormy, &ScoringContext::default()), 0.0);
    }

    #[test]
    fn tc_and_cc_examples() {
        let tel = || Some(Action::mcp("read_telemetry", JsonMap::new()));
        let obs = |t: &str| Some(mcp_obs(t, serde_json::json!({})));
        let n = || net(Slice::Urllc, false);
        let e = episode(vec![
            turn(Role::Agent, "a", tel(), obs("read_telemetry"), n()),
            turn(Role::Agent, "b", tel(), obs("read_telemetry"), n()),
            turn(Role::Agent, "c", tel(), obs("read_telemetry"), n()),
            turn(Role::Agent, "d", tel(), obs("set_waypoint"), n()),
            turn(Role::Agent, "e", Some(Action::IntentOnly), None, n()),
        ]);
        assert_eq!(score_tool_consistency(&e), 0.75);
        let only_intent = episode(vec![turn(Role::Agent, "x", Some(Action::IntentOnly), None, n())]);
        assert_eq!(score_tool_consistency(&only_intent), 1.0);

        let mut big = only_intent.clone();
        big.metadata.total_tokens = 20_000;
        big.turns = (0..50).map(|_| turn(Role::Agent, "x", tel(), None, n())).collect();
        assert_eq!(score_communication_cost(&big, &Budgets::default()), 0.5);
        let mut at = only_intent;
        at.metadata.total_tokens = 10_000;
        assert_eq!(score_communication_cost(&at, &Budgets::default()), 1.0);
    }

    #[test]
    fn interaction_quality_examples() {
        let n = || net(Slice::Urllc, false);
        let mut turns = Vec::new();
        for i in 0..5 {
            turns.push(turn(Role::User, &format!("go to altitude {}", 40 + i), None, None, n()));
            turns.push(turn(Role::Agent, &format!("climbing to {}", 40 + i), None, None, n()));
        }
        let e = episode(turns);
        assert_eq!(grounded_fraction(&e), 1.0);
        assert!((score_interaction_quality(&e, &ScoringContext::with_t_opt(10)) - 1.0).abs() < 1e-12);
        assert!((score_interaction_quality(&e, &ScoringContext::with_t_opt(5)) - 2.5 / 3.0).abs() < 1e-12);
        let mut broken = e.clone();
        broken.turns[1].role = Role::User;
        broken.turns[1].intent = "go to altitude 40".into();
        broken.turns.push(broken.turns[0].clone());
        broken.turns.truncate(10);
        assert!(!strict_alternation(&broken));
    }

    #[test]
    fn grounding_sources() {
        let n = || net(Slice::Urllc, false);
        let e = episode(vec![
            turn(Role::User, "start", None, None, n()),
            turn(
                Role::Agent,
                "reading state",
                Some(Action::mcp("read_telemetry", JsonMap::new())),
                Some(mcp_obs("read_telemetry", serde_json::json!({"battery": 87.4}))),
                n(),
            ),
            turn(Role::User, "continue", None, None, n()),
            turn(Role::Agent, "battery is 87.4 percent", None, None, n()),
            turn(Role::Agent, "as noted in turn 1", None, None, n()),
            turn(Role::Agent, "staying on urllc", None, None, n()),
            turn(Role::Agent, "nothing here", None, None, n()),
        ]);
        assert!(!is_grounded(&e, 1));
        assert!(is_grounded(&e, 3));
        assert!(is_grounded(&e, 4));
        assert!(is_grounded(&e, 5));
        assert!(!is_grounded(&e, 6));
    }

    #[test]
    fn number_extraction() {
        assert_eq!(extract_numbers("battery 87.4%, turn 3, dz -2.5 at S01."), vec![87.4, 3.0, -2.5, 1.0]);
        assert!(extract_numbers("no digits").is_empty());
    }
}
