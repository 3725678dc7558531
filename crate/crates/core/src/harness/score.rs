use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::HarnessError;
use crate::episode::{
    is_stub_value, parse_stub, validate_value, Episode, ErrorKind, FailureStub, ValidationMode, ValidationReport,
    ViolationCode,
};
use crate::scoring::{compute_t_opt, generation_efficiency, score_episode, PillarScores, ScoringContext};

pub const SCORES_FILE: &str = "scores.jsonl";

/// One corpus line after parsing and validation.
#[derive(Clone, Debug, PartialEq)]
pub enum CorpusLine {
    Episode { episode: Box<Episode>, report: ValidationReport },
    Stub(FailureStub),
    /// An episode-shaped document that does not even deserialize, such as
    /// one carrying a role outside the vocabulary.
    Rejected { document: Value, report: ValidationReport },
}

fn str_at<'a>(v: &'a Value, ptr: &str) -> &'a str {
    v.pointer(ptr).and_then(Value::as_str).unwrap_or("")
}

impl CorpusLine {
    pub fn parse(line: &str, mode: ValidationMode) -> Result<CorpusLine, String> {
        let v: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        if is_stub_value(&v) {
            return parse_stub(v).map(CorpusLine::Stub).map_err(|e| e.to_string());
        }
        if !v.is_object() {
            return Err("record is not a JSON object".into());
        }
        let report = validate_value(&v, mode);
        match serde_json::from_value::<Episode>(v.clone()) {
            Ok(e) => Ok(CorpusLine::Episode {
                episode: Box::new(e),
                report,
            }),
            Err(_) => Ok(CorpusLine::Rejected { document: v, report }),
        }
    }

    pub fn episode_id(&self) -> &str {
        match self {
            CorpusLine::Episode { episode, .. } => &episode.episode_id,
            CorpusLine::Stub(s) => &s.episode_id,
            CorpusLine::Rejected { document, .. } => str_at(document, "/episode_id"),
        }
    }

    pub fn valid_episode(&self) -> Option<&Episode> {
        match self {
            CorpusLine::Episode { episode, report } if report.valid => Some(episode),
            _ => None,
        }
    }
}

/// Parses every line of a corpus; malformed lines are logged and counted.
pub fn read_corpus(path: &Path, mode: ValidationMode) -> Result<(Vec<CorpusLine>, usize), HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut lines = Vec::new();
    let mut malformed = 0;
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        match CorpusLine::parse(raw, mode) {
            Ok(l) => lines.push(l),
            Err(e) => {
                malformed += 1;
                log::warn!("{}:{}: {e}", path.display(), i + 1);
            }
        }
    }
    Ok((lines, malformed))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    Episode,
    Stub,
}

/// One sidecar line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub episode_id: String,
    pub model: String,
    pub scenario_id: String,
    pub kind: RecordKind,
    /// Stubs pass through unscored.
    pub scored: bool,
    pub valid: bool,
    pub violations: Vec<ViolationCode>,
    pub error_kind: Option<ErrorKind>,
    pub attempts_used: u32,
    pub turns: usize,
    pub mission_completed: bool,
    pub gen_time_s: f64,
    pub total_tokens: u64,
    pub scores: Option<PillarScores>,
    pub alpha3_per_sec: Option<f64>,
    pub alpha3_per_1k: Option<f64>,
}

fn codes(r: &ValidationReport) -> Vec<ViolationCode> {
    let mut c: Vec<ViolationCode> = r.violations.iter().map(|v| v.code).collect();
    c.sort();
    c.dedup();
    c
}

pub fn score_record(line: &CorpusLine, ctx: &ScoringContext) -> ScoreRecord {
    match line {
        CorpusLine::Stub(s) => ScoreRecord {
            episode_id: s.episode_id.clone(),
            model: s.model.clone(),
            scenario_id: s.scenario_id.clone(),
            kind: RecordKind::Stub,
            scored: false,
            valid: false,
            violations: Vec::new(),
            error_kind: Some(s.error_kind),
            attempts_used: s.attempts_used,
            turns: 0,
            mission_completed: false,
            gen_time_s: 0.0,
            total_tokens: 0,
            scores: None,
            alpha3_per_sec: None,
            alpha3_per_1k: None,
        },
        CorpusLine::Episode { episode: e, report } => {
            let scores = score_episode(e, report, ctx);
            let m = &e.metadata;
            let ge = generation_efficiency(scores.alpha3, m.gen_time_s, m.total_tokens as f64).ok();
            ScoreRecord {
                episode_id: e.episode_id.clone(),
                model: m.model.clone(),
                scenario_id: m.scenario_id.clone(),
                kind: RecordKind::Episode,
                scored: true,
                valid: report.valid,
                violations: codes(report),
                error_kind: report.error_kind(),
                attempts_used: m.attempts_used,
                turns: e.turns.len(),
                mission_completed: e.final_state.mission_completed,
                gen_time_s: m.gen_time_s,
                total_tokens: m.total_tokens,
                scores: Some(scores),
                alpha3_per_sec: ge.map(|g| g.0),
                alpha3_per_1k: ge.map(|g| g.1),
            }
        }
        CorpusLine::Rejected { document: d, report } => ScoreRecord {
            episode_id: str_at(d, "/episode_id").to_string(),
            model: str_at(d, "/metadata/model").to_string(),
            scenario_id: str_at(d, "/metadata/scenario_id").to_string(),
            kind: RecordKind::Episode,
            scored: true,
            valid: false,
            violations: codes(report),
            error_kind: report.error_kind(),
            attempts_used: d.pointer("/metadata/attempts_used").and_then(Value::as_u64).unwrap_or(1) as u32,
            turns: d.get("turns").and_then(Value::as_array).map_or(0, Vec::len),
            mission_completed: false,
            gen_time_s: d.pointer("/metadata/gen_time_s").and_then(Value::as_f64).unwrap_or(0.0),
            total_tokens: d.pointer("/metadata/total_tokens").and_then(Value::as_u64).unwrap_or(0),
            scores: Some(PillarScores::default()),
            alpha3_per_sec: None,
            alpha3_per_1k: None,
        },
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub t_opt: u32,
    pub records: usize,
    pub valid: usize,
    pub invalid: usize,
    pub stubs: usize,
    pub malformed: usize,
}

/// Two passes: T_opt over valid successful episodes, then one sidecar line per record.
pub fn score_corpus(corpus: &Path, out: &Path, mode: ValidationMode) -> Result<ScoreSummary, HarnessError> {
    let (lines, malformed) = read_corpus(corpus, mode)?;
    let t_opt = compute_t_opt(lines.iter().filter_map(CorpusLine::valid_episode));
    let ctx = ScoringContext::with_t_opt(t_opt);
    let mut summary = ScoreSummary {
        t_opt,
        malformed,
        ..ScoreSummary::default()
    };
    let file = fs::File::create(out).map_err(|e| HarnessError::write(out, e))?;
    let mut w = BufWriter::new(file);
    for line in &lines {
        let rec = score_record(line, &ctx);
        match (rec.kind, rec.valid) {
            (RecordKind::Stub, _) => summary.stubs += 1,
            (_, true) => summary.valid += 1,
            (_, false) => summary.invalid += 1,
        }
        summary.records += 1;
        let text = serde_json::to_string(&rec).expect("score record serializes");
        writeln!(w, "{text}").map_err(|e| HarnessError::write(out, e))?;
    }
    w.flush().map_err(|e| HarnessError::write(out, e))?;
    Ok(summary)
}
