use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::score::{RecordKind, ScoreRecord};
use super::HarnessError;
use crate::scoring::{aggregate_model, AggregateError, EpisodeScore, ModelAggregate};

pub const LEADERBOARD_COLUMNS: [&str; 22] = [
    "model",
    "alpha3",
    "TO",
    "SP",
    "TC",
    "IQ",
    "NR",
    "CC",
    "mean_gen_time_s",
    "mean_total_tokens",
    "alpha3_per_sec",
    "alpha3_per_1k",
    "raw_mean_alpha3",
    "reliability",
    "coverage",
    "call_efficiency",
    "success_rate",
    "gen_fail_rate",
    "n",
    "n_fail",
    "episode_budget",
    "total_attempt_calls",
];

pub fn read_sidecar(path: &Path) -> Result<Vec<ScoreRecord>, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        match serde_json::from_str(line) {
            Ok(r) => out.push(r),
            Err(e) => log::warn!("{}:{}: {e}", path.display(), i + 1),
        }
    }
    Ok(out)
}

/// One row per model, best adjusted composite first, ties by name. Invalid
/// episodes count as generation failures alongside stubs.
pub fn aggregate(records: &[ScoreRecord], episode_budget: usize) -> Result<Vec<ModelAggregate>, HarnessError> {
    let mut by_model: BTreeMap<&str, Vec<&ScoreRecord>> = BTreeMap::new();
    for r in records {
        by_model.entry(&r.model).or_default().push(r);
    }
    let mut rows = Vec::with_capacity(by_model.len());
    for (model, recs) in by_model {
        let episodes: Vec<EpisodeScore> = recs
            .iter()
            .filter(|r| r.kind == RecordKind::Episode && r.valid)
            .map(|r| EpisodeScore {
                scores: r.scores.unwrap_or_default(),
                mission_completed: r.mission_completed,
                gen_time_s: r.gen_time_s,
                total_tokens: r.total_tokens as f64,
            })
            .collect();
        let n_fail = recs.len() - episodes.len();
        let attempts: usize = recs.iter().map(|r| r.attempts_used as usize).sum();
        let row = match aggregate_model(model, &episodes, n_fail, episode_budget, attempts.max(episodes.len())) {
            Ok(a) => a,
            Err(AggregateError::DegenerateInput(a)) => *a,
            Err(AggregateError::InvalidInput(m)) => return Err(HarnessError::Usage(m)),
        };
        rows.push(row);
    }
    rows.sort_by(|a, b| b.alpha3_rel.total_cmp(&a.alpha3_rel).then_with(|| a.model.cmp(&b.model)));
    Ok(rows)
}

fn f(x: f64) -> String {
    format!("{x:.6}")
}

pub fn leaderboard_csv(rows: &[ModelAggregate]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(LEADERBOARD_COLUMNS).expect("in-memory write");
    for r in rows {
        let p = &r.mean_pillars;
        w.write_record([
            r.model.clone(),
            f(r.alpha3_rel),
            f(p.to),
            f(p.sp),
            f(p.tc),
            f(p.iq),
            f(p.nr),
            f(p.cc),
            f(r.mean_gen_time_s),
            f(r.mean_total_tokens),
            f(r.alpha3_per_sec),
            f(r.alpha3_per_1k),
            f(r.mean_alpha3),
            f(r.reliability),
            f(r.coverage),
            f(r.call_efficiency),
            f(r.success_rate),
            f(r.gen_fail_rate),
            r.n.to_string(),
            r.n_fail.to_string(),
            r.episode_budget.to_string(),
            r.total_attempt_calls.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn write_leaderboard(rows: &[ModelAggregate], path: &Path) -> Result<(), HarnessError> {
    fs::write(path, leaderboard_csv(rows)).map_err(|e| HarnessError::write(path, e))
}
