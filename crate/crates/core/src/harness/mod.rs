//! Batch orchestration: corpus generation, scoring sidecars, leaderboards and
//! corpus analytics. Every output is a deterministic function of its inputs.

mod aggregate;
mod analytics;
mod config;
mod generate;
mod score;

use std::path::Path;

use thiserror::Error;

pub use aggregate::{aggregate, leaderboard_csv, read_sidecar, write_leaderboard, LEADERBOARD_COLUMNS};
pub use analytics::{analyze, AnalyticsReport, CountRow, IntentRow, LatencyBinRow, LATENCY_BINS_MS};
pub use config::{CalibrationConfig, RunConfig};
pub use generate::{generate, plan_jobs, prepare, run_jobs, AgentCounts, GenerateSummary, Manifest, CORPUS_FILE, MANIFEST_FILE};
pub use score::{read_corpus, score_corpus, score_record, CorpusLine, RecordKind, ScoreRecord, ScoreSummary, SCORES_FILE};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl HarnessError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> HarnessError {
        HarnessError::Input(format!("{}: {e}", path.display()))
    }

    pub(crate) fn write(path: &Path, e: std::io::Error) -> HarnessError {
        HarnessError::Internal(format!("cannot write {}: {e}", path.display()))
    }

    /// 1 usage, 2 bad input, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 1,
            HarnessError::Input(_) => 2,
            HarnessError::Internal(_) => 3,
        }
    }
}

impl From<crate::scenario::ScenarioError> for HarnessError {
    fn from(e: crate::scenario::ScenarioError) -> Self {
        HarnessError::Input(e.to_string())
    }
}
