use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{CalibrationConfig, HarnessError, RunConfig};
use crate::agents::{make_agent, run_episode, EpisodeJob, PreparedScenario, RunSettings};
use crate::episode::{is_stub_value, CorpusRecord};
use crate::scenario::Scenario;
use crate::seeding::{episode_id, episode_seed, stream_seed};
use crate::tools::ToolRegistry;

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

const SEED_DERIVATION: &str = "episode seed = seed_set[index mod |seed_set|]; \
    streams = sha256(tag | global seed | episode seed | scenario | agent | index), \
    split by label into network, disturbance and tools";

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentCounts {
    pub episodes: usize,
    pub stubs: usize,
    /// Generation calls spent, summed over every record.
    pub attempts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub complete: bool,
    pub scenarios: Vec<String>,
    pub agents: Vec<String>,
    pub episodes_per_scenario: usize,
    /// Episodes requested per agent.
    pub episode_budget: usize,
    pub seed: u64,
    pub episode_seeds: Vec<u64>,
    pub seed_derivation: String,
    pub records: usize,
    pub per_agent: BTreeMap<String, AgentCounts>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Option<Manifest>, HarnessError> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
        serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))
    }

    fn store(&self, dir: &Path) -> Result<(), HarnessError> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        fs::write(&path, text).map_err(|e| HarnessError::write(&path, e))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerateSummary {
    pub manifest: Manifest,
    /// Records produced by this invocation.
    pub generated: usize,
    /// Records already present from an earlier run.
    pub reused: usize,
}

/// Loads scenarios and the network model named by `config`.
pub fn prepare(config: &RunConfig) -> Result<(Vec<PreparedScenario>, CalibrationConfig), HarnessError> {
    let calibration = match &config.calibration {
        Some(p) => CalibrationConfig::load(p)?,
        None => CalibrationConfig::default(),
    };
    let base = calibration.build()?;
    let scenarios = Scenario::load_set(&config.scenarios)?;
    if scenarios.is_empty() {
        return Err(HarnessError::Input(format!("no scenarios under {}", config.scenarios.display())));
    }
    let registry = ToolRegistry::builtin();
    let prepared = scenarios
        .into_iter()
        .map(|s| PreparedScenario::new(s, &calibration.targets, &base, registry.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((prepared, calibration))
}

/// Jobs in output order: scenario, then agent, then index. Each job carries
/// the position of its scenario in `scenarios`.
pub fn plan_jobs(config: &RunConfig, scenarios: &[PreparedScenario]) -> Vec<(usize, EpisodeJob)> {
    let mut jobs = Vec::with_capacity(scenarios.len() * config.agents.len() * config.episodes_per_scenario);
    for (si, s) in scenarios.iter().enumerate() {
        let sid = &s.scenario.scenario_id;
        for agent in &config.agents {
            for index in 0..config.episodes_per_scenario {
                let es = episode_seed(&config.episode_seeds, index);
                jobs.push((
                    si,
                    EpisodeJob {
                        episode_id: episode_id(sid, agent, index),
                        agent: agent.clone(),
                        index,
                        episode_seed: es,
                        stream_seed: stream_seed(config.seed, es, sid, agent, index),
                    },
                ));
            }
        }
    }
    jobs
}

pub fn run_jobs(
    scenarios: &[PreparedScenario],
    jobs: &[&(usize, EpisodeJob)],
    settings: &RunSettings,
    pool: &rayon::ThreadPool,
) -> Vec<CorpusRecord> {
    pool.install(|| {
        jobs.par_iter()
            .map(|(si, job)| run_episode(&scenarios[*si], job, settings, &|| make_agent(&job.agent)))
            .collect()
    })
}

/// Complete lines of an existing corpus keyed by episode id. A torn final
/// line from an interrupted run is cut off the file.
fn read_existing(path: &Path) -> Result<HashMap<String, String>, HarnessError> {
    let mut out = HashMap::new();
    if !path.exists() {
        return Ok(out);
    }
    let bytes = fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    if complete < bytes.len() {
        log::warn!("dropping a partial trailing record in {}", path.display());
        let f = OpenOptions::new().write(true).open(path).map_err(|e| HarnessError::write(path, e))?;
        f.set_len(complete as u64).map_err(|e| HarnessError::write(path, e))?;
    }
    for line in String::from_utf8_lossy(&bytes[..complete]).lines() {
        let id = serde_json::from_str::<Value>(line)
            .ok()
            .and_then(|v| v.get("episode_id").and_then(Value::as_str).map(String::from));
        match id {
            Some(id) => {
                out.insert(id, line.to_string());
            }
            None => log::warn!("ignoring an unreadable line in {}", path.display()),
        }
    }
    Ok(out)
}

fn count(line: &str, counts: &mut AgentCounts) {
    let Ok(v) = serde_json::from_str::<Value>(line) else {
        return;
    };
    let (attempts, stub) = if is_stub_value(&v) {
        (v.get("attempts_used").and_then(Value::as_u64), true)
    } else {
        (v.pointer("/metadata/attempts_used").and_then(Value::as_u64), false)
    };
    counts.attempts += attempts.unwrap_or(0) as usize;
    if stub {
        counts.stubs += 1;
    } else {
        counts.episodes += 1;
    }
}

/// Generates (or completes) the corpus for `config` under `config.out`.
/// Re-running with the same configuration only fills in missing records and
/// always leaves the file in job order.
pub fn generate(config: &RunConfig) -> Result<GenerateSummary, HarnessError> {
    config.check()?;
    let (scenarios, calibration) = prepare(config)?;
    let plain: Vec<Scenario> = scenarios.iter().map(|p| p.scenario.clone()).collect();
    let hash = config.fingerprint(&plain, &calibration);
    let dir = &config.out;
    fs::create_dir_all(dir).map_err(|e| HarnessError::write(dir, e))?;
    if let Some(m) = Manifest::load(dir)? {
        if m.config_hash != hash {
            return Err(HarnessError::Input(format!(
                "{} holds a corpus from a different configuration; choose another output directory",
                dir.display()
            )));
        }
    }

    let mut manifest = Manifest {
        config_hash: hash,
        complete: false,
        scenarios: plain.iter().map(|s| s.scenario_id.clone()).collect(),
        agents: config.agents.clone(),
        episodes_per_scenario: config.episodes_per_scenario,
        episode_budget: plain.len() * config.episodes_per_scenario,
        seed: config.seed,
        episode_seeds: config.episode_seeds.clone(),
        seed_derivation: SEED_DERIVATION.to_string(),
        records: 0,
        per_agent: BTreeMap::new(),
    };
    manifest.store(dir)?;

    let jobs = plan_jobs(config, &scenarios);
    let corpus = dir.join(CORPUS_FILE);
    let mut done = read_existing(&corpus)?;
    let wanted: HashSet<&str> = jobs.iter().map(|(_, j)| j.episode_id.as_str()).collect();
    done.retain(|id, _| wanted.contains(id.as_str()));
    let reused = done.len();
    let pending: Vec<&(usize, EpisodeJob)> = jobs.iter().filter(|(_, j)| !done.contains_key(&j.episode_id)).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallel.max(1))
        .build()
        .map_err(|e| HarnessError::Internal(e.to_string()))?;
    let settings = config.settings();
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&corpus)
        .map_err(|e| HarnessError::write(&corpus, e))?;
    let mut out = BufWriter::new(file);
    let chunk = (config.parallel.max(1) * 16).max(64);
    for batch in pending.chunks(chunk) {
        for rec in run_jobs(&scenarios, batch, &settings, &pool) {
            let line = rec.to_line();
            writeln!(out, "{line}").map_err(|e| HarnessError::write(&corpus, e))?;
            done.insert(rec.episode_id().to_string(), line);
        }
        out.flush().map_err(|e| HarnessError::write(&corpus, e))?;
        log::info!("{}/{} records", done.len(), jobs.len());
    }
    drop(out);

    let mut ordered = String::new();
    for (_, j) in &jobs {
        let line = done
            .get(&j.episode_id)
            .ok_or_else(|| HarnessError::Internal(format!("missing record {}", j.episode_id)))?;
        ordered.push_str(line);
        ordered.push('\n');
        count(line, manifest.per_agent.entry(j.agent.clone()).or_default());
    }
    let current = fs::read(&corpus).map_err(|e| HarnessError::io(&corpus, e))?;
    if current != ordered.as_bytes() {
        let tmp = dir.join(format!("{CORPUS_FILE}.tmp"));
        let mut f = BufWriter::new(File::create(&tmp).map_err(|e| HarnessError::write(&tmp, e))?);
        f.write_all(ordered.as_bytes()).map_err(|e| HarnessError::write(&tmp, e))?;
        f.flush().map_err(|e| HarnessError::write(&tmp, e))?;
        drop(f);
        fs::rename(&tmp, &corpus).map_err(|e| HarnessError::write(&corpus, e))?;
    }

    manifest.records = jobs.len();
    manifest.complete = true;
    manifest.store(dir)?;
    Ok(GenerateSummary {
        manifest,
        generated: pending.len(),
        reused,
    })
}
