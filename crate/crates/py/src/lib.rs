//! Python bindings: episode validation and scoring, the network sampler,
//! single-episode simulation and the batch pipeline.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use skyloop_core::agents::{is_known_agent, make_agent, run_episode, EpisodeJob, PreparedScenario, RunSettings};
use skyloop_core::episode::{parse_episode, validate_episode as validate, ValidationMode};
use skyloop_core::harness::{self, HarnessError, RunConfig};
use skyloop_core::network::{self, NetworkState, Slice, SliceCalibration};
use skyloop_core::scenario::Scenario;
use skyloop_core::scoring::{self, ScoringContext, ScoringWeights};
use skyloop_core::seeding;

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    PyModule::import(py, "json")?.call_method1("loads", (text,))
}

fn harness_err(e: HarnessError) -> PyErr {
    match e {
        HarnessError::Usage(m) => PyValueError::new_err(m),
        HarnessError::Input(m) => PyOSError::new_err(m),
        HarnessError::Internal(m) => PyRuntimeError::new_err(m),
    }
}

fn mode(strict: bool) -> ValidationMode {
    if strict {
        ValidationMode::Strict
    } else {
        ValidationMode::Lenient
    }
}

/// Per-episode pillar scores and their weighted composite.
#[pyclass(name = "PillarScores", module = "skyloop", frozen)]
struct PyPillarScores(scoring::PillarScores);

#[pymethods]
impl PyPillarScores {
    #[getter]
    fn to(&self) -> f64 {
        self.0.to
    }
    #[getter]
    fn sp(&self) -> f64 {
        self.0.sp
    }
    #[getter]
    fn tc(&self) -> f64 {
        self.0.tc
    }
    #[getter]
    fn iq(&self) -> f64 {
        self.0.iq
    }
    #[getter]
    fn nr(&self) -> f64 {
        self.0.nr
    }
    #[getter]
    fn cc(&self) -> f64 {
        self.0.cc
    }
    #[getter]
    fn alpha3(&self) -> f64 {
        self.0.alpha3
    }

    fn as_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0)
    }

    fn __repr__(&self) -> String {
        let p = &self.0;
        format!(
            "PillarScores(TO={:.4}, SP={:.4}, TC={:.4}, IQ={:.4}, NR={:.4}, CC={:.4}, alpha3={:.4})",
            p.to, p.sp, p.tc, p.iq, p.nr, p.cc, p.alpha3
        )
    }
}

/// A mission scenario with its network model resolved.
#[pyclass(name = "Scenario", module = "skyloop", frozen)]
struct PyScenario(PreparedScenario);

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn load(path: &str) -> PyResult<PyScenario> {
        let s = Scenario::load(path.as_ref()).map_err(|e| PyOSError::new_err(e.to_string()))?;
        PreparedScenario::with_defaults(s)
            .map(PyScenario)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<PyScenario> {
        let s = Scenario::from_json(text, "<string>").map_err(|e| PyValueError::new_err(e.to_string()))?;
        PreparedScenario::with_defaults(s)
            .map(PyScenario)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn scenario_id(&self) -> &str {
        &self.0.scenario.scenario_id
    }

    /// Runs one episode and returns its corpus line (an episode or a failure stub).
    #[pyo3(signature = (agent, index = 0, seed = seeding::DEFAULT_GLOBAL_SEED, canonical = true))]
    fn run(&self, agent: &str, index: usize, seed: u64, canonical: bool) -> PyResult<String> {
        if !is_known_agent(agent) {
            return Err(PyValueError::new_err(format!("unknown agent '{agent}'")));
        }
        let sid = &self.0.scenario.scenario_id;
        let es = seeding::episode_seed(&seeding::DEFAULT_EPISODE_SEEDS, index);
        let job = EpisodeJob {
            episode_id: seeding::episode_id(sid, agent, index),
            agent: agent.to_string(),
            index,
            episode_seed: es,
            stream_seed: seeding::stream_seed(seed, es, sid, agent, index),
        };
        let settings = RunSettings {
            canonical,
            ..RunSettings::default()
        };
        Ok(run_episode(&self.0, &job, &settings, &|| make_agent(agent)).to_line())
    }

    fn __repr__(&self) -> String {
        format!("Scenario('{}')", self.0.scenario.scenario_id)
    }
}

/// Structural and schema check of one episode document.
#[pyfunction]
#[pyo3(signature = (text, strict = true))]
fn validate_episode<'py>(py: Python<'py>, text: &str, strict: bool) -> PyResult<Bound<'py, PyAny>> {
    let report = validate(text, mode(strict)).map_err(|e| PyValueError::new_err(e.to_string()))?;
    to_py(py, &report)
}

/// Scores one episode; invalid episodes get all-zero pillars.
#[pyfunction]
#[pyo3(signature = (text, t_opt = scoring::DEFAULT_T_OPT))]
fn score_episode(text: &str, t_opt: u32) -> PyResult<PyPillarScores> {
    let report = validate(text, ValidationMode::Strict).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let scores = match parse_episode(text.as_bytes()) {
        Ok(e) => scoring::score_episode(&e, &report, &ScoringContext::with_t_opt(t_opt)),
        Err(_) => scoring::PillarScores::default(),
    };
    Ok(PyPillarScores(scores))
}

/// Weighted pillar composite with the default weights.
#[pyfunction]
fn composite(pillars: Vec<f64>) -> PyResult<f64> {
    let p: [f64; 6] = pillars
        .try_into()
        .map_err(|_| PyValueError::new_err("expected six pillar values"))?;
    Ok(scoring::composite(&p, &ScoringWeights::default()))
}

#[pyfunction]
fn classify_hard(latency_ms: f64, loss_pct: f64, throughput_mbps: f64, edge_load: f64) -> bool {
    network::classify_hard(&NetworkState {
        slice: Slice::Urllc,
        latency_ms,
        jitter_ms: 0.0,
        loss_pct,
        throughput_mbps,
        edge_load,
    })
}

/// Independent network draws from the default calibration.
#[pyfunction]
#[pyo3(signature = (slice, n, seed = 42))]
fn sample_network<'py>(py: Python<'py>, slice: &str, n: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let slice = Slice::parse(slice).ok_or_else(|| PyValueError::new_err(format!("unknown slice '{slice}'")))?;
    let calib = SliceCalibration::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<NetworkState> = (0..n).map(|_| network::sample_network_state(slice, &calib, &mut rng)).collect();
    to_py(py, &draws)
}

/// Generates a corpus from a JSON run configuration; returns the manifest.
#[pyfunction]
fn generate<'py>(py: Python<'py>, config_json: &str) -> PyResult<Bound<'py, PyAny>> {
    let config: RunConfig = serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let summary = py.detach(|| harness::generate(&config)).map_err(harness_err)?;
    to_py(py, &summary.manifest)
}

/// Writes a score sidecar for `corpus` to `out`; returns the summary.
#[pyfunction]
#[pyo3(signature = (corpus, out, strict = true))]
fn score_corpus<'py>(py: Python<'py>, corpus: &str, out: &str, strict: bool) -> PyResult<Bound<'py, PyAny>> {
    let s = harness::score_corpus(corpus.as_ref(), out.as_ref(), mode(strict)).map_err(harness_err)?;
    to_py(py, &s)
}

/// Leaderboard CSV text for a score sidecar.
#[pyfunction]
fn leaderboard(scores: &str, episode_budget: usize) -> PyResult<String> {
    let records = harness::read_sidecar(scores.as_ref()).map_err(harness_err)?;
    let rows = harness::aggregate(&records, episode_budget).map_err(harness_err)?;
    Ok(harness::leaderboard_csv(&rows))
}

#[pymodule]
fn skyloop(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPillarScores>()?;
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(validate_episode, m)?)?;
    m.add_function(wrap_pyfunction!(score_episode, m)?)?;
    m.add_function(wrap_pyfunction!(composite, m)?)?;
    m.add_function(wrap_pyfunction!(classify_hard, m)?)?;
    m.add_function(wrap_pyfunction!(sample_network, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(score_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(leaderboard, m)?)?;
    m.add("BUILTIN_AGENTS", skyloop_core::agents::BUILTIN_AGENTS.to_vec())?;
    Ok(())
}
