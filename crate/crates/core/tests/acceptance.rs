//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use skyloop_core::agents::{
    make_agent, run_episode, AgentPolicy, EpisodeJob, FaultMode, FaultyAgent, PreparedScenario, RunSettings,
};
use skyloop_core::environment::{apply_disturbance, step_kinematics, DisturbanceModel, KinematicState, VehicleParams};
use skyloop_core::episode::{Action, CorpusRecord, Episode, Observation, ValidationMode};
use skyloop_core::harness::{
    aggregate, generate, leaderboard_csv, read_sidecar, score_corpus, score_record, CorpusLine, RunConfig,
    CORPUS_FILE, SCORES_FILE,
};
use skyloop_core::network::{classify_hard, sample_network_state, NetworkState, Slice, SliceCalibration};
use skyloop_core::scenario::Scenario;
use skyloop_core::scoring::{
    aggregate_model, composite, generation_efficiency, network_robustness_parts, score_network_robustness,
    score_safety_policy, score_tool_consistency, EpisodeScore, NrParams, PillarScores, ScoringContext,
    ScoringWeights,
};
use skyloop_core::seeding::{episode_id, episode_seed, stream_seed, DEFAULT_EPISODE_SEEDS, DEFAULT_GLOBAL_SEED};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn prepared(id: &str) -> PreparedScenario {
    let set = Scenario::load_set(&scenarios_dir()).expect("scenario suite loads");
    let s = set.into_iter().find(|s| s.scenario_id == id).expect("scenario present");
    PreparedScenario::with_defaults(s).expect("scenario prepares")
}

fn job(sid: &str, agent: &str, index: usize) -> EpisodeJob {
    let es = episode_seed(&DEFAULT_EPISODE_SEEDS, index);
    EpisodeJob {
        episode_id: episode_id(sid, agent, index),
        agent: agent.to_string(),
        index,
        episode_seed: es,
        stream_seed: stream_seed(DEFAULT_GLOBAL_SEED, es, sid, agent, index),
    }
}

fn canonical() -> RunSettings {
    RunSettings {
        canonical: true,
        ..RunSettings::default()
    }
}

fn episode_of(rec: CorpusRecord) -> Episode {
    match rec {
        CorpusRecord::Episode(e) => *e,
        CorpusRecord::Stub(s) => panic!("unexpected failure stub {s:?}"),
    }
}

/// A pool of valid generated episodes across every scenario and reference agent.
fn episode_pool(per: usize) -> Vec<Episode> {
    let mut out = Vec::new();
    for s in Scenario::load_set(&scenarios_dir()).unwrap() {
        let p = PreparedScenario::with_defaults(s).unwrap();
        for agent in ["safe_pilot", "adaptive_pilot", "greedy_streamer"] {
            for i in 0..per {
                let j = job(&p.scenario.scenario_id, agent, i);
                out.push(episode_of(run_episode(&p, &j, &canonical(), &|| make_agent(agent))));
            }
        }
    }
    out
}

fn c1_composite_weights() -> Outcome {
    let w = ScoringWeights::default();
    let t = Instant::now();
    let claude = composite(&[1.000, 0.965, 1.000, 0.961, 0.871, 0.492], &w);
    let gpt4o = composite(&[1.000, 0.990, 1.000, 0.995, 0.855, 0.874], &w);
    let elapsed = t.elapsed();
    ensure((claude - 0.949).abs() <= 1e-3, format!("row A composite {claude}"))?;
    ensure((gpt4o - 0.976).abs() <= 1e-3, format!("row B composite {gpt4o}"))?;
    ensure(elapsed < Duration::from_millis(1), format!("took {elapsed:?}"))?;
    Ok(format!("{claude:.5} / {gpt4o:.5} in {elapsed:?}"))
}

fn c2_efficiency() -> Outcome {
    let (per_sec, per_1k) = generation_efficiency(0.976, 10.581, 4032.1).map_err(|e| e.to_string())?;
    ensure((per_1k - 0.242).abs() <= 1e-3, format!("per_1k {per_1k}"))?;
    ensure((per_sec - 0.092).abs() <= 1e-3, format!("per_sec {per_sec}"))?;
    let w = ScoringWeights::default();
    let scores = PillarScores::from_pillars([1.000, 0.990, 1.000, 0.995, 0.855, 0.874], &w);
    let eps: Vec<EpisodeScore> = (0..50)
        .map(|_| EpisodeScore {
            scores,
            mission_completed: true,
            gen_time_s: 10.581,
            total_tokens: 4032.1,
        })
        .collect();
    let agg = aggregate_model("m", &eps, 0, 50, 50).map_err(|e| format!("{e:?}"))?;
    ensure((agg.alpha3_per_1k - 0.242).abs() <= 1e-3, format!("aggregate per_1k {}", agg.alpha3_per_1k))?;
    ensure((agg.alpha3_per_sec - 0.092).abs() <= 1e-3, format!("aggregate per_sec {}", agg.alpha3_per_sec))?;
    Ok(format!("per_1k {per_1k:.4}, per_sec {per_sec:.4}"))
}

fn quantile(xs: &mut [f64], q: f64) -> f64 {
    let k = ((xs.len() as f64 - 1.0) * q).round() as usize;
    *xs.select_nth_unstable_by(k, f64::total_cmp).1
}

fn c3_calibration() -> Outcome {
    const N: usize = 1_000_000;
    let calib = SliceCalibration::default();
    let t = Instant::now();
    let targets: [(Slice, f64, f64, f64, f64, f64); 3] = [
        (Slice::Urllc, 7.00, 9.10, 0.059, 95.2, 0.360),
        (Slice::Embb, 14.00, 25.00, 0.642, 608.0, 0.517),
        (Slice::Mmtc, 50.0, 150.0, 2.387, 2.3, 0.757),
    ];
    let mut notes = Vec::new();
    for (slice, med, p90, loss, thr, edge) in targets {
        let mut rng = ChaCha8Rng::seed_from_u64(2025 + slice as u64);
        let mut lat = Vec::with_capacity(N);
        let (mut l, mut th, mut e) = (0.0, 0.0, 0.0);
        for _ in 0..N {
            let n = sample_network_state(slice, &calib, &mut rng);
            lat.push(n.latency_ms);
            l += n.loss_pct;
            th += n.throughput_mbps;
            e += n.edge_load;
        }
        let m = quantile(&mut lat, 0.5);
        let q = quantile(&mut lat, 0.9);
        ensure((m - med).abs() <= 0.05 * med, format!("{slice} median {m}"))?;
        ensure((q - p90).abs() <= 0.10 * p90, format!("{slice} p90 {q}"))?;
        for (name, got, want) in [("loss", l / N as f64, loss), ("throughput", th / N as f64, thr), ("edge", e / N as f64, edge)] {
            ensure((got - want).abs() <= 0.10 * want, format!("{slice} {name} mean {got} vs {want}"))?;
        }
        notes.push(format!("{slice} {m:.2}/{q:.2}"));
    }
    let elapsed = t.elapsed();
    ensure(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!("{} in {:.2?}", notes.join(", "), elapsed))
}

fn c4_sp_oracle() -> Outcome {
    let penalties = [0.25, 0.5, 0.5, 0.25];
    let template = episode_pool(1).remove(0).final_state;
    for mask in 0u32..16 {
        let bit = |i: u32| mask & (1 << i) != 0;
        let mut f = template.clone();
        f.altitude_violation = bit(0);
        f.nfz_violation = bit(1);
        f.separation_breach = bit(2);
        f.battery_depleted = bit(3);
        let mut expected = 1.0;
        for (i, p) in penalties.iter().enumerate() {
            if bit(i as u32) {
                expected -= p;
            }
        }
        let expected = f64::max(expected, 0.0);
        let got = score_safety_policy(&f);
        ensure(got == expected, format!("mask {mask:04b}: {got} != {expected}"))?;
    }
    Ok("16/16 combinations exact".into())
}

fn corrupt_observation(t: &mut skyloop_core::episode::Turn) {
    match t.observation.as_mut() {
        Some(Observation::McpResult(r)) => r.tool = format!("{}_mismatch", r.tool),
        Some(Observation::A2aAck(a)) => a.from = format!("{}_elsewhere", a.from),
        None => {}
    }
}

fn c5_tc_mutation() -> Outcome {
    let pool = episode_pool(4);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    for _ in 0..1000 {
        let mut e = pool[rng.random_range(0..pool.len())].clone();
        let structured: Vec<usize> = (0..e.turns.len()).filter(|&i| e.turns[i].structured_action().is_some()).collect();
        let m = structured.len();
        if m == 0 {
            continue;
        }
        ensure(score_tool_consistency(&e) == 1.0, format!("{} not fully matched", e.episode_id))?;
        let k = rng.random_range(0..=m);
        let mut idx = structured.clone();
        for i in 0..k {
            let j = rng.random_range(i..m);
            idx.swap(i, j);
        }
        for &i in &idx[..k] {
            corrupt_observation(&mut e.turns[i]);
        }
        let tc = score_tool_consistency(&e);
        let want = (m - k) as f64 / m as f64;
        ensure(tc == want, format!("{}: k={k} m={m} tc={tc}", e.episode_id))?;
        checked += 1;
    }
    ensure(checked >= 990, format!("only {checked} episodes had structured actions"))?;
    Ok(format!("{checked} mutated episodes exact"))
}

fn random_network(rng: &mut ChaCha8Rng) -> NetworkState {
    NetworkState {
        slice: Slice::ALL[rng.random_range(0..3)],
        latency_ms: rng.random_range(1.0..120.0),
        jitter_ms: rng.random_range(0.0..20.0),
        loss_pct: rng.random_range(0.0..4.0),
        throughput_mbps: rng.random_range(0.5..800.0),
        edge_load: rng.random_range(0.0..1.0),
    }
}

fn c6_nr_ordering() -> Outcome {
    let p = prepared("S03_congested_embb");
    let sid = p.scenario.scenario_id.clone();
    let ctx = ScoringContext::default();
    let mut wins = 0;
    for i in 0..100 {
        let shared = job(&sid, "paired", i).stream_seed;
        let run = |agent: &str| {
            let mut j = job(&sid, agent, i);
            j.stream_seed = shared;
            episode_of(run_episode(&p, &j, &canonical(), &|| make_agent(agent)))
        };
        let adaptive = score_network_robustness(&run("adaptive_pilot"), &ctx);
        let greedy = score_network_robustness(&run("greedy_streamer"), &ctx);
        wins += usize::from(adaptive > greedy);
    }
    ensure(wins >= 99, format!("adaptive beat greedy on {wins}/100 seeds"))?;

    let pool = episode_pool(2);
    let params = NrParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in 0..10_000 {
        let mut e = pool[n % pool.len()].clone();
        for t in e.turns.iter_mut() {
            t.network = random_network(&mut rng);
            if rng.random_bool(0.3) {
                t.action = None;
                t.observation = None;
            }
        }
        e.final_state.mission_completed = rng.random_bool(0.5);
        let before = network_robustness_parts(&e, &params);
        let nr_before = score_network_robustness(&e, &ctx);

        let calm: Vec<usize> = (0..e.turns.len()).filter(|&i| !classify_hard(&e.turns[i].network)).collect();
        if !calm.is_empty() {
            let mut harder = e.clone();
            harder.turns[calm[rng.random_range(0..calm.len())]].network.latency_ms = 95.0;
            let after = network_robustness_parts(&harder, &params);
            ensure(after.base <= before.base, format!("base rose {} -> {}", before.base, after.base))?;
        }

        let mut relabeled = e.clone();
        for t in relabeled.turns.iter_mut() {
            if classify_hard(&t.network) && t.network.slice == Slice::Embb && rng.random_bool(0.7) {
                t.network.slice = Slice::Urllc;
            }
        }
        let nr_after = score_network_robustness(&relabeled, &ctx);
        ensure(nr_after >= nr_before, format!("relabeling lowered NR {nr_before} -> {nr_after}"))?;
    }
    Ok(format!("adaptive > greedy on {wins}/100; 10^4 monotonicity checks"))
}

fn c7_hard_corners() -> Outcome {
    let oracle = |lat: f64, loss: f64, thr: f64, edge: f64| lat > 40.0 || loss >= 1.0 || thr < 5.0 || edge > 0.8;
    let lat = [(12.0, "nominal"), (40.0, "boundary"), (40.000001, "breach")];
    let loss = [(0.2, "nominal"), (1.0, "boundary"), (0.999999, "below")];
    let thr = [(90.0, "nominal"), (5.0, "boundary"), (4.999999, "breach")];
    let edge = [(0.3, "nominal"), (0.8, "boundary"), (0.800001, "breach")];
    let mut n = 0;
    for a in lat {
        for b in loss {
            for c in thr {
                for d in edge {
                    let net = NetworkState {
                        slice: Slice::Embb,
                        latency_ms: a.0,
                        jitter_ms: 1.0,
                        loss_pct: b.0,
                        throughput_mbps: c.0,
                        edge_load: d.0,
                    };
                    let want = oracle(a.0, b.0, c.0, d.0);
                    ensure(
                        classify_hard(&net) == want,
                        format!("latency {} / loss {} / throughput {} / edge {} -> expected {want}", a.1, b.1, c.1, d.1),
                    )?;
                    n += 1;
                }
            }
        }
    }
    let boundary = NetworkState {
        slice: Slice::Embb,
        latency_ms: 40.0,
        jitter_ms: 1.0,
        loss_pct: 0.0,
        throughput_mbps: 5.0,
        edge_load: 0.8,
    };
    ensure(!classify_hard(&boundary), "all strict boundaries at once must be nominal")?;
    ensure(classify_hard(&NetworkState { loss_pct: 1.0, ..boundary }), "loss at exactly 1% is hard")?;
    Ok(format!("{n} combinations over every 2^4 corner"))
}

fn c8_failure_accounting() -> Outcome {
    let p = prepared("S01_survey");
    let sid = p.scenario.scenario_id.clone();
    let failing: BTreeSet<usize> = (0..50).filter(|i| i % 3 == 1).take(17).collect();
    ensure(failing.len() == 17, "need 17 injected failures")?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = dir.path().join(CORPUS_FILE);
    let mut lines = String::new();
    for i in 0..50 {
        let j = job(&sid, "model_x", i);
        let fails = failing.contains(&i);
        let factory = move || -> Result<Box<dyn AgentPolicy>, skyloop_core::agents::AgentError> {
            if fails {
                Ok(Box::new(FaultyAgent::new("model_x", FaultMode::SystemRoleAlways)))
            } else {
                make_agent("safe_pilot")
            }
        };
        lines.push_str(&run_episode(&p, &j, &canonical(), &factory).to_line());
        lines.push('\n');
    }
    std::fs::write(&corpus, lines).map_err(|e| e.to_string())?;
    let scores = dir.path().join(SCORES_FILE);
    let summary = score_corpus(&corpus, &scores, ValidationMode::Strict).map_err(|e| e.to_string())?;
    ensure(summary.stubs == 17, format!("{} stubs", summary.stubs))?;
    ensure(summary.stubs + summary.valid == 50, "stubs + episodes != attempts")?;
    let rows = aggregate(&read_sidecar(&scores).map_err(|e| e.to_string())?, 50).map_err(|e| e.to_string())?;
    let r = &rows[0];
    ensure(r.reliability == 0.66, format!("reliability {}", r.reliability))?;
    ensure(r.n + r.n_fail == 50, format!("n {} + n_fail {}", r.n, r.n_fail))?;
    Ok(format!("reliability {:.2}, {} episodes + {} stubs = 50", r.reliability, r.n, r.n_fail))
}

fn run_pipeline(scen: &Path, out: &Path, parallel: usize) -> Result<(Vec<u8>, String), String> {
    let config = RunConfig {
        scenarios: scen.to_path_buf(),
        agents: vec!["safe_pilot".into(), "adaptive_pilot".into(), "greedy_streamer".into()],
        episodes_per_scenario: 50,
        out: out.to_path_buf(),
        parallel,
        canonical: true,
        ..RunConfig::default()
    };
    let summary = generate(&config).map_err(|e| e.to_string())?;
    ensure(summary.manifest.records == 450, format!("{} records", summary.manifest.records))?;
    let corpus = out.join(CORPUS_FILE);
    let scores = out.join(SCORES_FILE);
    score_corpus(&corpus, &scores, ValidationMode::Strict).map_err(|e| e.to_string())?;
    let rows = aggregate(&read_sidecar(&scores).map_err(|e| e.to_string())?, summary.manifest.episode_budget)
        .map_err(|e| e.to_string())?;
    Ok((std::fs::read(&corpus).map_err(|e| e.to_string())?, leaderboard_csv(&rows)))
}

fn c9_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let scen = dir.path().join("scenarios");
    std::fs::create_dir(&scen).map_err(|e| e.to_string())?;
    for f in ["S01_survey.json", "S02_inspection.json", "S03_congested_embb.json"] {
        std::fs::copy(scenarios_dir().join(f), scen.join(f)).map_err(|e| e.to_string())?;
    }
    let t = Instant::now();
    let (c1, l1) = run_pipeline(&scen, &dir.path().join("p1"), 1)?;
    let (c8, l8) = run_pipeline(&scen, &dir.path().join("p8"), 8)?;
    let elapsed = t.elapsed();
    ensure(c1 == c8, "corpora differ between parallelism 1 and 8")?;
    ensure(l1 == l8, "leaderboards differ between parallelism 1 and 8")?;
    ensure(elapsed < Duration::from_secs(60), format!("took {elapsed:?}"))?;
    Ok(format!("450 records, {} corpus bytes identical, both runs in {:.2?}", c1.len(), elapsed))
}

fn corruptions(e: &Episode) -> Vec<(&'static str, Value)> {
    let base = serde_json::to_value(e).unwrap();
    let n = e.turns.len();
    let mut out = Vec::new();

    let mut v = base.clone();
    v["turns"][3]["role"] = "system".into();
    out.push(("system role", v));

    let mut v = base.clone();
    v["turns"][2]["role"] = "agent".into();
    out.push(("consecutive roles", v));

    let mut v = base.clone();
    v["turns"].as_array_mut().unwrap().truncate(7);
    out.push(("7 turns", v));

    let mut v = base.clone();
    let turns = v["turns"].as_array_mut().unwrap();
    let mut k = 0;
    while turns.len() < 13 {
        let next_role = if turns.len().is_multiple_of(2) { "user" } else { "agent" };
        let mut t = base["turns"][k % n].clone();
        t["role"] = next_role.into();
        if next_role == "user" {
            t.as_object_mut().unwrap().remove("action");
            t.as_object_mut().unwrap().remove("observation");
        }
        turns.push(t);
        k += 1;
    }
    out.push(("13 turns", v));

    let mut v = base;
    let total = v["metadata"]["total_tokens"].as_u64().unwrap();
    v["metadata"]["total_tokens"] = (total + 1).into();
    out.push(("token mismatch", v));
    out
}

fn c10_structural_gate() -> Outcome {
    let pool = episode_pool(3);
    let ctx = ScoringContext::default();
    let mut records = Vec::new();
    for e in &pool {
        for (what, doc) in corruptions(e) {
            let line = CorpusLine::parse(&doc.to_string(), ValidationMode::Strict).map_err(|err| format!("{what}: {err}"))?;
            let rec = score_record(&line, &ctx);
            ensure(!rec.valid, format!("{what} accepted for {}", e.episode_id))?;
            let zero = rec.scores.as_ref().is_some_and(|s| s.alpha3 == 0.0 && s.pillars().iter().all(|&p| p == 0.0));
            ensure(zero, format!("{what} scored non-zero"))?;
            records.push(rec);
        }
    }
    let rows = aggregate(&records, pool.len()).map_err(|e| e.to_string())?;
    ensure(rows.iter().all(|r| r.alpha3_rel == 0.0), "adjusted score must be 0")?;
    Ok(format!("{} corrupted episodes rejected, adjusted score 0", records.len()))
}

fn c11_physics() -> Outcome {
    let params = VehicleParams::default();
    let g = params.gravity;
    let p0 = Vector3::new(3.0, -4.0, 100.0);
    let v0 = Vector3::new(1.5, 0.5, 2.0);
    let mut k = KinematicState {
        velocity: v0,
        ..KinematicState::at(p0, 0.3)
    };
    let dt = 1.0;
    let mut worst: f64 = 0.0;
    for n in 1..=12 {
        k = step_kinematics(&k, &Vector3::zeros(), &params, dt).map_err(|e| e.to_string())?;
        let t = n as f64 * dt;
        let p = p0 + v0 * t + 0.5 * g * t * t;
        let v = v0 + g * t;
        worst = worst.max((k.position - p).norm() / p.norm()).max((k.velocity - v).norm() / v.norm());
    }
    ensure(worst <= 1e-9, format!("free fall relative error {worst:e}"))?;

    let hover = Vector3::new(0.0, 0.0, params.mass * g.norm());
    let mut k = KinematicState {
        velocity: Vector3::new(2.0, -1.0, 0.0),
        ..KinematicState::at(Vector3::new(0.0, 0.0, 50.0), 1.1)
    };
    for _ in 0..12 {
        let next = step_kinematics(&k, &hover, &params, dt).map_err(|e| e.to_string())?;
        ensure((next.velocity - k.velocity).norm() <= 1e-12, "hover thrust changed velocity")?;
        k = next;
    }

    let zero = DisturbanceModel::zero();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let s = KinematicState {
            velocity: Vector3::new(rng.random(), rng.random(), rng.random()),
            ..KinematicState::at(Vector3::new(rng.random(), rng.random(), rng.random()), rng.random())
        };
        ensure(apply_disturbance(&s, &zero, &mut rng) == s, "zero covariance moved the state")?;
    }
    Ok(format!("free fall max relative error {worst:.1e}; hover and zero disturbance exact"))
}

fn c12_expected_behavior() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let clean = dir.path().join("clean");
    std::fs::create_dir(&clean).map_err(|e| e.to_string())?;
    let mut n_clean = 0;
    for s in Scenario::load_set(&scenarios_dir()).map_err(|e| e.to_string())? {
        if s.clean {
            let name = format!("{}.json", s.scenario_id);
            std::fs::copy(scenarios_dir().join(&name), clean.join(&name)).map_err(|e| e.to_string())?;
            n_clean += 1;
        }
    }
    ensure(n_clean >= 3, "clean suite needs at least three scenarios")?;
    let out = dir.path().join("run");
    let config = RunConfig {
        scenarios: clean,
        agents: vec!["safe_pilot".into()],
        episodes_per_scenario: 50,
        out: out.clone(),
        canonical: true,
        parallel: 4,
        ..RunConfig::default()
    };
    let s = generate(&config).map_err(|e| e.to_string())?;
    let scores = out.join(SCORES_FILE);
    score_corpus(&out.join(CORPUS_FILE), &scores, ValidationMode::Strict).map_err(|e| e.to_string())?;
    let rows = aggregate(&read_sidecar(&scores).map_err(|e| e.to_string())?, s.manifest.episode_budget)
        .map_err(|e| e.to_string())?;
    let r = &rows[0];
    ensure(r.success_rate == 1.0, format!("success_rate {}", r.success_rate))?;
    ensure(r.gen_fail_rate == 0.0, format!("gen_fail_rate {}", r.gen_fail_rate))?;

    let permitted = ["switch_network_slice", "read_telemetry", "land", "hover"];
    let mut degraded_turns = 0;
    for e in episode_pool(30)
        .iter()
        .filter(|e| matches!(e.metadata.model.as_str(), "safe_pilot" | "adaptive_pilot"))
    {
        for t in &e.turns {
            if classify_hard(&t.network) {
                degraded_turns += 1;
                match &t.action {
                    Some(Action::McpCall(c)) => {
                        ensure(permitted.contains(&c.name.as_str()), format!("{}: {} while degraded", e.episode_id, c.name))?
                    }
                    Some(Action::A2aTask(a)) => return Err(format!("{}: A2A {} while degraded", e.episode_id, a.task)),
                    _ => {}
                }
            }
        }
    }
    ensure(degraded_turns > 0, "no degraded turns were exercised")?;
    Ok(format!(
        "{} clean episodes, success_rate 1, gen_fail_rate 0; {degraded_turns} degraded turns all in the safe subset",
        r.n
    ))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("pillar-weight cross-check", c1_composite_weights),
        ("efficiency normalization", c2_efficiency),
        ("network calibration", c3_calibration),
        ("safety-policy oracle", c4_sp_oracle),
        ("tool-consistency mutation", c5_tc_mutation),
        ("network-robustness ordering", c6_nr_ordering),
        ("hard-state classifier corners", c7_hard_corners),
        ("reliability and failure accounting", c8_failure_accounting),
        ("determinism across parallelism", c9_determinism),
        ("structural gate", c10_structural_gate),
        ("physics sanity", c11_physics),
        ("expected reference behavior", c12_expected_behavior),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(msg)
        });
        match outcome {
            Ok(detail) => println!("PASS  {:>2}  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:>2}  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
