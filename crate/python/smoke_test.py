"""Smoke test for the skyloop Python bindings.

Build first with `pip install -e crates/py --no-build-isolation`, then run
`python python/smoke_test.py` from the repository root.
"""

import json
import pathlib
import tempfile

import skyloop

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main():
    assert abs(skyloop.composite([1.0, 0.965, 1.0, 0.961, 0.871, 0.492]) - 0.949) <= 1e-3
    assert skyloop.classify_hard(40.1, 0.0, 50.0, 0.3)
    assert not skyloop.classify_hard(40.0, 0.99, 5.0, 0.8)

    draws = skyloop.sample_network("URLLC", 2000, seed=7)
    latencies = sorted(d["latency_ms"] for d in draws)
    assert 6.0 < latencies[len(latencies) // 2] < 8.0

    scenario = skyloop.Scenario.load(str(ROOT / "scenarios" / "S01_survey.json"))
    line = scenario.run("safe_pilot", index=0)
    assert line == scenario.run("safe_pilot", index=0)
    report = skyloop.validate_episode(line)
    assert report["valid"], report
    scores = skyloop.score_episode(line)
    assert scores.to == 1.0 and 0.0 <= scores.alpha3 <= 1.0

    episode = json.loads(line)
    episode["turns"][3]["role"] = "system"
    broken = json.dumps(episode)
    assert not skyloop.validate_episode(broken)["valid"]
    assert skyloop.score_episode(broken).alpha3 == 0.0

    stub = json.loads(scenario.run("faulty_always"))
    assert stub["kind"] == "failure_stub" and stub["attempts_used"] == 3

    with tempfile.TemporaryDirectory() as tmp:
        config = {
            "scenarios": str(ROOT / "scenarios"),
            "agents": ["safe_pilot", "greedy_streamer"],
            "episodes_per_scenario": 3,
            "out": tmp,
            "canonical": True,
        }
        manifest = skyloop.generate(json.dumps(config))
        assert manifest["records"] == manifest["episode_budget"] * 2
        summary = skyloop.score_corpus(f"{tmp}/corpus.jsonl", f"{tmp}/scores.jsonl")
        assert summary["records"] == manifest["records"]
        csv = skyloop.leaderboard(f"{tmp}/scores.jsonl", manifest["episode_budget"])
        rows = csv.strip().splitlines()
        assert rows[0].startswith("model,alpha3,TO,SP,TC,IQ,NR,CC") and len(rows) == 3

    print("python smoke test passed:", scores)


if __name__ == "__main__":
    main()
