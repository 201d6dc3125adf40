import json
import shutil

import pytest

from ltmosa import cli
from ltmosa.experiment import (
    PARTIAL_MARKER,
    ExperimentPlan,
    PartialResults,
    missing_runs,
    render_report,
    resolve_scenario,
    run_experiment,
    summarize,
)
from ltmosa.search import ConfigError

TRIVIAL = {
    "name": "trivial",
    "service": {"endpoints": [{"method": "GET", "path": "/"}]},
    "handlers": {"GET /": [{"id": 1, "effect": {"respond": 200}}]},
    "targets": 1,
}


@pytest.fixture
def trivial_path(tmp_path):
    path = tmp_path / "trivial.json"
    path.write_text(json.dumps(TRIVIAL))
    return str(path)


def test_single_run_bundle(tmp_path, trivial_path):
    out = tmp_path / "bundle"
    plan = ExperimentPlan(trivial_path, str(out), algorithms=("mosa",), repetitions=1, budget_evaluations=200)
    summary = run_experiment(plan)
    assert sorted(p.name for p in out.rglob("events.jsonl")) == ["events.jsonl"]
    assert (out / "mosa" / "7" / "suite.json").exists()
    cov = summary["algorithms"]["mosa"]["coverage"]
    assert cov["median"] == 1 and cov["iqr"] == 0
    assert json.loads((out / "comparisons.json").read_text()) == {}
    report = render_report(out)
    assert "mosa" in report and "Pairwise" not in report


def test_full_grid_counts_and_comparisons(tmp_path):
    out = tmp_path / "grid"
    plan = ExperimentPlan(resolve_scenario("flat-api"), str(out), repetitions=20, budget_evaluations=100)
    run_experiment(plan)
    assert len(list(out.rglob("events.jsonl"))) == 60
    comparisons = json.loads((out / "comparisons.json").read_text())
    assert set(comparisons) == {"lt-mosa vs mio", "lt-mosa vs mosa"}


def test_rerun_gives_byte_identical_summary(tmp_path):
    scenario = resolve_scenario("chained-store")
    texts = []
    for name in ("a", "b"):
        out = tmp_path / name
        run_experiment(ExperimentPlan(scenario, str(out), repetitions=2, budget_evaluations=400))
        texts.append(((out / "summary.json").read_bytes(), (out / "comparisons.json").read_bytes()))
    assert texts[0] == texts[1]


def test_summary_matches_recomputation_from_event_logs(tmp_path):
    out = tmp_path / "bundle"
    run_experiment(ExperimentPlan(resolve_scenario("fault-maze"), str(out), repetitions=3, budget_evaluations=500))
    summary = json.loads((out / "summary.json").read_text())
    for alg, entry in summary["algorithms"].items():
        for seed, value in entry["coverage"]["per_seed"].items():
            lines = (out / alg / seed / "events.jsonl").read_text().splitlines()
            assert json.loads(lines[-1])["covered_count"] == value
            suite = json.loads((out / alg / seed / "suite.json").read_text())
            assert len(suite["covered"]) == value
            assert entry["faults"]["per_seed"][seed] == len(suite["faults"])


def test_run_failure_leaves_partial_marker(tmp_path, monkeypatch, trivial_path):
    from ltmosa import experiment

    def boom(plan, algorithm, seed):
        if seed == 8:
            raise RuntimeError("simulated crash")
        return real(plan, algorithm, seed)

    real = experiment.run_one
    monkeypatch.setattr(experiment, "run_one", boom)
    out = tmp_path / "bundle"
    with pytest.raises(PartialResults):
        run_experiment(ExperimentPlan(trivial_path, str(out), algorithms=("mio",), repetitions=2, budget_evaluations=50))
    assert "mio/8" in (out / PARTIAL_MARKER).read_text()
    assert not (out / "summary.json").exists()
    assert missing_runs(out) == ["mio/8/events.jsonl", "mio/8/suite.json"]


def test_report_on_incomplete_bundle_lists_missing_runs(tmp_path, trivial_path):
    out = tmp_path / "bundle"
    run_experiment(ExperimentPlan(trivial_path, str(out), algorithms=("mio",), repetitions=2, budget_evaluations=50))
    shutil.rmtree(out / "mio" / "8")
    with pytest.raises(PartialResults, match="mio/8/events.jsonl"):
        summarize(out)


def test_plan_validation():
    with pytest.raises(ConfigError):
        ExperimentPlan("x", "y", repetitions=0)
    with pytest.raises(ConfigError):
        ExperimentPlan("x", "y", algorithms=("nsga",))
    assert ExperimentPlan("x", "y", repetitions=3, seed_base=10).seeds() == [10, 11, 12]


def _bundle_with(tmp_path, coverage_by_alg):
    """Hand-built bundle: one event record per run with the given final coverage."""
    out = tmp_path / "made"
    algs = tuple(coverage_by_alg)
    reps = len(next(iter(coverage_by_alg.values())))
    plan = ExperimentPlan("unused.json", str(out), algorithms=algs, repetitions=reps, budget_evaluations=100)
    out.mkdir()
    (out / "plan.json").write_text(json.dumps(plan.to_json()))
    for alg, values in coverage_by_alg.items():
        for seed, value in zip(plan.seeds(), values):
            where = out / alg / str(seed)
            where.mkdir(parents=True)
            (where / "events.jsonl").write_text(json.dumps({"generation": 0, "evaluations": 100,
                                                            "covered_count": value, "model_trained": False}) + "\n")
            (where / "suite.json").write_text(json.dumps({"faults": []}))
    return out


def test_report_marks_dominating_algorithm(tmp_path):
    out = _bundle_with(tmp_path, {"lt-mosa": [10, 11, 12, 13, 14], "mosa": [1, 2, 3, 4, 5], "mio": [1, 2, 3, 4, 5]})
    report = render_report(out)
    assert "1.00 (large)" in report
    assert "*" in report.split("Pairwise")[1].split("\n", 1)[1]


def test_identical_results_have_no_significance_markers(tmp_path):
    same = [5, 6, 7, 8]
    out = _bundle_with(tmp_path, {"lt-mosa": same, "mosa": same, "mio": same})
    _, comparisons = summarize(out)
    for by_metric in comparisons.values():
        assert all(c["p_value"] >= 0.9 for c in by_metric.values())
    assert "*" not in render_report(out).split("Pairwise")[1].split("\n", 1)[1]


def test_cli_exit_codes(tmp_path, trivial_path, capsys):
    out = tmp_path / "cli"
    assert cli.main(["run", "--scenario", trivial_path, "--algorithms", "lt-mosa", "--reps", "1",
                     "--budget-evals", "100", "--out", str(out)]) == cli.EXIT_OK
    assert cli.main(["report", str(out)]) == cli.EXIT_OK
    assert "Covered targets" in capsys.readouterr().out
    assert cli.main(["run", "--scenario", "no-such-scenario", "--out", str(out)]) == cli.EXIT_CONFIG
    assert cli.main(["run", "--scenario", trivial_path, "--algorithms", "nsga", "--out", str(out)]) == cli.EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"service": {"endpoints": []}}))
    assert cli.main(["run", "--scenario", str(bad), "--out", str(out)]) == cli.EXIT_CONFIG
    assert cli.main(["report", str(tmp_path / "nothing")]) == cli.EXIT_PARTIAL


def test_cli_dumps_linkage_trees(tmp_path):
    out = tmp_path / "trees"
    code = cli.main(["run", "--scenario", "chained-store", "--algorithms", "lt-mosa", "--reps", "1",
                     "--budget-evals", "600", "--out", str(out), "--dump-linkage-tree"])
    assert code == cli.EXIT_OK
    lines = (out / "lt-mosa" / "7" / "linkage_trees.jsonl").read_text().splitlines()
    first = json.loads(lines[0])
    assert first["generation"] == 0
    assert first["tree"]["members"] == list(range(10))


def test_live_config_files_are_recognized(tmp_path):
    from ltmosa.experiment import load_sut
    from ltmosa.harness.live import HttpSut

    (tmp_path / "service.json").write_text(json.dumps({"endpoints": [{"method": "GET", "path": "/"}]}))
    cfg = tmp_path / "live.json"
    cfg.write_text(json.dumps({"base_url": "http://127.0.0.1:9", "service": "service.json", "timeout_ms": 100}))
    sut = load_sut(str(cfg))
    assert isinstance(sut, HttpSut)
    assert sut.config.timeout_ms == 100
    assert len(sut.catalog) == 1
