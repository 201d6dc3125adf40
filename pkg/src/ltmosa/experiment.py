"""Sweeps (algorithm x seed) grids and turns the results into summaries.

Bundle layout::

    <out>/plan.json
    <out>/<algorithm>/<seed>/events.jsonl
    <out>/<algorithm>/<seed>/suite.json
    <out>/<algorithm>/<seed>/linkage_trees.jsonl   (optional)
    <out>/summary.json
    <out>/comparisons.json
    <out>/PARTIAL                                  (only when a run failed)

Everything in ``summary.json`` and ``comparisons.json`` is recomputed from the
per-run files, so the two files carry no timestamps and are byte-identical
across reruns of the same plan.
"""

from __future__ import annotations

import json
import logging
import os
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

from . import stats
from .api_model import LiteralPools, parse_service_description
from .harness.live import HttpSut, LiveConfig
from .harness.simulated import SimulatedSut, builtin_scenario_path
from .search import ALGORITHMS, ConfigError, SearchConfig, run_search

log = logging.getLogger(__name__)

PARTIAL_MARKER = "PARTIAL"
COMPARISONS = (("lt-mosa", "mio"), ("lt-mosa", "mosa"))
METRICS = ("coverage", "faults", "auc")


class PartialResults(RuntimeError):
    """A run failed or a bundle is missing runs."""


@dataclass(frozen=True)
class ExperimentPlan:
    scenario: str
    out: str
    algorithms: tuple[str, ...] = ALGORITHMS
    repetitions: int = 20
    budget_evaluations: int = 20_000
    seed_base: int = 7
    jobs: int = 1
    dump_linkage_tree: bool = False
    search_overrides: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.budget_evaluations < 1:
            raise ConfigError("the evaluation budget must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if not self.algorithms:
            raise ConfigError("at least one algorithm is required")
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {alg!r}; expected one of {ALGORITHMS}")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ConfigError("algorithms must not repeat")

    def seeds(self) -> list[int]:
        return [self.seed_base + r for r in range(self.repetitions)]

    def search_config(self, algorithm: str, seed: int) -> SearchConfig:
        return SearchConfig(algorithm=algorithm, seed=seed, max_evaluations=self.budget_evaluations,
                            **self.search_overrides)

    def to_json(self) -> dict:
        out = asdict(self)
        out["algorithms"] = list(self.algorithms)
        del out["out"], out["jobs"]  # neither changes the results
        return out

    @classmethod
    def from_json(cls, raw: dict, out: str) -> ExperimentPlan:
        raw = dict(raw)
        raw["algorithms"] = tuple(raw["algorithms"])
        return cls(out=out, **raw)


def resolve_scenario(name_or_path: str) -> str:
    """Accept a scenario file path or the name of a built-in scenario."""
    if os.path.exists(name_or_path):
        return name_or_path
    try:
        return str(builtin_scenario_path(name_or_path))
    except FileNotFoundError:
        raise FileNotFoundError(f"no scenario file or built-in scenario named {name_or_path!r}") from None


def load_sut(path: str):
    """Build a SUT from a scenario file or a live-adapter config file.

    A file with a ``base_url`` key configures the live adapter; its
    ``service`` entry is the service description (inline, or a path relative
    to the config file).
    """
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if "base_url" not in raw:
        return SimulatedSut(raw)
    service = raw.get("service")
    if isinstance(service, str):
        service = Path(path).parent / service
        service = service.read_text(encoding="utf-8")
    catalog = parse_service_description(service)
    return HttpSut(catalog, LiveConfig.from_json(raw), LiteralPools.from_json(raw.get("literals")),
                   name=raw.get("name", "live"))


def run_dir(out: str | Path, algorithm: str, seed: int) -> Path:
    return Path(out) / algorithm / str(seed)


def run_one(plan: ExperimentPlan, algorithm: str, seed: int) -> None:
    """Execute one search run and write its event log and suite."""
    sut = load_sut(plan.scenario)
    keep = plan.dump_linkage_tree and algorithm == "lt-mosa"
    result = run_search(plan.search_config(algorithm, seed), sut, keep_trees=keep)
    where = run_dir(plan.out, algorithm, seed)
    where.mkdir(parents=True, exist_ok=True)
    result.events.write(where / "events.jsonl")
    faults = sorted(result.archive.faults())
    suite = {
        "algorithm": algorithm,
        "seed": seed,
        "evaluations": result.evaluations,
        "targets": result.archive.n_targets,
        "covered": sorted(result.archive.covered()),
        "faults": [f.to_json() for f in faults],
        "tests": result.archive.to_json(sut.catalog),
    }
    (where / "suite.json").write_text(json.dumps(suite, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    if keep:
        with open(where / "linkage_trees.jsonl", "w", encoding="utf-8") as fh:
            for generation, tree in result.linkage_trees:
                fh.write(json.dumps({"generation": generation, "tree": json.loads(tree.dumps())}, sort_keys=True) + "\n")


def _run_job(args) -> Optional[str]:
    plan, algorithm, seed = args
    try:
        run_one(plan, algorithm, seed)
    except Exception as exc:  # reported through the partial-results marker
        log.exception("run %s/%s failed", algorithm, seed)
        return f"{algorithm}/{seed}: {type(exc).__name__}: {exc}"
    return None


def run_experiment(plan: ExperimentPlan) -> dict:
    """Run every (algorithm, seed) pair of ``plan`` and write the bundle.

    Raises:
        ScenarioError, ServiceDescriptionError: when the scenario cannot be
            loaded; nothing is written in that case.
        PartialResults: when any run fails; the bundle then holds a
            ``PARTIAL`` marker listing the failures and no summary.
    """
    load_sut(plan.scenario)  # fail fast on a broken scenario
    out = Path(plan.out)
    out.mkdir(parents=True, exist_ok=True)
    for stale in (PARTIAL_MARKER, "summary.json", "comparisons.json"):
        (out / stale).unlink(missing_ok=True)
    for alg in plan.algorithms:
        if (out / alg).exists():
            shutil.rmtree(out / alg)
    (out / "plan.json").write_text(json.dumps(plan.to_json(), indent=1, sort_keys=True) + "\n", encoding="utf-8")

    jobs = [(plan, alg, seed) for alg in plan.algorithms for seed in plan.seeds()]
    if plan.jobs == 1:
        failures = [f for f in map(_run_job, jobs) if f]
    else:
        with ProcessPoolExecutor(max_workers=plan.jobs) as pool:
            failures = [f for f in pool.map(_run_job, jobs) if f]
    if failures:
        (out / PARTIAL_MARKER).write_text("\n".join(failures) + "\n", encoding="utf-8")
        raise PartialResults(f"{len(failures)} of {len(jobs)} runs failed; see {out / PARTIAL_MARKER}")
    return write_summary(out)


# ---------------------------------------------------------------------------
# summaries


def load_plan(bundle: str | Path) -> ExperimentPlan:
    path = Path(bundle) / "plan.json"
    if not path.exists():
        raise PartialResults(f"{bundle} has no plan.json; not an experiment bundle")
    return ExperimentPlan.from_json(json.loads(path.read_text(encoding="utf-8")), str(bundle))


def missing_runs(bundle: str | Path) -> list[str]:
    plan = load_plan(bundle)
    missing = []
    for alg in plan.algorithms:
        for seed in plan.seeds():
            where = run_dir(bundle, alg, seed)
            for name in ("events.jsonl", "suite.json"):
                if not (where / name).exists():
                    missing.append(f"{alg}/{seed}/{name}")
    return missing


@dataclass
class RunOutcome:
    algorithm: str
    seed: int
    series: stats.RunSeries
    faults: int


def load_runs(bundle: str | Path) -> tuple[ExperimentPlan, list[RunOutcome]]:
    missing = missing_runs(bundle)
    if missing:
        raise PartialResults("incomplete bundle, missing: " + ", ".join(missing))
    plan = load_plan(bundle)
    runs = []
    for alg in plan.algorithms:
        for seed in plan.seeds():
            where = run_dir(bundle, alg, seed)
            with open(where / "events.jsonl", encoding="utf-8") as fh:
                records = [json.loads(line) for line in fh if line.strip()]
            suite = json.loads((where / "suite.json").read_text(encoding="utf-8"))
            n_faults = len(suite["faults"])
            runs.append(RunOutcome(alg, seed, stats.RunSeries.from_events(records, n_faults), n_faults))
    return plan, runs


def metric_table(plan: ExperimentPlan, runs: list[RunOutcome]) -> dict[str, dict[str, dict[int, float]]]:
    """``table[metric][algorithm][seed]`` for final coverage, faults and AUC.

    AUC is normalized by the evaluation budget and the highest final coverage
    reached by any run in the bundle.
    """
    top = max(1, max(r.series.final_covered for r in runs))
    table: dict[str, dict[str, dict[int, float]]] = {m: {a: {} for a in plan.algorithms} for m in METRICS}
    for r in runs:
        table["coverage"][r.algorithm][r.seed] = r.series.final_covered
        table["faults"][r.algorithm][r.seed] = r.faults
        table["auc"][r.algorithm][r.seed] = stats.normalized_auc(r.series, plan.budget_evaluations, top)
    return table


def summarize(bundle: str | Path) -> tuple[dict, dict]:
    plan, runs = load_runs(bundle)
    table = metric_table(plan, runs)
    summary: dict[str, Any] = {"plan": plan.to_json(), "algorithms": {}}
    for alg in plan.algorithms:
        entry = {}
        for metric in METRICS:
            values = [table[metric][alg][s] for s in plan.seeds()]
            entry[metric] = {
                "median": stats.median(values),
                "iqr": stats.iqr(values),
                "per_seed": {str(s): v for s, v in zip(plan.seeds(), values)},
            }
        summary["algorithms"][alg] = entry
    comparisons: dict[str, Any] = {}
    for a, b in COMPARISONS:
        if a in plan.algorithms and b in plan.algorithms:
            comparisons[f"{a} vs {b}"] = {
                metric: stats.compare(list(table[metric][a].values()), list(table[metric][b].values())).to_json()
                for metric in METRICS
            }
    return summary, comparisons


def write_summary(bundle: str | Path) -> dict:
    summary, comparisons = summarize(bundle)
    out = Path(bundle)
    (out / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    (out / "comparisons.json").write_text(json.dumps(comparisons, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return summary


def render_report(bundle: str | Path) -> str:
    """Median/IQR tables per metric plus the pairwise significance table."""
    summary, comparisons = summarize(bundle)
    algs = list(summary["algorithms"])
    titles = {"coverage": "Covered targets", "faults": "Detected faults", "auc": "Normalized AUC"}
    blocks = []
    for metric in METRICS:
        digits = 3 if metric == "auc" else 1
        rows = [
            [alg, f"{summary['algorithms'][alg][metric]['median']:.{digits}f}",
             f"{summary['algorithms'][alg][metric]['iqr']:.{digits}f}"]
            for alg in algs
        ]
        blocks.append(titles[metric] + "\n" + stats.render_table(["algorithm", "median", "IQR"], rows))
    if comparisons:
        rows = []
        for pair, by_metric in comparisons.items():
            for metric in METRICS:
                c = by_metric[metric]
                rows.append([pair, metric, stats.format_p(c["p_value"]), f"{c['a12']:.2f} ({c['magnitude']})"])
        blocks.append("Pairwise comparisons (* p < 0.05)\n"
                      + stats.render_table(["comparison", "metric", "p-value", "A12"], rows))
    return "\n\n".join(blocks) + "\n"
