"""Deterministic, white-box simulated REST services.

A scenario file describes a service (its endpoints, in the service-description
format), an initial resource store, one handler per action and a set of
injected faults. Handlers are lists of guarded statements::

    {"id": 3,
     "predicate": {"lhs": "$price", "op": "<", "rhs": 0},
     "effect": {"respond": 400}}

Statements run top to bottom. When the predicate holds (or there is none) the
``effect`` runs, otherwise the optional ``else`` effect; a ``respond`` effect
ends the handler. Every
statement is a line target and every predicate adds a true and a false branch
target.

Expressions: ``"$name"`` reads a request parameter, any other JSON scalar is
a constant, and the object forms ``{"param": n}``, ``{"const": v}``,
``{"exists": {"resource", "key"}}``, ``{"field": {"resource", "key", "name"}}``,
``{"count": resource}`` and ``{"concat": [expr, ...]}`` read the store.
"""

from __future__ import annotations

import json
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from importlib import resources as importlib_resources
from pathlib import Path
from typing import Any

from ..api_model import ActionCatalog, LiteralPools, TestCase, TokenRef, parse_service_description
from . import distance
from .results import CoverageTarget, ExecutionResult, FaultSignature, make_result

Store = dict[str, dict[Any, dict[str, Any]]]
Expr = Callable[[Mapping[str, Any], Store], Any]

_EFFECTS = ("respond", "create", "read", "update", "delete")


class ScenarioError(ValueError):
    """The scenario file is malformed."""


class SimulationError(RuntimeError):
    """The simulated service reached an inconsistent state (a scenario bug)."""


# ---------------------------------------------------------------------------
# compilation


def _compile_expr(raw: Any, where: str) -> Expr:
    if isinstance(raw, str) and raw.startswith("$"):
        name = raw[1:]
        return lambda inputs, store: inputs.get(name)
    if raw is None or isinstance(raw, (str, int, float, bool)):
        return lambda inputs, store: raw
    if not isinstance(raw, Mapping) or len(raw) != 1:
        raise ScenarioError(f"{where}: bad expression {raw!r}")
    (kind, arg), = raw.items()
    if kind == "param":
        return lambda inputs, store: inputs.get(arg)
    if kind == "const":
        return lambda inputs, store: arg
    if kind == "count":
        return lambda inputs, store: len(store[arg])
    if kind == "concat":
        parts = [_compile_expr(p, where) for p in arg]
        return lambda inputs, store: "".join("" if (v := p(inputs, store)) is None else str(v) for p in parts)
    if kind == "exists":
        res, key = arg["resource"], _compile_expr(arg["key"], where)
        return lambda inputs, store: distance.lookup(key(inputs, store), store[res])
    if kind == "field":
        res, key, name = arg["resource"], _compile_expr(arg["key"], where), arg["name"]

        def read_field(inputs, store):
            record = store[res].get(key(inputs, store))
            return None if record is None else record.get(name)

        return read_field
    raise ScenarioError(f"{where}: unknown expression kind {kind!r}")


def _resources_used(raw: Any) -> set[str]:
    if isinstance(raw, Mapping):
        out = set()
        for k, v in raw.items():
            if k in ("exists", "field") and isinstance(v, Mapping):
                out.add(v.get("resource"))
            elif k == "count":
                out.add(v)
            out |= _resources_used(v)
        return out
    if isinstance(raw, list):
        return set().union(*(_resources_used(v) for v in raw)) if raw else set()
    return set()


@dataclass
class _Statement:
    sid: int
    line: int  # target ids
    t_true: int
    t_false: int
    lhs: Expr | None
    op: str | None
    rhs: Expr | None
    effect: Callable[[Mapping[str, Any], Store], tuple[int, str | None] | None] | None
    otherwise: Callable[[Mapping[str, Any], Store], tuple[int, str | None] | None] | None
    fault: bool = False


def _compile_effect(raw: Mapping[str, Any] | None, where: str, resources: set[str]):
    if raw is None:
        return None
    if not isinstance(raw, Mapping) or len(raw) - ("token" in raw) != 1:
        raise ScenarioError(f"{where}: effect needs exactly one of {_EFFECTS}")
    if "respond" in raw:
        status = raw["respond"]
        if not isinstance(status, int) or not 100 <= status <= 599:
            raise ScenarioError(f"{where}: bad status {status!r}")
        token = _compile_expr(raw["token"], where) if "token" in raw else None
        if token is None:
            return lambda inputs, store: (status, None)
        return lambda inputs, store: (status, str(token(inputs, store)))
    kind = next(k for k in raw if k in _EFFECTS)
    arg = raw[kind]
    res = arg.get("resource")
    if res not in resources:
        raise ScenarioError(f"{where}: unknown resource {res!r}")
    key = _compile_expr(arg["key"], where)
    fields = {n: _compile_expr(e, where) for n, e in arg.get("fields", {}).items()}

    if kind == "create":

        def create(inputs, store):
            store[res][key(inputs, store)] = {n: f(inputs, store) for n, f in fields.items()}

        return create
    if kind == "read":
        return lambda inputs, store: None
    if kind == "update":

        def update(inputs, store):
            k = key(inputs, store)
            if k not in store[res]:
                raise SimulationError(f"{where}: update of missing {res}[{k!r}]")
            store[res][k].update({n: f(inputs, store) for n, f in fields.items()})

        return update
    if kind == "delete":

        def delete(inputs, store):
            k = key(inputs, store)
            if k not in store[res]:
                raise SimulationError(f"{where}: delete of missing {res}[{k!r}]")
            del store[res][k]

        return delete
    raise ScenarioError(f"{where}: unknown effect {kind!r}")


def _copy_store(store: Store) -> Store:
    return {r: {k: dict(v) for k, v in recs.items()} for r, recs in store.items()}


def _load_resources(raw: Mapping[str, Any]) -> Store:
    store: Store = {}
    for name, records in raw.items():
        if isinstance(records, list):
            store[name] = {r["key"]: dict(r.get("fields", {})) for r in records}
        elif isinstance(records, Mapping):
            store[name] = {k: dict(v) for k, v in records.items()}
        else:
            raise ScenarioError(f"resources.{name}: expected list or object")
    return store


# ---------------------------------------------------------------------------


class SimulatedSut:
    """A stateful in-memory REST service with branch-distance instrumentation."""

    def __init__(self, scenario: Mapping[str, Any]):
        self.name: str = scenario.get("name", "scenario")
        self.catalog: ActionCatalog = parse_service_description(scenario["service"])
        self.literal_pools = LiteralPools.from_json(scenario.get("literals"))
        self._initial = _load_resources(scenario.get("resources", {}))
        self.store: Store = _copy_store(self._initial)
        self.expected_targets: int | None = scenario.get("targets")
        self._targets: list[CoverageTarget] = []
        self._handlers: list[list[_Statement]] = [[] for _ in self.catalog]
        self._build(scenario.get("handlers", {}), scenario.get("faults", []))
        self._dirty = False

    @classmethod
    def from_file(cls, path: str | Path) -> SimulatedSut:
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    @classmethod
    def builtin(cls, name: str) -> SimulatedSut:
        return cls.from_file(builtin_scenario_path(name))

    # -- construction -------------------------------------------------------

    def _build(self, handlers: Mapping[str, list], faults: list) -> None:
        raw_bodies: dict[int, list[dict]] = {}
        for key, body in handlers.items():
            try:
                action = self.catalog.by_key(key)
            except KeyError:
                raise ScenarioError(f"handlers: no endpoint {key!r} in service") from None
            raw_bodies[action.index] = [dict(s) for s in body]
        for i, fault in enumerate(faults):
            where = f"faults[{i}]"
            try:
                action = self.catalog.by_key(fault["handler"])
            except KeyError:
                raise ScenarioError(f"{where}: no endpoint {fault.get('handler')!r}") from None
            body = raw_bodies.setdefault(action.index, [])
            stmt = {"id": fault["id"], "predicate": fault["predicate"], "effect": {"respond": 500}, "fault": True}
            ids = [s["id"] for s in body]
            before = fault.get("before")
            if before is None:
                body.append(stmt)
            elif before in ids:
                body.insert(ids.index(before), stmt)
            else:
                raise ScenarioError(f"{where}: 'before' statement {before!r} not in handler")

        resources = set(self._initial)
        seen_ids: set[int] = set()
        for action in self.catalog:
            for j, raw in enumerate(raw_bodies.get(action.index, [])):
                where = f"handlers[{action.key!r}][{j}]"
                sid = raw.get("id")
                if not isinstance(sid, int) or sid in seen_ids:
                    raise ScenarioError(f"{where}: statement id must be a unique integer, got {sid!r}")
                seen_ids.add(sid)
                unknown = _resources_used(raw.get("predicate")) - resources
                if unknown:
                    raise ScenarioError(f"{where}: unknown resource(s) {sorted(unknown)}")
                line = self._add_target("line", action.index, sid)
                lhs = op = rhs = None
                t_true = t_false = -1
                pred = raw.get("predicate")
                if pred is not None:
                    op = pred.get("op")
                    if op not in distance.OPERATORS:
                        raise ScenarioError(f"{where}: unknown operator {op!r}")
                    lhs = _compile_expr(pred.get("lhs"), where)
                    rhs = _compile_expr(pred.get("rhs"), where)
                    t_true = self._add_target("branch-true", action.index, sid)
                    t_false = self._add_target("branch-false", action.index, sid)
                effect = _compile_effect(raw.get("effect"), where, resources)
                otherwise = _compile_effect(raw.get("else"), where, resources)
                if otherwise is not None and pred is None:
                    raise ScenarioError(f"{where}: 'else' needs a predicate")
                self._handlers[action.index].append(
                    _Statement(sid, line, t_true, t_false, lhs, op, rhs, effect, otherwise, bool(raw.get("fault")))
                )

    def _add_target(self, kind: str, action: int, sid: int) -> int:
        tid = len(self._targets)
        self._targets.append(CoverageTarget(tid, kind, action, sid))
        return tid

    # -- SUT interface ------------------------------------------------------

    def enumerate_targets(self) -> list[CoverageTarget]:
        return list(self._targets)

    @property
    def num_targets(self) -> int:
        return len(self._targets)

    def reset(self) -> None:
        self.store = _copy_store(self._initial)
        self._dirty = False

    def execute(self, test: TestCase) -> ExecutionResult:
        if self._dirty:
            raise SimulationError("execute() called without reset() since the previous test")
        self._dirty = True
        dist = [1.0] * len(self._targets)
        statuses: list[int] = []
        faults: set[FaultSignature] = set()
        last_token: dict[int, str | None] = {}
        store = self.store
        catalog = self.catalog
        for stmt in test.statements:
            inputs = {}
            for gene in stmt.inputs:
                v = gene.value
                if isinstance(v, TokenRef):
                    v = last_token.get(v.action) or ""
                inputs[gene.name] = v
            status, token, last_sid = self._run_handler(self._handlers[stmt.action], inputs, store, dist)
            statuses.append(status)
            last_token[stmt.action] = token
            if status >= 500:
                spec = catalog[stmt.action]
                faults.add(FaultSignature(spec.method, spec.path, last_sid, status))
        return make_result(dist, faults, statuses)

    @staticmethod
    def _run_handler(body: list[_Statement], inputs, store: Store, dist: list[float]):
        status, token, last_sid = 200, None, None
        blocked_at = None
        block_distance = 1.0
        for pos, st in enumerate(body):
            dist[st.line] = 0.0
            last_sid = st.sid
            effect = st.effect
            escape = 1.0  # distance to the branch that would not have responded
            if st.lhs is not None:
                outcome, d_true, d_false = distance.evaluate(st.lhs(inputs, store), st.op, st.rhs(inputs, store))
                if d_true < dist[st.t_true]:
                    dist[st.t_true] = d_true
                if d_false < dist[st.t_false]:
                    dist[st.t_false] = d_false
                if outcome:
                    escape = d_false
                else:
                    effect = st.otherwise
                    escape = d_true
            if effect is not None:
                out = effect(inputs, store)
                if out is not None:
                    status, token = out
                    blocked_at = pos
                    block_distance = 0.5 + 0.5 * escape
                    break
        if blocked_at is not None and block_distance < 1.0:
            for st in body[blocked_at + 1 :]:
                for tid in (st.line, st.t_true, st.t_false):
                    if tid >= 0 and block_distance < dist[tid]:
                        dist[tid] = block_distance
        return status, token, last_sid


def builtin_scenario_path(name: str) -> Path:
    path = Path(str(importlib_resources.files("ltmosa") / "scenarios" / f"{name}.json"))
    if not path.exists():
        raise FileNotFoundError(f"no built-in scenario {name!r}")
    return path


BUILTIN_SCENARIOS = ("chained-store", "flat-api", "fault-maze")
