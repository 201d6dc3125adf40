"""Action catalog, test-case genome and service-description parsing."""

from __future__ import annotations

import datetime as dt
import json
import random
import re
import string
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any, Union

METHODS = ("GET", "HEAD", "POST", "PUT", "PATCH", "DELETE")
PARAM_LOCATIONS = ("path", "query", "header", "body")
VALUE_TYPES = ("string", "integer", "number", "boolean", "date")

DEFAULT_MAX_TEST_LENGTH = 40

_PATH_PARAM = re.compile(r"\{([^{}/]+)\}")
_ALNUM = string.ascii_letters + string.digits
_DATE_START = dt.date(2015, 1, 1)
_DATE_SPAN_DAYS = (dt.date(2025, 1, 1) - _DATE_START).days

# chance that a string parameter is bound to an earlier statement's token
TOKEN_REF_PROBABILITY = 1 / 3
# chance of drawing from the scenario literal pool instead of the random domain
LITERAL_POOL_PROBABILITY = 0.5


class ServiceDescriptionError(ValueError):
    """A service description could not be turned into an action catalog."""

    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


class EmptyCatalogError(ServiceDescriptionError):
    pass


@dataclass(frozen=True)
class ParamSchema:
    name: str
    location: str
    value_type: str
    required: bool = False


@dataclass(frozen=True)
class ActionSpec:
    index: int
    method: str
    path: str
    params: tuple[ParamSchema, ...] = ()

    @property
    def key(self) -> str:
        return f"{self.method} {self.path}"

    def path_params(self) -> list[str]:
        return _PATH_PARAM.findall(self.path)


@dataclass(frozen=True)
class ActionCatalog:
    """Ordered, immutable set of the HTTP actions a SUT exposes."""

    actions: tuple[ActionSpec, ...]

    def __post_init__(self):
        if not self.actions:
            raise EmptyCatalogError("endpoints", "catalog needs at least one action")
        seen = set()
        for i, action in enumerate(self.actions):
            if action.index != i:
                raise ValueError(f"action {action.key} has index {action.index}, expected {i}")
            if action.key in seen:
                raise ValueError(f"duplicate action {action.key}")
            seen.add(action.key)

    def __len__(self) -> int:
        return len(self.actions)

    def __getitem__(self, index: int) -> ActionSpec:
        return self.actions[index]

    def __iter__(self) -> Iterator[ActionSpec]:
        return iter(self.actions)

    def find(self, method: str, path: str) -> ActionSpec:
        for action in self.actions:
            if action.method == method and action.path == path:
                return action
        raise KeyError(f"{method} {path}")

    def by_key(self, key: str) -> ActionSpec:
        method, _, path = key.partition(" ")
        return self.find(method, path)


@dataclass(frozen=True)
class TokenRef:
    """Placeholder for the token issued by the latest earlier call of ``action``."""

    action: int


Value = Union[str, int, float, bool, dt.date, TokenRef]


@dataclass(frozen=True)
class InputGene:
    name: str
    value: Value


@dataclass(frozen=True)
class ActionInstance:
    action: int
    inputs: tuple[InputGene, ...] = ()

    def with_input(self, name: str, value: Value) -> ActionInstance:
        genes = tuple(InputGene(name, value) if g.name == name else g for g in self.inputs)
        return ActionInstance(self.action, genes)


@dataclass(frozen=True)
class TestCase:
    """A variable-length sequence of action instances (the chromosome)."""

    __test__ = False  # keep pytest from collecting this class

    statements: tuple[ActionInstance, ...]

    def __len__(self) -> int:
        return len(self.statements)

    def __iter__(self) -> Iterator[ActionInstance]:
        return iter(self.statements)

    def __getitem__(self, i):
        return self.statements[i]

    def action_indices(self) -> list[int]:
        return [s.action for s in self.statements]


@dataclass(frozen=True)
class LiteralPools:
    """Per-SUT constants that input sampling mixes into its random draws."""

    pools: Mapping[str, tuple[Any, ...]] = field(default_factory=dict)

    def get(self, value_type: str) -> tuple[Any, ...]:
        return self.pools.get(value_type, ())

    @classmethod
    def from_json(cls, raw: Mapping[str, Sequence[Any]] | None) -> LiteralPools:
        if not raw:
            return cls({})
        pools = {}
        for vtype, values in raw.items():
            if vtype not in VALUE_TYPES:
                raise ValueError(f"unknown literal pool type {vtype!r}")
            pools[vtype] = tuple(coerce_value(vtype, v) for v in values)
        return cls(pools)


EMPTY_POOLS = LiteralPools({})


def coerce_value(value_type: str, raw: Any) -> Value:
    """Convert a JSON scalar to the Python value used for ``value_type``."""
    if value_type == "string":
        return str(raw)
    if value_type == "integer":
        if isinstance(raw, bool) or not isinstance(raw, (int, float)) or int(raw) != raw:
            raise ValueError(f"not an integer: {raw!r}")
        return int(raw)
    if value_type == "number":
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ValueError(f"not a number: {raw!r}")
        return float(raw)
    if value_type == "boolean":
        if not isinstance(raw, bool):
            raise ValueError(f"not a boolean: {raw!r}")
        return raw
    if value_type == "date":
        return raw if isinstance(raw, dt.date) else dt.date.fromisoformat(raw)
    raise ValueError(f"unknown value type {value_type!r}")


def value_matches(value_type: str, value: Value) -> bool:
    if isinstance(value, TokenRef):
        return True
    if value_type == "string":
        return isinstance(value, str)
    if value_type == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    if value_type == "number":
        return isinstance(value, float)
    if value_type == "boolean":
        return isinstance(value, bool)
    if value_type == "date":
        return isinstance(value, dt.date)
    return False


# ---------------------------------------------------------------------------
# parsing


def parse_service_description(document: str | Mapping[str, Any]) -> ActionCatalog:
    """Build an :class:`ActionCatalog` from a JSON service description.

    ``document`` is either the JSON text or the already-decoded object. Actions
    are indexed in document order.

    Raises:
        ServiceDescriptionError: if the document is malformed; ``location``
            names the offending element.
        EmptyCatalogError: if no operation is declared.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ServiceDescriptionError(f"line {exc.lineno} col {exc.colno}", exc.msg) from None
    if not isinstance(document, Mapping):
        raise ServiceDescriptionError("$", "expected a JSON object")
    endpoints = document.get("endpoints")
    if not isinstance(endpoints, list):
        raise ServiceDescriptionError("endpoints", "expected a list")
    if not endpoints:
        raise EmptyCatalogError("endpoints", "no operations declared")

    actions = []
    seen: dict[tuple[str, str], int] = {}
    for i, ep in enumerate(endpoints):
        loc = f"endpoints[{i}]"
        if not isinstance(ep, Mapping):
            raise ServiceDescriptionError(loc, "expected an object")
        method = ep.get("method")
        path = ep.get("path")
        if not isinstance(method, str) or method.upper() not in METHODS:
            raise ServiceDescriptionError(f"{loc}.method", f"unsupported method {method!r}")
        method = method.upper()
        if not isinstance(path, str) or not path.startswith("/"):
            raise ServiceDescriptionError(f"{loc}.path", f"path must start with '/': {path!r}")
        if (method, path) in seen:
            raise ServiceDescriptionError(
                loc, f"duplicate operation {method} {path} (first at endpoints[{seen[(method, path)]}])"
            )
        seen[(method, path)] = i
        params = _parse_params(ep.get("params", []), loc)
        _check_path_params(path, params, loc)
        actions.append(ActionSpec(len(actions), method, path, params))
    return ActionCatalog(tuple(actions))


def _parse_params(raw: Any, loc: str) -> tuple[ParamSchema, ...]:
    if not isinstance(raw, list):
        raise ServiceDescriptionError(f"{loc}.params", "expected a list")
    params = []
    names = set()
    for j, p in enumerate(raw):
        ploc = f"{loc}.params[{j}]"
        if not isinstance(p, Mapping):
            raise ServiceDescriptionError(ploc, "expected an object")
        name = p.get("name")
        where = p.get("in")
        vtype = p.get("type")
        required = p.get("required", False)
        if not isinstance(name, str) or not name:
            raise ServiceDescriptionError(f"{ploc}.name", "missing parameter name")
        if where not in PARAM_LOCATIONS:
            raise ServiceDescriptionError(f"{ploc}.in", f"unsupported location {where!r}")
        if vtype not in VALUE_TYPES:
            raise ServiceDescriptionError(f"{ploc}.type", f"unsupported type {vtype!r}")
        if not isinstance(required, bool):
            raise ServiceDescriptionError(f"{ploc}.required", "expected a boolean")
        if name in names:
            raise ServiceDescriptionError(ploc, f"duplicate parameter {name!r}")
        names.add(name)
        params.append(ParamSchema(name, where, vtype, required or where == "path"))
    return tuple(params)


def _check_path_params(path: str, params: tuple[ParamSchema, ...], loc: str) -> None:
    in_template = _PATH_PARAM.findall(path)
    if len(set(in_template)) != len(in_template):
        raise ServiceDescriptionError(f"{loc}.path", "repeated path parameter")
    declared = {p.name for p in params if p.location == "path"}
    for name in in_template:
        if name not in declared:
            raise ServiceDescriptionError(f"{loc}.path", f"path parameter {{{name}}} has no schema")
    for name in declared - set(in_template):
        raise ServiceDescriptionError(f"{loc}.params", f"path parameter {name!r} not in template")


def load_service_description(path) -> ActionCatalog:
    with open(path, encoding="utf-8") as fh:
        return parse_service_description(fh.read())


# ---------------------------------------------------------------------------
# sampling


def sample_value(
    value_type: str,
    rng: random.Random,
    pools: LiteralPools = EMPTY_POOLS,
    prefix: Sequence[ActionInstance] = (),
) -> Value:
    """Draw a fresh value for a parameter of ``value_type``.

    ``prefix`` holds the statements that precede the one being sampled; string
    parameters may become a :class:`TokenRef` to one of them.
    """
    if value_type == "string" and prefix and rng.random() < TOKEN_REF_PROBABILITY:
        return TokenRef(rng.choice(prefix).action)
    pool = pools.get(value_type)
    if pool and rng.random() < LITERAL_POOL_PROBABILITY:
        return rng.choice(pool)
    if value_type == "string":
        return "".join(rng.choice(_ALNUM) for _ in range(rng.randint(0, 16)))
    if value_type == "integer":
        return rng.randint(-1000, 1000)
    if value_type == "number":
        return round(rng.uniform(-1000.0, 1000.0), 2)
    if value_type == "boolean":
        return rng.random() < 0.5
    if value_type == "date":
        return _DATE_START + dt.timedelta(days=rng.randrange(_DATE_SPAN_DAYS))
    raise ValueError(f"unknown value type {value_type!r}")


def sample_instance(
    action: ActionSpec,
    rng: random.Random,
    pools: LiteralPools = EMPTY_POOLS,
    prefix: Sequence[ActionInstance] = (),
) -> ActionInstance:
    genes = []
    for p in action.params:
        if p.required or rng.random() < 0.5:
            genes.append(InputGene(p.name, sample_value(p.value_type, rng, pools, prefix)))
    return ActionInstance(action.index, tuple(genes))


def random_test(
    catalog: ActionCatalog,
    rng: random.Random,
    max_len: int = DEFAULT_MAX_TEST_LENGTH,
    pools: LiteralPools = EMPTY_POOLS,
) -> TestCase:
    """Sample a test with uniform length in ``[1, max_len]`` and uniform actions."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    length = rng.randint(1, max_len)
    statements: list[ActionInstance] = []
    for _ in range(length):
        action = catalog[rng.randrange(len(catalog))]
        statements.append(sample_instance(action, rng, pools, statements))
    return TestCase(tuple(statements))


def check_test(test: TestCase, catalog: ActionCatalog, max_len: int = DEFAULT_MAX_TEST_LENGTH) -> None:
    """Raise ``ValueError`` if ``test`` violates a genome invariant."""
    if not 1 <= len(test) <= max_len:
        raise ValueError(f"test length {len(test)} outside [1, {max_len}]")
    for pos, stmt in enumerate(test.statements):
        if not 0 <= stmt.action < len(catalog):
            raise ValueError(f"statement {pos}: unknown action {stmt.action}")
        spec = catalog[stmt.action]
        schemas = {p.name: p for p in spec.params}
        names = [g.name for g in stmt.inputs]
        if len(set(names)) != len(names):
            raise ValueError(f"statement {pos}: repeated input")
        for gene in stmt.inputs:
            if gene.name not in schemas:
                raise ValueError(f"statement {pos}: unknown parameter {gene.name!r}")
            if not value_matches(schemas[gene.name].value_type, gene.value):
                raise ValueError(f"statement {pos}: {gene.name!r} has wrong value type")
        for p in spec.params:
            if p.required and p.name not in names:
                raise ValueError(f"statement {pos}: missing required {p.name!r}")


# ---------------------------------------------------------------------------
# JSON round trip for suites


def value_to_json(value: Value) -> Any:
    if isinstance(value, TokenRef):
        return {"token_of": value.action}
    if isinstance(value, dt.date):
        return {"date": value.isoformat()}
    return value


def value_from_json(raw: Any) -> Value:
    if isinstance(raw, dict):
        if "token_of" in raw:
            return TokenRef(int(raw["token_of"]))
        if "date" in raw:
            return dt.date.fromisoformat(raw["date"])
        raise ValueError(f"unknown tagged value {raw!r}")
    return raw


def test_to_json(test: TestCase, catalog: ActionCatalog) -> list[dict[str, Any]]:
    out = []
    for stmt in test.statements:
        spec = catalog[stmt.action]
        out.append(
            {
                "action": stmt.action,
                "method": spec.method,
                "path": spec.path,
                "inputs": {g.name: value_to_json(g.value) for g in stmt.inputs},
            }
        )
    return out


def test_from_json(raw: list[Mapping[str, Any]]) -> TestCase:
    statements = []
    for item in raw:
        genes = tuple(InputGene(k, value_from_json(v)) for k, v in item["inputs"].items())
        statements.append(ActionInstance(int(item["action"]), genes))
    return TestCase(tuple(statements))


test_to_json.__test__ = False
test_from_json.__test__ = False
