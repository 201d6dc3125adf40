"""Black-box adapter that runs tests against a real HTTP service.

Without instrumentation the only observable outcome of a request is its
status code, so every action contributes one coverage target per status class
(2xx to 5xx). A target is covered when a request to the action returns a
status of that class; an action that was called but never returned the class
scores 0.5, and an action that was never called scores 1.0.
"""

from __future__ import annotations

import datetime as dt
import logging
from dataclasses import dataclass
from typing import Any, Optional
from urllib.parse import quote

import requests

from ..api_model import EMPTY_POOLS, ActionCatalog, LiteralPools, TestCase, TokenRef
from .results import CoverageTarget, ExecutionResult, FaultSignature, make_result

log = logging.getLogger(__name__)

STATUS_CLASSES = (2, 3, 4, 5)
NETWORK_FAILURE = 0  # synthetic status for requests that never got a response
CALLED_DISTANCE = 0.5


@dataclass(frozen=True)
class LiveConfig:
    base_url: str
    reset_url: Optional[str] = None
    timeout_ms: int = 2000

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise ValueError(f"timeout_ms must be positive, got {self.timeout_ms}")

    @classmethod
    def from_json(cls, raw: dict) -> LiveConfig:
        return cls(raw["base_url"], raw.get("reset_url"), int(raw.get("timeout_ms", 2000)))


def _wire(value: Any) -> Any:
    if isinstance(value, dt.date):
        return value.isoformat()
    return value


def _extract_token(response: requests.Response) -> Optional[str]:
    try:
        payload = response.json()
    except ValueError:
        return None
    if isinstance(payload, dict) and isinstance(payload.get("token"), str):
        return payload["token"]
    return None


class HttpSut:
    """Runs test cases over HTTP with status-class coverage targets."""

    def __init__(self, catalog: ActionCatalog, config: LiveConfig,
                 literal_pools: LiteralPools = EMPTY_POOLS, name: str = "live",
                 session: Optional[requests.Session] = None):
        self.name = name
        self.catalog = catalog
        self.config = config
        self.literal_pools = literal_pools
        self.session = session or requests.Session()
        self._targets = [
            CoverageTarget(a.index * len(STATUS_CLASSES) + k, f"status-{cls}xx", a.index)
            for a in catalog
            for k, cls in enumerate(STATUS_CLASSES)
        ]

    def enumerate_targets(self) -> list[CoverageTarget]:
        return list(self._targets)

    @property
    def num_targets(self) -> int:
        return len(self._targets)

    def reset(self) -> None:
        if self.config.reset_url is None:
            log.warning("no reset hook configured for %s; state carries over between tests", self.name)
            return
        self.session.post(self.config.reset_url, timeout=self.config.timeout_ms / 1000).raise_for_status()

    def _request(self, action, inputs: dict[str, Any]) -> requests.Response:
        path = action.path
        query, headers, body = {}, {}, {}
        for schema in action.params:
            if schema.name not in inputs:
                continue
            value = _wire(inputs[schema.name])
            if schema.location == "path":
                path = path.replace("{" + schema.name + "}", quote(str(value), safe=""))
            elif schema.location == "query":
                query[schema.name] = value
            elif schema.location == "header":
                headers[schema.name] = str(value)
            else:
                body[schema.name] = value
        return self.session.request(
            action.method,
            self.config.base_url.rstrip("/") + path,
            params=query or None,
            headers=headers or None,
            json=body if body else None,
            timeout=self.config.timeout_ms / 1000,
        )

    def execute(self, test: TestCase) -> ExecutionResult:
        n_classes = len(STATUS_CLASSES)
        dist = [1.0] * len(self._targets)
        statuses: list[int] = []
        faults: set[FaultSignature] = set()
        last_token: dict[int, Optional[str]] = {}
        for stmt in test.statements:
            action = self.catalog[stmt.action]
            inputs = {}
            for gene in stmt.inputs:
                v = gene.value
                inputs[gene.name] = (last_token.get(v.action) or "") if isinstance(v, TokenRef) else v
            try:
                response = self._request(action, inputs)
            except requests.RequestException as exc:
                log.debug("%s failed: %s", action.key, exc)
                statuses.append(NETWORK_FAILURE)
                last_token[stmt.action] = None
                continue
            status = response.status_code
            statuses.append(status)
            last_token[stmt.action] = _extract_token(response)
            base = stmt.action * n_classes
            for k, cls in enumerate(STATUS_CLASSES):
                hit = 0.0 if status // 100 == cls else CALLED_DISTANCE
                if hit < dist[base + k]:
                    dist[base + k] = hit
            if 500 <= status <= 599:
                faults.add(FaultSignature(action.method, action.path, None, status))
        return make_result(dist, faults, statuses)
