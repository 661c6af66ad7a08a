"""Backend interface to the four learned components, plus the HTTP client.

The search engine may issue the deductive and abductive calls of one
iteration concurrently; implementations must either be thread-safe or
document a single-threaded restriction (the engine serializes by default).
"""

from __future__ import annotations

import enum
import json
import os
from typing import Sequence

import requests

from .errors import BackendError
from .text import normalize

TOKEN_ENV_VAR = "PROOFSEARCH_BRIDGE_TOKEN"


class Capability(str, enum.Enum):
    DEDUCE = "deduce"
    ABDUCE = "abduce"
    ENTAIL = "entail"
    HEURISTIC_D = "heuristic_d"
    HEURISTIC_A = "heuristic_a"


class StepBackend:
    """Uniform interface over step models, the entailment scorer and heuristics.

    Contract: deduce/abduce return at most n texts; entail returns a value in
    [0, 1]; heuristic scores are finite reals, higher meaning explore first.
    Greedy decode must be deterministic within one process run.
    """

    @property
    def capabilities(self) -> frozenset[Capability]:
        raise NotImplementedError

    def identity(self) -> str:
        raise NotImplementedError

    def deduce(self, x1: str, x2: str, n: int = 1, greedy: bool = False) -> list[str]:
        raise NotImplementedError

    def abduce(self, premise: str, conclusion: str, n: int = 1, greedy: bool = False) -> list[str]:
        raise NotImplementedError

    def entail(self, premise: str, hypothesis: str) -> float:
        raise NotImplementedError

    def score_pairs(self, kind: str, pairs: Sequence[tuple[str, str]], goal: str | None = None) -> list[float]:
        raise NotImplementedError


class RemoteBackend(StepBackend):
    """Client for the wire protocol served by a model bridge.

    Endpoints (all bodies JSON/UTF-8, all idempotent for mode "greedy"):
      POST /generate-deductive {inputs:[s,s], n, mode}      -> {generations:[s]}
      POST /generate-abductive {premise, conclusion, n, mode} -> {generations:[s]}
      POST /entail {premise, hypothesis}                    -> {probability}
      POST /heuristic {kind, goal?, pairs:[[s,s]]}          -> {scores:[f]}
      GET  /health                                          -> {capabilities, models}

    An optional per-run memo table keyed by the normalized request caches
    deterministic calls (greedy generation, entailment, heuristics).
    """

    def __init__(self, base_url: str, timeout: float = 60.0, memoize: bool = True, session=None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._session = session or requests.Session()
        token = os.environ.get(TOKEN_ENV_VAR)
        if token:
            self._session.headers["Authorization"] = f"Bearer {token}"
        self._memo: dict[str, object] | None = {} if memoize else None
        self._health: dict | None = None

    def _post(self, path: str, payload: dict) -> dict:
        url = f"{self.base_url}{path}"
        try:
            resp = self._session.post(url, json=payload, timeout=self.timeout)
        except requests.RequestException as exc:
            raise BackendError(f"transport failure calling {url}: {exc}", payload=payload) from exc
        if resp.status_code != 200:
            raise BackendError(f"{url} returned HTTP {resp.status_code}", payload=resp.text)
        try:
            return resp.json()
        except ValueError as exc:
            raise BackendError(f"{url} returned non-JSON body", payload=resp.text) from exc

    def _memo_key(self, op: str, payload: dict) -> str:
        normalized = {
            k: (normalize(v) if isinstance(v, str) else v)
            for k, v in payload.items()
        }
        return op + ":" + json.dumps(normalized, sort_keys=True, ensure_ascii=False)

    def _cached(self, op: str, payload: dict, fetch):
        if self._memo is None:
            return fetch()
        key = self._memo_key(op, payload)
        if key not in self._memo:
            self._memo[key] = fetch()
        return self._memo[key]

    def health(self) -> dict:
        if self._health is None:
            url = f"{self.base_url}/health"
            try:
                resp = self._session.get(url, timeout=self.timeout)
            except requests.RequestException as exc:
                raise BackendError(f"transport failure calling {url}: {exc}") from exc
            if resp.status_code != 200:
                raise BackendError(f"{url} returned HTTP {resp.status_code}", payload=resp.text)
            self._health = resp.json()
        return self._health

    @property
    def capabilities(self) -> frozenset[Capability]:
        try:
            names = self.health().get("capabilities", [])
            return frozenset(Capability(n) for n in names)
        except (BackendError, ValueError):
            # Health is advisory; individual calls surface the real errors.
            return frozenset(Capability)

    def identity(self) -> str:
        try:
            models = self.health().get("models", {})
            return f"remote:{self.base_url} {json.dumps(models, sort_keys=True)}"
        except BackendError:
            return f"remote:{self.base_url}"

    def _generations(self, path: str, payload: dict, n: int) -> list[str]:
        body = self._post(path, payload)
        gens = body.get("generations")
        if not isinstance(gens, list) or not all(isinstance(g, str) for g in gens):
            raise BackendError(f"{path} response missing generations list", payload=body)
        if len(gens) > n:
            raise BackendError(f"{path} returned {len(gens)} generations for n={n}", payload=body)
        return gens

    def deduce(self, x1: str, x2: str, n: int = 1, greedy: bool = False) -> list[str]:
        n = 1 if greedy else n
        payload = {"inputs": [x1, x2], "n": n, "mode": "greedy" if greedy else "sample"}
        fetch = lambda: self._generations("/generate-deductive", payload, n)
        return list(self._cached("deduce", payload, fetch)) if greedy else fetch()

    def abduce(self, premise: str, conclusion: str, n: int = 1, greedy: bool = False) -> list[str]:
        n = 1 if greedy else n
        payload = {"premise": premise, "conclusion": conclusion, "n": n, "mode": "greedy" if greedy else "sample"}
        fetch = lambda: self._generations("/generate-abductive", payload, n)
        return list(self._cached("abduce", payload, fetch)) if greedy else fetch()

    def entail(self, premise: str, hypothesis: str) -> float:
        payload = {"premise": premise, "hypothesis": hypothesis}

        def fetch() -> float:
            body = self._post("/entail", payload)
            prob = body.get("probability")
            if not isinstance(prob, (int, float)) or not 0.0 <= float(prob) <= 1.0:
                raise BackendError("/entail probability missing or out of range", payload=body)
            return float(prob)

        return self._cached("entail", payload, fetch)

    def score_pairs(self, kind: str, pairs: Sequence[tuple[str, str]], goal: str | None = None) -> list[float]:
        if not pairs:
            return []
        payload = {"kind": kind, "goal": goal, "pairs": [list(p) for p in pairs]}

        def fetch() -> list[float]:
            body = self._post("/heuristic", payload)
            scores = body.get("scores")
            if not isinstance(scores, list) or len(scores) != len(pairs):
                raise BackendError("/heuristic scores missing or arity mismatch", payload=body)
            return [float(s) for s in scores]

        return list(self._cached("heuristic", payload, fetch))
