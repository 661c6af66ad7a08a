"""Deterministic stub models so protocol conformance is testable without GPUs."""

from __future__ import annotations

import re
from collections import Counter

_WS = re.compile(r"\s+")


def _norm(text: str) -> str:
    return _WS.sub(" ", text.strip()).lower().rstrip(".!?;:,")


def _tokens(text: str) -> list[str]:
    norm = _norm(text)
    return norm.split(" ") if norm else []


class EchoDeductive:
    """Echoes deterministic combinations of its inputs."""

    identifier = "stub-echo-deductive"

    def generate(self, x1: str, x2: str, n: int, greedy: bool) -> list[str]:
        variants = [
            f"{x1} and {x2}",
            f"{x2} and {x1}",
            f"given {x1}, it follows that {x2}",
            f"{x1}; consequently {x2}",
        ]
        return variants[:1] if greedy else variants[:n]


class EchoAbductive:
    identifier = "stub-echo-abductive"

    def generate(self, premise: str, conclusion: str, n: int, greedy: bool) -> list[str]:
        variants = [
            f"{conclusion} because {premise}",
            f"{premise} is one reason that {conclusion}",
            f"whenever {premise}, {conclusion}",
            f"{conclusion} assuming {premise}",
        ]
        return variants[:1] if greedy else variants[:n]


class ConstantEntailment:
    """Reflexively certain, otherwise a constant probability."""

    identifier = "stub-constant-entailment"

    def __init__(self, constant: float = 0.5):
        self.constant = constant

    def probability(self, premise: str, hypothesis: str) -> float:
        return 1.0 if _norm(premise) == _norm(hypothesis) else self.constant


class OverlapHeuristic:
    """Lexical-overlap scores; higher for pairs that share vocabulary."""

    identifier = "stub-overlap-heuristic"

    def scores(self, pairs: list[tuple[str, str]], goal: str | None = None) -> list[float]:
        out = []
        for a, b in pairs:
            reference = goal if goal is not None else b
            ta, tb = Counter(_tokens(f"{a} {b}" if goal is not None else a)), Counter(_tokens(reference))
            overlap = sum((ta & tb).values())
            total = sum(ta.values()) + sum(tb.values())
            out.append(2 * overlap / total if total else 0.0)
        return out
