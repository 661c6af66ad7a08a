"""Generation filters: round-trip agreement, de-duplication, consanguinity.

Round-trip checks use greedy (top-1) decoding so validation is reproducible.
De-duplication and consanguinity are hygiene filters active in every search
mode; the agreement validators are what the full validation mode toggles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import BackendError
from .text import normalize
from .trees import StepRecord, ancestry

AGREEMENT_DEDUCTIVE = "deductive-agreement"
AGREEMENT_ABDUCTIVE = "abductive-agreement"

#: Only numeric threshold stated for the task is the recovery threshold 0.7;
#: the agreement thresholds default to the same value and are config-exposed.
DEFAULT_THRESHOLD = 0.7


@dataclass(frozen=True)
class ValidatorConfig:
    t_d: float = DEFAULT_THRESHOLD
    t_a: float = DEFAULT_THRESHOLD
    eta: int = 1
    enabled: frozenset[str] = frozenset({AGREEMENT_DEDUCTIVE, AGREEMENT_ABDUCTIVE})
    metric: str = "harmonic"  # or "entailment"

    def __post_init__(self):
        if not 0.0 <= self.t_d <= 1.0 or not 0.0 <= self.t_a <= 1.0:
            raise ValueError("agreement thresholds must lie in [0, 1]")
        if self.eta < 1:
            raise ValueError("eta must be >= 1")


@dataclass(frozen=True)
class CheckResult:
    passed: bool
    score: float
    error: str | None = None


Metric = Callable[[str, str], float]


def validate_abductive(
    conclusion: str,
    premise: str,
    hypothesis: str,
    backend,
    metric: Metric,
    t_d: float = DEFAULT_THRESHOLD,
) -> CheckResult:
    """Deductive agreement: the hypothesis plus its premise must regenerate
    the conclusion when pushed through greedy deduction."""
    try:
        regenerated = backend.deduce(premise, hypothesis, n=1, greedy=True)
    except BackendError as exc:
        return CheckResult(passed=False, score=0.0, error=str(exc))
    if not regenerated:
        return CheckResult(passed=False, score=0.0)
    score = metric(conclusion, regenerated[0])
    return CheckResult(passed=score >= t_d, score=score)


def validate_deductive(
    x1: str,
    x2: str,
    conclusion: str,
    backend,
    metric: Metric,
    t_a: float = DEFAULT_THRESHOLD,
) -> CheckResult:
    """Abductive agreement: each input must be recoverable from the other
    input plus the conclusion. Both recoveries must clear the threshold."""
    try:
        x2_back = backend.abduce(x1, conclusion, n=1, greedy=True)
        x1_back = backend.abduce(x2, conclusion, n=1, greedy=True)
    except BackendError as exc:
        return CheckResult(passed=False, score=0.0, error=str(exc))
    if not x1_back or not x2_back:
        return CheckResult(passed=False, score=0.0)
    s1 = metric(x1, x1_back[0])
    s2 = metric(x2, x2_back[0])
    return CheckResult(passed=s1 >= t_a and s2 >= t_a, score=min(s1, s2))


def dedup(candidate: str, step_inputs: Sequence[str], seen: set[str]) -> bool:
    """Keep a generation only if it is new and not a copy of a step input.

    `seen` holds normalized texts.
    """
    norm = normalize(candidate)
    if not norm or norm in seen:
        return False
    return all(norm != normalize(i) for i in step_inputs)


def consanguinity_ok(
    a: str,
    b: str,
    eta: int,
    steps: Iterable[StepRecord],
    known: set[str] | None = None,
) -> bool:
    """Allow a pair only when their ancestries up to depth eta are disjoint.

    With eta = 1 this exactly prevents pairing a statement with itself.
    """
    return not (ancestry(a, eta, steps, known) & ancestry(b, eta, steps, known))
