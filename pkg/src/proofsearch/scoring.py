"""Unigram-overlap scoring, the harmonic-mean recovery metric, proof re-ranking."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import BackendError, ProofSearchError
from .text import tokens
from .trees import ProofTree

EntailFn = Callable[[str, str], float]


def rouge1(candidate: str, reference: str) -> float:
    """Unigram F-measure over lowercase whitespace tokens, clipped overlap.

    No stemming, no stopword removal. Returns 0 when either side is empty.
    """
    cand = tokens(candidate)
    ref = tokens(reference)
    if not cand or not ref:
        return 0.0
    overlap = sum((Counter(cand) & Counter(ref)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(cand)
    recall = overlap / len(ref)
    return 2 * precision * recall / (precision + recall)


def harmonic_mean(s_r: float, s_e: float) -> float:
    if s_r + s_e == 0:
        return 0.0
    return 2 * s_r * s_e / (s_r + s_e)


class EntailDirection(str, enum.Enum):
    #: generated statement entails the reference (the default; agreed best
    #: with annotation in the source experiments)
    RIGHTWARD = "rightward"
    LEFTWARD = "leftward"
    BIDIRECTIONAL = "bidirectional"


DEFAULT_RECOVERY_THRESHOLD = 0.7


@dataclass(frozen=True)
class RecoveryScore:
    s_r: float
    s_e: float
    s: float
    recovered: bool


def recovery_score(
    generated: str,
    reference: str,
    entail: EntailFn,
    t_m: float = DEFAULT_RECOVERY_THRESHOLD,
    direction: EntailDirection = EntailDirection.RIGHTWARD,
) -> RecoveryScore:
    """Harmonic mean of unigram overlap and entailment probability.

    Entailment failures propagate as errors; a silent zero would masquerade
    as a legitimate miss.
    """
    s_r = rouge1(generated, reference)
    if direction is EntailDirection.RIGHTWARD:
        s_e = entail(generated, reference)
    elif direction is EntailDirection.LEFTWARD:
        s_e = entail(reference, generated)
    else:
        s_e = min(entail(generated, reference), entail(reference, generated))
    if not (0.0 <= s_e <= 1.0):
        raise BackendError(f"entailment probability out of range: {s_e!r}", payload=s_e)
    s = harmonic_mean(s_r, s_e)
    return RecoveryScore(s_r=s_r, s_e=s_e, s=s, recovered=s >= t_m)


def agreement_metric(entail: EntailFn) -> Callable[[str, str], float]:
    """Round-trip agreement score E(reference, generated) used by validators."""

    def metric(reference: str, generated: str) -> float:
        return recovery_score(generated, reference, entail).s

    return metric


def entailment_metric(entail: EntailFn) -> Callable[[str, str], float]:
    """Config alternative: raw rightward entailment instead of the harmonic mean."""

    def metric(reference: str, generated: str) -> float:
        return entail(generated, reference)

    return metric


def rerank_proofs(proofs: Sequence[ProofTree], backend) -> list[ProofTree]:
    """Score each proof by mean per-step deductive agreement, sort descending.

    Per step (x1, x2 -> c): regenerate c' with greedy deduction, take
    entail(c', c) as that step's score. A backend failure zeroes the step and
    flags the proof; the proof is still ranked. Sort is stable, so ties keep
    input order.
    """
    for proof in proofs:
        if not proof.steps:
            raise ProofSearchError("cannot rerank a proof with no steps")
        scores: list[float] = []
        flags: list[str] = []
        for idx, step in enumerate(proof.steps):
            x1 = proof.statements[step.inputs[0]].text
            x2 = proof.statements[step.inputs[1]].text
            c = proof.statements[step.output].text
            try:
                regenerated = backend.deduce(x1, x2, n=1, greedy=True)
                s_i = backend.entail(regenerated[0], c) if regenerated else 0.0
            except BackendError:
                s_i = 0.0
                flags.append(f"step-{idx}-backend-error")
            scores.append(s_i)
        proof.rerank_score = sum(scores) / len(scores)
        proof.flags = tuple(flags)
    return sorted(proofs, key=lambda p: -(p.rerank_score or 0.0))
