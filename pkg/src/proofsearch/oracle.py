"""Deterministic symbolic world: an exact, invertible stand-in for the learned models.

Atoms come in two shapes, class membership and property possession:

    is_a(A, B)  rendered as  "a A is a kind of B"
    has(A, P)   rendered as  "a A has P"

and two inference rules close them forward:

    R1:  is_a(A, B), is_a(B, C)  =>  is_a(A, C)
    R2:  is_a(A, B), has(B, P)   =>  has(A, P)

Deduction applies the rules, abduction inverts them exactly, and entailment
is membership in the finite forward closure. The templates share function
words ("a", "is", "kind", "of", "has") so partial unigram overlap between
related atoms is nonzero and the harmonic-mean metric gets exercised.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import scoring
from .backends import Capability, StepBackend
from .errors import ConfigError
from .text import normalize
from .trees import Direction, EntailmentTree, Role, StepRecord, Treelet, make_statement

log = logging.getLogger(__name__)

Atom = tuple[str, str, str]

_IS_A = re.compile(r"^a ([a-z0-9][a-z0-9-]*) is a kind of ([a-z0-9][a-z0-9-]*)$")
_HAS = re.compile(r"^a ([a-z0-9][a-z0-9-]*) has ([a-z0-9][a-z0-9-]*)$")


def render_atom(atom: Atom) -> str:
    kind, a, b = atom
    if kind == "is_a":
        return f"a {a} is a kind of {b}"
    if kind == "has":
        return f"a {a} has {b}"
    raise ValueError(f"unknown atom kind {kind!r}")


def parse_atom(text: str) -> Atom | None:
    norm = normalize(text)
    m = _IS_A.match(norm)
    if m:
        return ("is_a", m.group(1), m.group(2))
    m = _HAS.match(norm)
    if m:
        return ("has", m.group(1), m.group(2))
    return None


def _rule_conclusions(p: Atom, q: Atom) -> list[Atom]:
    out: list[Atom] = []
    if p[0] == "is_a" and q[0] == "is_a" and p[2] == q[1]:
        out.append(("is_a", p[1], q[2]))
    if p[0] == "is_a" and q[0] == "has" and p[2] == q[1]:
        out.append(("has", p[1], q[2]))
    return out


def deduce_atoms(a: Atom, b: Atom) -> list[Atom]:
    """All conclusions of R1/R2 over the pair, tried in both argument orders.

    Reflexive is_a conclusions and copies of an input carry no information
    and are dropped.
    """
    seen: set[Atom] = set()
    out: list[Atom] = []
    for p, q in ((a, b), (b, a)):
        for c in _rule_conclusions(p, q):
            if c[0] == "is_a" and c[1] == c[2]:
                continue
            if c in (a, b) or c in seen:
                continue
            seen.add(c)
            out.append(c)
    return sorted(out)


def abduce_atoms(x: Atom, c: Atom) -> list[Atom]:
    """Every atom h with c among the conclusions of (x, h)."""
    candidates: list[Atom] = []
    if c[0] == "is_a":
        if x[0] == "is_a" and x[1] == c[1]:
            candidates.append(("is_a", x[2], c[2]))
        if x[0] == "is_a" and x[2] == c[2]:
            candidates.append(("is_a", c[1], x[1]))
    else:
        if x[0] == "is_a" and x[1] == c[1]:
            candidates.append(("has", x[2], c[2]))
        if x[0] == "has" and x[2] == c[2]:
            candidates.append(("is_a", c[1], x[1]))
    out: set[Atom] = set()
    for h in candidates:
        if h[0] == "is_a" and h[1] == h[2]:
            continue
        if h == x or h == c:
            continue
        if c in deduce_atoms(x, h):
            out.add(h)
    return sorted(out)


def closure(facts: Iterable[Atom]) -> frozenset[Atom]:
    """Saturate a fact set under R1/R2. Order-independent and finite."""
    known: set[Atom] = set(facts)
    frontier = list(known)
    while frontier:
        new: set[Atom] = set()
        for f in frontier:
            for g in known:
                for c in _rule_conclusions(f, g) + _rule_conclusions(g, f):
                    if c[0] == "is_a" and c[1] == c[2]:
                        continue
                    if c not in known and c not in new:
                        new.add(c)
        known |= new
        frontier = list(new)
    return frozenset(known)


@dataclass(frozen=True)
class OracleWorld:
    """A finite fact base plus the rendering templates above."""

    facts: frozenset[Atom] = frozenset()

    @classmethod
    def from_texts(cls, texts: Iterable[str]) -> "OracleWorld":
        atoms = []
        for t in texts:
            atom = parse_atom(t)
            if atom is None:
                raise ConfigError(f"world fact is not a well-formed atom: {t!r}")
            atoms.append(atom)
        return cls(facts=frozenset(atoms))

    def fact_texts(self) -> list[str]:
        return [render_atom(a) for a in sorted(self.facts)]

    def entities(self) -> frozenset[str]:
        return frozenset(a[1] for a in self.facts)

    def classes(self) -> frozenset[str]:
        return frozenset(a[2] for a in self.facts if a[0] == "is_a")

    def properties(self) -> frozenset[str]:
        return frozenset(a[2] for a in self.facts if a[0] == "has")

    def fingerprint(self) -> str:
        blob = json.dumps(sorted(self.facts)).encode("utf-8")
        return hashlib.sha1(blob).hexdigest()[:12]


def oracle_deduce(s1: str, s2: str, n: int) -> list[str]:
    a, b = parse_atom(s1), parse_atom(s2)
    if a is None or b is None:
        log.debug("oracle_deduce: unparseable input (%r, %r)", s1, s2)
        return []
    return [render_atom(c) for c in deduce_atoms(a, b)][:n]


def oracle_abduce(x: str, c: str, n: int) -> list[str]:
    xa, ca = parse_atom(x), parse_atom(c)
    if xa is None or ca is None:
        log.debug("oracle_abduce: unparseable input (%r, %r)", x, c)
        return []
    return [render_atom(h) for h in abduce_atoms(xa, ca)][:n]


class OracleBackend(StepBackend):
    """StepBackend over an OracleWorld.

    Generation is exhaustive enumeration truncated to n, so "sampling" is
    deterministic; greedy decode returns the first atom in canonical render
    order. Entailment is closure membership against the world's base facts.
    Heuristic scores are unigram-overlap similarities, which keeps fringe
    ordering deterministic and goal-directed.
    """

    def __init__(self, world: OracleWorld | None = None):
        self.world = world or OracleWorld()

    @property
    def capabilities(self) -> frozenset[Capability]:
        return frozenset(Capability)

    def identity(self) -> str:
        return f"oracle:{self.world.fingerprint()}"

    def deduce(self, x1: str, x2: str, n: int = 1, greedy: bool = False) -> list[str]:
        return oracle_deduce(x1, x2, 1 if greedy else n)

    def abduce(self, premise: str, conclusion: str, n: int = 1, greedy: bool = False) -> list[str]:
        return oracle_abduce(premise, conclusion, 1 if greedy else n)

    def entail(self, premise: str, hypothesis: str) -> float:
        if normalize(premise) == normalize(hypothesis):
            return 1.0
        p, h = parse_atom(premise), parse_atom(hypothesis)
        if p is None or h is None:
            return 0.0
        return 1.0 if h in closure({p} | self.world.facts) else 0.0

    def score_pairs(
        self,
        kind: str,
        pairs: Sequence[tuple[str, str]],
        goal: str | None = None,
    ) -> list[float]:
        if kind == "deductive":
            if goal is None:
                return [0.0 for _ in pairs]
            return [scoring.rouge1(f"{a} {b}", goal) for a, b in pairs]
        # Abductive pairs arrive as (conclusion, premise); statements that
        # already share vocabulary are the most likely to invert usefully.
        return [scoring.rouge1(x, c) for c, x in pairs]


# ---------------------------------------------------------------------------
# Suite generation: small worlds with a known held-out premise, used by the
# evaluation harness, the demo CLI, and the acceptance tests.
# ---------------------------------------------------------------------------

_NAME_SYLLABLES = ["bla", "cro", "dru", "fen", "gri", "lom", "mur", "nis", "pra", "quo", "ril", "sta", "tev", "vun", "wex", "zor"]


@dataclass(frozen=True)
class OracleCase:
    """One evaluation instance: a treelet plus the world that scores it."""

    treelet: Treelet
    world: OracleWorld


def _symbol(rng: random.Random, used: set[str]) -> str:
    while True:
        name = rng.choice(_NAME_SYLLABLES) + rng.choice(_NAME_SYLLABLES) + str(rng.randrange(100))
        if name not in used:
            used.add(name)
            return name


def _depth1_atoms(rng: random.Random, used: set[str]) -> tuple[list[Atom], list[Atom], Atom]:
    a, b = _symbol(rng, used), _symbol(rng, used)
    if rng.random() < 0.5:
        c = _symbol(rng, used)
        prem = [("is_a", a, b), ("is_a", b, c)]
        goal = ("is_a", a, c)
    else:
        p = _symbol(rng, used)
        prem = [("is_a", a, b), ("has", b, p)]
        goal = ("has", a, p)
    return prem, [], goal


def _depth2_atoms(rng: random.Random, used: set[str]) -> tuple[list[Atom], list[Atom], Atom]:
    shape = rng.choice(["chain-then-has", "chain-chain", "has-then-lift"])
    a, b, c = _symbol(rng, used), _symbol(rng, used), _symbol(rng, used)
    if shape == "chain-then-has":
        p = _symbol(rng, used)
        prem = [("is_a", a, b), ("is_a", b, c), ("has", c, p)]
        inter = [("is_a", a, c)]
        goal = ("has", a, p)
    elif shape == "chain-chain":
        d = _symbol(rng, used)
        prem = [("is_a", a, b), ("is_a", b, c), ("is_a", c, d)]
        inter = [("is_a", a, c)]
        goal = ("is_a", a, d)
    else:
        p = _symbol(rng, used)
        prem = [("is_a", a, b), ("is_a", b, c), ("has", c, p)]
        inter = [("has", b, p)]
        goal = ("has", a, p)
    return prem, inter, goal


def _tree_from_atoms(tree_id: str, premises: list[Atom], inters: list[Atom], goal: Atom) -> EntailmentTree:
    prem_stmts = [make_statement(render_atom(a), Role.PREMISE) for a in premises]
    inter_stmts = [make_statement(render_atom(a), Role.INTERMEDIATE) for a in inters]
    goal_stmt = make_statement(render_atom(goal), Role.GOAL)
    if not inters:
        steps = [StepRecord(Direction.DEDUCTIVE, (prem_stmts[0].id, prem_stmts[1].id), goal_stmt.id)]
    else:
        i1 = inter_stmts[0]
        steps = [
            StepRecord(Direction.DEDUCTIVE, (prem_stmts[0].id, prem_stmts[1].id), i1.id),
            StepRecord(Direction.DEDUCTIVE, (i1.id, prem_stmts[2].id), goal_stmt.id),
        ]
    return EntailmentTree(
        id=tree_id,
        premises=tuple(prem_stmts),
        steps=tuple(steps),
        goal=goal_stmt,
        intermediates=tuple(inter_stmts),
    )


def generate_suite(n: int, depth: int, seed: int) -> list[OracleCase]:
    """Generate n oracle treelets of the given depth (1 or 2).

    Each case gets fresh symbols, a world whose base facts are exactly the
    visible premises, and a held-out premise that is checked to not be
    forward-derivable from what remains visible.
    """
    if depth not in (1, 2):
        raise ConfigError("oracle suites support depths 1 and 2")
    rng = random.Random(seed)
    cases: list[OracleCase] = []
    while len(cases) < n:
        used: set[str] = set()
        prem, inter, goal = _depth1_atoms(rng, used) if depth == 1 else _depth2_atoms(rng, used)
        tree = _tree_from_atoms(f"oracle-d{depth}-{seed}-{len(cases)}", prem, inter, goal)
        ablated = rng.randrange(len(tree.premises))
        missing = tree.premises[ablated]
        visible = tuple(p for i, p in enumerate(tree.premises) if i != ablated)
        visible_atoms = {parse_atom(p.text) for p in visible}
        missing_atom = parse_atom(missing.text)
        # The recovery setting requires an actually unstated assumption.
        if missing_atom in closure(visible_atoms):
            continue
        treelet = Treelet(
            id=f"{tree.id}/abl{ablated}",
            base=tree,
            ablated_index=ablated,
            missing=missing,
            visible_premises=visible,
            depth=tree.depth,
        )
        world = OracleWorld(facts=frozenset(visible_atoms))
        cases.append(OracleCase(treelet=treelet, world=world))
    return cases
