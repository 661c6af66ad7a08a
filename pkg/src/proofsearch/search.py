"""Two-fringe best-first search interleaving deductive and abductive steps.

Each iteration pops the highest-priority entry from each active fringe,
samples generations for both pops, then processes the deductive batch before
the abductive batch. Surviving deductive conclusions re-enter both fringes;
surviving abductive hypotheses are yielded immediately and re-enter the
abductive fringe paired with everything the forward side knows. Priorities
are computed once at insertion; ties break by insertion order, which makes a
run with deterministic backends fully replayable.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import scoring, validators
from .backends import Capability, StepBackend
from .errors import BackendError, ConfigError
from .trees import Direction, Role, Statement, StepRecord, Validation, ancestry, make_statement
from .validators import ValidatorConfig

log = logging.getLogger(__name__)


class Mode(str, enum.Enum):
    DG = "dg"
    AG = "ag"
    ADG = "adg"
    ADGV = "adgv"

    @property
    def deductive(self) -> bool:
        return self in (Mode.DG, Mode.ADG, Mode.ADGV)

    @property
    def abductive(self) -> bool:
        return self in (Mode.AG, Mode.ADG, Mode.ADGV)

    @property
    def round_trip(self) -> bool:
        return self is Mode.ADGV


@dataclass(frozen=True)
class SearchConfig:
    mode: Mode = Mode.ADGV
    k_abductive: int = 40
    k_deductive: int = 10
    forward_budget: int | None = 25
    backward_budget: int | None = 25
    validator_config: ValidatorConfig = field(default_factory=ValidatorConfig)
    tie_break: str = "insertion-order"
    consume_budget_on_empty: bool = True

    def __post_init__(self):
        if self.k_abductive < 1 or self.k_deductive < 1:
            raise ConfigError("sample counts must be >= 1")
        for budget in (self.forward_budget, self.backward_budget):
            if budget is not None and budget < 0:
                raise ConfigError("budgets must be >= 0")
        if self.tie_break != "insertion-order":
            raise ConfigError(f"unsupported tie break {self.tie_break!r}")


@dataclass(frozen=True)
class FringeEntry:
    #: (conclusion-slot, premise-slot) for abductive entries; sorted ids for
    #: deductive entries, which are unordered.
    pair: tuple[str, str]
    priority: float
    inserted_at: int


class Fringe:
    def __init__(self):
        self._heap: list[tuple[float, int, FringeEntry]] = []

    def push(self, entry: FringeEntry) -> None:
        heapq.heappush(self._heap, (-entry.priority, entry.inserted_at, entry))

    def pop(self) -> FringeEntry | None:
        if not self._heap:
            return None
        return heapq.heappop(self._heap)[2]

    def __len__(self) -> int:
        return len(self._heap)

    def entries(self) -> list[FringeEntry]:
        return [e for _, _, e in sorted(self._heap)]


@dataclass
class IterationRecord:
    """One fringe pop: what was sampled, what survived, and why."""

    iter: int
    direction: str
    pair: tuple[str, str]
    pair_texts: tuple[str, str]
    generations: list[str]
    kept: list[str]
    scores: list[float | None]
    seen_d_size: int
    seen_a_size: int
    note: str | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "iter": self.iter,
                "direction": self.direction,
                "pair": list(self.pair),
                "pair_texts": list(self.pair_texts),
                "generations": self.generations,
                "kept": self.kept,
                "scores": self.scores,
                "seen_d_size": self.seen_d_size,
                "seen_a_size": self.seen_a_size,
                "note": self.note,
            },
            sort_keys=True,
            ensure_ascii=False,
        )


@dataclass
class SearchState:
    fringe_d: Fringe
    fringe_a: Fringe
    seen_d: set[str]
    seen_a: set[str]
    statements: dict[str, Statement]
    goal_id: str
    steps_taken_d: int = 0
    steps_taken_a: int = 0
    events: list[StepRecord] = field(default_factory=list)
    yielded: list[str] = field(default_factory=list)
    iterations: list[IterationRecord] = field(default_factory=list)
    seen_norms: set[str] = field(default_factory=set)
    _counter: "itertools.count" = field(default_factory=itertools.count)

    def text(self, sid: str) -> str:
        return self.statements[sid].text

    def ancestry(self, sid: str, eta: int) -> frozenset[str]:
        return ancestry(sid, eta, self.events, known=set(self.statements))

    def event_log_lines(self) -> list[str]:
        return [rec.to_json() for rec in self.iterations]


@dataclass
class SearchResult:
    state: SearchState
    hypotheses: list[Statement]


def eligible_pair(a: Statement, b: Statement, direction: Direction) -> bool:
    """Allowed input compositions per step type.

    Deductive steps take premises and deductive intermediates only; feeding a
    hypothesis forward could manufacture vacuous proofs. Abductive steps need
    a goal or hypothesis in the conclusion slot and a premise or intermediate
    in the premise slot.
    """
    forward_roles = (Role.PREMISE, Role.INTERMEDIATE)
    if direction is Direction.DEDUCTIVE:
        return a.role in forward_roles and b.role in forward_roles
    return a.role in (Role.GOAL, Role.HYPOTHESIS) and b.role in forward_roles


def _required_capabilities(config: SearchConfig) -> set[Capability]:
    need: set[Capability] = set()
    if config.mode.deductive:
        need |= {Capability.DEDUCE, Capability.HEURISTIC_D}
    if config.mode.abductive:
        need |= {Capability.ABDUCE, Capability.HEURISTIC_A}
    if config.mode.round_trip:
        need |= {Capability.DEDUCE, Capability.ABDUCE, Capability.ENTAIL}
    return need


def init_fringes(
    premises: Sequence[Statement],
    goal: Statement,
    config: SearchConfig,
    backend: StepBackend,
) -> SearchState:
    """Seed both fringes: all premise pairs forward, (goal, premise) backward."""
    if not premises:
        raise ConfigError("search needs at least one premise")
    statements: dict[str, Statement] = {}
    for p in premises:
        if p.id in statements:
            raise ConfigError(f"duplicate premise text: {p.text!r}")
        statements[p.id] = p
    if goal.id in statements:
        raise ConfigError("goal text equals a premise text")
    statements[goal.id] = goal

    state = SearchState(
        fringe_d=Fringe(),
        fringe_a=Fringe(),
        seen_d={p.id for p in premises},
        seen_a={goal.id},
        statements=statements,
        goal_id=goal.id,
    )
    state.seen_norms = {s.norm for s in statements.values()}

    if config.mode.deductive:
        pairs = [
            tuple(sorted((a.id, b.id)))
            for a, b in itertools.combinations(premises, 2)
        ]
        _insert_pairs(state, pairs, Direction.DEDUCTIVE, config, backend)
    if config.mode.abductive:
        pairs = [(goal.id, p.id) for p in premises]
        _insert_pairs(state, pairs, Direction.ABDUCTIVE, config, backend)
    return state


def _insert_pairs(
    state: SearchState,
    pairs: Sequence[tuple[str, str]],
    direction: Direction,
    config: SearchConfig,
    backend: StepBackend,
) -> None:
    eta = config.validator_config.eta
    known = set(state.statements)
    admitted: list[tuple[str, str]] = []
    for a, b in pairs:
        sa, sb = state.statements[a], state.statements[b]
        if not eligible_pair(sa, sb, direction):
            continue
        if not validators.consanguinity_ok(a, b, eta, state.events, known=known):
            continue
        admitted.append((a, b))
    if not admitted:
        return
    kind = "deductive" if direction is Direction.DEDUCTIVE else "abductive"
    goal_text = state.text(state.goal_id)
    texts = [(state.text(a), state.text(b)) for a, b in admitted]
    scores = backend.score_pairs(kind, texts, goal=goal_text if kind == "deductive" else None)
    fringe = state.fringe_d if direction is Direction.DEDUCTIVE else state.fringe_a
    for pair, score in zip(admitted, scores):
        fringe.push(FringeEntry(pair=pair, priority=float(score), inserted_at=next(state._counter)))


def pop_best(fringe: Fringe) -> FringeEntry | None:
    """Remove and return the max-priority entry; ties go to the earliest insert."""
    return fringe.pop()


def _make_metric(config: ValidatorConfig, backend: StepBackend) -> validators.Metric:
    if config.metric == "entailment":
        return scoring.entailment_metric(backend.entail)
    return scoring.agreement_metric(backend.entail)


def adgv_search(
    premises: Sequence[Statement],
    goal: Statement,
    config: SearchConfig,
    backend: StepBackend,
    on_yield: Callable[[Statement], None] | None = None,
) -> SearchResult:
    """Run the bidirectional search until both fringes or budgets are spent.

    Validated hypotheses are yielded in discovery order (also streamed through
    `on_yield`). A pop whose generations all get filtered, or whose backend
    call fails, still consumes budget unless configured otherwise.
    """
    missing = _required_capabilities(config) - set(backend.capabilities)
    if missing:
        raise ConfigError(f"backend lacks capabilities required by mode {config.mode.value}: {sorted(c.value for c in missing)}")

    state = init_fringes(premises, goal, config, backend)
    metric = _make_metric(config.validator_config, backend)
    iter_no = 0

    def budget_left(taken: int, budget: int | None) -> bool:
        return budget is None or taken < budget

    while True:
        can_d = config.mode.deductive and len(state.fringe_d) > 0 and budget_left(state.steps_taken_d, config.forward_budget)
        can_a = config.mode.abductive and len(state.fringe_a) > 0 and budget_left(state.steps_taken_a, config.backward_budget)
        if not can_d and not can_a:
            break
        iter_no += 1
        # Both pops happen before either batch is processed, mirroring the
        # interleaved two-fringe loop.
        entry_d = pop_best(state.fringe_d) if can_d else None
        entry_a = pop_best(state.fringe_a) if can_a else None
        if entry_d is not None:
            state.steps_taken_d += 1
            _process_deductive(state, entry_d, config, backend, metric, iter_no)
        if entry_a is not None:
            state.steps_taken_a += 1
            _process_abductive(state, entry_a, config, backend, metric, iter_no, on_yield)

    return SearchResult(state=state, hypotheses=[state.statements[h] for h in state.yielded])


def _register(state: SearchState, text: str, role: Role) -> Statement:
    stmt = make_statement(text, role)
    state.statements[stmt.id] = stmt
    state.seen_norms.add(stmt.norm)
    return stmt


def _record(state: SearchState, iter_no: int, direction: Direction, entry: FringeEntry,
            generations: list[str], kept: list[str], scores: list[float | None], note: str | None = None) -> None:
    state.iterations.append(
        IterationRecord(
            iter=iter_no,
            direction=direction.value,
            pair=entry.pair,
            pair_texts=(state.text(entry.pair[0]), state.text(entry.pair[1])),
            generations=generations,
            kept=kept,
            scores=scores,
            seen_d_size=len(state.seen_d),
            seen_a_size=len(state.seen_a),
            note=note,
        )
    )


def _maybe_refund(state: SearchState, config: SearchConfig, direction: Direction, kept: list[str]) -> None:
    if kept or config.consume_budget_on_empty:
        return
    if direction is Direction.DEDUCTIVE:
        state.steps_taken_d -= 1
    else:
        state.steps_taken_a -= 1


def _process_deductive(
    state: SearchState,
    entry: FringeEntry,
    config: SearchConfig,
    backend: StepBackend,
    metric: validators.Metric,
    iter_no: int,
) -> None:
    id1, id2 = entry.pair
    t1, t2 = state.text(id1), state.text(id2)
    try:
        generations = backend.deduce(t1, t2, n=config.k_deductive, greedy=False)
    except BackendError as exc:
        log.warning("deductive pop pruned after backend error: %s", exc)
        _record(state, iter_no, Direction.DEDUCTIVE, entry, [], [], [], note=f"pruned: {exc}")
        return

    kept: list[str] = []
    scores: list[float | None] = []
    new_pairs_d: list[tuple[str, str]] = []
    new_pairs_a: list[tuple[str, str]] = []
    vc = config.validator_config
    for raw in generations:
        if not validators.dedup(raw, [t1, t2], state.seen_norms):
            continue
        validation = None
        if config.mode.round_trip and validators.AGREEMENT_ABDUCTIVE in vc.enabled:
            check = validators.validate_deductive(t1, t2, raw, backend, metric, vc.t_a)
            if not check.passed:
                continue
            validation = Validation(agreement_score=check.score, passed=True)
        stmt = _register(state, raw, Role.INTERMEDIATE)
        state.seen_d.add(stmt.id)
        state.events.append(StepRecord(Direction.DEDUCTIVE, (id1, id2), stmt.id, validation=validation))
        kept.append(stmt.id)
        scores.append(validation.agreement_score if validation else None)
        # sorted so insertion order (the tie-breaker) is independent of set
        # iteration order, keeping runs replayable across processes
        new_pairs_d.extend(tuple(sorted((stmt.id, other))) for other in sorted(state.seen_d) if other != stmt.id)
        if config.mode.abductive:
            new_pairs_a.extend((concl, stmt.id) for concl in sorted(state.seen_a))

    if new_pairs_d:
        _insert_pairs(state, list(dict.fromkeys(new_pairs_d)), Direction.DEDUCTIVE, config, backend)
    if new_pairs_a:
        _insert_pairs(state, list(dict.fromkeys(new_pairs_a)), Direction.ABDUCTIVE, config, backend)
    _record(state, iter_no, Direction.DEDUCTIVE, entry, list(generations), kept, scores)
    _maybe_refund(state, config, Direction.DEDUCTIVE, kept)


def _process_abductive(
    state: SearchState,
    entry: FringeEntry,
    config: SearchConfig,
    backend: StepBackend,
    metric: validators.Metric,
    iter_no: int,
    on_yield: Callable[[Statement], None] | None,
) -> None:
    conclusion_id, premise_id = entry.pair
    c_text, x_text = state.text(conclusion_id), state.text(premise_id)
    try:
        generations = backend.abduce(x_text, c_text, n=config.k_abductive, greedy=False)
    except BackendError as exc:
        log.warning("abductive pop pruned after backend error: %s", exc)
        _record(state, iter_no, Direction.ABDUCTIVE, entry, [], [], [], note=f"pruned: {exc}")
        return

    kept: list[str] = []
    scores: list[float | None] = []
    new_pairs_a: list[tuple[str, str]] = []
    vc = config.validator_config
    for raw in generations:
        if not validators.dedup(raw, [c_text, x_text], state.seen_norms):
            continue
        validation = None
        if config.mode.round_trip and validators.AGREEMENT_DEDUCTIVE in vc.enabled:
            check = validators.validate_abductive(c_text, x_text, raw, backend, metric, vc.t_d)
            if not check.passed:
                continue
            validation = Validation(agreement_score=check.score, passed=True)
        stmt = _register(state, raw, Role.HYPOTHESIS)
        state.seen_a.add(stmt.id)
        state.events.append(StepRecord(Direction.ABDUCTIVE, (conclusion_id, premise_id), stmt.id, validation=validation))
        state.yielded.append(stmt.id)
        if on_yield is not None:
            on_yield(stmt)
        kept.append(stmt.id)
        scores.append(validation.agreement_score if validation else None)
        new_pairs_a.extend((stmt.id, forward) for forward in sorted(state.seen_d))

    if new_pairs_a:
        _insert_pairs(state, list(dict.fromkeys(new_pairs_a)), Direction.ABDUCTIVE, config, backend)
    _record(state, iter_no, Direction.ABDUCTIVE, entry, list(generations), kept, scores)
    _maybe_refund(state, config, Direction.ABDUCTIVE, kept)
