"""Domain model: statements, inference steps, entailment trees, treelets, proofs.

Everything here is a pure value type; operations are pure functions, so the
whole module is safe to share read-only across threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

from .errors import IntegrityError, TreeStructureError, UnknownStatementError
from .text import content_id, normalize


class Role(str, enum.Enum):
    PREMISE = "premise"
    INTERMEDIATE = "intermediate"
    GOAL = "goal"
    HYPOTHESIS = "hypothesis"


class Origin(str, enum.Enum):
    DATASET = "dataset"
    DEDUCTIVE = "deductive-step"
    ABDUCTIVE = "abductive-step"


class Direction(str, enum.Enum):
    DEDUCTIVE = "deductive"
    ABDUCTIVE = "abductive"


# Roles are tied to how a statement came to exist: hypotheses only ever come
# out of abductive steps, intermediates only out of deductive steps.
_ROLE_ORIGIN = {
    Role.PREMISE: Origin.DATASET,
    Role.GOAL: Origin.DATASET,
    Role.INTERMEDIATE: Origin.DEDUCTIVE,
    Role.HYPOTHESIS: Origin.ABDUCTIVE,
}


@dataclass(frozen=True)
class Statement:
    id: str
    text: str
    role: Role
    origin: Origin

    def __post_init__(self):
        if not normalize(self.text):
            raise ValueError("statement text is empty after normalization")
        if _ROLE_ORIGIN[self.role] is not self.origin:
            raise ValueError(f"role {self.role.value} is incompatible with origin {self.origin.value}")

    @property
    def norm(self) -> str:
        return normalize(self.text)


def make_statement(text: str, role: Role) -> Statement:
    return Statement(id=content_id(text), text=text, role=role, origin=_ROLE_ORIGIN[role])


@dataclass(frozen=True)
class Validation:
    agreement_score: float
    passed: bool
    error: str | None = None


@dataclass(frozen=True)
class StepRecord:
    """One inference step.

    Deductive: inputs are two premises/intermediates, output their conclusion.
    Abductive: inputs are (conclusion-slot, premise-slot), output the generated
    hypothesis. Abduction is not commutative, so the stored input order is
    significant for abductive steps; deductive inputs are unordered and
    `key()` canonicalizes them for identity checks.
    """

    direction: Direction
    inputs: tuple[str, str]
    output: str
    validation: Validation | None = None

    def __post_init__(self):
        if len(self.inputs) != 2:
            raise ValueError("steps take exactly two inputs")
        if self.output in self.inputs:
            raise ValueError("step output must differ from both inputs")

    def key(self) -> tuple:
        ins = tuple(sorted(self.inputs)) if self.direction is Direction.DEDUCTIVE else self.inputs
        return (self.direction.value, ins, self.output)


def invert_abductive(step: StepRecord) -> StepRecord:
    """Rewrite an abductive step (c, x -> x') as the deductive step (x, x' -> c)."""
    if step.direction is not Direction.ABDUCTIVE:
        raise ValueError("can only invert abductive steps")
    return StepRecord(
        direction=Direction.DEDUCTIVE,
        inputs=(step.inputs[1], step.output),
        output=step.inputs[0],
        validation=step.validation,
    )


def invert_deductive(step: StepRecord) -> StepRecord:
    """Inverse of `invert_abductive`: (x, x' -> c) back to (c, x -> x')."""
    if step.direction is not Direction.DEDUCTIVE:
        raise ValueError("can only invert deductive steps")
    return StepRecord(
        direction=Direction.ABDUCTIVE,
        inputs=(step.output, step.inputs[0]),
        output=step.inputs[1],
        validation=step.validation,
    )


@dataclass(frozen=True)
class EntailmentTree:
    """A goal plus the deductive steps deriving it from leaf premises."""

    id: str
    premises: tuple[Statement, ...]
    steps: tuple[StepRecord, ...]
    goal: Statement
    intermediates: tuple[Statement, ...] = ()
    synthetic_ids: frozenset[str] = frozenset()

    def __post_init__(self):
        _validate_tree(self)

    def statements(self) -> dict[str, Statement]:
        out = {s.id: s for s in self.premises}
        out.update({s.id: s for s in self.intermediates})
        out[self.goal.id] = self.goal
        return out

    def producing_step(self) -> dict[str, StepRecord]:
        return {s.output: s for s in self.steps}

    @property
    def depth(self) -> int:
        """Longest input chain from any leaf premise to the goal."""
        by_output = self.producing_step()

        def d(sid: str) -> int:
            step = by_output.get(sid)
            if step is None:
                return 0
            return 1 + max(d(i) for i in step.inputs)

        return d(self.goal.id)


def _validate_tree(tree: EntailmentTree) -> None:
    if not tree.premises:
        raise TreeStructureError("tree has no premises", node=tree.id)
    premise_ids = set()
    for p in tree.premises:
        if p.role is not Role.PREMISE:
            raise TreeStructureError("premise list contains a non-premise", node=p.id)
        if p.id in premise_ids:
            raise TreeStructureError("duplicate premise text", node=p.id)
        premise_ids.add(p.id)
    if tree.goal.role is not Role.GOAL:
        raise TreeStructureError("goal statement must carry the goal role", node=tree.goal.id)
    if tree.goal.id in premise_ids:
        # The trivial x_m = goal solution yields a vacuous proof; such trees
        # are rejected outright.
        raise TreeStructureError("degenerate tree: goal equals a premise", node=tree.goal.id)
    if not tree.steps:
        raise TreeStructureError("tree has no steps", node=tree.id)

    outputs: set[str] = set()
    for step in tree.steps:
        if step.direction is not Direction.DEDUCTIVE:
            raise TreeStructureError("tree steps must all be deductive", node=step.output)
        if step.output in outputs:
            raise TreeStructureError("statement is the output of more than one step", node=step.output)
        if step.output in premise_ids:
            raise TreeStructureError("a premise cannot be a step output", node=step.output)
        outputs.add(step.output)
    if tree.goal.id not in outputs:
        raise TreeStructureError("goal is not produced by any step", node=tree.goal.id)

    inter_ids = {s.id for s in tree.intermediates}
    expected_inter = outputs - {tree.goal.id}
    if inter_ids != expected_inter:
        missing = expected_inter - inter_ids or inter_ids - expected_inter
        raise TreeStructureError("intermediate statements do not match step outputs", node=next(iter(missing)))
    for s in tree.intermediates:
        if s.role is not Role.INTERMEDIATE:
            raise TreeStructureError("intermediate carries wrong role", node=s.id)

    # Topological check: every step must fire from premises upward (catches
    # cycles and dangling input ids).
    known = set(premise_ids)
    pending = list(tree.steps)
    while pending:
        progressed = [s for s in pending if all(i in known for i in s.inputs)]
        if not progressed:
            raise TreeStructureError("cyclic or dangling step inputs", node=pending[0].output)
        for s in progressed:
            known.add(s.output)
        pending = [s for s in pending if s.output not in known]

    # Rooted at the goal: every step participates in the goal's derivation.
    reachable: set[str] = set()
    stack = [tree.goal.id]
    by_output = {s.output: s for s in tree.steps}
    while stack:
        sid = stack.pop()
        if sid in reachable:
            continue
        reachable.add(sid)
        step = by_output.get(sid)
        if step is not None:
            stack.extend(step.inputs)
    for step in tree.steps:
        if step.output not in reachable:
            raise TreeStructureError("step is not connected to the goal", node=step.output)


@dataclass(frozen=True)
class Treelet:
    """A depth-bounded slice of a tree with one leaf premise held out."""

    id: str
    base: EntailmentTree
    ablated_index: int
    missing: Statement
    visible_premises: tuple[Statement, ...]
    depth: int
    abductive_only: bool = False

    def __post_init__(self):
        if self.missing.role is not Role.PREMISE:
            raise TreeStructureError("ablated statement must be a leaf premise", node=self.missing.id)
        if self.missing.id in {p.id for p in self.visible_premises}:
            raise TreeStructureError("ablated premise still visible", node=self.missing.id)
        if not self.visible_premises:
            raise TreeStructureError("treelet has no visible premises", node=self.id)
        expected = {p.id for p in self.base.premises} - {self.missing.id}
        if {p.id for p in self.visible_premises} != expected:
            raise TreeStructureError("visible premises must be the base premises minus the ablated one", node=self.id)


def subtree_rooted_at(tree: EntailmentTree, root_id: str) -> EntailmentTree:
    """Extract the sub-derivation rooted at an intermediate (or the goal).

    Leaves of the result are original premises; the root is re-roled as the
    sub-tree's goal.
    """
    stmts = tree.statements()
    if root_id not in stmts:
        raise UnknownStatementError(f"no statement {root_id} in tree {tree.id}")
    by_output = tree.producing_step()
    if root_id not in by_output:
        raise TreeStructureError("sub-tree root must be a step output", node=root_id)

    steps: list[StepRecord] = []
    leaves: list[Statement] = []
    seen: set[str] = set()

    def walk(sid: str) -> None:
        if sid in seen:
            return
        seen.add(sid)
        step = by_output.get(sid)
        if step is None:
            leaves.append(stmts[sid])
            return
        for i in step.inputs:
            walk(i)
        steps.append(step)

    walk(root_id)
    root_stmt = stmts[root_id]
    goal = replace(root_stmt, role=Role.GOAL, origin=Origin.DATASET)
    inters = tuple(stmts[s.output] for s in steps if s.output != root_id)
    return EntailmentTree(
        id=f"{tree.id}@{root_id[:8]}",
        premises=tuple(leaves),
        steps=tuple(steps),
        goal=goal,
        intermediates=inters,
        synthetic_ids=tree.synthetic_ids & seen,
    )


def slice_treelets(tree: EntailmentTree) -> list[Treelet]:
    """One treelet per (sub-tree root, ablated leaf premise) combination.

    Every intermediate and the goal each root one sub-tree; each of that
    sub-tree's leaf premises is ablated in turn. Sub-trees with fewer than
    two premises cannot feed the deductive model and are flagged
    abductive-only.
    """
    out: list[Treelet] = []
    for step in tree.steps:
        sub = subtree_rooted_at(tree, step.output)
        for i, missing in enumerate(sub.premises):
            visible = tuple(p for j, p in enumerate(sub.premises) if j != i)
            if not visible:
                continue
            out.append(
                Treelet(
                    id=f"{tree.id}/{step.output[:8]}/{i}",
                    base=sub,
                    ablated_index=i,
                    missing=missing,
                    visible_premises=visible,
                    depth=sub.depth,
                    abductive_only=len(sub.premises) < 2,
                )
            )
    return out


def to_indented_text(tree: EntailmentTree) -> str:
    """Plain-text dump of a tree, goal first, children indented below."""
    by_output = tree.producing_step()
    stmts = tree.statements()
    lines: list[str] = []

    def walk(sid: str, depth: int) -> None:
        stmt = stmts[sid]
        lines.append(f"{'  ' * depth}[{stmt.role.value}] {stmt.text}")
        step = by_output.get(sid)
        if step is not None:
            for i in step.inputs:
                walk(i, depth + 1)

    walk(tree.goal.id, 0)
    return "\n".join(lines)


def ancestry(
    statement_id: str,
    eta: int,
    steps: Iterable[StepRecord],
    known: set[str] | None = None,
) -> frozenset[str]:
    """Statements within `eta` generation levels of `statement_id`.

    Level 1 is the statement itself; each further level adds the inputs of
    the step that produced the previous level's statements.
    """
    if eta < 1:
        raise ValueError("eta must be >= 1")
    if known is not None and statement_id not in known:
        raise UnknownStatementError(f"unknown statement id {statement_id}")
    by_output = {s.output: s for s in steps}
    out: set[str] = set()
    frontier = {statement_id}
    for _ in range(eta):
        out |= frontier
        nxt: set[str] = set()
        for sid in frontier:
            step = by_output.get(sid)
            if step is not None:
                nxt.update(step.inputs)
        frontier = nxt - out
        if not frontier:
            break
    return frozenset(out)


@dataclass
class ProofTree:
    """A deductive derivation of a treelet goal including one recovered premise."""

    root: Statement
    steps: tuple[StepRecord, ...]
    recovered: str
    statements: dict[str, Statement]
    rerank_score: float | None = None
    flags: tuple[str, ...] = ()

    @property
    def length(self) -> int:
        return len(self.steps)

    def leaves(self) -> set[str]:
        outputs = {s.output for s in self.steps}
        ins = {i for s in self.steps for i in s.inputs}
        return ins - outputs


def assemble_proof(
    hypothesis_id: str,
    steps: Iterable[StepRecord],
    statements: Mapping[str, Statement],
) -> ProofTree:
    """Turn a yielded hypothesis plus the search's step log into a proof.

    Each abductive step (c, x -> x') on the chain from the hypothesis back to
    the goal becomes the deductive step (x, x' -> c); deductive derivations of
    any intermediates used are spliced in. The result's leaves are visible
    premises plus the single recovered hypothesis.
    """
    if hypothesis_id not in statements:
        raise UnknownStatementError(f"unknown hypothesis id {hypothesis_id}")
    by_output: dict[str, StepRecord] = {}
    for s in steps:
        by_output.setdefault(s.output, s)

    chain: list[StepRecord] = []
    current = hypothesis_id
    while True:
        step = by_output.get(current)
        if step is None or step.direction is not Direction.ABDUCTIVE:
            raise IntegrityError(f"broken abductive chain at {current}: no producing abductive step")
        chain.append(step)
        current = step.inputs[0]
        parent = statements.get(current)
        if parent is None:
            raise IntegrityError(f"unknown statement {current} on abductive chain")
        if parent.role is Role.GOAL:
            break
        if parent.role is not Role.HYPOTHESIS:
            raise IntegrityError(f"abductive chain passes through non-hypothesis {current}")

    proof_steps: list[StepRecord] = []
    emitted: set[str] = set()

    def splice(sid: str) -> None:
        """Emit the deductive derivation of an intermediate, leaves first."""
        if sid in emitted:
            return
        step = by_output.get(sid)
        if step is None or step.direction is not Direction.DEDUCTIVE:
            raise IntegrityError(f"missing deductive derivation for intermediate {sid}")
        for i in step.inputs:
            role = statements[i].role
            if role is Role.INTERMEDIATE:
                splice(i)
            elif role is not Role.PREMISE:
                raise IntegrityError(f"deductive step input {i} is neither premise nor intermediate")
        emitted.add(sid)
        proof_steps.append(step)

    for abductive in chain:
        premise_slot = abductive.inputs[1]
        if statements[premise_slot].role is Role.INTERMEDIATE:
            splice(premise_slot)
        proof_steps.append(invert_abductive(abductive))

    used = {hypothesis_id}
    for s in proof_steps:
        used.update(s.inputs)
        used.add(s.output)
    goal_id = chain[-1].inputs[0]
    proof = ProofTree(
        root=statements[goal_id],
        steps=tuple(proof_steps),
        recovered=hypothesis_id,
        statements={sid: statements[sid] for sid in used},
    )
    for leaf in proof.leaves():
        if leaf != hypothesis_id and statements[leaf].role is not Role.PREMISE:
            raise IntegrityError(f"proof leaf {leaf} is neither a visible premise nor the recovered hypothesis")
    return proof
