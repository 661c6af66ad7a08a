"""Corpus import/export and training-example construction.

Reads the upstream proof-DSL layout (one JSON record per line with id,
hypothesis, a sentence map and a proof string like
"sent1 & sent2 -> int1: some text; int1 & sent3 -> hypothesis;"),
writes the canonical tree format, and builds step-model and heuristic
training examples from parsed trees.
"""

from __future__ import annotations

import enum
import json
import random
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import DslParseError, TreeStructureError
from .text import normalize
from .trees import (
    Direction,
    EntailmentTree,
    Origin,
    Role,
    Statement,
    StepRecord,
    Treelet,
    ancestry,
    make_statement,
)


@dataclass(frozen=True)
class ProofDslRecord:
    id: str
    hypothesis: str
    sentences: Mapping[str, str]
    proof: str


class ExampleKind(str, enum.Enum):
    DEDUCTIVE = "deductive-step"
    ABDUCTIVE = "abductive-step"
    HEURISTIC_POSITIVE = "heuristic-positive"
    HEURISTIC_NEGATIVE = "heuristic-negative"


@dataclass(frozen=True)
class TrainingExample:
    kind: ExampleKind
    inputs: tuple[str, ...]
    target: str


# --------------------------------------------------------------------------
# Proof DSL parsing
# --------------------------------------------------------------------------

_STEP_SPLIT = re.compile(r";")
_KEY = re.compile(r"^(sent\d+|int\d+)$")


def _byte_offset(proof: str, char_index: int) -> int:
    return len(proof[:char_index].encode("utf-8"))


def parse_proof_dsl(record: ProofDslRecord) -> EntailmentTree:
    """Build an EntailmentTree from one DSL record.

    Steps wider than two inputs are binarized left-to-right through synthetic
    intermediates (the step models are binary); synthetic statement ids are
    flagged on the tree.
    """
    proof = record.proof
    if not proof or not proof.strip():
        raise DslParseError("empty proof", record_id=record.id, offset=0)

    statements: dict[str, Statement] = {}
    for key, text in record.sentences.items():
        statements[key] = make_statement(text, Role.PREMISE)
    goal = make_statement(record.hypothesis, Role.GOAL)

    defined: dict[str, Statement] = {}  # intermediate key -> statement
    steps: list[StepRecord] = []
    intermediates: list[Statement] = []
    synthetic: set[str] = set()
    used_premise_keys: list[str] = []
    goal_defined = False

    cursor = 0
    for segment in _STEP_SPLIT.split(proof):
        seg_start = cursor
        cursor += len(segment) + 1
        if not segment.strip():
            continue
        if "->" not in segment:
            raise DslParseError("step missing '->'", record_id=record.id, offset=_byte_offset(proof, seg_start))
        lhs, rhs = segment.split("->", 1)

        input_keys: list[str] = []
        for part in lhs.split("&"):
            key = part.strip()
            key_offset = _byte_offset(proof, seg_start + lhs.index(part))
            if not _KEY.match(key):
                raise DslParseError(f"malformed input key {key!r}", record_id=record.id, offset=key_offset)
            input_keys.append(key)
        if len(input_keys) < 2:
            raise DslParseError("step needs at least two inputs", record_id=record.id, offset=_byte_offset(proof, seg_start))
        if len(set(input_keys)) != len(input_keys):
            raise DslParseError("step repeats an input key", record_id=record.id, offset=_byte_offset(proof, seg_start))

        rhs = rhs.strip()
        if rhs == "hypothesis":
            if goal_defined:
                raise DslParseError("goal defined by more than one step", record_id=record.id, offset=_byte_offset(proof, seg_start))
            goal_defined = True
            target = goal
            target_key = "hypothesis"
        else:
            if ":" not in rhs:
                raise DslParseError(f"malformed step target {rhs!r}", record_id=record.id, offset=_byte_offset(proof, seg_start))
            target_key, target_text = rhs.split(":", 1)
            target_key = target_key.strip()
            if not re.match(r"^int\d+$", target_key):
                raise DslParseError(f"malformed intermediate key {target_key!r}", record_id=record.id, offset=_byte_offset(proof, seg_start))
            if target_key in defined:
                raise DslParseError(f"intermediate {target_key} redefined", record_id=record.id, offset=_byte_offset(proof, seg_start))
            if not target_text.strip():
                raise DslParseError(f"intermediate {target_key} has no text", record_id=record.id, offset=_byte_offset(proof, seg_start))
            target = make_statement(target_text.strip(), Role.INTERMEDIATE)
            defined[target_key] = target
            intermediates.append(target)

        resolved: list[Statement] = []
        for key in input_keys:
            if key == target_key:
                raise DslParseError(f"cyclic reference: {key} feeds itself", record_id=record.id, offset=_byte_offset(proof, seg_start))
            if key.startswith("sent"):
                if key not in statements:
                    raise DslParseError(f"undefined sentence key {key}", record_id=record.id, offset=_byte_offset(proof, seg_start))
                resolved.append(statements[key])
                used_premise_keys.append(key)
            else:
                if key not in defined:
                    raise DslParseError(f"undefined or forward-referenced intermediate {key}", record_id=record.id, offset=_byte_offset(proof, seg_start))
                resolved.append(defined[key])

        # Binarize left-to-right; each fold introduces a synthetic conjunction.
        left = resolved[0]
        for right in resolved[1:-1]:
            combined = make_statement(f"{left.text} and {right.text}", Role.INTERMEDIATE)
            steps.append(StepRecord(Direction.DEDUCTIVE, (left.id, right.id), combined.id))
            intermediates.append(combined)
            synthetic.add(combined.id)
            left = combined
        steps.append(StepRecord(Direction.DEDUCTIVE, (left.id, resolved[-1].id), target.id))

    if not goal_defined:
        raise DslParseError("proof never derives the hypothesis", record_id=record.id, offset=_byte_offset(proof, len(proof) - 1))

    premises = []
    seen_keys: set[str] = set()
    for key in used_premise_keys:
        if key not in seen_keys:
            seen_keys.add(key)
            premises.append(statements[key])

    try:
        return EntailmentTree(
            id=record.id,
            premises=tuple(premises),
            steps=tuple(steps),
            goal=goal,
            intermediates=tuple(intermediates),
            synthetic_ids=frozenset(synthetic),
        )
    except TreeStructureError as exc:
        raise DslParseError(f"proof is not a valid tree: {exc}", record_id=record.id, offset=0) from exc


def read_dsl_records(path: str | Path) -> Iterator[ProofDslRecord]:
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DslParseError(f"line {lineno} is not valid JSON: {exc}", record_id=str(lineno)) from exc
            missing = [f for f in ("id", "hypothesis", "sentences", "proof") if f not in obj]
            if missing:
                raise DslParseError(f"line {lineno} missing fields {missing}", record_id=obj.get("id", str(lineno)))
            yield ProofDslRecord(
                id=str(obj["id"]),
                hypothesis=obj["hypothesis"],
                sentences=dict(obj["sentences"]),
                proof=obj["proof"],
            )


# --------------------------------------------------------------------------
# Canonical tree format: one JSON record per line with fields
# {id, goal, premises:[{id,text}], steps:[{inputs:[id,id], output:{id,text}}]}
# --------------------------------------------------------------------------


def tree_to_canonical(tree: EntailmentTree) -> dict:
    stmts = tree.statements()
    return {
        "id": tree.id,
        "goal": {"id": tree.goal.id, "text": tree.goal.text},
        "premises": [{"id": p.id, "text": p.text} for p in tree.premises],
        "steps": [
            {
                "inputs": list(step.inputs),
                "output": {"id": step.output, "text": stmts[step.output].text},
            }
            for step in tree.steps
        ],
    }


def tree_from_canonical(obj: dict) -> EntailmentTree:
    goal = Statement(id=obj["goal"]["id"], text=obj["goal"]["text"], role=Role.GOAL, origin=Origin.DATASET)
    premises = tuple(
        Statement(id=p["id"], text=p["text"], role=Role.PREMISE, origin=Origin.DATASET)
        for p in obj["premises"]
    )
    steps = []
    intermediates = []
    for s in obj["steps"]:
        out = s["output"]
        steps.append(StepRecord(Direction.DEDUCTIVE, (s["inputs"][0], s["inputs"][1]), out["id"]))
        if out["id"] != goal.id:
            intermediates.append(
                Statement(id=out["id"], text=out["text"], role=Role.INTERMEDIATE, origin=Origin.DEDUCTIVE)
            )
    return EntailmentTree(
        id=obj["id"],
        premises=premises,
        steps=tuple(steps),
        goal=goal,
        intermediates=tuple(intermediates),
    )


def write_canonical(trees: Iterable[EntailmentTree], path: str | Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for tree in trees:
            handle.write(json.dumps(tree_to_canonical(tree), sort_keys=True, ensure_ascii=False) + "\n")
            count += 1
    return count


def read_canonical(path: str | Path) -> Iterator[EntailmentTree]:
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                yield tree_from_canonical(json.loads(line))


# --------------------------------------------------------------------------
# Treelet files. Each record embeds its base tree; oracle-suite treelets also
# carry the world facts that back entailment scoring for that instance.
# --------------------------------------------------------------------------


def treelet_to_record(treelet: Treelet, world_facts: list[str] | None = None) -> dict:
    rec = {
        "id": treelet.id,
        "depth": treelet.depth,
        "ablated_index": treelet.ablated_index,
        "abductive_only": treelet.abductive_only,
        "goal": {"id": treelet.base.goal.id, "text": treelet.base.goal.text},
        "visible": [{"id": p.id, "text": p.text} for p in treelet.visible_premises],
        "missing": {"id": treelet.missing.id, "text": treelet.missing.text},
        "base": tree_to_canonical(treelet.base),
    }
    if world_facts is not None:
        rec["world"] = {"facts": world_facts}
    return rec


def treelet_from_record(obj: dict) -> tuple[Treelet, list[str] | None]:
    base = tree_from_canonical(obj["base"])
    idx = obj["ablated_index"]
    treelet = Treelet(
        id=obj["id"],
        base=base,
        ablated_index=idx,
        missing=base.premises[idx],
        visible_premises=tuple(p for i, p in enumerate(base.premises) if i != idx),
        depth=obj["depth"],
        abductive_only=obj.get("abductive_only", False),
    )
    world = obj.get("world")
    return treelet, (world["facts"] if world else None)


def write_treelets(records: Iterable[dict], path: str | Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for rec in records:
            handle.write(json.dumps(rec, sort_keys=True, ensure_ascii=False) + "\n")
            count += 1
    return count


def read_treelets(path: str | Path) -> Iterator[tuple[Treelet, list[str] | None]]:
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                yield treelet_from_record(json.loads(line))


# --------------------------------------------------------------------------
# Training examples
# --------------------------------------------------------------------------


def build_deductive_training_examples(tree: EntailmentTree) -> list[TrainingExample]:
    """One example per step: inputs (x1, x2), target the conclusion."""
    stmts = tree.statements()
    return [
        TrainingExample(
            kind=ExampleKind.DEDUCTIVE,
            inputs=(stmts[s.inputs[0]].text, stmts[s.inputs[1]].text),
            target=stmts[s.output].text,
        )
        for s in tree.steps
    ]


def build_abductive_training_examples(tree: EntailmentTree) -> list[TrainingExample]:
    """Two examples per step, ablating each input in turn.

    The conclusion is always the final input so a model can learn the
    asymmetric premise/conclusion relationship.
    """
    stmts = tree.statements()
    out: list[TrainingExample] = []
    for s in tree.steps:
        x1, x2 = (stmts[i].text for i in s.inputs)
        c = stmts[s.output].text
        out.append(TrainingExample(kind=ExampleKind.ABDUCTIVE, inputs=(x1, c), target=x2))
        out.append(TrainingExample(kind=ExampleKind.ABDUCTIVE, inputs=(x2, c), target=x1))
    return out


def build_heuristic_training_pairs(
    tree: EntailmentTree,
    negatives_per_positive: int,
    seed: int,
) -> list[TrainingExample]:
    """Positive pairs join a step's inputs with its conclusion; negatives pair
    the conclusion with statements sampled from outside its subtree.

    The RNG seed is required so training sets are reproducible. Negative
    counts are negatives_per_positive x positives per step, capped by how
    many out-of-subtree statements exist.
    """
    if negatives_per_positive < 0:
        raise ValueError("negatives_per_positive must be >= 0")
    rng = random.Random(seed)
    stmts = tree.statements()
    below_goal = {s.id for s in tree.premises} | {s.id for s in tree.intermediates}
    out: list[TrainingExample] = []
    for step in tree.steps:
        c_text = stmts[step.output].text
        positives = [
            TrainingExample(
                kind=ExampleKind.HEURISTIC_POSITIVE,
                inputs=(stmts[i].text, c_text),
                target="positive",
            )
            for i in step.inputs
        ]
        out.extend(positives)
        subtree = ancestry(step.output, len(tree.steps) + 1, tree.steps)
        pool = sorted(below_goal - subtree)
        if not pool:
            continue
        want = min(negatives_per_positive * len(positives), len(pool))
        for sid in rng.sample(pool, want):
            out.append(
                TrainingExample(
                    kind=ExampleKind.HEURISTIC_NEGATIVE,
                    inputs=(stmts[sid].text, c_text),
                    target="negative",
                )
            )
    return out


def write_training_examples(examples: Iterable[TrainingExample], path: str | Path) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for ex in examples:
            handle.write(
                json.dumps(
                    {"kind": ex.kind.value, "inputs": list(ex.inputs), "target": ex.target},
                    sort_keys=True,
                    ensure_ascii=False,
                )
                + "\n"
            )
            count += 1
    return count


def read_training_examples(path: str | Path) -> Iterator[TrainingExample]:
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                obj = json.loads(line)
                yield TrainingExample(
                    kind=ExampleKind(obj["kind"]),
                    inputs=tuple(obj["inputs"]),
                    target=obj["target"],
                )


def trees_structurally_equal(a: EntailmentTree, b: EntailmentTree) -> bool:
    """Graph isomorphism on steps plus text equality after normalization.

    Content-hash ids make this a direct comparison of canonical step keys.
    """
    if normalize(a.goal.text) != normalize(b.goal.text):
        return False
    if {p.norm for p in a.premises} != {p.norm for p in b.premises}:
        return False
    return {s.key() for s in a.steps} == {s.key() for s in b.steps}
