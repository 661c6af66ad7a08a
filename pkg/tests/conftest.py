import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from proofsearch.oracle import OracleBackend, OracleWorld
from proofsearch.trees import Direction, EntailmentTree, Role, StepRecord, make_statement


@pytest.fixture
def cat_world() -> OracleWorld:
    return OracleWorld.from_texts(
        [
            "a cat is a kind of mammal",
            "a mammal is a kind of animal",
            "a mammal has fur",
        ]
    )


@pytest.fixture
def cat_backend(cat_world) -> OracleBackend:
    return OracleBackend(cat_world)


def build_tree(tree_id: str, premise_texts, step_specs, goal_text) -> EntailmentTree:
    """step_specs: list of (input_text_1, input_text_2, output_text)."""
    premises = {t: make_statement(t, Role.PREMISE) for t in premise_texts}
    goal = make_statement(goal_text, Role.GOAL)
    inters = {}
    steps = []
    for a, b, out in step_specs:
        def resolve(text):
            if text in premises:
                return premises[text]
            if text in inters:
                return inters[text]
            raise KeyError(text)

        if out == goal_text:
            target = goal
        else:
            target = make_statement(out, Role.INTERMEDIATE)
            inters[out] = target
        steps.append(StepRecord(Direction.DEDUCTIVE, (resolve(a).id, resolve(b).id), target.id))
    return EntailmentTree(
        id=tree_id,
        premises=tuple(premises.values()),
        steps=tuple(steps),
        goal=goal,
        intermediates=tuple(inters.values()),
    )


@pytest.fixture
def chain_tree() -> EntailmentTree:
    """Depth-2 chain: (p1, p2 -> i1), (i1, p3 -> goal)."""
    return build_tree(
        "chain",
        ["a wug is a kind of blick", "a blick is a kind of dax", "a dax has spots"],
        [
            ("a wug is a kind of blick", "a blick is a kind of dax", "a wug is a kind of dax"),
            ("a wug is a kind of dax", "a dax has spots", "a wug has spots"),
        ],
        "a wug has spots",
    )
