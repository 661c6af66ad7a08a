import pytest

from proofsearch.backends import Capability
from proofsearch.errors import BackendError, ConfigError
from proofsearch.oracle import OracleBackend, OracleWorld, generate_suite
from proofsearch.search import (
    Fringe,
    FringeEntry,
    Mode,
    SearchConfig,
    adgv_search,
    eligible_pair,
    init_fringes,
    pop_best,
)
from proofsearch.trees import Direction, Role, make_statement

from bruteforce import backward_reachable_texts


def premises(*texts):
    return [make_statement(t, Role.PREMISE) for t in texts]


GOAL = make_statement("a cat has fur", Role.GOAL)


def config(mode=Mode.ADGV, forward=4, backward=4, **kw):
    return SearchConfig(mode=mode, forward_budget=forward, backward_budget=backward, **kw)


class TestInitFringes:
    def test_three_premises(self, cat_backend):
        X = premises("a cat is a kind of mammal", "a mammal has fur", "a mammal is a kind of animal")
        state = init_fringes(X, GOAL, config(), cat_backend)
        assert len(state.fringe_d) == 3  # C(3,2)
        assert len(state.fringe_a) == 3
        assert state.seen_d == {p.id for p in X}
        assert state.seen_a == {GOAL.id}

    def test_single_premise(self, cat_backend):
        X = premises("a cat is a kind of mammal")
        state = init_fringes(X, GOAL, config(), cat_backend)
        assert len(state.fringe_d) == 0
        assert len(state.fringe_a) == 1

    def test_mode_gating(self, cat_backend):
        X = premises("p one", "p two", "p three", "p four")
        goal = make_statement("the goal", Role.GOAL)
        ag = init_fringes(X, goal, config(mode=Mode.AG), cat_backend)
        assert len(ag.fringe_d) == 0 and len(ag.fringe_a) == 4
        dg = init_fringes(X, goal, config(mode=Mode.DG), cat_backend)
        assert len(dg.fringe_d) == 6 and len(dg.fringe_a) == 0

    def test_empty_premises_rejected(self, cat_backend):
        with pytest.raises(ConfigError):
            init_fringes([], GOAL, config(), cat_backend)

    def test_goal_equal_to_premise_rejected(self, cat_backend):
        X = premises("a cat has fur")
        with pytest.raises(ConfigError):
            init_fringes(X, GOAL, config(), cat_backend)


class TestEligiblePair:
    x = make_statement("a premise", Role.PREMISE)
    y_d = make_statement("an intermediate", Role.INTERMEDIATE)
    y_a = make_statement("a hypothesis", Role.HYPOTHESIS)
    g = make_statement("the goal", Role.GOAL)

    def test_deductive_rows(self):
        assert eligible_pair(self.x, self.x, Direction.DEDUCTIVE)
        assert eligible_pair(self.x, self.y_d, Direction.DEDUCTIVE)
        assert eligible_pair(self.y_d, self.y_d, Direction.DEDUCTIVE)

    def test_hypotheses_never_in_deductive_steps(self):
        assert not eligible_pair(self.y_a, self.y_a, Direction.DEDUCTIVE)
        assert not eligible_pair(self.y_a, self.x, Direction.DEDUCTIVE)
        assert not eligible_pair(self.x, self.y_a, Direction.DEDUCTIVE)
        assert not eligible_pair(self.g, self.x, Direction.DEDUCTIVE)

    def test_abductive_rows(self):
        assert eligible_pair(self.g, self.x, Direction.ABDUCTIVE)
        assert eligible_pair(self.g, self.y_d, Direction.ABDUCTIVE)
        assert eligible_pair(self.y_a, self.x, Direction.ABDUCTIVE)
        assert eligible_pair(self.y_a, self.y_d, Direction.ABDUCTIVE)

    def test_abductive_conclusion_slot_restricted(self):
        assert not eligible_pair(self.y_d, self.y_a, Direction.ABDUCTIVE)
        assert not eligible_pair(self.x, self.x, Direction.ABDUCTIVE)
        assert not eligible_pair(self.g, self.g, Direction.ABDUCTIVE)
        assert not eligible_pair(self.g, self.y_a, Direction.ABDUCTIVE)


class TestPopBest:
    def test_max_priority_wins(self):
        fringe = Fringe()
        fringe.push(FringeEntry(("a", "b"), 0.2, 0))
        fringe.push(FringeEntry(("c", "d"), 0.9, 1))
        assert pop_best(fringe).pair == ("c", "d")

    def test_ties_break_by_insertion_order(self):
        fringe = Fringe()
        fringe.push(FringeEntry(("a", "b"), 0.5, 0))
        fringe.push(FringeEntry(("c", "d"), 0.5, 1))
        assert pop_best(fringe).pair == ("a", "b")

    def test_pop_shrinks_by_one(self):
        fringe = Fringe()
        for i in range(3):
            fringe.push(FringeEntry((str(i), "x"), float(i), i))
        pop_best(fringe)
        assert len(fringe) == 2

    def test_empty_pop_signal(self):
        assert pop_best(Fringe()) is None


class TestSearchTraces:
    def test_single_inversion_recovers_missing(self):
        # X = {is_a(cat, mammal)}, g = has(cat, fur), x_m = has(mammal, fur)
        X = premises("a cat is a kind of mammal")
        world = OracleWorld.from_texts([p.text for p in X])
        result = adgv_search(X, GOAL, config(forward=2, backward=2), OracleBackend(world))
        assert "a mammal has fur" in [h.text for h in result.hypotheses]

    def test_depth2_deduction_feeds_abduction(self):
        # Two-sided case: forward step produces is_a(cat, animal), then
        # abduction against the goal recovers has(animal, warm-blood).
        X = premises("a cat is a kind of mammal", "a mammal is a kind of animal")
        goal = make_statement("a cat has warm-blood", Role.GOAL)
        world = OracleWorld.from_texts([p.text for p in X])
        result = adgv_search(X, goal, config(forward=4, backward=4), OracleBackend(world))
        texts = [h.text for h in result.hypotheses]
        assert "a animal has warm-blood" in texts

    def test_dg_mode_yields_nothing(self):
        X = premises("a cat is a kind of mammal", "a mammal is a kind of animal")
        goal = make_statement("a cat has warm-blood", Role.GOAL)
        world = OracleWorld.from_texts([p.text for p in X])
        result = adgv_search(X, goal, config(mode=Mode.DG), OracleBackend(world))
        assert result.hypotheses == []

    def test_yield_order_streams_through_callback(self):
        X = premises("a cat is a kind of mammal")
        world = OracleWorld.from_texts([p.text for p in X])
        streamed = []
        result = adgv_search(
            X, GOAL, config(), OracleBackend(world), on_yield=lambda s: streamed.append(s.id)
        )
        assert streamed == result.state.yielded


class TestBudgets:
    def test_budget_safety_from_event_log(self):
        for case in generate_suite(5, 2, seed=21):
            cfg = config(forward=3, backward=3)
            result = adgv_search(
                case.treelet.visible_premises, case.treelet.base.goal, cfg, OracleBackend(case.world)
            )
            d_pops = sum(1 for r in result.state.iterations if r.direction == "deductive")
            a_pops = sum(1 for r in result.state.iterations if r.direction == "abductive")
            assert d_pops <= 3 and a_pops <= 3
            assert result.state.steps_taken_d == d_pops
            assert result.state.steps_taken_a == a_pops

    def test_zero_budgets_do_nothing(self, cat_backend):
        X = premises("a cat is a kind of mammal", "a mammal has fur")
        result = adgv_search(X, make_statement("a goal", Role.GOAL), config(forward=0, backward=0), cat_backend)
        assert result.state.iterations == [] and result.hypotheses == []

    def test_one_sided_continuation(self):
        # Forward budget exhausted, backward side keeps going alone.
        X = premises("a cat is a kind of mammal", "a mammal is a kind of animal")
        goal = make_statement("a cat has warm-blood", Role.GOAL)
        world = OracleWorld.from_texts([p.text for p in X])
        result = adgv_search(X, goal, config(forward=1, backward=6), OracleBackend(world))
        a_pops = sum(1 for r in result.state.iterations if r.direction == "abductive")
        d_pops = sum(1 for r in result.state.iterations if r.direction == "deductive")
        assert d_pops == 1 and a_pops > 1

    def test_failed_pop_consumes_budget_by_default(self):
        class FlakyBackend(OracleBackend):
            def __init__(self):
                super().__init__(OracleWorld())
                self.calls = 0

            def abduce(self, premise, conclusion, n=1, greedy=False):
                if not greedy:
                    raise BackendError("transient fault")
                return super().abduce(premise, conclusion, n, greedy)

        X = premises("a cat is a kind of mammal")
        result = adgv_search(X, GOAL, config(mode=Mode.AG, backward=2), FlakyBackend())
        assert result.state.steps_taken_a == 1  # one pop, pruned, fringe empty
        assert result.state.iterations[0].note.startswith("pruned")
        assert result.hypotheses == []

    def test_empty_pop_refund_flag(self):
        # A premise pair that deduces nothing: with refunds on, the failed pop
        # hands its budget back.
        X = premises("a cat has fur", "a dog has fur")
        goal = make_statement("a cat has tail", Role.GOAL)
        world = OracleWorld.from_texts([p.text for p in X])
        strict = adgv_search(X, goal, config(mode=Mode.DG, forward=2), OracleBackend(world))
        assert strict.state.steps_taken_d == 1
        refunded = adgv_search(
            X, goal, config(mode=Mode.DG, forward=2, consume_budget_on_empty=False), OracleBackend(world)
        )
        assert refunded.state.steps_taken_d == 0


class TestInvariants:
    def test_no_self_pairs_ever_popped(self):
        for case in generate_suite(8, 2, seed=33):
            result = adgv_search(
                case.treelet.visible_premises,
                case.treelet.base.goal,
                config(forward=6, backward=6),
                OracleBackend(case.world),
            )
            for rec in result.state.iterations:
                assert rec.pair[0] != rec.pair[1]

    def test_no_hypothesis_inside_deductive_steps(self):
        for case in generate_suite(8, 2, seed=34):
            result = adgv_search(
                case.treelet.visible_premises,
                case.treelet.base.goal,
                config(forward=6, backward=6),
                OracleBackend(case.world),
            )
            stmts = result.state.statements
            for step in result.state.events:
                if step.direction is Direction.DEDUCTIVE:
                    assert all(stmts[i].role in (Role.PREMISE, Role.INTERMEDIATE) for i in step.inputs)

    def test_seen_sets_disjoint_and_goal_never_forward(self):
        for case in generate_suite(8, 2, seed=35):
            result = adgv_search(
                case.treelet.visible_premises,
                case.treelet.base.goal,
                config(forward=6, backward=6),
                OracleBackend(case.world),
            )
            state = result.state
            assert state.seen_d & state.seen_a == set()
            assert state.goal_id not in state.seen_d

    def test_seen_sets_reconstructable_from_event_log(self):
        case = generate_suite(1, 2, seed=36)[0]
        result = adgv_search(
            case.treelet.visible_premises,
            case.treelet.base.goal,
            config(forward=6, backward=6),
            OracleBackend(case.world),
        )
        state = result.state
        expected_d = {p.id for p in case.treelet.visible_premises}
        expected_a = {case.treelet.base.goal.id}
        for rec in state.iterations:
            if rec.direction == "deductive":
                expected_d |= set(rec.kept)
            else:
                expected_a |= set(rec.kept)
        assert state.seen_d == expected_d
        assert state.seen_a == expected_a
        sizes_d = [r.seen_d_size for r in state.iterations]
        assert sizes_d == sorted(sizes_d)

    def test_deterministic_replay(self):
        case = generate_suite(1, 2, seed=37)[0]
        logs = []
        for _ in range(2):
            result = adgv_search(
                case.treelet.visible_premises,
                case.treelet.base.goal,
                config(forward=4, backward=4),
                OracleBackend(case.world),
            )
            logs.append("\n".join(result.state.event_log_lines()))
        assert logs[0] == logs[1]

    def test_every_yield_has_reconstructible_proof(self):
        from proofsearch.trees import assemble_proof

        for case in generate_suite(6, 2, seed=38):
            result = adgv_search(
                case.treelet.visible_premises,
                case.treelet.base.goal,
                config(forward=6, backward=6),
                OracleBackend(case.world),
            )
            for hid in result.state.yielded:
                proof = assemble_proof(hid, result.state.events, result.state.statements)
                assert proof.recovered == hid


class TestExhaustiveEquivalence:
    def test_unbudgeted_yield_set_matches_backward_closure(self):
        for case in generate_suite(10, 2, seed=40):
            result = adgv_search(
                case.treelet.visible_premises,
                case.treelet.base.goal,
                SearchConfig(mode=Mode.ADGV, forward_budget=None, backward_budget=None),
                OracleBackend(case.world),
            )
            engine_set = {h.norm for h in result.hypotheses}
            reference = backward_reachable_texts(
                [p.text for p in case.treelet.visible_premises], case.treelet.base.goal.text
            )
            assert engine_set == reference

    def test_missing_capability_raises(self):
        class NoAbduce(OracleBackend):
            @property
            def capabilities(self):
                return frozenset({Capability.DEDUCE, Capability.HEURISTIC_D})

        X = premises("a cat is a kind of mammal")
        with pytest.raises(ConfigError, match="capabilities"):
            adgv_search(X, GOAL, config(mode=Mode.ADGV), NoAbduce())
