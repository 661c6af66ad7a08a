import pytest
from hypothesis import given, strategies as st

from proofsearch.errors import BackendError
from proofsearch.scoring import agreement_metric
from proofsearch.trees import Direction, Role, StepRecord, make_statement
from proofsearch.validators import (
    ValidatorConfig,
    consanguinity_ok,
    dedup,
    validate_abductive,
    validate_deductive,
)


@pytest.fixture
def metric(cat_backend):
    return agreement_metric(cat_backend.entail)


class TestValidatorConfig:
    def test_defaults(self):
        cfg = ValidatorConfig()
        assert cfg.t_d == cfg.t_a == 0.7 and cfg.eta == 1

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            ValidatorConfig(t_d=1.5)
        with pytest.raises(ValueError):
            ValidatorConfig(eta=0)


class TestDeductiveAgreement:
    """validate_abductive: the hypothesis must regenerate the conclusion."""

    def test_oracle_round_trip_passes_exactly(self, cat_backend, metric):
        res = validate_abductive(
            conclusion="a cat has fur",
            premise="a cat is a kind of mammal",
            hypothesis="a mammal has fur",
            backend=cat_backend,
            metric=metric,
            t_d=0.7,
        )
        assert res.passed and res.score == 1.0

    def test_corrupted_hypothesis_fails(self, cat_backend, metric):
        res = validate_abductive(
            conclusion="a cat has fur",
            premise="a cat is a kind of mammal",
            hypothesis="a dog has fur",
            backend=cat_backend,
            metric=metric,
            t_d=0.7,
        )
        assert not res.passed and res.score == 0.0

    def test_zero_threshold_passes_any_nonempty_roundtrip(self, cat_backend, metric):
        res = validate_abductive(
            conclusion="a zebra has stripes",
            premise="a cat is a kind of mammal",
            hypothesis="a mammal has fur",
            backend=cat_backend,
            metric=metric,
            t_d=0.0,
        )
        # greedy deduce is nonempty, so any score >= 0 passes
        assert res.passed

    def test_empty_greedy_deduce_fails(self, cat_backend, metric):
        res = validate_abductive(
            conclusion="a cat has fur",
            premise="a cat has fur",
            hypothesis="a dog has fur",
            backend=cat_backend,
            metric=metric,
            t_d=0.0,
        )
        assert not res.passed and res.score == 0.0

    def test_backend_error_recorded(self, metric):
        class Broken:
            def deduce(self, *a, **k):
                raise BackendError("model down")

        res = validate_abductive("c", "x", "h", Broken(), metric, 0.7)
        assert not res.passed and res.error is not None


class TestAbductiveAgreement:
    """validate_deductive: each input must be recoverable from the conclusion."""

    def test_oracle_step_passes(self, cat_backend, metric):
        res = validate_deductive(
            x1="a cat is a kind of mammal",
            x2="a mammal has fur",
            conclusion="a cat has fur",
            backend=cat_backend,
            metric=metric,
            t_a=0.7,
        )
        assert res.passed and res.score == 1.0

    def test_copy_conclusion_fails(self, cat_backend, metric):
        # A step whose conclusion copies x1 cannot recover its inputs.
        res = validate_deductive(
            x1="a cat has fur",
            x2="a mammal has fur",
            conclusion="a cat has fur copycat",
            backend=cat_backend,
            metric=metric,
            t_a=0.7,
        )
        assert not res.passed

    def test_strict_threshold_rejects_paraphrase(self, cat_backend):
        # Any recovery that is not textually identical fails at t_a = 1.0.
        def near_metric(reference, generated):
            return 0.97

        res = validate_deductive(
            x1="a cat is a kind of mammal",
            x2="a mammal has fur",
            conclusion="a cat has fur",
            backend=cat_backend,
            metric=near_metric,
            t_a=1.0,
        )
        assert not res.passed

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_monotone_in_thresholds(self, t_lo, t_hi, ):
        t_lo, t_hi = sorted((t_lo, t_hi))

        class Fixed:
            def abduce(self, *a, **k):
                return ["recovered text"]

        def metric(reference, generated):
            return 0.5

        lo = validate_deductive("a", "b", "c", Fixed(), metric, t_lo)
        hi = validate_deductive("a", "b", "c", Fixed(), metric, t_hi)
        assert lo.passed or not hi.passed


class TestDedup:
    def test_copy_of_input_dropped(self):
        assert not dedup("The cat sat!", ["the cat sat"], set())

    def test_novel_kept(self):
        assert dedup("a new statement", ["the cat sat"], {"something else"})

    def test_seen_dropped(self):
        assert not dedup("A seen one.", [], {"a seen one"})

    def test_idempotent(self):
        seen: set[str] = set()
        assert dedup("fresh text", [], seen)
        seen.add("fresh text")
        assert not dedup("Fresh TEXT.", [], seen)

    def test_empty_candidate_dropped(self):
        assert not dedup("  ...  ", [], set())


class TestConsanguinity:
    def test_self_pair_blocked_at_eta_one(self):
        s = make_statement("some text", Role.PREMISE)
        assert not consanguinity_ok(s.id, s.id, 1, [])

    def test_unrelated_pair_ok(self):
        a = make_statement("left text", Role.PREMISE)
        b = make_statement("right text", Role.PREMISE)
        assert consanguinity_ok(a.id, b.id, 1, [])

    def test_siblings_blocked_at_eta_two(self):
        a = make_statement("shared parent", Role.PREMISE)
        b = make_statement("other parent one", Role.PREMISE)
        c = make_statement("other parent two", Role.PREMISE)
        c1 = make_statement("child one", Role.INTERMEDIATE)
        c2 = make_statement("child two", Role.INTERMEDIATE)
        steps = [
            StepRecord(Direction.DEDUCTIVE, (a.id, b.id), c1.id),
            StepRecord(Direction.DEDUCTIVE, (a.id, c.id), c2.id),
        ]
        assert consanguinity_ok(c1.id, c2.id, 1, steps)
        assert not consanguinity_ok(c1.id, c2.id, 2, steps)
