import pytest
from hypothesis import given, strategies as st

from proofsearch.errors import BackendError, ProofSearchError
from proofsearch.scoring import (
    EntailDirection,
    harmonic_mean,
    recovery_score,
    rerank_proofs,
    rouge1,
)
from proofsearch.trees import (
    Direction,
    Role,
    StepRecord,
    assemble_proof,
    make_statement,
)


class TestRouge1:
    def test_identical(self):
        assert rouge1("the cat sat", "the cat sat") == 1.0

    def test_disjoint(self):
        assert rouge1("alpha beta", "gamma delta") == 0.0

    def test_hand_computed_two_thirds(self):
        # overlap 2, P = R = 2/3, F = 2/3
        assert abs(rouge1("the cat sat", "the cat ran") - 2 / 3) < 1e-12

    def test_empty_sides(self):
        assert rouge1("", "the cat") == 0.0
        assert rouge1("the cat", "") == 0.0

    def test_clipped_multiset_overlap(self):
        # "a a b" vs "a b b": clipped overlap = a:1 + b:1 = 2; P = R = 2/3
        assert abs(rouge1("a a b", "a b b") - 2 / 3) < 1e-12

    def test_case_and_punctuation_normalized(self):
        assert rouge1("The cat sat.", "the cat sat") == 1.0

    @given(st.text(alphabet="ab ", max_size=20), st.text(alphabet="ab ", max_size=20))
    def test_f_measure_symmetric(self, a, b):
        assert abs(rouge1(a, b) - rouge1(b, a)) < 1e-12

    @given(st.text(alphabet="abc ", max_size=30))
    def test_self_similarity(self, t):
        from proofsearch.text import tokens

        if tokens(t):
            assert rouge1(t, t) == 1.0


class TestHarmonicMean:
    def test_annihilator(self):
        assert harmonic_mean(0.9, 0.0) == 0.0
        assert harmonic_mean(0.0, 0.0) == 0.0

    def test_hand_value(self):
        assert abs(harmonic_mean(0.8, 0.6) - 0.96 / 1.4) < 1e-12

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_bounded_by_max(self, a, b):
        assert harmonic_mean(a, b) <= max(a, b) + 1e-12

    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
    def test_monotone_each_argument(self, a, b, delta):
        lo, hi = sorted((a, min(1.0, a + delta)))
        assert harmonic_mean(lo, b) <= harmonic_mean(hi, b) + 1e-12
        assert harmonic_mean(b, lo) <= harmonic_mean(b, hi) + 1e-12


class TestRecoveryScore:
    def test_perfect(self, cat_backend):
        rec = recovery_score("a cat has fur", "a cat has fur", cat_backend.entail)
        assert rec.s_r == rec.s_e == rec.s == 1.0 and rec.recovered

    def test_boundary_below_threshold(self):
        # s_r = 0.8, s_e = 0.6 -> s ~ 0.6857, not recovered at 0.7
        rec = recovery_score("w x y z a", "w x y z b", lambda *_: 0.6, t_m=0.7)
        assert abs(rec.s_r - 0.8) < 1e-12
        assert abs(rec.s - 0.96 / 1.4) < 1e-9
        assert not rec.recovered

    def test_zero_entailment_annihilates(self):
        rec = recovery_score("same words here", "same words here", lambda *_: 0.0)
        assert rec.s == 0.0 and not rec.recovered

    def test_entailment_direction(self):
        calls = []

        def entail(premise, hypothesis):
            calls.append((premise, hypothesis))
            return 1.0

        recovery_score("generated", "gold", entail, direction=EntailDirection.RIGHTWARD)
        assert calls[-1] == ("generated", "gold")
        recovery_score("generated", "gold", entail, direction=EntailDirection.LEFTWARD)
        assert calls[-1] == ("gold", "generated")

    def test_entail_failure_propagates(self):
        def broken(*_):
            raise BackendError("scorer down")

        with pytest.raises(BackendError):
            recovery_score("a", "b", broken)

    def test_monotone_in_threshold(self, cat_backend):
        low = recovery_score("a cat has fur", "a cat has fur", cat_backend.entail, t_m=0.2)
        high = recovery_score("a cat has fur", "a cat has fur", cat_backend.entail, t_m=1.0)
        assert low.recovered >= high.recovered


def _oracle_proof(cat_backend, corrupt_step=False):
    g = make_statement("a cat has fur", Role.GOAL)
    x1 = make_statement("a cat is a kind of mammal", Role.PREMISE)
    x2 = make_statement("a mammal is a kind of animal", Role.PREMISE)
    i1 = make_statement("a cat is a kind of animal", Role.INTERMEDIATE)
    h_text = "a animal has fur" if not corrupt_step else "a reptile has scales"
    h = make_statement(h_text, Role.HYPOTHESIS)
    d = StepRecord(Direction.DEDUCTIVE, (x1.id, x2.id), i1.id)
    a = StepRecord(Direction.ABDUCTIVE, (g.id, i1.id), h.id)
    return assemble_proof(h.id, [d, a], {s.id: s for s in (g, x1, x2, i1, h)})


class TestRerank:
    def test_clean_oracle_proof_scores_one(self, cat_backend):
        proof = _oracle_proof(cat_backend)
        ranked = rerank_proofs([proof], cat_backend)
        assert ranked[0].rerank_score == 1.0

    def test_corrupted_step_scores_half_and_ranks_below(self, cat_backend):
        clean = _oracle_proof(cat_backend)
        corrupt = _oracle_proof(cat_backend, corrupt_step=True)
        ranked = rerank_proofs([corrupt, clean], cat_backend)
        assert ranked[0].rerank_score == 1.0
        assert ranked[1].rerank_score == 0.5
        assert ranked[0] is clean

    def test_empty_proof_rejected(self, cat_backend):
        from proofsearch.trees import ProofTree

        empty = ProofTree(
            root=make_statement("a cat has fur", Role.GOAL),
            steps=(),
            recovered="x",
            statements={},
        )
        with pytest.raises(ProofSearchError):
            rerank_proofs([empty], cat_backend)

    def test_ties_keep_input_order(self, cat_backend):
        p1 = _oracle_proof(cat_backend)
        p2 = _oracle_proof(cat_backend)
        ranked = rerank_proofs([p1, p2], cat_backend)
        assert ranked[0] is p1 and ranked[1] is p2

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=12))
    def test_mean_never_drops_when_perfect_step_added(self, step_scores):
        # rerank_score is a mean of per-step scores in [0, 1]; appending a
        # perfect step cannot lower it
        before = sum(step_scores) / len(step_scores)
        after = (sum(step_scores) + 1.0) / (len(step_scores) + 1)
        assert after >= before - 1e-12

    def test_backend_failure_flags_step(self, cat_backend):
        proof = _oracle_proof(cat_backend)

        class Flaky:
            def deduce(self, *a, **k):
                raise BackendError("down")

            def entail(self, *a, **k):
                return 1.0

        ranked = rerank_proofs([proof], Flaky())
        assert ranked[0].rerank_score == 0.0
        assert ranked[0].flags
