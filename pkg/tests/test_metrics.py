import numpy as np
import pytest

from rankloss import (
    EmptyClassError,
    PredictionBatch,
    auroc_multiclass_ovr,
    auroc_pairwise,
    auroc_rank,
    auroc_rank_scores,
    heaviside,
    monotone_check,
)

from conftest import pairwise_oracle, random_batch, random_pos_neg


class TestHeaviside:
    def test_branches(self):
        assert heaviside(3.0) == 1.0
        assert heaviside(0.0) == 0.5
        assert heaviside(-2.0) == 0.0

    def test_rejects_non_finite(self):
        for bad in (float("nan"), float("inf"), float("-inf")):
            with pytest.raises(ValueError):
                heaviside(bad)


class TestPairwise:
    def test_perfect_separation(self):
        assert auroc_pairwise([0.9, 0.8], [0.1, 0.2]).value == 1.0

    def test_single_tied_pair(self):
        assert auroc_pairwise([0.5], [0.5]).value == 0.5

    def test_mixed_pair(self):
        # Enumeration: (0.4, 0.6) -> 0, (0.8, 0.6) -> 1, mean 0.5.
        out = auroc_pairwise([0.4, 0.8], [0.6])
        assert out.value == 0.5
        assert (out.n_pos, out.n_neg) == (2, 1)

    def test_matches_enumeration_oracle(self):
        for seed in range(30):
            pos, neg = random_pos_neg(seed, max_n=40, ties=seed % 2 == 0)
            assert auroc_pairwise(pos, neg).value == pytest.approx(
                pairwise_oracle(pos, neg), abs=1e-15
            )

    def test_empty_side_rejected(self):
        with pytest.raises(EmptyClassError):
            auroc_pairwise([], [0.1])
        with pytest.raises(EmptyClassError):
            auroc_pairwise([0.1], [])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            auroc_pairwise([np.nan], [0.0])


class TestRankEquivalence:
    def test_perfect_and_tied(self):
        assert auroc_rank_scores([3.0, 4.0], [1.0, 2.0]).value == 1.0
        assert auroc_rank_scores([1.0, 1.0], [1.0, 1.0, 1.0]).value == 0.5

    def test_matches_pairwise_with_ties(self):
        # 200 random splits, half with heavy ties; the two routes share the
        # exact pair-win count so they must agree bitwise.
        for seed in range(200):
            pos, neg = random_pos_neg(seed, max_n=200, ties=seed % 2 == 0)
            assert auroc_rank_scores(pos, neg).value == auroc_pairwise(pos, neg).value

    def test_batch_wrapper(self):
        batch = random_batch(7, 50, 2)
        col = batch.scores[:, 1]
        expected = auroc_pairwise(col[batch.labels == 1], col[batch.labels == 0]).value
        assert auroc_rank(batch, positive_class=1).value == expected

    def test_batch_wrapper_requires_binary(self):
        with pytest.raises(ValueError):
            auroc_rank(random_batch(0, 30, 3), positive_class=0)


class TestCrossLibrary:
    def test_matches_sklearn_binary(self):
        sk = pytest.importorskip("sklearn.metrics")
        for seed in range(20):
            pos, neg = random_pos_neg(seed, max_n=80, ties=seed % 2 == 0)
            y = np.concatenate([np.ones(len(pos), dtype=int), np.zeros(len(neg), dtype=int)])
            s = np.concatenate([pos, neg])
            expected = sk.roc_auc_score(y, s)
            assert auroc_rank_scores(pos, neg).value == pytest.approx(expected, abs=1e-12)

    def test_matches_sklearn_macro_ovr(self):
        sk = pytest.importorskip("sklearn.metrics")
        rng = np.random.default_rng(8)
        for seed in range(10):
            batch = random_batch(seed, 60, 3)
            raw = np.exp(batch.scores)
            probs = raw / raw.sum(axis=1, keepdims=True)
            expected = sk.roc_auc_score(batch.labels, probs, multi_class="ovr", average="macro")
            got = auroc_multiclass_ovr(
                PredictionBatch(probs, batch.labels, probabilities=True)
            ).value
            assert got == pytest.approx(expected, abs=1e-12)


class TestComplementSymmetry:
    def test_exact_complement(self):
        for seed in range(200):
            pos, neg = random_pos_neg(seed, max_n=60, ties=seed % 2 == 0)
            v = auroc_pairwise(pos, neg).value
            w = auroc_pairwise(neg, pos).value
            assert w == 1.0 - v
            assert v == 1.0 - w


class TestBounds:
    def test_range_and_extremes(self):
        for seed in range(50):
            pos, neg = random_pos_neg(seed, max_n=50, ties=True)
            assert 0.0 <= auroc_pairwise(pos, neg).value <= 1.0
        assert auroc_pairwise([1.0, 2.0], [-1.0, 0.0]).value == 1.0
        assert auroc_pairwise([0.3] * 4, [0.3] * 5).value == 0.5


class TestMulticlassOvr:
    def test_one_hot_perfect(self):
        scores = np.eye(3)[[0, 0, 1, 1, 2, 2]]
        out = auroc_multiclass_ovr(PredictionBatch(scores, [0, 0, 1, 1, 2, 2]))
        assert out.value == 1.0
        assert all(r.value == 1.0 for r in out.per_class)

    def test_uniform_scores(self):
        scores = np.full((9, 3), 0.25)
        out = auroc_multiclass_ovr(PredictionBatch(scores, [0, 1, 2] * 3))
        assert out.value == 0.5

    def test_matches_per_class_pairwise_oracle(self):
        batch = random_batch(11, 30, 3)
        values = []
        for c in range(3):
            col = batch.scores[:, c]
            values.append(
                auroc_pairwise(col[batch.labels == c], col[batch.labels != c]).value
            )
        out = auroc_multiclass_ovr(batch)
        assert out.value == pytest.approx(np.mean(values), abs=1e-15)
        for got, expected in zip(out.per_class, values):
            assert got.value == expected

    def test_strict_missing_class(self):
        scores = np.random.default_rng(0).normal(size=(6, 3))
        with pytest.raises(EmptyClassError) as err:
            auroc_multiclass_ovr(PredictionBatch(scores, [0, 0, 0, 1, 1, 1]))
        assert err.value.class_index == 2

    def test_lenient_skips_and_flags(self):
        scores = np.random.default_rng(0).normal(size=(6, 3))
        batch = PredictionBatch(scores, [0, 0, 0, 1, 1, 1])
        out = auroc_multiclass_ovr(batch, lenient=True)
        assert out.per_class[2] is None
        col0, col1 = scores[:, 0], scores[:, 1]
        expected = 0.5 * (
            auroc_pairwise(col0[:3], col0[3:]).value
            + auroc_pairwise(col1[3:], col1[:3]).value
        )
        assert out.value == pytest.approx(expected, abs=1e-15)

    def test_binary_reduction(self):
        # A probability column and its complement: macro OvR equals the
        # binary AUROC of the positive column.
        rng = np.random.default_rng(3)
        p = rng.random(40)
        labels = rng.integers(0, 2, size=40)
        labels[:2] = [0, 1]
        batch = PredictionBatch(np.column_stack([1.0 - p, p]), labels, probabilities=True)
        macro = auroc_multiclass_ovr(batch).value
        binary = auroc_pairwise(p[labels == 1], p[labels == 0]).value
        assert abs(macro - binary) <= 1e-12


class TestMonotoneCheck:
    def test_affine_positive(self):
        assert monotone_check(random_batch(5, 40, 3), lambda s: 2.0 * s + 1.0)

    def test_cubic(self):
        assert monotone_check(random_batch(6, 40, 2), lambda s: s**3)

    def test_negation_detected(self):
        batch = random_batch(7, 40, 2)
        assert not monotone_check(batch, lambda s: -s)
        # Negation maps the AUROC to its complement.
        before = auroc_rank(batch, 1).value
        negated = PredictionBatch(-batch.scores, batch.labels)
        assert auroc_rank(negated, 1).value == 1.0 - before

    def test_monotone_invariance_property(self):
        for seed in range(20):
            batch = random_batch(seed, 30, 3)
            assert monotone_check(batch, np.tanh)


class TestPredictionBatch:
    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            PredictionBatch(np.zeros((3, 2)), [0, 1])

    def test_label_out_of_range(self):
        with pytest.raises(ValueError):
            PredictionBatch(np.zeros((3, 2)), [0, 1, 2])

    def test_non_finite_scores(self):
        scores = np.zeros((2, 2))
        scores[0, 0] = np.inf
        with pytest.raises(ValueError):
            PredictionBatch(scores, [0, 1])

    def test_counts(self):
        batch = PredictionBatch(np.zeros((4, 3)), [0, 0, 1, 2])
        assert batch.class_counts().tolist() == [2, 1, 1]
        assert batch.n_samples == 4 and batch.n_classes == 3
