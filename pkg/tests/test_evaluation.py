import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_matrix
from zsaudio.errors import MissingGoldError
from zsaudio.evaluation import (
    evaluate,
    precision_recall_curve,
    random_baseline,
)
from zsaudio.oracles import oracle_pr_curve
from zsaudio.scores import Prediction, posteriors, predictions


def preds_of(indices):
    return [Prediction(f"u{i}", c, 1.0) for i, c in enumerate(indices)]


# ------------------------------------------------------------------- evaluate


def test_accuracy_three_of_four():
    core = evaluate(preds_of([0, 1, 2, 0]), [0, 1, 2, 1], k=3)
    assert core.accuracy == 0.75
    assert core.n == 4


def test_distribution_all_class_zero():
    core = evaluate(preds_of([0, 0, 0]), [0, 1, 2], k=3)
    np.testing.assert_array_equal(core.class_distribution, [1.0, 0.0, 0.0])


def test_missing_gold_lists_utt_ids():
    with pytest.raises(MissingGoldError) as err:
        evaluate(preds_of([0, 1, 0]), [0, None, None], k=2)
    assert err.value.utt_ids == ["u1", "u2"]


def test_evaluate_row_order_invariance():
    preds = preds_of([0, 1, 1, 0, 2])
    golds = [0, 1, 0, 2, 2]
    fwd = evaluate(preds, golds, k=3)
    rev = evaluate(preds[::-1], golds[::-1], k=3)
    assert fwd.accuracy == rev.accuracy
    np.testing.assert_array_equal(fwd.class_distribution, rev.class_distribution)


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)),
                min_size=1, max_size=60))
def test_accuracy_times_n_is_integer(pairs):
    preds = preds_of([p for p, _ in pairs])
    golds = [g for _, g in pairs]
    core = evaluate(preds, golds, k=4)
    assert abs(core.accuracy * core.n - round(core.accuracy * core.n)) < 1e-9
    assert abs(core.class_distribution.sum() - 1.0) <= 1e-12


def test_esc50_shaped_instance_loads_and_baseline():
    # ESC50 shape: 2000 utterances over 50 classes; random guessing = 2.0%
    rng = np.random.default_rng(0)
    ll = rng.normal(size=(2000, 50))
    golds = tuple(int(g) for g in rng.integers(0, 50, size=2000))
    matrix = make_matrix(ll, golds=golds, task_id="esc50")
    assert (matrix.n, matrix.k) == (2000, 50)
    assert random_baseline(matrix.k) == pytest.approx(0.020)
    core = evaluate(predictions(posteriors(matrix)), list(matrix.golds), matrix.k)
    # chance-level scores land near the random baseline
    assert abs(core.accuracy - 0.02) < 0.02


def test_random_baseline_values():
    assert random_baseline(50) == pytest.approx(0.020)
    assert random_baseline(11) == pytest.approx(0.0909, abs=5e-5)
    assert random_baseline(2) == 0.5
    with pytest.raises(ValueError):
        random_baseline(1)


# ------------------------------------------------------------------- PR curve


def two_col(scores):
    scores = np.asarray(scores, dtype=np.float64)
    return np.column_stack([1.0 - scores, scores])


def test_pr_perfectly_separated_reaches_one_one():
    probs = two_col([0.9, 0.8, 0.2, 0.1])
    golds = [1, 1, 0, 0]
    points = precision_recall_curve(probs, golds, positive_class=1)
    assert any(pt.precision == 1.0 and pt.recall == 1.0 for pt in points)


def test_pr_constant_scores_single_point():
    probs = two_col([0.5, 0.5, 0.5, 0.5, 0.5])
    golds = [1, 0, 0, 1, 0]  # q = 2/5 positives
    points = precision_recall_curve(probs, golds, positive_class=1)
    assert len(points) == 1
    assert points[0].precision == pytest.approx(0.4)
    assert points[0].recall == 1.0


def test_pr_recall_non_increasing_with_threshold():
    rng = np.random.default_rng(3)
    probs = two_col(rng.uniform(size=120))
    golds = rng.integers(0, 2, size=120)
    points = precision_recall_curve(probs, golds, positive_class=1)
    thresholds = [pt.threshold for pt in points]
    assert thresholds == sorted(thresholds)
    recalls = [pt.recall for pt in points]
    assert all(a >= b for a, b in zip(recalls, recalls[1:]))


def test_pr_matches_quadratic_oracle_exactly():
    rng = np.random.default_rng(17)
    # quantized scores force threshold ties
    scores = np.round(rng.uniform(size=200), 2)
    probs = two_col(scores)
    golds = rng.integers(0, 2, size=200)
    fast = precision_recall_curve(probs, golds, positive_class=1)
    slow = oracle_pr_curve(probs, golds, positive_class=1)
    assert fast == slow


def test_pr_positive_class_zero():
    probs = two_col([0.9, 0.1])
    points = precision_recall_curve(probs, [1, 0], positive_class=0)
    slow = oracle_pr_curve(probs, [1, 0], positive_class=0)
    assert points == slow


def test_pr_requires_positive_golds():
    with pytest.raises(ValueError):
        precision_recall_curve(two_col([0.5, 0.6]), [0, 0], positive_class=1)


@given(st.integers(0, 10_000), st.integers(5, 80))
@settings(deadline=None, max_examples=40)
def test_pr_oracle_equivalence_property(seed, n):
    rng = np.random.default_rng(seed)
    scores = np.round(rng.uniform(size=n), 1)
    golds = rng.integers(0, 2, size=n)
    if (golds == 1).sum() == 0:
        golds[0] = 1
    probs = two_col(scores)
    assert precision_recall_curve(probs, golds, 1) == oracle_pr_curve(probs, golds, 1)
