import numpy as np
import pytest

from zsaudio.calibration import (
    null_input_weights,
    prior_match,
    reweight_matrix,
    uniform_prior,
)
from zsaudio.oracles import oracle_prior_match
from zsaudio.scores import posterior_matrix
from zsaudio.synth import SynthConfig, gen_instance, write_instance
from zsaudio.scorefile import read_score_file


def test_same_seed_is_bit_identical():
    a = gen_instance(123, 4, 50)
    b = gen_instance(123, 4, 50)
    assert np.array_equal(a.score_matrix.ll, b.score_matrix.ll)
    assert np.array_equal(a.null_matrix.ll, b.null_matrix.ll)
    assert a.score_matrix.golds == b.score_matrix.golds
    c = gen_instance(124, 4, 50)
    assert not np.array_equal(a.score_matrix.ll, c.score_matrix.ll)


def test_uniform_bias_distribution_tracks_prior():
    inst = gen_instance(3, 4, 5000)
    probs = posterior_matrix(inst.score_matrix.ll)
    dist = np.bincount(probs.argmax(axis=1), minlength=4) / inst.n
    assert np.abs(dist - inst.prior).max() <= 0.05


def test_planted_bias_skews_predictions():
    inst = gen_instance(4, 3, 5000, bias=np.array([10.0, 1.0, 1.0]))
    probs = posterior_matrix(inst.score_matrix.ll)
    dist = np.bincount(probs.argmax(axis=1), minlength=3) / inst.n
    assert dist[0] > 0.5


def test_uniform_bias_beats_chance():
    inst = gen_instance(5, 5, 5000)
    probs = posterior_matrix(inst.score_matrix.ll)
    accuracy = (probs.argmax(axis=1) == inst.golds).mean()
    assert accuracy > 1.0 / inst.k


def test_gen_instance_accepts_pinned_golds():
    golds = np.array([0, 1, 2, 0, 1, 2, 0, 1])
    inst = gen_instance(11, 3, 8, golds=golds)
    np.testing.assert_array_equal(inst.golds, golds)
    assert inst.score_matrix.golds == tuple(golds)
    with pytest.raises(ValueError):
        gen_instance(11, 3, 8, golds=np.array([0, 1, 2, 0, 1, 2, 0, 9]))


def test_gen_instance_validation():
    with pytest.raises(ValueError):
        gen_instance(0, 1, 10)
    with pytest.raises(ValueError):
        gen_instance(0, 5, 3)
    with pytest.raises(ValueError):
        gen_instance(0, 2, 10, bias=np.array([1.0, -1.0]))
    with pytest.raises(ValueError):
        gen_instance(0, 2, 10, prior=np.array([0.9, 0.2]))


def test_null_rows_recover_planted_bias():
    rng = np.random.default_rng(99)
    bias = np.exp(rng.uniform(0.0, np.log(10.0), size=5))
    inst = gen_instance(99, 5, 50, bias=bias, config=SynthConfig(num_null=2048))
    w = null_input_weights(posterior_matrix(inst.null_matrix.ll))
    expected = 1.0 / bias
    expected /= expected[0]
    np.testing.assert_allclose(w.alpha, expected, rtol=0.05)


def test_prior_match_beats_uncalibrated_on_biased_instance():
    inst = gen_instance(8, 6, 2000, bias=np.array([9.0, 5.0, 2.0, 1.0, 1.0, 1.0]))
    probs = posterior_matrix(inst.score_matrix.ll)
    uncal_acc = (probs.argmax(axis=1) == inst.golds).mean()
    w = prior_match(probs, uniform_prior(inst.k))
    cal = reweight_matrix(probs, w)
    cal_acc = (cal.argmax(axis=1) == inst.golds).mean()
    assert cal_acc > uncal_acc


def test_oracle_prior_match_k2_examples():
    already = np.array([[0.4, 0.6], [0.6, 0.4]])
    w = oracle_prior_match(already, np.array([0.5, 0.5]), resolution=1e-8)
    np.testing.assert_allclose(w.alpha, [1.0, 1.0], atol=1e-6)


def test_oracle_prior_match_unsupported_k():
    rng = np.random.default_rng(0)
    probs = rng.dirichlet(np.ones(4), size=10)
    from zsaudio.errors import UnsupportedError

    with pytest.raises(UnsupportedError):
        oracle_prior_match(probs)


def test_oracle_ctc_budget_guard():
    from zsaudio.ctc import CtcFrameLogits, CtcLabelSequence
    from zsaudio.errors import UnsupportedError
    from zsaudio.oracles import oracle_ctc

    frames = CtcFrameLogits(np.log(np.full((30, 4), 0.25)), blank_id=3)
    with pytest.raises(UnsupportedError):
        oracle_ctc(frames, CtcLabelSequence((0,)))


def test_write_instance_emits_standard_score_files(tmp_path):
    inst = gen_instance(1, 3, 12, config=SynthConfig(num_null=4))
    paths = write_instance(inst, tmp_path)
    scores = read_score_file(paths["scores"])
    nulls = read_score_file(paths["null_scores"])
    assert scores.n == 12 and scores.k == 3
    assert nulls.n == 4
    assert all(g is None for g in nulls.golds)
    np.testing.assert_array_equal(scores.ll, inst.score_matrix.ll)
