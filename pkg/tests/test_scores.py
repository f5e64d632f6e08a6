import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_matrix
from zsaudio.errors import AlignmentError, ArityError, DegenerateInputError
from zsaudio.scores import (
    LabelSet,
    PosteriorSet,
    PromptTemplate,
    ScoreMatrix,
    ensemble,
    posterior,
    posterior_matrix,
    posteriors,
    predict,
    predictions,
    render_prompt,
)

NEG_INF = float("-inf")


# ------------------------------------------------------------ prompt rendering


def test_render_default_prompt():
    t = PromptTemplate("sec", "This is a sound of {c}.")
    assert render_prompt(t, "rain") == "This is a sound of rain."


def test_render_emotion_prompt():
    t = PromptTemplate("er", "The speaker is feeling {c}.")
    assert render_prompt(t, "sad") == "The speaker is feeling sad."


def test_render_identity_template():
    t = PromptTemplate("bare", "{c}")
    assert render_prompt(t, "dog") == "dog"


def test_render_is_verbatim():
    t = PromptTemplate("x", "A {c} B")
    assert render_prompt(t, "  MiXeD CaSe ") == "A   MiXeD CaSe  B"


def test_render_question_prompt():
    t = PromptTemplate("aqa", "{q} {c}")
    assert render_prompt(t, "yes", question="Is it raining?") == "Is it raining? yes"


def test_render_arity_errors():
    plain = PromptTemplate("p", "{c}")
    qa = PromptTemplate("q", "{q} {c}")
    with pytest.raises(ArityError):
        render_prompt(plain, "dog", question="extra")
    with pytest.raises(ArityError):
        render_prompt(qa, "dog")


def test_default_prompts_are_valid_templates():
    from zsaudio.scores import DEFAULT_PROMPTS

    assert DEFAULT_PROMPTS["default"] == "This is a sound of {c}."
    assert DEFAULT_PROMPTS["emotion"] == "The speaker is feeling {c}."
    assert DEFAULT_PROMPTS["music_genre"] == "This is an audio of {c} music."
    assert DEFAULT_PROMPTS["speaker_count"] == "In the audio, {c} people are speaking."
    for kind, pattern in DEFAULT_PROMPTS.items():
        t = PromptTemplate(kind, pattern)
        assert render_prompt(t, "x").count("x") >= 1


def test_template_placeholder_validation():
    with pytest.raises(ValueError):
        PromptTemplate("bad", "no placeholder")
    with pytest.raises(ValueError):
        PromptTemplate("bad", "{c} and {c}")
    with pytest.raises(ValueError):
        PromptTemplate("bad", "{c} {q} {q}")


# ----------------------------------------------------------------- label sets


def test_label_set_invariants():
    with pytest.raises(ValueError):
        LabelSet("t", ("only",))
    with pytest.raises(ValueError):
        LabelSet("t", ("a", "a"))
    with pytest.raises(ValueError):
        LabelSet("t", ("a", ""))
    assert LabelSet("t", ("a", "b", "c")).k == 3


# ----------------------------------------------------------------- posteriors


def test_posterior_direct_normalization():
    p = posterior(np.log([0.2, 0.1, 0.1]))
    np.testing.assert_allclose(p, [0.5, 0.25, 0.25], atol=1e-12)


def test_posterior_uniform_for_equal_entries():
    for c in (-1234.5, 0.0, 17.25):
        p = posterior([c, c, c, c])
        np.testing.assert_allclose(p, [0.25] * 4, atol=1e-15)


def test_posterior_additive_shift_invariance():
    base = np.log([0.2, 0.1, 0.1])
    np.testing.assert_allclose(posterior(base + 7.0), [0.5, 0.25, 0.25], atol=1e-10)


def test_posterior_neg_inf_maps_to_zero():
    p = posterior([0.0, NEG_INF, 0.0])
    np.testing.assert_allclose(p, [0.5, 0.0, 0.5], atol=1e-15)
    assert p[1] == 0.0


def test_posterior_all_neg_inf_is_degenerate():
    with pytest.raises(DegenerateInputError):
        posterior([NEG_INF, NEG_INF])
    with pytest.raises(DegenerateInputError):
        posterior_matrix(np.array([[0.0, 0.0], [NEG_INF, NEG_INF]]))


def test_posterior_rejects_nan_and_posinf():
    with pytest.raises(ValueError):
        posterior([0.0, float("nan")])
    with pytest.raises(ValueError):
        posterior([0.0, float("inf")])


finite_ll = st.floats(min_value=-500.0, max_value=500.0, allow_nan=False)


@given(st.lists(finite_ll, min_size=2, max_size=12),
       st.floats(min_value=-200, max_value=200, allow_nan=False))
def test_posterior_row_sums_and_shift_property(row, shift):
    p = posterior(row)
    assert abs(p.sum() - 1.0) <= 1e-12
    assert (p >= 0).all()
    q = posterior(np.asarray(row) + shift)
    np.testing.assert_allclose(p, q, atol=1e-10)


@given(
    st.lists(st.integers(-40, 40), min_size=2, max_size=10, unique=True),
    st.randoms(),
)
def test_predict_permutation_equivariance(int_row, rnd):
    # distinct integer log-likelihoods keep the argmax unique after exp
    row = [float(x) for x in int_row]
    perm = list(range(len(row)))
    rnd.shuffle(perm)
    base = predict(posterior(row))
    permuted = predict(posterior([row[j] for j in perm]))
    assert perm[permuted] == base


# ---------------------------------------------------------------- predictions


def test_predict_examples():
    assert predict([0.5, 0.25, 0.25]) == 0
    assert predict([0.4, 0.4, 0.2]) == 0  # tie -> lowest index
    assert predict([0.1, 0.2, 0.7]) == 2


def test_predictions_carry_confidence():
    pset = PosteriorSet(("a", "b"), np.array([[0.7, 0.3], [0.2, 0.8]]))
    preds = predictions(pset)
    assert [(p.utt_id, p.class_index) for p in preds] == [("a", 0), ("b", 1)]
    assert preds[0].confidence == pytest.approx(0.7)


# ------------------------------------------------------------------- ensemble


def test_ensemble_of_identical_sets_is_identity():
    probs = np.array([[0.6, 0.4], [0.25, 0.75]])
    pset = PosteriorSet(("a", "b"), probs)
    out = ensemble([pset, pset])
    assert np.array_equal(out.probs, probs)
    single = ensemble([pset])
    assert np.array_equal(single.probs, probs)


def test_ensemble_mean_example():
    a = PosteriorSet(("u",), np.array([[0.6, 0.4]]))
    b = PosteriorSet(("u",), np.array([[0.2, 0.8]]))
    np.testing.assert_allclose(ensemble([a, b]).probs, [[0.4, 0.6]], atol=1e-15)


def test_ensemble_three_prompts_example():
    sets = [
        PosteriorSet(("u",), np.array([[1.0, 0.0]])),
        PosteriorSet(("u",), np.array([[0.0, 1.0]])),
        PosteriorSet(("u",), np.array([[0.5, 0.5]])),
    ]
    np.testing.assert_allclose(ensemble(sets).probs, [[0.5, 0.5]], atol=1e-15)


def test_ensemble_alignment_errors():
    a = PosteriorSet(("a",), np.array([[0.5, 0.5]]))
    b = PosteriorSet(("b",), np.array([[0.5, 0.5]]))
    wide = PosteriorSet(("a",), np.array([[0.3, 0.3, 0.4]]))
    with pytest.raises(AlignmentError):
        ensemble([a, b])
    with pytest.raises(AlignmentError):
        ensemble([a, wide])
    with pytest.raises(AlignmentError):
        ensemble([])


@st.composite
def posterior_sets(draw):
    n = draw(st.integers(2, 5))
    k = draw(st.integers(2, 4))
    n_prompts = draw(st.integers(1, 4))
    utts = tuple(f"u{i}" for i in range(n))
    sets = []
    for _ in range(n_prompts):
        raw = draw(
            st.lists(
                st.lists(st.floats(0.01, 1.0), min_size=k, max_size=k),
                min_size=n, max_size=n,
            )
        )
        arr = np.asarray(raw)
        arr /= arr.sum(axis=1, keepdims=True)
        sets.append(PosteriorSet(utts, arr))
    return sets


@given(posterior_sets(), st.randoms())
@settings(deadline=None)
def test_ensemble_order_invariance_is_exact(sets, rnd):
    forward = ensemble(sets)
    shuffled = list(sets)
    rnd.shuffle(shuffled)
    assert np.array_equal(forward.probs, ensemble(shuffled).probs)


# --------------------------------------------------------------- score matrix


def test_score_matrix_validation():
    with pytest.raises(ValueError):
        make_matrix(np.zeros((2, 3)), utt_ids=("a", "a"))
    with pytest.raises(ValueError):
        make_matrix(np.zeros((2, 3)), golds=(0, 5))
    with pytest.raises(ValueError):
        make_matrix(np.zeros((2, 3)), utt_ids=("NULL:zero", "NULL:noise"))
    with pytest.raises(ValueError):
        make_matrix(np.zeros((1, 3)), utt_ids=("NULL:zero",), golds=(1,))
    with pytest.raises(ValueError):
        make_matrix(np.full((2, 2), float("nan")))


def test_null_row_is_separated(toy_matrix):
    ll = np.vstack([toy_matrix.ll, np.log([0.8, 0.1, 0.1])])
    m = make_matrix(ll, golds=(0, 2, 1, None),
                    utt_ids=("u0", "u1", "u2", "NULL:zero"))
    data = m.data_rows()
    assert data.n == 3
    assert data.utt_ids == ("u0", "u1", "u2")
    np.testing.assert_allclose(m.null_ll(), np.log([0.8, 0.1, 0.1]))
    assert toy_matrix.null_ll() is None


def test_posteriors_skip_null_row():
    m = make_matrix(
        np.log([[0.5, 0.5], [0.9, 0.1]]),
        utt_ids=("u0", "NULL:zero"),
        golds=(1, None),
    )
    pset = posteriors(m)
    assert pset.utt_ids == ("u0",)
    np.testing.assert_allclose(pset.probs, [[0.5, 0.5]], atol=1e-12)
