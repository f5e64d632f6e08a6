import json
import math

import numpy as np
import pytest

from scorer_adapter.audio import list_audio_files, load_audio
from scorer_adapter.config import AdapterConfig
from scorer_adapter.seq2seq import score_aqa, score_seq2seq, teacher_forced_ll
from scorer_adapter.toy import ToySeq2SeqBackend

CLASSES = ["rain", "wind", "thunder"]
PATTERN = "this is a sound of {c}."


@pytest.fixture
def backend():
    return ToySeq2SeqBackend(seed=0)


def read_jsonl(path):
    lines = path.read_text().splitlines()
    return json.loads(lines[0]), [json.loads(l) for l in lines[1:]]


def test_identical_prompts_get_identical_ll(backend, audio_dir):
    audio = [load_audio(p) for p in list_audio_files(audio_dir)]
    features = backend.features(audio)
    ll = teacher_forced_ll(backend, features, ["same text", "same text"])
    np.testing.assert_array_equal(ll[:, 0], ll[:, 1])


def test_ll_finite_and_negative(backend, audio_dir):
    audio = [load_audio(p) for p in list_audio_files(audio_dir)]
    ll = teacher_forced_ll(backend, backend.features(audio), ["abc", "a b c"])
    assert np.isfinite(ll).all()
    assert (ll < 0).all()


def test_prefix_monotonicity(backend, audio_dir):
    # a strict prefix can never score below its extension
    audio = [load_audio(p) for p in list_audio_files(audio_dir)]
    features = backend.features(audio)
    text = "this is a sound of rain."
    prefixes = [text[:i] for i in range(1, len(text) + 1)]
    ll = teacher_forced_ll(backend, features, prefixes)
    diffs = np.diff(ll, axis=1)
    assert (diffs <= 1e-12).all()


def test_batching_matches_per_row_scoring(backend, audio_dir):
    audio = [load_audio(p) for p in list_audio_files(audio_dir)]
    batched = teacher_forced_ll(backend, backend.features(audio), ["rain"])
    single = np.vstack(
        [teacher_forced_ll(backend, backend.features([a]), ["rain"]) for a in audio]
    )
    np.testing.assert_allclose(batched, single, atol=1e-9)


def test_score_seq2seq_file_contract(backend, audio_dir, tmp_path):
    config = AdapterConfig(model_id="toy-seq2seq")
    out, errors = score_seq2seq(
        list_audio_files(audio_dir), PATTERN, CLASSES, config, backend,
        tmp_path / "scores.jsonl",
        task_id="toy-task", prompt_id="default", golds={"clip0": 1},
    )
    assert errors == []
    manifest, records = read_jsonl(out)
    assert manifest["task_id"] == "toy-task"
    assert manifest["model_id"] == "toy-seq2seq"
    assert manifest["class_names"] == CLASSES
    assert manifest["scoring"]["suppress_special"] is True
    assert [r["utt"] for r in records] == ["clip0", "clip1", "clip2"]
    assert records[0]["gold"] == 1 and records[1]["gold"] is None
    for r in records:
        assert len(r["ll"]) == len(CLASSES)
        assert all(isinstance(x, float) and math.isfinite(x) for x in r["ll"])


def test_rerun_is_bit_stable(backend, audio_dir, tmp_path):
    config = AdapterConfig(model_id="toy-seq2seq")
    paths = list_audio_files(audio_dir)
    a, _ = score_seq2seq(paths, PATTERN, CLASSES, config, backend,
                         tmp_path / "a.jsonl", task_id="t", prompt_id="p")
    b, _ = score_seq2seq(paths, PATTERN, CLASSES, config, backend,
                         tmp_path / "b.jsonl", task_id="t", prompt_id="p")
    assert a.read_bytes() == b.read_bytes()
    fresh = ToySeq2SeqBackend(seed=0)
    c, _ = score_seq2seq(paths, PATTERN, CLASSES, config, fresh,
                         tmp_path / "c.jsonl", task_id="t", prompt_id="p")
    assert a.read_bytes() == c.read_bytes()


def test_zero_null_mode_appends_flagged_row(backend, audio_dir, tmp_path):
    config = AdapterConfig(model_id="toy-seq2seq", null_mode="zero_encoder_input")
    out, _ = score_seq2seq(
        list_audio_files(audio_dir), PATTERN, CLASSES, config, backend,
        tmp_path / "scores.jsonl", task_id="t", prompt_id="p",
    )
    _, records = read_jsonl(out)
    assert records[-1]["utt"] == "NULL:zero"
    assert records[-1]["gold"] is None
    assert len([r for r in records if r["utt"].startswith("NULL:")]) == 1


def test_undecodable_audio_is_skipped_and_reported(backend, audio_dir, tmp_path):
    bad = audio_dir / "broken.wav"
    bad.write_bytes(b"not audio at all")
    config = AdapterConfig(model_id="toy-seq2seq")
    out, errors = score_seq2seq(
        list_audio_files(audio_dir), PATTERN, CLASSES, config, backend,
        tmp_path / "scores.jsonl", task_id="t", prompt_id="p",
    )
    assert len(errors) == 1 and "broken.wav" in errors[0]
    _, records = read_jsonl(out)
    assert [r["utt"] for r in records] == ["clip0", "clip1", "clip2"]


def test_score_aqa_contract(backend, audio_dir, tmp_path):
    questions = [
        {"utt": "clip0", "question": "is it raining?", "gold": 0},
        {"utt": "clip1", "question": "is it quiet?", "gold": 1},
        {"utt": "clip2", "question": "any thunder?", "gold": None},
    ]
    config = AdapterConfig(model_id="toy-seq2seq")
    out, errors = score_aqa(
        list_audio_files(audio_dir), questions, config, backend,
        tmp_path / "aqa.jsonl", task_id="aqa-toy",
    )
    assert errors == []
    manifest, records = read_jsonl(out)
    assert manifest["class_names"] == ["yes", "no"]
    assert len(records) == 3
    assert all(len(r["ll"]) == 2 for r in records)
    # rerun identical
    out2, _ = score_aqa(
        list_audio_files(audio_dir), questions, config, backend,
        tmp_path / "aqa2.jsonl", task_id="aqa-toy",
    )
    a = out.read_text().splitlines()[1:]
    b = out2.read_text().splitlines()[1:]
    assert a == b


def test_aqa_question_changes_scores(backend, audio_dir, tmp_path):
    config = AdapterConfig(model_id="toy-seq2seq")
    qs1 = [{"utt": "clip0", "question": "is it raining?", "gold": None}]
    qs2 = [{"utt": "clip0", "question": "is the speaker angry?", "gold": None}]
    paths = list_audio_files(audio_dir)[:1]
    out1, _ = score_aqa(paths, qs1, config, backend, tmp_path / "q1.jsonl",
                        task_id="t")
    out2, _ = score_aqa(paths, qs2, config, backend, tmp_path / "q2.jsonl",
                        task_id="t")
    ll1 = json.loads(out1.read_text().splitlines()[1])["ll"]
    ll2 = json.loads(out2.read_text().splitlines()[1])["ll"]
    assert ll1 != ll2
