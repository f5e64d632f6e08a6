import json

import numpy as np
import pytest

from scorer_adapter.audio import list_audio_files
from scorer_adapter.config import AdapterConfig
from scorer_adapter.ctc_frames import score_ctc_frames
from scorer_adapter.toy import ToyCtcBackend


@pytest.fixture
def backend():
    return ToyCtcBackend(seed=0)


def test_frame_rows_sum_to_one(backend, audio_dir, tmp_path):
    config = AdapterConfig(model_id="toy-ctc", mode="ctc_frames")
    written, errors = score_ctc_frames(
        list_audio_files(audio_dir), config, backend, tmp_path / "frames"
    )
    assert errors == []
    assert len(written) == 3
    for path in written:
        lines = path.read_text().splitlines()
        header = json.loads(lines[0])
        assert header["V"] == len(backend.vocab)
        assert header["blank_id"] == backend.blank_id
        assert header["vocab"] == backend.vocab
        assert len(lines) - 1 == header["T"]
        rows = np.array([[float(x) for x in line.split()] for line in lines[1:]])
        np.testing.assert_allclose(np.exp(rows).sum(axis=1), 1.0, atol=1e-4)


def test_same_audio_identical_files(backend, audio_dir, tmp_path):
    config = AdapterConfig(model_id="toy-ctc", mode="ctc_frames")
    paths = list_audio_files(audio_dir)
    a, _ = score_ctc_frames(paths, config, backend, tmp_path / "a")
    b, _ = score_ctc_frames(paths, config, backend, tmp_path / "b")
    for p1, p2 in zip(a, b):
        assert p1.read_bytes() == p2.read_bytes()


def test_undecodable_audio_reported(backend, audio_dir, tmp_path):
    (audio_dir / "bad.wav").write_bytes(b"junk")
    config = AdapterConfig(model_id="toy-ctc", mode="ctc_frames")
    written, errors = score_ctc_frames(
        list_audio_files(audio_dir), config, backend, tmp_path / "frames"
    )
    assert len(errors) == 1
    assert len(written) == 3
