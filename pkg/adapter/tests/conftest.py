import wave

import numpy as np
import pytest


def write_wav(path, samples, rate=16000):
    pcm = np.clip(np.asarray(samples), -1.0, 1.0)
    pcm = np.round(pcm * 32767).astype(np.int16)
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(rate)
        fh.writeframes(pcm.tobytes())
    return path


@pytest.fixture
def audio_dir(tmp_path):
    rng = np.random.default_rng(0)
    d = tmp_path / "audio"
    d.mkdir()
    for i in range(3):
        write_wav(d / f"clip{i}.wav", rng.normal(scale=0.1, size=8000))
    return d
