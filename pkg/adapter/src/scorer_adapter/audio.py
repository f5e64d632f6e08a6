"""Audio loading: mono float32 at 16 kHz, whatever the file provides."""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

from .config import SAMPLE_RATE


def load_wav(path: str | Path) -> tuple[np.ndarray, int]:
    """Read a PCM WAV file as float32 in [-1, 1], downmixing to mono."""
    path = Path(path)
    with wave.open(str(path), "rb") as fh:
        channels = fh.getnchannels()
        width = fh.getsampwidth()
        rate = fh.getframerate()
        raw = fh.readframes(fh.getnframes())
    if width == 2:
        samples = np.frombuffer(raw, dtype=np.int16).astype(np.float32) / 32768.0
    elif width == 4:
        samples = np.frombuffer(raw, dtype=np.int32).astype(np.float32) / 2147483648.0
    elif width == 1:
        samples = (np.frombuffer(raw, dtype=np.uint8).astype(np.float32) - 128.0) / 128.0
    else:
        raise ValueError(f"{path}: unsupported sample width {width}")
    if channels > 1:
        samples = samples.reshape(-1, channels).mean(axis=1)
    return samples, rate


def to_16k_mono(samples: np.ndarray, rate: int) -> np.ndarray:
    if rate == SAMPLE_RATE:
        return samples.astype(np.float32)
    from math import gcd

    g = gcd(SAMPLE_RATE, rate)
    out = resample_poly(samples, SAMPLE_RATE // g, rate // g)
    return out.astype(np.float32)


def load_audio(path: str | Path) -> np.ndarray:
    samples, rate = load_wav(path)
    return to_16k_mono(samples, rate)


def list_audio_files(directory: str | Path) -> list[Path]:
    directory = Path(directory)
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() == ".wav")
    if not files:
        raise ValueError(f"no .wav files under {directory}")
    return files
