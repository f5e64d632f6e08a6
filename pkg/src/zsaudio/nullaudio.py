"""Null-input fixture generation.

Two kinds of information-free inputs are supported: Gaussian white-noise
clips written as mono PCM16 waveforms, and a marker file instructing a
scorer adapter to feed all-zero encoder features instead of audio.
"""

from __future__ import annotations

import json
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

KIND_ZERO = "zero_encoder_input"
KIND_NOISE = "gaussian_noise"
ZERO_MARKER_NAME = "zero_encoder_input.json"

PCM16_FULL_SCALE = 32767


@dataclass(frozen=True)
class NullInputSpec:
    kind: str
    sigma: float = 1.0
    duration_s: float = 5.0
    sample_rate: int = 16000
    num_clips: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (KIND_ZERO, KIND_NOISE):
            raise ValueError(f"kind must be {KIND_ZERO} or {KIND_NOISE}")
        if self.kind == KIND_NOISE and self.sigma <= 0:
            raise ValueError("sigma must be positive for gaussian_noise")
        if self.duration_s <= 0:
            raise ValueError("duration_s must be positive")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.num_clips < 1:
            raise ValueError("num_clips must be >= 1")


def _write_pcm16(path: Path, samples: np.ndarray, sample_rate: int) -> None:
    # sigma=1 noise regularly exceeds full scale; clip before quantizing so
    # the rule is documented rather than left to integer wraparound.
    clipped = np.clip(samples, -1.0, 1.0)
    pcm = np.round(clipped * PCM16_FULL_SCALE).astype(np.int16)
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(sample_rate)
        fh.writeframes(pcm.tobytes())


def generate_null_audio(spec: NullInputSpec, out_dir: str | Path) -> list[Path]:
    """Write the null-input fixtures for one task and return their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if spec.kind == KIND_ZERO:
        marker = out_dir / ZERO_MARKER_NAME
        marker.write_text(
            json.dumps(
                {
                    "kind": KIND_ZERO,
                    "instruction": "feed all-zero encoder features in place of audio",
                },
                indent=2,
            )
            + "\n",
            encoding="utf-8",
        )
        return [marker]
    n_samples = round(spec.duration_s * spec.sample_rate)
    rng = np.random.default_rng(spec.seed)
    paths = []
    for i in range(spec.num_clips):
        samples = rng.standard_normal(n_samples) * spec.sigma
        path = out_dir / f"null_noise_{i:04d}.wav"
        _write_pcm16(path, samples, spec.sample_rate)
        paths.append(path)
    return paths


def read_pcm16(path: str | Path) -> tuple[np.ndarray, int]:
    """Load a mono PCM16 waveform back as float32 in [-1, 1]."""
    with wave.open(str(path), "rb") as fh:
        if fh.getnchannels() != 1 or fh.getsampwidth() != 2:
            raise ValueError(f"{path}: expected mono PCM16")
        rate = fh.getframerate()
        raw = fh.readframes(fh.getnframes())
    pcm = np.frombuffer(raw, dtype=np.int16)
    return pcm.astype(np.float32) / PCM16_FULL_SCALE, rate
