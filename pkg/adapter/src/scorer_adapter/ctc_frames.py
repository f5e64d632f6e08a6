"""Per-frame log-probability export for CTC models."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .audio import load_audio
from .config import AdapterConfig
from .formats import write_frame_file

log = logging.getLogger(__name__)


class CtcBackend(Protocol):
    vocab: list[str]
    blank_id: int

    def frame_log_probs(self, audio: np.ndarray) -> np.ndarray:
        """T x V log-probability rows for one 16 kHz mono waveform."""


def score_ctc_frames(
    audio_paths: Sequence[Path],
    config: AdapterConfig,
    backend: CtcBackend,
    out_dir: str | Path,
) -> tuple[list[Path], list[str]]:
    """One frame file per utterance, vocabulary and blank id recorded."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    errors: list[str] = []
    for path in audio_paths:
        utt = Path(path).stem
        try:
            audio = load_audio(path)
            log_probs = np.asarray(backend.frame_log_probs(audio), dtype=np.float64)
        except Exception as exc:
            log.warning("skipping %s: %s", path, exc)
            errors.append(f"{path}: {exc}")
            continue
        written.append(
            write_frame_file(
                out_dir / f"{utt}.frames",
                utt_id=utt,
                log_probs=log_probs,
                blank_id=backend.blank_id,
                vocab=backend.vocab,
            )
        )
    return written, errors
