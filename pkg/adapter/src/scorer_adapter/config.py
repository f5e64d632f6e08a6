"""Adapter configuration."""

from __future__ import annotations

from dataclasses import dataclass

MODES = ("seq2seq_ll", "ctc_frames")
NULL_MODES = ("none", "zero_encoder_input", "audio_files")

SAMPLE_RATE = 16000  # models are pre-trained on 16 kHz audio; fixed


@dataclass(frozen=True)
class AdapterConfig:
    model_id: str
    mode: str = "seq2seq_ll"
    sample_rate: int = SAMPLE_RATE
    batch_size: int = 8
    device: str = "cpu"
    null_mode: str = "none"
    suppress_special: bool = True  # score text tokens only, never specials
    score_eos: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.null_mode not in NULL_MODES:
            raise ValueError(
                f"null_mode must be one of {NULL_MODES}, got {self.null_mode!r}"
            )
        if self.sample_rate != SAMPLE_RATE:
            raise ValueError(f"sample_rate is pinned to {SAMPLE_RATE} Hz")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")

    def scoring_record(self) -> dict:
        """Manifest payload recording every reproducibility-relevant switch."""
        return {
            "suppress_special": self.suppress_special,
            "score_eos": self.score_eos,
            "sample_rate": self.sample_rate,
        }
