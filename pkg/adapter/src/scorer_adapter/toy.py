"""Tiny deterministic backends for smoke tests and offline pipelines.

Random-weight models with a character tokenizer: useless for real
classification, but they exercise the full scoring path (features, teacher
forcing, frame export) with bit-stable outputs, which is what the tests
and format contracts need.
"""

from __future__ import annotations

import numpy as np
import torch

from .seq2seq import PromptCoder

ALPHABET = " abcdefghijklmnopqrstuvwxyz0123456789.,?!'\"()[]-"
BOS_ID = 0
EOS_ID = 1
UNK_ID = 2
CHAR_OFFSET = 3
VOCAB_SIZE = CHAR_OFFSET + len(ALPHABET)

FRAME_SAMPLES = 400


def toy_coder() -> PromptCoder:
    char_to_id = {c: CHAR_OFFSET + i for i, c in enumerate(ALPHABET)}

    def encode(text: str) -> list[int]:
        return [char_to_id.get(c.lower(), UNK_ID) for c in text]

    return PromptCoder(prefix_ids=(BOS_ID,), eos_id=EOS_ID, encode=encode)


def _frame_stats(audio: np.ndarray, n_frames: int) -> np.ndarray:
    padded = np.zeros(n_frames * FRAME_SAMPLES, dtype=np.float32)
    padded[: min(len(audio), len(padded))] = audio[: len(padded)]
    frames = padded.reshape(n_frames, FRAME_SAMPLES)
    return np.stack(
        [frames.mean(1), frames.std(1), frames.min(1), frames.max(1)], axis=1
    )


class ToySeq2SeqBackend:
    """Bigram-style decoder conditioned on pooled waveform statistics."""

    feature_dim = 4

    def __init__(self, seed: int = 0, hidden: int = 32):
        self.coder = toy_coder()
        gen = torch.Generator().manual_seed(seed)
        self.embed = torch.randn(VOCAB_SIZE, hidden, generator=gen) * 0.5
        self.audio_proj = torch.randn(self.feature_dim, hidden, generator=gen) * 0.5
        self.readout = torch.randn(hidden, VOCAB_SIZE, generator=gen) * 0.5

    def _n_frames(self, audio: np.ndarray) -> int:
        return max(1, int(np.ceil(len(audio) / FRAME_SAMPLES)))

    def features(self, audio) -> torch.Tensor:
        n_frames = max(self._n_frames(a) for a in audio)
        stats = np.stack([_frame_stats(a, n_frames) for a in audio])
        return torch.from_numpy(stats)

    def zero_features(self) -> torch.Tensor:
        return torch.zeros(1, 10, self.feature_dim)

    def decode_logits(self, features, decoder_input_ids) -> torch.Tensor:
        pooled = features.mean(dim=1) @ self.audio_proj  # (B, H)
        token_h = self.embed[decoder_input_ids]  # (B, L, H)
        # causal prefix summary keeps the model autoregressive while making
        # every earlier token (e.g. the AQA question) matter
        steps = torch.arange(1, token_h.shape[1] + 1, dtype=token_h.dtype)
        prefix_mean = token_h.cumsum(dim=1) / steps[None, :, None]
        hidden = torch.tanh(token_h + 0.5 * prefix_mean + pooled[:, None, :])
        return hidden @ self.readout


class ToyCtcBackend:
    """Random linear CTC head over windowed waveform statistics."""

    def __init__(self, seed: int = 0):
        self.vocab = ["<blank>"] + list("abcdefghijklmnopqrstuvwxyz '")
        self.blank_id = 0
        gen = torch.Generator().manual_seed(seed)
        self.weights = torch.randn(4, len(self.vocab), generator=gen) * 0.5

    def frame_log_probs(self, audio: np.ndarray) -> np.ndarray:
        n_frames = max(1, int(np.ceil(len(audio) / FRAME_SAMPLES)))
        stats = torch.from_numpy(_frame_stats(audio, n_frames))
        logits = stats @ self.weights
        return torch.log_softmax(logits.to(torch.float64), dim=-1).numpy()
