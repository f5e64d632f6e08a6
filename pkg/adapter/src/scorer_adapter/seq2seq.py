"""Teacher-forced prompt scoring for encoder-decoder ASR models.

The log-likelihood of a rendered prompt is the sum of per-token
log-probabilities when the decoder is forced through the prompt's token
sequence.  Special conditioning tokens (decoder start, language/task tags)
are part of the context and, with ``suppress_special`` set, never scored;
only the text tokens contribute.  No sampling anywhere: outputs are a pure
function of audio, text and checkpoint.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol, Sequence

import numpy as np
import torch

from .audio import load_audio
from .config import AdapterConfig
from .formats import NULL_ZERO_UTT, render_prompt, write_score_file

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PromptCoder:
    """Maps text to decoder token ids.

    ``prefix_ids`` holds the decoder-start and conditioning tokens that
    every target sequence begins with; ``encode`` produces the text tokens
    only.
    """

    prefix_ids: tuple[int, ...]
    eos_id: int | None
    encode: Callable[[str], list[int]]

    def __post_init__(self):
        if len(self.prefix_ids) < 1:
            raise ValueError("prefix_ids needs at least the decoder start token")


class Seq2SeqBackend(Protocol):
    coder: PromptCoder

    def features(self, audio: Sequence[np.ndarray]) -> torch.Tensor:
        """Encoder input features for a batch of 16 kHz mono waveforms."""

    def zero_features(self) -> torch.Tensor:
        """An all-zero encoder input of canonical shape (batch of one)."""

    def decode_logits(
        self, features: torch.Tensor, decoder_input_ids: torch.Tensor
    ) -> torch.Tensor:
        """Decoder logits (B, L, V) under teacher forcing."""


@torch.no_grad()
def teacher_forced_ll(
    backend: Seq2SeqBackend,
    features: torch.Tensor,
    targets: Sequence[str],
    context: str | None = None,
    *,
    suppress_special: bool = True,
    score_eos: bool = False,
) -> np.ndarray:
    """Log-likelihood of each target text for each feature row.

    Returns an array of shape (batch, len(targets)).  ``context`` text (the
    AQA question) is tokenized into the conditioning prefix and never
    scored.
    """
    coder = backend.coder
    ctx_ids = list(coder.prefix_ids)
    if context is not None:
        ctx_ids += coder.encode(context)
    batch = features.shape[0]
    out = np.empty((batch, len(targets)), dtype=np.float64)
    for j, text in enumerate(targets):
        target_ids = coder.encode(text)
        if score_eos:
            if coder.eos_id is None:
                raise ValueError("score_eos requires an eos token")
            target_ids = target_ids + [coder.eos_id]
        if not target_ids:
            raise ValueError(f"target {text!r} tokenizes to nothing")
        full = torch.tensor(ctx_ids + target_ids, dtype=torch.long)
        logits = backend.decode_logits(features, full[:-1].expand(batch, -1))
        logp = torch.log_softmax(logits.to(torch.float64), dim=-1)
        predicted = full[1:]
        token_ll = logp[:, torch.arange(len(predicted)), predicted]
        if suppress_special:
            scored = token_ll[:, len(ctx_ids) - 1 :]
        else:
            scored = token_ll
        out[:, j] = scored.sum(dim=1).cpu().numpy()
    return out


def _load_batch(paths: Sequence[Path]) -> tuple[list[np.ndarray], list[Path], list[str]]:
    audio, kept, errors = [], [], []
    for path in paths:
        try:
            audio.append(load_audio(path))
            kept.append(path)
        except Exception as exc:  # undecodable audio: skip the row, keep going
            log.warning("skipping %s: %s", path, exc)
            errors.append(f"{path}: {exc}")
    return audio, kept, errors


def score_seq2seq(
    audio_paths: Sequence[Path],
    prompt_pattern: str,
    class_names: Sequence[str],
    config: AdapterConfig,
    backend: Seq2SeqBackend,
    out_path: str | Path,
    *,
    task_id: str,
    prompt_id: str,
    golds: dict[str, int] | None = None,
) -> tuple[Path, list[str]]:
    """Score every (clip, class prompt) pair into one score file."""
    texts = [render_prompt(prompt_pattern, name) for name in class_names]
    golds = golds or {}
    rows: list[tuple[str, int | None, np.ndarray]] = []
    errors: list[str] = []
    for start in range(0, len(audio_paths), config.batch_size):
        chunk = audio_paths[start : start + config.batch_size]
        audio, kept, chunk_errors = _load_batch(chunk)
        errors.extend(chunk_errors)
        if not audio:
            continue
        ll = teacher_forced_ll(
            backend,
            backend.features(audio),
            texts,
            suppress_special=config.suppress_special,
            score_eos=config.score_eos,
        )
        for path, row in zip(kept, ll):
            utt = path.stem
            rows.append((utt, golds.get(utt), row))
    if config.null_mode == "zero_encoder_input":
        null_ll = teacher_forced_ll(
            backend,
            backend.zero_features(),
            texts,
            suppress_special=config.suppress_special,
            score_eos=config.score_eos,
        )
        rows.append((NULL_ZERO_UTT, None, null_ll[0]))
    path = write_score_file(
        out_path,
        task_id=task_id,
        model_id=config.model_id,
        prompt_id=prompt_id,
        class_names=class_names,
        rows=rows,
        scoring=config.scoring_record(),
    )
    return path, errors


def score_aqa(
    audio_paths: Sequence[Path],
    questions: Sequence[dict],
    config: AdapterConfig,
    backend: Seq2SeqBackend,
    out_path: str | Path,
    *,
    task_id: str,
    answers: tuple[str, str] = ("yes", "no"),
) -> tuple[Path, list[str]]:
    """Binary question answering: per clip, the question conditions the
    decoder and the two answer words are scored as the classes."""
    by_utt = {q["utt"]: q for q in questions}
    rows: list[tuple[str, int | None, np.ndarray]] = []
    errors: list[str] = []
    for path in audio_paths:
        utt = Path(path).stem
        question = by_utt.get(utt)
        if question is None:
            errors.append(f"{path}: no question for utterance {utt!r}")
            log.warning("skipping %s: no question", path)
            continue
        audio, kept, load_errors = _load_batch([Path(path)])
        errors.extend(load_errors)
        if not audio:
            continue
        ll = teacher_forced_ll(
            backend,
            backend.features(audio),
            [f" {a}" for a in answers],
            context=question["question"],
            suppress_special=config.suppress_special,
            score_eos=config.score_eos,
        )
        rows.append((utt, question.get("gold"), ll[0]))
    path = write_score_file(
        out_path,
        task_id=task_id,
        model_id=config.model_id,
        prompt_id="aqa",
        class_names=list(answers),
        rows=rows,
        scoring=config.scoring_record(),
    )
    return path, errors
