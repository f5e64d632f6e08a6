"""CTC label-sequence scoring from per-frame log-probabilities.

Given a T x V table of frame posteriors from a CTC head, the likelihood of
a label sequence is the sum over all length-T symbol paths that collapse to
it (merge repeats, then drop blanks).  The forward recursion runs over the
blank-interleaved extended sequence entirely in log space; an infeasible
label (too long for the available frames) scores -inf rather than raising,
so class posteriors still normalize across prompts of different lengths.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import FormatError, OovError
from .scores import LabelSet, PromptTemplate, ScoreMatrix, render_prompt

NEG_INF = float("-inf")

ROW_NORMALIZATION_TOL = 1e-6


@dataclass
class CtcFrameLogits:
    """Per-frame log-probability rows, one distribution per frame."""

    log_probs: np.ndarray
    blank_id: int

    def __post_init__(self):
        lp = np.asarray(self.log_probs, dtype=np.float64)
        if lp.ndim != 2 or lp.shape[0] < 1:
            raise ValueError("log_probs must be a T x V table with T >= 1")
        if np.isnan(lp).any() or np.isposinf(lp).any():
            raise ValueError("log_probs must be finite or -inf")
        if not 0 <= self.blank_id < lp.shape[1]:
            raise ValueError(f"blank_id {self.blank_id} outside [0, {lp.shape[1]})")
        row_mass = np.exp(lp).sum(axis=1)
        bad = np.abs(row_mass - 1.0) > ROW_NORMALIZATION_TOL
        if bad.any():
            raise ValueError(
                f"frame rows {np.flatnonzero(bad).tolist()} do not sum to 1 "
                f"within {ROW_NORMALIZATION_TOL}"
            )
        self.log_probs = lp

    @property
    def t(self) -> int:
        return self.log_probs.shape[0]

    @property
    def v(self) -> int:
        return self.log_probs.shape[1]


@dataclass(frozen=True)
class CtcLabelSequence:
    """Non-blank token ids of one target label."""

    token_ids: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "token_ids", tuple(int(t) for t in self.token_ids))
        if not self.token_ids:
            raise ValueError("label sequence must be non-empty")
        if any(t < 0 for t in self.token_ids):
            raise ValueError("token ids must be non-negative")

    def __len__(self) -> int:
        return len(self.token_ids)


def build_vocab_map(vocab: Sequence[str], blank_id: int) -> dict[str, int]:
    """Symbol-to-id map for tokenization, with the blank symbol excluded."""
    if not 0 <= blank_id < len(vocab):
        raise ValueError(f"blank_id {blank_id} outside vocabulary")
    if len(set(vocab)) != len(vocab):
        raise ValueError("vocabulary symbols must be unique")
    return {sym: i for i, sym in enumerate(vocab) if i != blank_id}


def tokenize_label(
    text: str, vocab: Mapping[str, int], *, lowercase: bool = True
) -> CtcLabelSequence:
    """Character-by-character tokenization against a CTC vocabulary.

    Spaces count as ordinary vocabulary symbols.  An out-of-vocabulary
    character raises rather than being dropped silently.
    """
    if lowercase:
        text = text.lower()
    ids = []
    for char in text:
        if char not in vocab:
            raise OovError(char)
        ids.append(vocab[char])
    return CtcLabelSequence(tuple(ids))


def _extended_sequence(tokens: tuple[int, ...], blank_id: int) -> np.ndarray:
    ext = np.full(2 * len(tokens) + 1, blank_id, dtype=np.int64)
    ext[1::2] = tokens
    return ext


def ctc_forward(frames: CtcFrameLogits, label: CtcLabelSequence) -> float:
    """Log-likelihood of the label summed over all collapsing alignments."""
    lp = frames.log_probs
    t_max, v = lp.shape
    tokens = label.token_ids
    if any(t >= v for t in tokens):
        raise ValueError("label contains token ids outside the vocabulary")
    if frames.blank_id in tokens:
        raise ValueError("label may not contain the blank id")

    ext = _extended_sequence(tokens, frames.blank_id)
    s = len(ext)
    # The skip transition (s-2 -> s) is legal only into a non-blank state
    # whose symbol differs from the one two back.
    can_skip = np.zeros(s, dtype=bool)
    can_skip[3::2] = ext[3::2] != ext[1:-2:2]

    alpha = np.full(s, NEG_INF)
    alpha[0] = lp[0, ext[0]]
    if s > 1:
        alpha[1] = lp[0, ext[1]]
    for t in range(1, t_max):
        stay = alpha
        step = np.concatenate(([NEG_INF], alpha[:-1]))
        skip = np.concatenate(([NEG_INF, NEG_INF], alpha[:-2]))
        skip = np.where(can_skip, skip, NEG_INF)
        alpha = np.logaddexp(np.logaddexp(stay, step), skip) + lp[t, ext]
    total = np.logaddexp(alpha[-1], alpha[-2]) if s > 1 else alpha[-1]
    return float(total)


def ctc_score_matrix(
    utterances: Sequence[tuple[str, CtcFrameLogits]],
    labels: LabelSet,
    template: PromptTemplate,
    vocab: Mapping[str, int],
    *,
    model_id: str,
    golds: Mapping[str, int] | None = None,
    lowercase: bool = True,
) -> ScoreMatrix:
    """Score every (utterance, class) pair into a standard score matrix."""
    token_seqs = [
        tokenize_label(
            render_prompt(template, name), vocab, lowercase=lowercase
        )
        for name in labels.class_names
    ]
    golds = golds or {}
    utt_ids, gold_list, rows = [], [], []
    for utt_id, frames in utterances:
        rows.append([ctc_forward(frames, seq) for seq in token_seqs])
        utt_ids.append(utt_id)
        gold_list.append(golds.get(utt_id))
    return ScoreMatrix(
        task_id=labels.task_id,
        model_id=model_id,
        prompt_id=template.prompt_id,
        class_names=labels.class_names,
        utt_ids=tuple(utt_ids),
        golds=tuple(gold_list),
        ll=np.array(rows, dtype=np.float64),
    )


def write_frame_file(
    path: str | Path,
    utt_id: str,
    frames: CtcFrameLogits,
    vocab: Sequence[str],
) -> Path:
    path = Path(path)
    if len(vocab) != frames.v:
        raise ValueError("vocabulary length must equal V")
    with path.open("w", encoding="utf-8") as fh:
        header = {
            "utt": utt_id,
            "T": frames.t,
            "V": frames.v,
            "blank_id": frames.blank_id,
            "vocab": list(vocab),
        }
        fh.write(json.dumps(header) + "\n")
        for row in frames.log_probs:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")
    return path


def read_frame_file(path: str | Path) -> tuple[str, CtcFrameLogits, tuple[str, ...]]:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    if not lines:
        raise FormatError(f"{path}: empty frame file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}:1: invalid JSON ({exc})") from exc
    for key in ("utt", "T", "V", "blank_id", "vocab"):
        if key not in header:
            raise FormatError(f"{path}: frame header missing {key!r}")
    t, v = int(header["T"]), int(header["V"])
    if len(lines) - 1 != t:
        raise FormatError(f"{path}: expected {t} frame rows, found {len(lines) - 1}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != v:
            raise FormatError(f"{path}:{lineno}: expected {v} log-probabilities")
        rows.append([float(x) for x in parts])
    try:
        frames = CtcFrameLogits(
            np.array(rows, dtype=np.float64), int(header["blank_id"])
        )
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    vocab = tuple(str(sym) for sym in header["vocab"])
    if len(vocab) != v:
        raise FormatError(f"{path}: vocab length {len(vocab)} != V={v}")
    return str(header["utt"]), frames, vocab
