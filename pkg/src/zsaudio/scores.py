"""Label sets, prompt templates, score matrices and posterior formation.

A score matrix holds one log-likelihood per (utterance, class) pair, as
produced by an ASR model scoring the rendered class prompts.  Posteriors
are formed by normalizing those log-likelihoods per utterance; predictions
take the argmax; multiple prompts can be pooled by averaging posteriors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import AlignmentError, ArityError, DegenerateInputError

NULL_UTT_PREFIX = "NULL:"
CLASS_PLACEHOLDER = "{c}"
QUESTION_PLACEHOLDER = "{q}"

# Default templates per task family, keyed by the CLI-facing task kind.
# "default" covers sound event, acoustic scene and vocal sound tasks.
DEFAULT_PROMPTS = {
    "emotion": "The speaker is feeling {c}.",
    "music_genre": "This is an audio of {c} music.",
    "speaker_count": "In the audio, {c} people are speaking.",
    "default": "This is a sound of {c}.",
}


@dataclass(frozen=True)
class LabelSet:
    """The ordered classes of a task.

    The order is canonical: every score matrix and weight vector for the
    task indexes classes against it.
    """

    task_id: str
    class_names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if not self.task_id:
            raise ValueError("task_id must be non-empty")
        if len(self.class_names) < 2:
            raise ValueError("a task needs at least two classes")
        if any(not name for name in self.class_names):
            raise ValueError("class names must be non-empty")
        if len(set(self.class_names)) != len(self.class_names):
            raise ValueError("class names must be unique")

    @property
    def k(self) -> int:
        return len(self.class_names)


@dataclass(frozen=True)
class PromptTemplate:
    """A pattern mapping a class name (and optionally a question) to text.

    The pattern must contain the class placeholder ``{c}`` exactly once and
    may contain the question placeholder ``{q}`` at most once.
    """

    prompt_id: str
    pattern: str

    def __post_init__(self):
        if not self.prompt_id:
            raise ValueError("prompt_id must be non-empty")
        n_class = self.pattern.count(CLASS_PLACEHOLDER)
        if n_class != 1:
            raise ValueError(
                f"pattern must contain {CLASS_PLACEHOLDER} exactly once, "
                f"found {n_class}: {self.pattern!r}"
            )
        n_question = self.pattern.count(QUESTION_PLACEHOLDER)
        if n_question > 1:
            raise ValueError(
                f"pattern may contain {QUESTION_PLACEHOLDER} at most once, "
                f"found {n_question}: {self.pattern!r}"
            )

    @property
    def takes_question(self) -> bool:
        return QUESTION_PLACEHOLDER in self.pattern


def render_prompt(
    template: PromptTemplate, class_name: str, question: str | None = None
) -> str:
    """Substitute placeholders verbatim; no case folding or normalization."""
    if template.takes_question and question is None:
        raise ArityError(
            f"prompt {template.prompt_id!r} expects a question argument"
        )
    if not template.takes_question and question is not None:
        raise ArityError(
            f"prompt {template.prompt_id!r} takes no question argument"
        )
    text = template.pattern.replace(CLASS_PLACEHOLDER, class_name)
    if question is not None:
        text = text.replace(QUESTION_PLACEHOLDER, question)
    return text


def _validate_ll(ll: np.ndarray) -> np.ndarray:
    ll = np.asarray(ll, dtype=np.float64)
    if np.isnan(ll).any():
        raise ValueError("log-likelihoods contain NaN")
    if np.isposinf(ll).any():
        raise ValueError("log-likelihoods contain +inf")
    return ll


@dataclass
class ScoreMatrix:
    """An N x K table of label-sequence log-likelihoods for one prompt.

    Entries are natural-log likelihoods; -inf is a legitimate value meaning
    zero probability (e.g. an infeasible CTC alignment).  At most one row
    may be a null-input row, marked by the ``NULL:`` utterance-id prefix.
    """

    task_id: str
    model_id: str
    prompt_id: str
    class_names: tuple[str, ...]
    utt_ids: tuple[str, ...]
    golds: tuple[int | None, ...]
    ll: np.ndarray = field(repr=False)

    def __post_init__(self):
        # LabelSet carries the class-list invariants (K >= 2, unique, ...).
        LabelSet(self.task_id, self.class_names)
        self.class_names = tuple(self.class_names)
        self.utt_ids = tuple(self.utt_ids)
        self.golds = tuple(self.golds)
        self.ll = _validate_ll(self.ll)
        if self.ll.ndim != 2 or self.ll.shape != (len(self.utt_ids), self.k):
            raise ValueError(
                f"ll must have shape ({len(self.utt_ids)}, {self.k}), "
                f"got {self.ll.shape}"
            )
        if len(self.golds) != len(self.utt_ids):
            raise ValueError("golds and utt_ids must align")
        if len(set(self.utt_ids)) != len(self.utt_ids):
            raise ValueError("utterance ids must be unique")
        null_ids = [u for u in self.utt_ids if u.startswith(NULL_UTT_PREFIX)]
        if len(null_ids) > 1:
            raise ValueError(f"at most one null-input row allowed, got {null_ids}")
        for utt, gold in zip(self.utt_ids, self.golds):
            if utt.startswith(NULL_UTT_PREFIX):
                if gold is not None:
                    raise ValueError(f"null-input row {utt!r} cannot carry a gold")
            elif gold is not None and not 0 <= gold < self.k:
                raise ValueError(f"gold {gold} for {utt!r} outside [0, {self.k})")

    @property
    def k(self) -> int:
        return len(self.class_names)

    @property
    def n(self) -> int:
        return len(self.utt_ids)

    @property
    def label_set(self) -> LabelSet:
        return LabelSet(self.task_id, self.class_names)

    def iter_rows(self) -> Iterator[tuple[str, int | None, np.ndarray]]:
        for utt, gold, row in zip(self.utt_ids, self.golds, self.ll):
            yield utt, gold, row

    def _null_mask(self) -> np.ndarray:
        return np.array(
            [u.startswith(NULL_UTT_PREFIX) for u in self.utt_ids], dtype=bool
        )

    def data_rows(self) -> "ScoreMatrix":
        """The matrix restricted to real utterances (null row dropped)."""
        mask = ~self._null_mask()
        if mask.all():
            return self
        return ScoreMatrix(
            task_id=self.task_id,
            model_id=self.model_id,
            prompt_id=self.prompt_id,
            class_names=self.class_names,
            utt_ids=tuple(np.array(self.utt_ids, dtype=object)[mask]),
            golds=tuple(np.array(self.golds, dtype=object)[mask]),
            ll=self.ll[mask],
        )

    def null_ll(self) -> np.ndarray | None:
        """Log-likelihoods of the null-input row, if one is present."""
        mask = self._null_mask()
        if not mask.any():
            return None
        return self.ll[mask][0]


@dataclass(frozen=True)
class Prediction:
    utt_id: str
    class_index: int
    confidence: float


def posterior(row_ll: Sequence[float] | np.ndarray) -> np.ndarray:
    """Class posterior of one utterance from its K log-likelihoods.

    Computed with the max subtracted before exponentiation so that long
    (very negative) sequences do not underflow; -inf entries map to
    probability zero.
    """
    ll = _validate_ll(row_ll)
    if ll.ndim != 1:
        raise ValueError("posterior expects a single row of log-likelihoods")
    return posterior_matrix(ll[None, :])[0]


def posterior_matrix(ll: np.ndarray) -> np.ndarray:
    """Row-wise posteriors for an N x K table of log-likelihoods."""
    ll = _validate_ll(ll)
    if ll.ndim != 2:
        raise ValueError("expected a 2-D table of log-likelihoods")
    m = ll.max(axis=1)
    dead = ~np.isfinite(m)
    if dead.any():
        rows = np.flatnonzero(dead)
        raise DegenerateInputError(
            f"rows {rows.tolist()} have no finite log-likelihood"
        )
    w = np.exp(ll - m[:, None])
    return w / w.sum(axis=1, keepdims=True)


def predict(p: Sequence[float] | np.ndarray) -> int:
    """Index of the most probable class; ties go to the lowest index."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or len(p) < 2:
        raise ValueError("expected a posterior vector of length >= 2")
    if np.isnan(p).any():
        raise ValueError("posterior contains NaN")
    return int(np.argmax(p))


@dataclass(frozen=True)
class PosteriorSet:
    """Per-utterance posteriors for one prompt, aligned by utterance id."""

    utt_ids: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "utt_ids", tuple(self.utt_ids))
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 2 or probs.shape[0] != len(self.utt_ids):
            raise ValueError("probs must be (N, K) aligned with utt_ids")
        object.__setattr__(self, "probs", probs)

    @property
    def k(self) -> int:
        return self.probs.shape[1]

    @property
    def n(self) -> int:
        return self.probs.shape[0]


def posteriors(matrix: ScoreMatrix) -> PosteriorSet:
    """Posteriors of a score matrix's real utterances (null row excluded)."""
    data = matrix.data_rows()
    return PosteriorSet(data.utt_ids, posterior_matrix(data.ll))


def ensemble(posterior_sets: Sequence[PosteriorSet]) -> PosteriorSet:
    """Pool prompts by the arithmetic mean of their per-utterance posteriors.

    The per-cell values are sorted before summation so the result depends
    only on the multiset of prompt posteriors, never on their order.  Rows
    are renormalized only when the mean drifts past the posterior tolerance,
    which keeps pooling identical sets bit-exact.
    """
    if not posterior_sets:
        raise AlignmentError("ensemble needs at least one posterior set")
    first = posterior_sets[0]
    for other in posterior_sets[1:]:
        if other.utt_ids != first.utt_ids:
            raise AlignmentError("posterior sets disagree on utterance ids")
        if other.probs.shape != first.probs.shape:
            raise AlignmentError(
                f"posterior sets disagree on shape: "
                f"{other.probs.shape} vs {first.probs.shape}"
            )
    stack = np.stack([s.probs for s in posterior_sets])
    stack = np.sort(stack, axis=0)
    mean = stack.sum(axis=0) / len(posterior_sets)
    sums = mean.sum(axis=1, keepdims=True)
    if np.any(np.abs(sums - 1.0) > 1e-12):
        mean = mean / sums
    return PosteriorSet(first.utt_ids, mean)


def predictions(pset: PosteriorSet) -> list[Prediction]:
    """Argmax decisions with their top-1 confidences."""
    idx = pset.probs.argmax(axis=1)
    conf = pset.probs[np.arange(pset.n), idx]
    return [
        Prediction(utt, int(i), float(c))
        for utt, i, c in zip(pset.utt_ids, idx, conf)
    ]
