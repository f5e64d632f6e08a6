"""Emission of the toolkit's score, frame and prompt file formats.

These formats are the contract between the adapter and the scoring
toolkit; they are written here independently so the adapter depends only
on the documented interface.  All emission is crash-safe: records go to a
temp file that is atomically renamed into place once complete.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

NEG_INF_TOKEN = "-inf"
NULL_ZERO_UTT = "NULL:zero"
CLASS_PLACEHOLDER = "{c}"
QUESTION_PLACEHOLDER = "{q}"


@contextmanager
def atomic_writer(path: str | Path):
    """Open a temp file next to ``path``; rename over it only on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(
        dir=path.parent, prefix=f".{path.name}.", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            yield fh
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def _encode_ll(row: Iterable[float]) -> list:
    return [NEG_INF_TOKEN if math.isinf(x) else float(x) for x in row]


def write_score_file(
    path: str | Path,
    *,
    task_id: str,
    model_id: str,
    prompt_id: str,
    class_names: Sequence[str],
    rows: Iterable[tuple[str, int | None, Sequence[float]]],
    scoring: dict | None = None,
) -> Path:
    """Score file: one manifest line, then one record per utterance."""
    path = Path(path)
    manifest = {
        "task_id": task_id,
        "model_id": model_id,
        "prompt_id": prompt_id,
        "class_names": list(class_names),
    }
    if scoring:
        manifest["scoring"] = scoring
    with atomic_writer(path) as fh:
        fh.write(json.dumps(manifest) + "\n")
        for utt, gold, ll in rows:
            fh.write(
                json.dumps({"utt": utt, "gold": gold, "ll": _encode_ll(ll)}) + "\n"
            )
    return path


def write_frame_file(
    path: str | Path,
    *,
    utt_id: str,
    log_probs: np.ndarray,
    blank_id: int,
    vocab: Sequence[str],
) -> Path:
    """Frame file: JSON header, then T lines of V log-probabilities."""
    path = Path(path)
    t, v = log_probs.shape
    header = {
        "utt": utt_id,
        "T": t,
        "V": v,
        "blank_id": blank_id,
        "vocab": list(vocab),
    }
    with atomic_writer(path) as fh:
        fh.write(json.dumps(header) + "\n")
        for row in log_probs:
            fh.write(" ".join(repr(float(x)) for x in row) + "\n")
    return path


def read_prompt_file(path: str | Path) -> list[tuple[str, str]]:
    """Prompt records as (prompt_id, pattern) pairs."""
    prompts = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            prompts.append((str(record["prompt_id"]), str(record["pattern"])))
    if not prompts:
        raise ValueError(f"{path}: no prompts found")
    return prompts


def read_label_file(path: str | Path) -> tuple[str, list[str], dict[str, int]]:
    record = json.loads(Path(path).read_text(encoding="utf-8"))
    golds = record.get("golds") or {}
    return (
        str(record["task_id"]),
        [str(c) for c in record["class_names"]],
        {str(u): int(g) for u, g in golds.items()},
    )


def read_question_file(path: str | Path) -> list[dict]:
    """AQA records: {"utt", "question", "gold": 0|1|null} per line."""
    records = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            records.append(
                {
                    "utt": str(record["utt"]),
                    "question": str(record["question"]),
                    "gold": record.get("gold"),
                }
            )
    if not records:
        raise ValueError(f"{path}: no questions found")
    return records


def render_prompt(pattern: str, class_name: str, question: str | None = None) -> str:
    text = pattern.replace(CLASS_PLACEHOLDER, class_name)
    if question is not None:
        text = text.replace(QUESTION_PLACEHOLDER, question)
    return text
