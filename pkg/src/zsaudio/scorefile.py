"""Readers and writers for the newline-delimited record formats.

Score files carry one JSON manifest line followed by one JSON data record
per utterance.  Numbers are written with full round-trip precision;
zero-probability entries are serialized as the string ``"-inf"``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .calibration import CalibrationWeights
from .errors import FormatError
from .scores import PosteriorSet, PromptTemplate, ScoreMatrix

NEG_INF_TOKEN = "-inf"


def _encode_ll(row: np.ndarray) -> list:
    return [NEG_INF_TOKEN if math.isinf(x) else float(x) for x in row]


def _decode_ll(raw, k: int, where: str) -> list[float]:
    if not isinstance(raw, list) or len(raw) != k:
        raise FormatError(f"{where}: 'll' must be a list of {k} numbers")
    out = []
    for x in raw:
        if x == NEG_INF_TOKEN:
            out.append(float("-inf"))
        elif isinstance(x, (int, float)) and math.isfinite(x):
            out.append(float(x))
        else:
            raise FormatError(f"{where}: bad log-likelihood entry {x!r}")
    return out


def _read_json_line(line: str, where: str) -> dict:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{where}: invalid JSON ({exc})") from exc
    if not isinstance(record, dict):
        raise FormatError(f"{where}: expected a JSON object")
    return record


def write_score_file(matrix: ScoreMatrix, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        manifest = {
            "task_id": matrix.task_id,
            "model_id": matrix.model_id,
            "prompt_id": matrix.prompt_id,
            "class_names": list(matrix.class_names),
        }
        fh.write(json.dumps(manifest) + "\n")
        for utt, gold, row in matrix.iter_rows():
            record = {"utt": utt, "gold": gold, "ll": _encode_ll(row)}
            fh.write(json.dumps(record) + "\n")
    return path


def read_score_file(path: str | Path) -> ScoreMatrix:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    if not lines:
        raise FormatError(f"{path}: empty score file")
    manifest = _read_json_line(lines[0], f"{path}:1")
    for key in ("task_id", "model_id", "prompt_id", "class_names"):
        if key not in manifest:
            raise FormatError(f"{path}: manifest missing {key!r}")
    class_names = manifest["class_names"]
    if not isinstance(class_names, list):
        raise FormatError(f"{path}: 'class_names' must be a list")
    class_names = [str(c) for c in class_names]
    k = len(class_names)
    utt_ids, golds, ll_rows = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        where = f"{path}:{lineno}"
        record = _read_json_line(line, where)
        if "utt" not in record or "ll" not in record:
            raise FormatError(f"{where}: data record needs 'utt' and 'll'")
        gold = record.get("gold")
        if gold is not None and not isinstance(gold, int):
            raise FormatError(f"{where}: 'gold' must be an integer or null")
        utt_ids.append(str(record["utt"]))
        golds.append(gold)
        ll_rows.append(_decode_ll(record["ll"], k, where))
    try:
        return ScoreMatrix(
            task_id=manifest["task_id"],
            model_id=manifest["model_id"],
            prompt_id=manifest["prompt_id"],
            class_names=tuple(class_names),
            utt_ids=tuple(utt_ids),
            golds=tuple(golds),
            ll=np.array(ll_rows, dtype=np.float64).reshape(len(utt_ids), k),
        )
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_prompt_file(prompts: Sequence[PromptTemplate], path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for prompt in prompts:
            fh.write(
                json.dumps({"prompt_id": prompt.prompt_id, "pattern": prompt.pattern})
                + "\n"
            )
    return path


def read_prompt_file(path: str | Path) -> list[PromptTemplate]:
    path = Path(path)
    prompts = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = _read_json_line(line, f"{path}:{lineno}")
            if "prompt_id" not in record or "pattern" not in record:
                raise FormatError(
                    f"{path}:{lineno}: prompt record needs 'prompt_id' and 'pattern'"
                )
            try:
                prompts.append(
                    PromptTemplate(str(record["prompt_id"]), str(record["pattern"]))
                )
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
    if not prompts:
        raise FormatError(f"{path}: no prompts found")
    return prompts


def write_label_file(
    task_id: str,
    class_names: Sequence[str],
    path: str | Path,
    golds: dict[str, int] | None = None,
) -> Path:
    path = Path(path)
    payload = {"task_id": task_id, "class_names": list(class_names), "golds": golds}
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


def read_label_file(path: str | Path) -> tuple[str, tuple[str, ...], dict[str, int]]:
    path = Path(path)
    record = _read_json_line(path.read_text(encoding="utf-8"), str(path))
    if "task_id" not in record or "class_names" not in record:
        raise FormatError(f"{path}: label file needs 'task_id' and 'class_names'")
    golds = record.get("golds") or {}
    if not isinstance(golds, dict):
        raise FormatError(f"{path}: 'golds' must map utterance ids to class indices")
    return (
        str(record["task_id"]),
        tuple(str(c) for c in record["class_names"]),
        {str(u): int(g) for u, g in golds.items()},
    )


def write_weights_file(
    weights: CalibrationWeights, task_id: str, path: str | Path
) -> Path:
    path = Path(path)
    payload = {
        "task_id": task_id,
        "method": weights.method,
        "alpha": [float(a) for a in weights.alpha],
        "target_prior": [float(t) for t in weights.target_prior],
        "solver": {"iters": weights.iters, "l1_gap": weights.l1_gap},
    }
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


def read_weights_file(path: str | Path) -> tuple[str, CalibrationWeights]:
    path = Path(path)
    record = _read_json_line(path.read_text(encoding="utf-8"), str(path))
    for key in ("task_id", "method", "alpha", "target_prior", "solver"):
        if key not in record:
            raise FormatError(f"{path}: weights file missing {key!r}")
    solver = record["solver"]
    try:
        weights = CalibrationWeights(
            alpha=np.array(record["alpha"], dtype=np.float64),
            method=str(record["method"]),
            target_prior=np.array(record["target_prior"], dtype=np.float64),
            iters=int(solver.get("iters", 0)),
            l1_gap=float(solver.get("l1_gap", 0.0)),
        )
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return str(record["task_id"]), weights


def write_posterior_file(
    pset: PosteriorSet,
    path: str | Path,
    *,
    task_id: str,
    model_id: str,
    prompt_id: str,
    method: str,
    golds: Sequence[int | None] | None = None,
) -> Path:
    """Audit artifact: per-utterance posterior vectors for one stage."""
    path = Path(path)
    if golds is None:
        golds = [None] * pset.n
    with path.open("w", encoding="utf-8") as fh:
        manifest = {
            "task_id": task_id,
            "model_id": model_id,
            "prompt_id": prompt_id,
            "method": method,
            "k": pset.k,
        }
        fh.write(json.dumps(manifest) + "\n")
        for utt, gold, row in zip(pset.utt_ids, golds, pset.probs):
            fh.write(
                json.dumps({"utt": utt, "gold": gold, "p": [float(x) for x in row]})
                + "\n"
            )
    return path


def read_posterior_file(path: str | Path) -> tuple[dict, PosteriorSet, list[int | None]]:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    if not lines:
        raise FormatError(f"{path}: empty posterior file")
    manifest = _read_json_line(lines[0], f"{path}:1")
    utt_ids, golds, rows = [], [], []
    for lineno, line in enumerate(lines[1:], start=2):
        record = _read_json_line(line, f"{path}:{lineno}")
        utt_ids.append(str(record["utt"]))
        golds.append(record.get("gold"))
        rows.append([float(x) for x in record["p"]])
    pset = PosteriorSet(tuple(utt_ids), np.array(rows, dtype=np.float64))
    return manifest, pset, golds
