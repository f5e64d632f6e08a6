"""End-to-end orchestration: score files to calibrated predictions to reports.

Every stage writes its artifact into the output directory so a run can be
audited afterwards; reruns with the same inputs produce byte-identical
files (nothing here depends on wall clock or iteration order of sets).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import scorefile
from .calibration import (
    CalibrationWeights,
    all_label_calibration_gap,
    identity_weights,
    null_input_weights,
    prior_match,
    reweight_matrix,
    top1_calibration_gap,
    uniform_prior,
)
from .errors import AlignmentError, MissingGoldError, ToolkitError
from .evaluation import EvalReport, evaluate, precision_recall_curve
from .scores import (
    NULL_UTT_PREFIX,
    PosteriorSet,
    Prediction,
    ScoreMatrix,
    ensemble,
    posterior_matrix,
    posteriors,
    predictions,
)

MODES = ("uncalibrated", "prior-match", "null-zero", "null-noise")

_MODE_TO_METHOD = {
    "uncalibrated": "none",
    "prior-match": "prior_match",
    "null-zero": "null_zero",
    "null-noise": "null_noise",
}


@dataclass(frozen=True)
class PipelineConfig:
    mode: str = "uncalibrated"
    prior: str = "uniform"  # "uniform" or a path to a JSON K-vector
    ensemble: bool = False
    ensemble_stage: str = "post"  # average before or after calibration
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.ensemble_stage not in ("pre", "post"):
            raise ValueError("ensemble_stage must be 'pre' or 'post'")


class PipelineError(ToolkitError):
    """Wraps a stage failure with the stage name."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"pipeline stage {stage!r} failed: {cause}")


def load_prior(spec: str, k: int) -> np.ndarray:
    if spec == "uniform":
        return uniform_prior(k)
    prior = np.asarray(json.loads(Path(spec).read_text(encoding="utf-8")), np.float64)
    if prior.shape != (k,):
        raise ValueError(f"prior file {spec} has shape {prior.shape}, expected ({k},)")
    return prior


def _check_consistent(matrices: Sequence[ScoreMatrix]) -> None:
    first = matrices[0]
    for m in matrices[1:]:
        if m.task_id != first.task_id or m.class_names != first.class_names:
            raise AlignmentError(
                f"score files disagree on task/classes: {m.task_id} vs {first.task_id}"
            )
        if m.model_id != first.model_id:
            raise AlignmentError(
                f"score files disagree on model: {m.model_id} vs {first.model_id}"
            )


def _null_posteriors_for(
    matrix: ScoreMatrix,
    mode: str,
    null_by_prompt: dict[str, ScoreMatrix],
) -> np.ndarray:
    if mode == "null-zero":
        row = matrix.null_ll()
        if row is None:
            raise ValueError(
                f"mode null-zero needs a {NULL_UTT_PREFIX} row in "
                f"{matrix.prompt_id!r} or an explicit weights file"
            )
        return posterior_matrix(row[None, :])
    null_matrix = null_by_prompt.get(matrix.prompt_id)
    if null_matrix is None and len(null_by_prompt) == 1:
        null_matrix = next(iter(null_by_prompt.values()))
    if null_matrix is None:
        raise ValueError(
            f"mode null-noise needs null scores for prompt {matrix.prompt_id!r}"
        )
    return posterior_matrix(null_matrix.data_rows().ll)


def _weights_for(
    matrix: ScoreMatrix,
    pset: PosteriorSet,
    config: PipelineConfig,
    weights_by_prompt: dict[str, CalibrationWeights],
    null_by_prompt: dict[str, ScoreMatrix],
) -> CalibrationWeights:
    if matrix.prompt_id in weights_by_prompt:
        return weights_by_prompt[matrix.prompt_id]
    if config.mode == "uncalibrated":
        return identity_weights(matrix.k)
    if config.mode == "prior-match":
        target = load_prior(config.prior, matrix.k)
        return prior_match(pset.probs, target)
    null_probs = _null_posteriors_for(matrix, config.mode, null_by_prompt)
    return null_input_weights(null_probs, _MODE_TO_METHOD[config.mode])


def _report_for(
    pset: PosteriorSet,
    golds: Sequence[int | None],
    matrix: ScoreMatrix,
    method: str,
    prompt_label: str,
) -> EvalReport:
    preds = predictions(pset)
    core = evaluate(preds, golds, matrix.k)
    gold_arr = [g for g in golds]
    top1 = top1_calibration_gap(pset.probs, gold_arr)
    all_label = all_label_calibration_gap(pset.probs, gold_arr)
    pr = None
    if matrix.k == 2:
        counts = np.bincount(np.asarray(gold_arr, dtype=np.int64), minlength=2)
        positive = int(np.argmin(counts))  # rarer class; ties to index 0
        if counts[positive] > 0:
            pr = precision_recall_curve(pset.probs, gold_arr, positive)
    return EvalReport(
        task_id=matrix.task_id,
        model_id=matrix.model_id,
        method=method,
        accuracy=core.accuracy,
        n=core.n,
        class_distribution=core.class_distribution,
        top1_gap=top1,
        all_label_gaps=all_label,
        pr_curve=pr,
        prompt_id=prompt_label,
    )


def _write_predictions_csv(
    path: Path, preds: Sequence[Prediction], class_names: Sequence[str]
) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["utt", "class_index", "class_name", "confidence"])
        for p in preds:
            writer.writerow(
                [p.utt_id, p.class_index, class_names[p.class_index], repr(p.confidence)]
            )


def run_pipeline(
    score_paths: Sequence[str | Path],
    out_dir: str | Path,
    config: PipelineConfig = PipelineConfig(),
    *,
    weights_paths: Sequence[str | Path] = (),
    null_score_paths: Sequence[str | Path] = (),
) -> list[EvalReport]:
    """Scores -> posteriors -> calibration -> (ensemble) -> predictions -> report."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def stage(name, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except Exception as exc:
            raise PipelineError(name, exc) from exc

    matrices = stage(
        "load-scores",
        lambda: [scorefile.read_score_file(p) for p in score_paths],
    )
    if not matrices:
        raise PipelineError("load-scores", ValueError("no score files given"))
    stage("validate", _check_consistent, matrices)

    # weights files are matched to score files positionally
    weights_by_prompt: dict[str, CalibrationWeights] = {}
    for idx, path in enumerate(weights_paths):
        task_id, weights = scorefile.read_weights_file(path)
        if task_id != matrices[0].task_id:
            raise PipelineError(
                "load-weights",
                AlignmentError(f"weights for task {task_id!r} applied to "
                               f"{matrices[0].task_id!r}"),
            )
        if idx < len(matrices):
            weights_by_prompt[matrices[idx].prompt_id] = weights
    null_by_prompt: dict[str, ScoreMatrix] = {}
    for path in null_score_paths:
        m = scorefile.read_score_file(path)
        null_by_prompt[m.prompt_id] = m

    method = _MODE_TO_METHOD[config.mode]
    per_prompt_raw: list[PosteriorSet] = []
    per_prompt_calibrated: list[PosteriorSet] = []
    golds_ref: list[int | None] | None = None
    for matrix in matrices:
        pset = stage("posterior", posteriors, matrix)
        data = matrix.data_rows()
        if golds_ref is None:
            golds_ref = list(data.golds)
        scorefile.write_posterior_file(
            pset,
            out_dir / f"posteriors_{matrix.prompt_id}.jsonl",
            task_id=matrix.task_id,
            model_id=matrix.model_id,
            prompt_id=matrix.prompt_id,
            method="none",
            golds=data.golds,
        )
        per_prompt_raw.append(pset)
        calibrate_per_prompt = config.mode != "uncalibrated" and (
            not config.ensemble or config.ensemble_stage == "post"
        )
        if calibrate_per_prompt:
            weights = stage(
                "calibrate",
                _weights_for,
                matrix, pset, config, weights_by_prompt, null_by_prompt,
            )
            scorefile.write_weights_file(
                weights, matrix.task_id, out_dir / f"weights_{matrix.prompt_id}.json"
            )
            calibrated = PosteriorSet(
                pset.utt_ids, reweight_matrix(pset.probs, weights)
            )
            scorefile.write_posterior_file(
                calibrated,
                out_dir / f"calibrated_{matrix.prompt_id}.jsonl",
                task_id=matrix.task_id,
                model_id=matrix.model_id,
                prompt_id=matrix.prompt_id,
                method=method,
                golds=data.golds,
            )
            per_prompt_calibrated.append(calibrated)
        else:
            per_prompt_calibrated.append(pset)

    reports: list[EvalReport] = []
    first = matrices[0]
    if config.ensemble:
        for matrix in matrices[1:]:
            if list(matrix.data_rows().golds) != golds_ref:
                raise PipelineError(
                    "ensemble",
                    AlignmentError(
                        f"gold labels differ between prompt files "
                        f"({matrix.prompt_id!r} vs {first.prompt_id!r})"
                    ),
                )
        pooled = stage("ensemble", ensemble, per_prompt_calibrated)
        if config.mode != "uncalibrated" and config.ensemble_stage == "pre":
            weights = stage(
                "calibrate",
                _weights_for,
                first, pooled, config, weights_by_prompt, null_by_prompt,
            )
            scorefile.write_weights_file(
                weights, first.task_id, out_dir / "weights_ensemble.json"
            )
            pooled = PosteriorSet(pooled.utt_ids, reweight_matrix(pooled.probs, weights))
        scorefile.write_posterior_file(
            pooled,
            out_dir / "ensemble.jsonl",
            task_id=first.task_id,
            model_id=first.model_id,
            prompt_id="ensemble",
            method=method,
            golds=golds_ref,
        )
        preds = predictions(pooled)
        _write_predictions_csv(
            out_dir / "predictions_ensemble.csv", preds, first.class_names
        )
        reports.append(
            stage("evaluate", _report_for, pooled, golds_ref, first, method, "ensemble")
        )
    else:
        for matrix, pset in zip(matrices, per_prompt_calibrated):
            data = matrix.data_rows()
            preds = predictions(pset)
            _write_predictions_csv(
                out_dir / f"predictions_{matrix.prompt_id}.csv",
                preds,
                matrix.class_names,
            )
            reports.append(
                stage(
                    "evaluate",
                    _report_for,
                    pset, list(data.golds), matrix, method, matrix.prompt_id,
                )
            )

    stage("report", write_reports, reports, out_dir)
    config_echo = {
        "mode": config.mode,
        "prior": config.prior,
        "ensemble": config.ensemble,
        "ensemble_stage": config.ensemble_stage,
        "seed": config.seed,
        "score_files": [str(p) for p in score_paths],
    }
    (out_dir / "pipeline_config.json").write_text(
        json.dumps(config_echo, indent=2) + "\n", encoding="utf-8"
    )
    return reports


@dataclass
class ReportRow:
    model_id: str
    method: str
    cells: dict[str, float]
    average: float | None
    delta_avg: float | None = None


@dataclass
class ReportTable:
    task_ids: list[str]
    rows: list[ReportRow]
    text: str


def _fmt_pct(value: float | None) -> str:
    return "-" if value is None else f"{100.0 * value:.1f}"


def render_report(reports: Sequence[EvalReport]) -> ReportTable:
    """Datasets-by-methods accuracy table with a refuse-to-impute average.

    The final column is the arithmetic mean over datasets and stays blank
    for rows that are missing any dataset.  When a model has several method
    rows, each later row gets a delta column against the model's first row.
    """
    if not reports:
        raise ValueError("render_report needs at least one report")
    task_ids = sorted({r.task_id for r in reports})
    keyed: dict[tuple[str, str], dict[str, float]] = {}
    order: list[tuple[str, str]] = []
    for r in reports:
        label = r.method
        if r.prompt_id and any(
            o.method == r.method
            and o.model_id == r.model_id
            and o.prompt_id != r.prompt_id
            for o in reports
        ):
            label = f"{r.method}[{r.prompt_id}]"
        key = (r.model_id, label)
        if key not in keyed:
            keyed[key] = {}
            order.append(key)
        if r.task_id in keyed[key]:
            raise ValueError(f"duplicate report for {key} on {r.task_id}")
        keyed[key][r.task_id] = r.accuracy

    rows = []
    first_avg_by_model: dict[str, float | None] = {}
    for model_id, method in order:
        cells = keyed[(model_id, method)]
        average = (
            float(np.mean([cells[t] for t in task_ids]))
            if all(t in cells for t in task_ids)
            else None
        )
        delta = None
        if model_id in first_avg_by_model:
            base = first_avg_by_model[model_id]
            if base is not None and average is not None:
                delta = average - base
        else:
            first_avg_by_model[model_id] = average
        rows.append(ReportRow(model_id, method, cells, average, delta))

    header = ["model", "method", *task_ids, "Avg.", "Delta"]
    body = []
    for row in rows:
        body.append(
            [
                row.model_id,
                row.method,
                *[_fmt_pct(row.cells.get(t)) for t in task_ids],
                _fmt_pct(row.average),
                "-" if row.delta_avg is None else f"{100.0 * row.delta_avg:+.1f}",
            ]
        )
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]
    lines = [
        "  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip()
        for r in [header, *body]
    ]
    lines.insert(1, "-" * max(len(line) for line in lines))
    return ReportTable(task_ids, rows, "\n".join(lines) + "\n")


def write_reports(reports: Sequence[EvalReport], out_dir: str | Path) -> ReportTable:
    """Emit reports.jsonl, report.txt, distribution.csv and pr_curve.csv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "reports.jsonl").open("w", encoding="utf-8") as fh:
        for r in reports:
            fh.write(json.dumps(r.to_dict()) + "\n")
    table = render_report(reports)
    (out_dir / "report.txt").write_text(table.text, encoding="utf-8")
    with (out_dir / "distribution.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["task_id", "model_id", "method", "class_index", "fraction"])
        for r in reports:
            for idx, frac in enumerate(r.class_distribution):
                writer.writerow([r.task_id, r.model_id, r.method, idx, repr(float(frac))])
    pr_rows = [
        (r, pt)
        for r in reports
        if r.pr_curve is not None
        for pt in r.pr_curve
    ]
    if pr_rows:
        with (out_dir / "pr_curve.csv").open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["task_id", "model_id", "method", "threshold", "precision", "recall"]
            )
            for r, pt in pr_rows:
                writer.writerow(
                    [
                        r.task_id,
                        r.model_id,
                        r.method,
                        repr(pt.threshold),
                        repr(pt.precision),
                        repr(pt.recall),
                    ]
                )
    return table
