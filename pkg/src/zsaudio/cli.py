"""Command-line entry points."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import scorefile
from .calibration import null_input_weights, prior_match, reweight_matrix
from .ctc import build_vocab_map, ctc_score_matrix, read_frame_file
from .errors import ToolkitError
from .evaluation import precision_recall_curve
from .nullaudio import KIND_NOISE, KIND_ZERO, NullInputSpec, generate_null_audio
from .pipeline import (
    MODES,
    PipelineConfig,
    load_prior,
    render_report,
    run_pipeline,
    write_reports,
)
from .scores import (
    NULL_UTT_PREFIX,
    ensemble as ensemble_sets,
    posterior_matrix,
    posteriors,
    predictions,
)
from .synth import SynthConfig, gen_instance, write_instance


@click.group()
def main():
    """Zero-shot classification from ASR label-sequence scores."""


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


# ---------------------------------------------------------------- calibrate


@main.group()
def calibrate():
    """Estimate class-reweighting vectors."""


@calibrate.command("prior-match")
@click.option("--scores", "scores_path", required=True, type=click.Path(exists=True))
@click.option("--prior", default="uniform", show_default=True,
              help="'uniform' or a JSON file with K entries.")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--tol", default=1e-6, show_default=True)
@click.option("--max-iter", default=10_000, show_default=True)
def calibrate_prior_match(scores_path, prior, out_path, tol, max_iter):
    """Solve for weights whose output prior matches the target."""
    try:
        matrix = scorefile.read_score_file(scores_path)
        pset = posteriors(matrix)
        target = load_prior(prior, matrix.k)
        weights = prior_match(pset.probs, target, tol=tol, max_iter=max_iter)
        scorefile.write_weights_file(weights, matrix.task_id, out_path)
    except (ToolkitError, ValueError, OSError) as exc:
        _fail(exc)
    click.echo(
        f"prior-match: {weights.iters} sweeps, L1 gap {weights.l1_gap:.3e} -> {out_path}"
    )


@calibrate.command("null-input")
@click.option("--null-scores", "null_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--method", type=click.Choice(["auto", "zero", "noise"]),
              default="auto", show_default=True)
def calibrate_null_input(null_path, out_path, method):
    """Weights from the posterior of null inputs (zero input or noise clips)."""
    try:
        matrix = scorefile.read_score_file(null_path)
        null_row = matrix.null_ll()
        if null_row is not None:
            null_probs = posterior_matrix(null_row[None, :])
            inferred = "null_zero"
        else:
            null_probs = posterior_matrix(matrix.data_rows().ll)
            inferred = "null_noise"
        if method != "auto":
            inferred = {"zero": "null_zero", "noise": "null_noise"}[method]
        weights = null_input_weights(null_probs, inferred)
        scorefile.write_weights_file(weights, matrix.task_id, out_path)
    except (ToolkitError, ValueError, OSError) as exc:
        _fail(exc)
    click.echo(f"null-input ({inferred}): {null_probs.shape[0]} rows -> {out_path}")


# --------------------------------------------------------------- null-audio


@main.group("null-audio")
def null_audio():
    """Generate information-free inputs for null calibration."""


@null_audio.command("gen")
@click.option("--kind", type=click.Choice(["gaussian", "zero"]), required=True)
@click.option("--sigma", default=1.0, show_default=True)
@click.option("--duration", default=5.0, show_default=True, help="Seconds per clip.")
@click.option("--rate", default=16000, show_default=True)
@click.option("--n", "num_clips", default=32, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def null_audio_gen(kind, sigma, duration, rate, num_clips, seed, out_dir):
    """Write noise clips (PCM16 mono) or a zero-input marker file."""
    try:
        spec = NullInputSpec(
            kind=KIND_NOISE if kind == "gaussian" else KIND_ZERO,
            sigma=sigma,
            duration_s=duration,
            sample_rate=rate,
            num_clips=num_clips,
            seed=seed,
        )
        paths = generate_null_audio(spec, out_dir)
    except (ToolkitError, ValueError, OSError) as exc:
        _fail(exc)
    click.echo(f"wrote {len(paths)} file(s) under {out_dir}")


# ---------------------------------------------------------------- ctc-score


@main.command("ctc-score")
@click.option("--frames", "frames_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--prompts", "prompts_path", required=True,
              type=click.Path(exists=True))
@click.option("--labels", "labels_path", required=True,
              type=click.Path(exists=True))
@click.option("--model-id", default="ctc", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def ctc_score(frames_dir, prompts_path, labels_path, model_id, out_path):
    """Score rendered prompts against per-utterance CTC frame files.

    With several prompts, --out must be a directory; one score file per
    prompt is written into it.
    """
    try:
        prompts = scorefile.read_prompt_file(prompts_path)
        task_id, class_names, golds = scorefile.read_label_file(labels_path)
        from .scores import LabelSet

        labels = LabelSet(task_id, class_names)
        frame_paths = sorted(Path(frames_dir).iterdir())
        utterances = []
        vocab = None
        blank_id = None
        for path in frame_paths:
            if path.is_dir():
                continue
            utt_id, frames, file_vocab = read_frame_file(path)
            if vocab is None:
                vocab, blank_id = file_vocab, frames.blank_id
            elif file_vocab != vocab or frames.blank_id != blank_id:
                raise ValueError(f"{path}: vocabulary differs across frame files")
            utterances.append((utt_id, frames))
        if not utterances:
            raise ValueError(f"no frame files found under {frames_dir}")
        vocab_map = build_vocab_map(vocab, blank_id)
        out = Path(out_path)
        if len(prompts) > 1:
            out.mkdir(parents=True, exist_ok=True)
        for template in prompts:
            matrix = ctc_score_matrix(
                utterances, labels, template, vocab_map,
                model_id=model_id, golds=golds,
            )
            target = out / f"scores_{template.prompt_id}.jsonl" if len(prompts) > 1 else out
            scorefile.write_score_file(matrix, target)
            click.echo(f"{template.prompt_id}: {matrix.n} x {matrix.k} -> {target}")
    except (ToolkitError, ValueError, OSError) as exc:
        _fail(exc)


# ------------------------------------------------------------ eval commands


def _load_calibrated(scores_path, weights_path):
    matrix = scorefile.read_score_file(scores_path)
    pset = posteriors(matrix)
    method = "none"
    if weights_path:
        task_id, weights = scorefile.read_weights_file(weights_path)
        if task_id != matrix.task_id:
            raise ToolkitError(
                f"weights for task {task_id!r} applied to {matrix.task_id!r}"
            )
        from .scores import PosteriorSet

        pset = PosteriorSet(pset.utt_ids, reweight_matrix(pset.probs, weights))
        method = weights.method
    return matrix, pset, method


@main.command("predict")
@click.option("--scores", "scores_path", required=True, type=click.Path(exists=True))
@click.option("--weights", "weights_path", type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def predict_cmd(scores_path, weights_path, out_path):
    """Write per-utterance argmax decisions as CSV."""
    try:
        matrix, pset, _ = _load_calibrated(scores_path, weights_path)
        from .pipeline import _write_predictions_csv

        _write_predictions_csv(Path(out_path), predictions(pset), matrix.class_names)
    except (ToolkitError, ValueError, OSError) as exc:
        _fail(exc)
    click.echo(f"wrote {pset.n} predictions -> {out_path}")


@main.command("evaluate")
@click.option("--scores", "scores_path", required=True, type=click.Path(exists=True))
@click.option("--weights", "weights_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def evaluate_cmd(scores_path, weights_path, out_dir):
    """Evaluate one score file (optionally reweighted) into report files."""
    try:
        matrix, pset, method = _load_calibrated(scores_path, weights_path)
        from .pipeline import _report_for

        data = matrix.data_rows()
        report = _report_for(pset, list(data.golds), matrix, method, matrix.prompt_id)
        table = write_reports([report], out_dir)
    except (ToolkitError, ValueError, OSError) as exc:
        _fail(exc)
    click.echo(table.text)


@main.command("pr-curve")
@click.option("--scores", "scores_path", required=True, type=click.Path(exists=True))
@click.option("--weights", "weights_path", type=click.Path(exists=True))
@click.option("--positive-class", default=None, type=int,
              help="Defaults to the rarer gold class.")
@click.option("--out", "out_path", required=True, type=click.Path())
def pr_curve_cmd(scores_path, weights_path, positive_class, out_path):
    """Precision-recall sweep for a binary task."""
    try:
        matrix, pset, _ = _load_calibrated(scores_path, weights_path)
        if matrix.k != 2:
            raise ToolkitError(f"pr-curve needs K=2, got K={matrix.k}")
        golds = [g for g in matrix.data_rows().golds]
        if any(g is None for g in golds):
            raise ToolkitError("pr-curve needs gold labels on every row")
        if positive_class is None:
            counts = np.bincount(np.array(golds), minlength=2)
            positive_class = int(np.argmin(counts))
        points = precision_recall_curve(pset.probs, golds, positive_class)
        with Path(out_path).open("w", encoding="utf-8") as fh:
            fh.write("threshold,precision,recall\n")
            for pt in points:
                fh.write(f"{pt.threshold!r},{pt.precision!r},{pt.recall!r}\n")
    except (ToolkitError, ValueError, OSError) as exc:
        _fail(exc)
    click.echo(f"{len(points)} PR points (positive class {positive_class}) -> {out_path}")


@main.command("ensemble")
@click.option("--scores", "scores_paths", required=True, multiple=True,
              type=click.Path(exists=True))
@click.option("--weights", "weights_paths", multiple=True,
              type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def ensemble_cmd(scores_paths, weights_paths, out_path):
    """Average posteriors across several prompt score files."""
    try:
        if weights_paths and len(weights_paths) != len(scores_paths):
            raise ToolkitError("--weights must be given once per score file")
        psets = []
        first = None
        golds = None
        for i, path in enumerate(scores_paths):
            matrix, pset, _ = _load_calibrated(
                path, weights_paths[i] if weights_paths else None
            )
            if first is None:
                first = matrix
                golds = list(matrix.data_rows().golds)
            psets.append(pset)
        pooled = ensemble_sets(psets)
        scorefile.write_posterior_file(
            pooled, out_path,
            task_id=first.task_id, model_id=first.model_id,
            prompt_id="ensemble", method="ensemble", golds=golds,
        )
    except (ToolkitError, ValueError, OSError) as exc:
        _fail(exc)
    click.echo(f"ensembled {len(psets)} prompt(s) -> {out_path}")


@main.command("report")
@click.option("--reports", "report_paths", required=True, multiple=True,
              type=click.Path(exists=True),
              help="reports.jsonl files to merge.")
@click.option("--out", "out_dir", required=True, type=click.Path())
def report_cmd(report_paths, out_dir):
    """Merge report records into one comparison table."""
    from .evaluation import EvalReport, PrPoint

    try:
        reports = []
        for path in report_paths:
            with Path(path).open("r", encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    record = json.loads(line)
                    pr = record.get("pr_curve")
                    reports.append(
                        EvalReport(
                            task_id=record["task_id"],
                            model_id=record["model_id"],
                            method=record["method"],
                            accuracy=record["accuracy"],
                            n=record["n"],
                            class_distribution=np.array(record["class_distribution"]),
                            top1_gap=record["calibration"]["top1_gap"],
                            all_label_gaps=np.array(
                                record["calibration"]["all_label_gaps"]
                            ),
                            pr_curve=None if pr is None else [
                                PrPoint(p["threshold"], p["precision"], p["recall"])
                                for p in pr
                            ],
                            prompt_id=record.get("prompt_id"),
                        )
                    )
        table = write_reports(reports, out_dir)
    except (ToolkitError, ValueError, KeyError, OSError) as exc:
        _fail(exc)
    click.echo(table.text)


@main.command("pipeline")
@click.option("--scores", "scores_paths", required=True, multiple=True,
              type=click.Path(exists=True))
@click.option("--mode", type=click.Choice(list(MODES)), default="uncalibrated",
              show_default=True)
@click.option("--prior", default="uniform", show_default=True)
@click.option("--ensemble/--no-ensemble", default=False, show_default=True)
@click.option("--ensemble-stage", type=click.Choice(["pre", "post"]),
              default="post", show_default=True)
@click.option("--weights", "weights_paths", multiple=True,
              type=click.Path(exists=True))
@click.option("--null-scores", "null_paths", multiple=True,
              type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def pipeline_cmd(scores_paths, mode, prior, ensemble, ensemble_stage,
                 weights_paths, null_paths, seed, out_dir):
    """Run the full scoring-to-report pipeline, writing every stage artifact."""
    try:
        config = PipelineConfig(
            mode=mode, prior=prior, ensemble=ensemble,
            ensemble_stage=ensemble_stage, seed=seed,
        )
        reports = run_pipeline(
            scores_paths, out_dir, config,
            weights_paths=weights_paths, null_score_paths=null_paths,
        )
    except (ToolkitError, ValueError, OSError) as exc:
        _fail(exc)
    click.echo(render_report(reports).text)


# -------------------------------------------------------------------- synth


@main.group()
def synth():
    """Synthetic instances with planted bias."""


@synth.command("gen")
@click.option("--seed", default=0, show_default=True)
@click.option("--k", "k", default=5, show_default=True)
@click.option("--n", "n", default=1000, show_default=True)
@click.option("--bias", "bias_path", type=click.Path(exists=True),
              help="JSON file with K positive reals; defaults to all ones.")
@click.option("--prior", "prior_path", type=click.Path(exists=True),
              help="JSON file with K probabilities; defaults to uniform.")
@click.option("--num-null", default=32, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def synth_gen(seed, k, n, bias_path, prior_path, num_null, out_dir):
    """Emit scores.jsonl, null_scores.jsonl and truth.json for one instance."""
    try:
        bias = None
        if bias_path:
            bias = np.asarray(
                json.loads(Path(bias_path).read_text(encoding="utf-8")), np.float64
            )
        prior = None
        if prior_path:
            prior = np.asarray(
                json.loads(Path(prior_path).read_text(encoding="utf-8")), np.float64
            )
        instance = gen_instance(
            seed, k, n, bias, prior, SynthConfig(num_null=num_null)
        )
        paths = write_instance(instance, out_dir)
    except (ToolkitError, ValueError, OSError) as exc:
        _fail(exc)
    click.echo(f"instance seed={seed} K={k} N={n} -> {paths['scores']}")


if __name__ == "__main__":
    main()
