"""Command-line entry point: produce score/frame files from audio."""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click

from .audio import list_audio_files
from .config import AdapterConfig
from .ctc_frames import score_ctc_frames
from .formats import read_label_file, read_prompt_file, read_question_file
from .hf import load_ctc_backend, load_seq2seq_backend
from .seq2seq import score_aqa, score_seq2seq


@click.group()
def main():
    """Drive an ASR model to produce toolkit score and frame files."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")


@main.command("score")
@click.option("--model", "model_id", required=True,
              help="Checkpoint name/path, or toy-seq2seq / toy-ctc.")
@click.option("--mode", type=click.Choice(["seq2seq", "ctc", "aqa"]),
              default="seq2seq", show_default=True)
@click.option("--audio", "audio_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--prompts", "prompts_path", type=click.Path(exists=True),
              help="Prompt file (seq2seq mode).")
@click.option("--labels", "labels_path", type=click.Path(exists=True),
              help="Labels file: task_id, class_names, optional golds.")
@click.option("--questions", "questions_path", type=click.Path(exists=True),
              help="AQA question records (aqa mode).")
@click.option("--null", "null_spec", default=None,
              help="'zero' appends a NULL:zero row; a directory scores its "
                   "clips into a sibling .null file.")
@click.option("--device", default="cpu", show_default=True)
@click.option("--batch-size", default=8, show_default=True)
@click.option("--task-id", default=None, help="Override the labels task id.")
@click.option("--out", "out_path", required=True, type=click.Path())
def score(model_id, mode, audio_dir, prompts_path, labels_path, questions_path,
          null_spec, device, batch_size, task_id, out_path):
    """Score a directory of .wav clips into the toolkit's file formats."""
    try:
        audio_paths = list_audio_files(audio_dir)
        if mode == "ctc":
            config = AdapterConfig(model_id=model_id, mode="ctc_frames",
                                   batch_size=batch_size, device=device)
            backend = load_ctc_backend(model_id, device=device)
            written, errors = score_ctc_frames(audio_paths, config, backend, out_path)
            click.echo(f"wrote {len(written)} frame file(s) under {out_path}")
        elif mode == "aqa":
            if not questions_path:
                raise click.UsageError("aqa mode needs --questions")
            questions = read_question_file(questions_path)
            config = AdapterConfig(model_id=model_id, batch_size=batch_size,
                                   device=device)
            backend = load_seq2seq_backend(model_id, device=device)
            path, errors = score_aqa(
                audio_paths, questions, config, backend, out_path,
                task_id=task_id or "aqa",
            )
            click.echo(f"wrote {path}")
        else:
            if not prompts_path or not labels_path:
                raise click.UsageError("seq2seq mode needs --prompts and --labels")
            prompts = read_prompt_file(prompts_path)
            file_task_id, class_names, golds = read_label_file(labels_path)
            null_mode = "none"
            null_dir = None
            if null_spec == "zero":
                null_mode = "zero_encoder_input"
            elif null_spec:
                null_mode = "audio_files"
                null_dir = Path(null_spec)
            config = AdapterConfig(model_id=model_id, batch_size=batch_size,
                                   device=device, null_mode=null_mode)
            backend = load_seq2seq_backend(model_id, device=device)
            out = Path(out_path)
            if len(prompts) > 1:
                out.mkdir(parents=True, exist_ok=True)
            errors = []
            for prompt_id, pattern in prompts:
                target = (
                    out / f"scores_{prompt_id}.jsonl" if len(prompts) > 1 else out
                )
                path, errs = score_seq2seq(
                    audio_paths, pattern, class_names, config, backend, target,
                    task_id=task_id or file_task_id,
                    prompt_id=prompt_id, golds=golds,
                )
                errors.extend(errs)
                click.echo(f"{prompt_id}: wrote {path}")
                if null_dir is not None:
                    null_target = target.with_name(target.stem + ".null.jsonl")
                    null_config = AdapterConfig(
                        model_id=model_id, batch_size=batch_size, device=device
                    )
                    null_path, errs = score_seq2seq(
                        list_audio_files(null_dir), pattern, class_names,
                        null_config, backend, null_target,
                        task_id=task_id or file_task_id, prompt_id=prompt_id,
                    )
                    errors.extend(errs)
                    click.echo(f"{prompt_id}: wrote null scores {null_path}")
        if errors:
            click.echo(f"{len(errors)} file(s) skipped:", err=True)
            for line in errors:
                click.echo(f"  {line}", err=True)
    except click.UsageError:
        raise
    except Exception as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
