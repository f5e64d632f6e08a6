"""Seeded synthetic scoring instances with planted class bias.

Each row's log-likelihoods are log(bias_k) + log(kernel(gold, k)) plus
multiplicative log-normal noise, where the kernel gives the correct class a
fixed weight advantage.  Non-uniform bias skews uncalibrated predictions
toward the favored classes, which is precisely what the calibration layer
is supposed to undo; every instance regenerates bit-identically from its
seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .calibration import uniform_prior
from .scores import ScoreMatrix

SYNTH_MODEL_ID = "synthetic"


@dataclass(frozen=True)
class SynthConfig:
    """Generator constants; defaults give clearly above-chance instances."""

    correct_weight: float = 3.0
    noise_sigma: float = 0.25
    num_null: int = 32

    def __post_init__(self):
        if self.correct_weight <= 1.0:
            raise ValueError("correct_weight must exceed 1 for signal")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if self.num_null < 1:
            raise ValueError("num_null must be >= 1")


@dataclass
class SyntheticInstance:
    seed: int
    k: int
    n: int
    bias: np.ndarray
    prior: np.ndarray
    golds: np.ndarray
    score_matrix: ScoreMatrix
    null_matrix: ScoreMatrix


def gen_instance(
    seed: int,
    k: int,
    n: int,
    bias: np.ndarray | None = None,
    prior: np.ndarray | None = None,
    config: SynthConfig = SynthConfig(),
    task_id: str = "synth",
    golds: np.ndarray | None = None,
) -> SyntheticInstance:
    """Deterministic instance with known bias, prior and gold labels.

    Passing ``golds`` pins the labels instead of drawing them from the
    prior, which lets several instances model different prompts scoring
    the same utterances.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if n < k:
        raise ValueError("n must be >= k")
    bias = np.ones(k) if bias is None else np.asarray(bias, dtype=np.float64)
    if bias.shape != (k,) or (bias <= 0).any():
        raise ValueError("bias must be K positive reals")
    prior = uniform_prior(k) if prior is None else np.asarray(prior, np.float64)
    if prior.shape != (k,) or abs(prior.sum() - 1.0) > 1e-12 or (prior < 0).any():
        raise ValueError("prior must be a K-vector summing to 1")

    rng = np.random.default_rng(seed)
    if golds is None:
        golds = rng.choice(k, size=n, p=prior)
    else:
        golds = np.asarray(golds, dtype=np.int64)
        if golds.shape != (n,) or golds.min() < 0 or golds.max() >= k:
            raise ValueError("golds must be N class indices in [0, K)")
    kernel = np.ones((n, k))
    kernel[np.arange(n), golds] = config.correct_weight
    ll = (
        np.log(bias)[None, :]
        + np.log(kernel)
        + rng.normal(0.0, config.noise_sigma, size=(n, k))
    )
    null_ll = np.log(bias)[None, :] + rng.normal(
        0.0, config.noise_sigma, size=(config.num_null, k)
    )

    class_names = tuple(f"class_{i:02d}" for i in range(k))
    score_matrix = ScoreMatrix(
        task_id=task_id,
        model_id=SYNTH_MODEL_ID,
        prompt_id="synth-default",
        class_names=class_names,
        utt_ids=tuple(f"synth-{i:05d}" for i in range(n)),
        golds=tuple(int(g) for g in golds),
        ll=ll,
    )
    null_matrix = ScoreMatrix(
        task_id=task_id,
        model_id=SYNTH_MODEL_ID,
        prompt_id="synth-default",
        class_names=class_names,
        utt_ids=tuple(f"noise-{m:04d}" for m in range(config.num_null)),
        golds=(None,) * config.num_null,
        ll=null_ll,
    )
    return SyntheticInstance(
        seed=seed,
        k=k,
        n=n,
        bias=bias,
        prior=prior,
        golds=golds,
        score_matrix=score_matrix,
        null_matrix=null_matrix,
    )


def write_instance(instance: SyntheticInstance, out_dir: str | Path) -> dict[str, Path]:
    """Emit the instance as standard score files plus a truth record."""
    import json

    from .scorefile import write_score_file

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "scores": write_score_file(instance.score_matrix, out_dir / "scores.jsonl"),
        "null_scores": write_score_file(
            instance.null_matrix, out_dir / "null_scores.jsonl"
        ),
    }
    truth = {
        "seed": instance.seed,
        "k": instance.k,
        "n": instance.n,
        "bias": [float(b) for b in instance.bias],
        "prior": [float(p) for p in instance.prior],
    }
    truth_path = out_dir / "truth.json"
    truth_path.write_text(json.dumps(truth, indent=2) + "\n", encoding="utf-8")
    paths["truth"] = truth_path
    return paths
