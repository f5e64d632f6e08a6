"""Class reweighting and calibration measurement.

Two unsupervised ways of estimating per-class weights are provided: prior
matching, which solves for weights making the mean reweighted posterior
equal a target prior, and null-input estimation, which inverts the model's
posterior on an information-free input.  Weights act multiplicatively on
posteriors and are normalized so the first entry is exactly 1 (the overall
scale is a redundant degree of freedom).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    ConvergenceError,
    DegenerateInputError,
    InfeasiblePriorError,
)

METHODS = ("none", "prior_match", "null_zero", "null_noise")

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 10_000


def uniform_prior(k: int) -> np.ndarray:
    return np.full(k, 1.0 / k)


def _check_prior(prior: np.ndarray, k: int, *, strict: bool = False) -> np.ndarray:
    prior = np.asarray(prior, dtype=np.float64)
    if prior.shape != (k,):
        raise ValueError(f"prior must have length {k}, got shape {prior.shape}")
    if np.isnan(prior).any() or (prior < 0).any():
        raise ValueError("prior entries must be non-negative")
    if abs(prior.sum() - 1.0) > 1e-12:
        raise ValueError("prior must sum to 1 within 1e-12")
    if strict and ((prior <= 0).any() or (prior >= 1).any()):
        raise ValueError("prior matching needs target entries strictly in (0, 1)")
    return prior


@dataclass(frozen=True)
class CalibrationWeights:
    """Positive per-class weights with alpha[0] fixed to 1."""

    alpha: np.ndarray
    method: str
    target_prior: np.ndarray
    iters: int = 0
    l1_gap: float = 0.0

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=np.float64)
        if alpha.ndim != 1 or len(alpha) < 2:
            raise ValueError("alpha must be a vector of length >= 2")
        if not np.isfinite(alpha).all() or (alpha <= 0).any():
            raise ValueError("alpha entries must be positive and finite")
        if alpha[0] != 1.0:
            raise ValueError("alpha must be normalized so alpha[0] == 1")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(
            self, "target_prior", _check_prior(self.target_prior, len(alpha))
        )

    @property
    def k(self) -> int:
        return len(self.alpha)


def identity_weights(k: int) -> CalibrationWeights:
    return CalibrationWeights(np.ones(k), "none", uniform_prior(k))


def _as_alpha(w: CalibrationWeights | np.ndarray | Sequence[float]) -> np.ndarray:
    if isinstance(w, CalibrationWeights):
        return w.alpha
    return np.asarray(w, dtype=np.float64)


def reweight(p: np.ndarray, w: CalibrationWeights | np.ndarray) -> np.ndarray:
    """Reweighted posterior: alpha_k * p_k, renormalized."""
    p = np.asarray(p, dtype=np.float64)
    out = reweight_matrix(p[None, :], w)
    return out[0]


def reweight_matrix(
    probs: np.ndarray, w: CalibrationWeights | np.ndarray
) -> np.ndarray:
    alpha = _as_alpha(w)
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[1] != len(alpha):
        raise ValueError(
            f"posterior table of shape {probs.shape} does not match K={len(alpha)}"
        )
    weighted = probs * alpha
    sums = weighted.sum(axis=1, keepdims=True)
    dead = sums[:, 0] == 0.0
    if dead.any():
        raise DegenerateInputError(
            f"rows {np.flatnonzero(dead).tolist()} have zero weighted mass"
        )
    return weighted / sums


def output_prior(
    probs: np.ndarray, w: CalibrationWeights | np.ndarray
) -> np.ndarray:
    """Mean reweighted posterior over all utterances."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[0] < 1:
        raise ValueError("output_prior needs a non-empty N x K posterior table")
    return reweight_matrix(probs, w).mean(axis=0)


def prior_match(
    probs: np.ndarray,
    target_prior: np.ndarray | None = None,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> CalibrationWeights:
    """Solve for weights whose output prior matches the target prior.

    Multiplicative fixed point: every sweep scales alpha_k by
    target_k / current_output_prior_k and re-fixes alpha[0] = 1.  This is
    the Sinkhorn-style column update for the row-normalized table, so it
    converges whenever every class carries some posterior mass.  Success
    means an L1 gap of at most ``tol`` between output prior and target.
    """
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[0] < 1:
        raise ValueError("prior_match needs a non-empty N x K posterior table")
    k = probs.shape[1]
    target = _check_prior(
        uniform_prior(k) if target_prior is None else target_prior, k, strict=True
    )
    zero_mass = probs.max(axis=0) <= 0.0
    if zero_mass.any():
        raise InfeasiblePriorError(
            f"classes {np.flatnonzero(zero_mass).tolist()} have zero posterior "
            "mass in every row but a nonzero target prior"
        )
    alpha = np.ones(k)
    gap = float("inf")
    for sweep in range(max_iter + 1):
        current = output_prior(probs, alpha)
        gap = float(np.abs(current - target).sum())
        if gap <= tol:
            return CalibrationWeights(
                alpha, "prior_match", target, iters=sweep, l1_gap=gap
            )
        if sweep == max_iter:
            break
        alpha = alpha * (target / current)
        alpha = alpha / alpha[0]
    raise ConvergenceError(max_iter, gap)


def null_input_weights(
    null_probs: np.ndarray, method: str = "null_noise"
) -> CalibrationWeights:
    """Weights from null-input posteriors: the reciprocal of their mean.

    An unbiased model would put a uniform posterior on an input carrying no
    information; deviations from uniform expose class bias, and dividing by
    them corrects all downstream decisions.
    """
    null_probs = np.asarray(null_probs, dtype=np.float64)
    if null_probs.ndim == 1:
        null_probs = null_probs[None, :]
    if null_probs.ndim != 2 or null_probs.shape[0] < 1:
        raise ValueError("null_input_weights needs an M x K posterior table")
    if method not in ("null_zero", "null_noise"):
        raise ValueError(f"method must be null_zero or null_noise, got {method!r}")
    mean = null_probs.mean(axis=0)
    if (mean <= 0.0).any():
        raise DegenerateInputError(
            f"classes {np.flatnonzero(mean <= 0).tolist()} have zero mean "
            "null posterior"
        )
    alpha = 1.0 / mean
    alpha = alpha / alpha[0]
    k = len(alpha)
    gap = float(np.abs(reweight(mean, alpha) - uniform_prior(k)).sum())
    return CalibrationWeights(alpha, method, uniform_prior(k), iters=0, l1_gap=gap)


def top1_calibration_gap(probs: np.ndarray, golds: Sequence[int]) -> float:
    """|mean top-1 confidence - accuracy| over the table."""
    probs = np.asarray(probs, dtype=np.float64)
    golds = np.asarray(golds, dtype=np.int64)
    if probs.ndim != 2 or probs.shape[0] != len(golds):
        raise ValueError("posterior table and golds must align")
    confidence = probs.max(axis=1).mean()
    accuracy = (probs.argmax(axis=1) == golds).mean()
    return float(abs(confidence - accuracy))


def all_label_calibration_gap(
    probs: np.ndarray, golds: Sequence[int]
) -> np.ndarray:
    """Per-class |mean posterior mass - empirical gold frequency|."""
    probs = np.asarray(probs, dtype=np.float64)
    golds = np.asarray(golds, dtype=np.int64)
    if probs.ndim != 2 or probs.shape[0] != len(golds):
        raise ValueError("posterior table and golds must align")
    k = probs.shape[1]
    mean_mass = probs.mean(axis=0)
    freq = np.bincount(golds, minlength=k) / len(golds)
    return np.abs(mean_mass - freq)
