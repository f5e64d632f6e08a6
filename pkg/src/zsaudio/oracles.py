"""Brute-force reference implementations for the property-test suite.

Each oracle is deliberately naive: exhaustive search, full path
enumeration, quadratic sweeps.  They share no code with the fast paths they
check.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .calibration import CalibrationWeights, output_prior, uniform_prior
from .ctc import CtcFrameLogits, CtcLabelSequence
from .errors import UnsupportedError
from .evaluation import PrPoint

MAX_ENUM_PATHS = 10**6


def oracle_prior_match(
    probs: np.ndarray,
    target_prior: np.ndarray | None = None,
    resolution: float = 1e-6,
) -> CalibrationWeights:
    """Exhaustive search over weight ratios minimizing the L1 prior gap.

    K=2 uses bisection on the single free ratio; K=3 uses a coarse-to-fine
    log-space grid over both ratios.  Larger K is out of budget.
    """
    probs = np.asarray(probs, dtype=np.float64)
    k = probs.shape[1]
    target = uniform_prior(k) if target_prior is None else np.asarray(target_prior)
    if k == 2:
        alpha = _bisect_alpha2(probs, target, resolution)
    elif k == 3:
        alpha = _grid_alpha3(probs, target, resolution)
    else:
        raise UnsupportedError(f"oracle_prior_match supports K <= 3, got K={k}")
    gap = float(np.abs(output_prior(probs, alpha) - target).sum())
    return CalibrationWeights(alpha, "prior_match", target, iters=0, l1_gap=gap)


def _bisect_alpha2(
    probs: np.ndarray, target: np.ndarray, resolution: float
) -> np.ndarray:
    def excess(a: float) -> float:
        # mean reweighted mass on class 1 minus its target; increasing in a
        p0, p1 = probs[:, 0], probs[:, 1]
        return float(np.mean(a * p1 / (p0 + a * p1)) - target[1])

    lo, hi = 1e-12, 1.0
    while excess(hi) < 0:
        hi *= 2.0
        if hi > 1e12:
            raise UnsupportedError("bisection bracket exceeded 1e12")
    while hi - lo > resolution * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if excess(mid) < 0:
            lo = mid
        else:
            hi = mid
    return np.array([1.0, 0.5 * (lo + hi)])


def _grid_alpha3(
    probs: np.ndarray, target: np.ndarray, resolution: float
) -> np.ndarray:
    def grid_gaps(a2_vals: np.ndarray, a3_vals: np.ndarray) -> np.ndarray:
        # all (a2, a3) combinations at once: weighted table (G2*G3, N, 3)
        g2, g3 = np.meshgrid(a2_vals, a3_vals, indexing="ij")
        alphas = np.stack([np.ones_like(g2).ravel(), g2.ravel(), g3.ravel()], axis=1)
        weighted = probs[None, :, :] * alphas[:, None, :]
        weighted /= weighted.sum(axis=2, keepdims=True)
        prior = weighted.mean(axis=1)
        return np.abs(prior - target).sum(axis=1).reshape(len(a2_vals), len(a3_vals))

    lo2 = lo3 = -3.0
    hi2 = hi3 = 3.0
    points = 41
    best = np.array([1.0, 1.0, 1.0])
    while True:
        a2_vals = np.logspace(lo2, hi2, points)
        a3_vals = np.logspace(lo3, hi3, points)
        gaps = grid_gaps(a2_vals, a3_vals)
        i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
        best = np.array([1.0, a2_vals[i], a3_vals[j]])
        step2 = (hi2 - lo2) / (points - 1)
        step3 = (hi3 - lo3) / (points - 1)
        if max(step2, step3) * math.log(10) <= resolution:
            return best
        lo2, hi2 = math.log10(a2_vals[i]) - 2 * step2, math.log10(a2_vals[i]) + 2 * step2
        lo3, hi3 = math.log10(a3_vals[j]) - 2 * step3, math.log10(a3_vals[j]) + 2 * step3


def _collapse(path: Sequence[int], blank_id: int) -> tuple[int, ...]:
    out = []
    prev = None
    for sym in path:
        if sym == prev:
            continue
        prev = sym
        if sym != blank_id:
            out.append(sym)
    return tuple(out)


def oracle_ctc(frames: CtcFrameLogits, label: CtcLabelSequence) -> float:
    """Literal enumeration of all V^T paths that collapse to the label."""
    t, v = frames.t, frames.v
    if v**t > MAX_ENUM_PATHS:
        raise UnsupportedError(f"V^T = {v}**{t} exceeds enumeration budget")
    lp = frames.log_probs
    target = tuple(label.token_ids)

    paths = np.array(list(itertools.product(range(v), repeat=t)), dtype=np.int64)
    keep = np.ones_like(paths, dtype=bool)
    keep[:, 1:] = paths[:, 1:] != paths[:, :-1]
    keep &= paths != frames.blank_id
    lengths = keep.sum(axis=1)
    candidates = np.flatnonzero(lengths == len(target))
    if len(candidates) == 0:
        return float("-inf")
    collapsed = paths[candidates][keep[candidates]].reshape(-1, len(target))
    matches = candidates[(collapsed == np.array(target)).all(axis=1)]
    if len(matches) == 0:
        return float("-inf")
    path_ll = lp[np.arange(t)[None, :], paths[matches]].sum(axis=1)
    return float(math.log(math.fsum(math.exp(x) for x in path_ll)))


def oracle_pr_curve(
    probs: np.ndarray, golds: Sequence[int], positive_class: int
) -> list[PrPoint]:
    """Quadratic threshold sweep: recount the whole table at each threshold."""
    probs = np.asarray(probs, dtype=np.float64)
    golds = np.asarray(golds, dtype=np.int64)
    scores = probs[:, positive_class]
    is_pos = golds == positive_class
    n_pos = int(is_pos.sum())
    if n_pos == 0:
        raise ValueError("no positive golds; cannot sweep recall")
    points = []
    for threshold in sorted(set(scores.tolist())):
        tp = 0
        n_pred = 0
        for score, pos in zip(scores, is_pos):
            if score >= threshold:
                n_pred += 1
                if pos:
                    tp += 1
        points.append(
            PrPoint(
                threshold=float(threshold),
                precision=tp / n_pred,
                recall=tp / n_pos,
            )
        )
    return points
