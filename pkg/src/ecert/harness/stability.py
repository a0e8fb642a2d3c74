"""Explanation stability across reruns.

Two runs of an explainer on the same sample rarely agree exactly; what
matters is whether the influential coordinates keep their standing.
Two views of that: overlap of the top-k coordinate sets, and rank
correlation of the absolute weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import spearmanr

__all__ = ["topk_overlap", "spearman_abs", "StabilityResult", "run_stability"]

# standard error of a median, normal approximation
_MEDIAN_SE_FACTOR = math.sqrt(math.pi / 2.0)


def _vec(a) -> np.ndarray:
    v = np.asarray(a, dtype=float).ravel()
    if v.size < 2:
        raise ValueError("need at least two coordinates")
    if not np.all(np.isfinite(v)):
        raise ValueError("weights must be finite")
    return v


def topk_overlap(a, b, k: int) -> float:
    """Fraction of shared coordinates among the k largest by absolute
    weight (ties resolved toward the lower index)."""
    a, b = _vec(a), _vec(b)
    if a.size != b.size:
        raise ValueError("weight vectors must have equal length")
    if not (1 <= k <= a.size):
        raise ValueError("k must be in [1, d]")
    idx = np.arange(a.size)
    top_a = set(np.lexsort((idx, -np.abs(a)))[:k].tolist())
    top_b = set(np.lexsort((idx, -np.abs(b)))[:k].tolist())
    return len(top_a & top_b) / k


def spearman_abs(a, b) -> float:
    """Rank correlation of the absolute weights."""
    a, b = _vec(a), _vec(b)
    if a.size != b.size:
        raise ValueError("weight vectors must have equal length")
    return float(spearmanr(np.abs(a), np.abs(b)).statistic)


@dataclass(frozen=True)
class StabilityResult:
    n_pairs: int
    k: int
    topk_mean: float
    topk_median: float
    topk_se_mean: float
    topk_se_median: float
    spearman_mean: float
    spearman_median: float
    spearman_se_mean: float
    spearman_se_median: float


def _summary(values: np.ndarray) -> tuple[float, float, float, float]:
    mean = float(values.mean())
    median = float(np.median(values))
    if values.size < 2:
        return mean, median, 0.0, 0.0
    se = float(values.std(ddof=1) / np.sqrt(values.size))
    return mean, median, se, _MEDIAN_SE_FACTOR * se


def run_stability(pairs, k: int) -> StabilityResult:
    """Aggregate stability over (first run, second run) weight pairs."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("need at least one pair")
    tops = np.array([topk_overlap(a, b, k) for a, b in pairs])
    rhos = np.array([spearman_abs(a, b) for a, b in pairs])
    t_mean, t_med, t_se, t_mse = _summary(tops)
    r_mean, r_med, r_se, r_mse = _summary(rhos)
    return StabilityResult(
        n_pairs=len(pairs),
        k=k,
        topk_mean=t_mean,
        topk_median=t_med,
        topk_se_mean=t_se,
        topk_se_median=t_mse,
        spearman_mean=r_mean,
        spearman_median=r_med,
        spearman_se_mean=r_se,
        spearman_se_median=r_mse,
    )
