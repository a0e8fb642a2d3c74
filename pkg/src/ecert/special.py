"""Built-in benchmark model and structure-aware shortcuts.

The benchmark black box is a separable piecewise-linear map: identity
near the origin, folding back beyond |t| = 2 on each coordinate. Its
natural local explanation at the origin is the linear map with slope
``slope`` on every coordinate, which makes the largest certifiable
half-width exactly 1/d at threshold theta = slope. That closed form is
what the test suites lean on.

Two shortcuts exploit structure instead of queries: a Lipschitz bound
gives a query-free certified head start, and a piece counter certifies
a whole piecewise-linear model once every piece has shown an
acceptable fidelity value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CallableBlackBox, LinearExplanation

__all__ = [
    "pwl_response",
    "make_synthetic",
    "synthetic_min_fidelity",
    "HeadStart",
    "lipschitz_headstart",
    "PiecewiseEarlyStop",
]


def pwl_response(xs: np.ndarray) -> np.ndarray:
    """Sum of per-coordinate tent maps: t inside [-2, 2], reflected
    with slope -1 outside. Accepts (n, d) or (d,) arrays."""
    xs = np.asarray(xs, dtype=float)
    t = np.where(np.abs(xs) <= 2.0, xs, np.sign(xs) * 4.0 - xs)
    return t.sum(axis=-1)


def make_synthetic(dim: int, slope: float = 0.75):
    """Benchmark triple: black box, linear explanation, ideal width.

    The explanation applies ``slope`` to every coordinate. At threshold
    theta = slope the largest half-width with all fidelities above
    theta is exactly 1/dim.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if not (0.0 < slope < 1.0):
        raise ValueError("slope must be in (0, 1)")
    box = CallableBlackBox(
        lambda x: float(pwl_response(x)),
        batch_fn=lambda xs: np.asarray(pwl_response(xs), dtype=float),
    )
    expl = LinearExplanation(np.full(dim, slope))
    return box, expl, 1.0 / dim


def synthetic_min_fidelity(dim: int, slope: float, w: float) -> float:
    """Exact minimum fidelity of the benchmark over the cube [-w, w]^dim
    around the origin, for w <= 2: attained at a corner."""
    if not (0.0 <= w <= 2.0):
        raise ValueError("closed form holds for 0 <= w <= 2")
    return 1.0 - (1.0 - slope) * dim * w


@dataclass(frozen=True)
class HeadStart:
    """Query-free certified radius (Euclidean) and the cube half-width
    inscribed in it."""

    r_l2: float
    w_inf: float


def lipschitz_headstart(
    alpha: np.ndarray,
    theta: float,
    lipschitz: float,
    anchor_gap: float = 0.0,
) -> HeadStart:
    """Radius within which fidelity provably stays above theta.

    If the black box is ``lipschitz``-Lipschitz (Euclidean) and the
    linear explanation misses the anchor value by ``anchor_gap``, then
    fidelity at distance r is at least 1 - anchor_gap - (L + |alpha|) r.
    Solving for theta gives r; the inscribed cube has half-width
    r / sqrt(d). No queries are spent.
    """
    alpha = np.asarray(alpha, dtype=float).ravel()
    if alpha.size == 0:
        raise ValueError("alpha must be non-empty")
    if not (lipschitz >= 0.0):
        raise ValueError("lipschitz must be >= 0")
    if not (0.0 <= anchor_gap):
        raise ValueError("anchor_gap must be >= 0")
    slack = (1.0 - theta) - anchor_gap
    if slack <= 0.0:
        return HeadStart(0.0, 0.0)
    denom = float(np.linalg.norm(alpha)) + lipschitz
    if denom == 0.0:
        raise ValueError("need a nonzero slope or Lipschitz constant")
    r = slack / denom
    return HeadStart(r, r / math.sqrt(alpha.size))


class PiecewiseEarlyStop:
    """Certify a piecewise-linear model from finitely many fidelity values.

    A model with at most ``pieces`` linear pieces can produce at most
    that many distinct direction-based fidelity values. Feed observed
    values in; once all pieces have appeared and every one clears
    theta, ``certified`` flips to True and further sampling is
    pointless. Values closer than ``tol`` count as the same piece.
    Seeing more distinct values than declared pieces is an error.
    """

    def __init__(self, pieces: int, theta: float, tol: float = 1e-9) -> None:
        if pieces < 1:
            raise ValueError("pieces must be >= 1")
        if not (tol >= 0.0):
            raise ValueError("tol must be >= 0")
        self.pieces = pieces
        self.theta = theta
        self.tol = tol
        self._values: list[float] = []

    @property
    def values(self) -> list[float]:
        return list(self._values)

    @property
    def complete(self) -> bool:
        return len(self._values) == self.pieces

    @property
    def certified(self) -> bool:
        return self.complete and all(v >= self.theta for v in self._values)

    def observe(self, value: float) -> bool:
        """Record one fidelity value; True once certification triggers."""
        value = float(value)
        if not math.isfinite(value):
            raise ValueError("fidelity value must be finite")
        if not any(abs(value - v) <= self.tol for v in self._values):
            self._values.append(value)
            if len(self._values) > self.pieces:
                raise ValueError(
                    f"saw {len(self._values)} distinct fidelity values, "
                    f"model declared {self.pieces} pieces"
                )
        return self.certified

    def observe_many(self, values) -> bool:
        done = False
        for v in np.asarray(values, dtype=float).ravel():
            done = self.observe(float(v))
        return done
