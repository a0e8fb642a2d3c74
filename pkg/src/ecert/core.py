"""Shared vocabulary: points, black boxes, explanations, fidelity, shells.

Everything downstream (sampling strategies, the region driver, the
probability bounds) is written against the small set of types defined
here. Points are plain 1-D float arrays; a black box is anything that
maps a point to a real and counts how often it was asked.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

__all__ = [
    "as_point",
    "BlackBox",
    "CallableBlackBox",
    "LinearExplanation",
    "GenericExplanation",
    "Explanation",
    "apply_explanation",
    "AbsFidelity",
    "CosineFidelity",
    "CustomMetric",
    "QualityMetric",
    "fidelity",
    "FidelityFn",
    "ShellRegion",
    "shell_contains",
    "Provenance",
    "UNIFORM",
    "FidelitySample",
    "CertifyOutcome",
    "RegionRecord",
    "CertificationReport",
]


def as_point(x: Union[Sequence[float], np.ndarray], dim: Optional[int] = None) -> np.ndarray:
    """Validate and convert ``x`` to a finite 1-D float64 array.

    Parameters
    ----------
    x : sequence of float
        Candidate point.
    dim : int, optional
        Expected dimension. A mismatch raises ``ValueError``.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("a point must be a non-empty 1-D sequence of reals")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point coordinates must be finite")
    if dim is not None and arr.size != dim:
        raise ValueError(f"expected a point of dimension {dim}, got {arr.size}")
    return arr


class BlackBox:
    """Query-counted scalar function of a point.

    Subclasses implement ``_eval_one`` and may override ``_eval_many``
    with a vectorized version. Every evaluated point bumps
    ``query_count`` by exactly one; the counter is thread safe so that
    parallel batch evaluation stays honest.
    """

    def __init__(self) -> None:
        self._count = 0
        self._lock = threading.Lock()

    @property
    def query_count(self) -> int:
        return self._count

    def _tick(self, k: int) -> None:
        with self._lock:
            self._count += k

    def _eval_one(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def _eval_many(self, xs: np.ndarray) -> np.ndarray:
        return np.array([self._eval_one(x) for x in xs], dtype=float)

    def evaluate(self, x: Union[Sequence[float], np.ndarray]) -> float:
        x = as_point(x)
        self._tick(1)
        return float(self._eval_one(x))

    def evaluate_batch(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if xs.ndim != 2:
            raise ValueError("evaluate_batch expects an (n, d) array")
        self._tick(xs.shape[0])
        out = np.asarray(self._eval_many(xs), dtype=float)
        if out.shape != (xs.shape[0],):
            raise ValueError("black box returned a malformed batch result")
        return out


class CallableBlackBox(BlackBox):
    """Wrap a plain callable (and optionally a vectorized one) as a BlackBox."""

    def __init__(
        self,
        fn: Callable[[np.ndarray], float],
        batch_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ) -> None:
        super().__init__()
        self._fn = fn
        self._batch_fn = batch_fn

    def _eval_one(self, x: np.ndarray) -> float:
        return float(self._fn(x))

    def _eval_many(self, xs: np.ndarray) -> np.ndarray:
        if self._batch_fn is not None:
            return np.asarray(self._batch_fn(xs), dtype=float)
        return super()._eval_many(xs)


@dataclass(frozen=True)
class LinearExplanation:
    """Local linear surrogate ``e(x) = alpha . x + intercept``."""

    alpha: np.ndarray
    intercept: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", as_point(self.alpha))
        object.__setattr__(self, "intercept", float(self.intercept))

    def apply(self, x: np.ndarray) -> float:
        return float(self.alpha @ x + self.intercept)

    def apply_batch(self, xs: np.ndarray) -> np.ndarray:
        return xs @ self.alpha + self.intercept


@dataclass(frozen=True)
class GenericExplanation:
    """Opaque explanation given only by an apply callable."""

    fn: Callable[[np.ndarray], float]

    def apply(self, x: np.ndarray) -> float:
        return float(self.fn(x))

    def apply_batch(self, xs: np.ndarray) -> np.ndarray:
        return np.array([self.fn(x) for x in xs], dtype=float)


Explanation = Union[LinearExplanation, GenericExplanation]


def apply_explanation(e: Explanation, x: Union[Sequence[float], np.ndarray]) -> float:
    """Evaluate the explanation at a point."""
    return e.apply(as_point(x))


class AbsFidelity:
    """Fidelity ``1 - |g(x) - e(x)|``.

    Not clamped below, so wildly wrong surrogates go negative; the
    maximum is 1 at exact agreement.
    """

    queries_black_box = True

    def from_values(self, e_vals: np.ndarray, g_vals: np.ndarray) -> np.ndarray:
        return 1.0 - np.abs(np.asarray(g_vals, dtype=float) - np.asarray(e_vals, dtype=float))


class CosineFidelity:
    """Directional agreement between local model coefficients.

    ``beta_of`` maps a point to the black box's local linear
    coefficient vector there; the score is the absolute cosine between
    that vector and the explanation's coefficients. Only defined for
    linear explanations. Zero-norm vectors are rejected.
    """

    queries_black_box = False

    def __init__(self, beta_of: Callable[[np.ndarray], np.ndarray]) -> None:
        self.beta_of = beta_of

    def score(self, e: Explanation, x: np.ndarray) -> float:
        if not isinstance(e, LinearExplanation):
            raise TypeError("cosine fidelity needs a linear explanation")
        beta = np.asarray(self.beta_of(x), dtype=float)
        nb = float(np.linalg.norm(beta))
        na = float(np.linalg.norm(e.alpha))
        if nb == 0.0 or na == 0.0:
            raise ValueError("cosine fidelity is undefined for zero-norm coefficients")
        return float(abs(beta @ e.alpha) / (nb * na))


class CustomMetric:
    """User-supplied score ``h(e(x), g(x))``, higher meaning better."""

    queries_black_box = True

    def __init__(self, h: Callable[[float, float], float]) -> None:
        self.h = h

    def from_values(self, e_vals: np.ndarray, g_vals: np.ndarray) -> np.ndarray:
        e_vals = np.asarray(e_vals, dtype=float)
        g_vals = np.asarray(g_vals, dtype=float)
        return np.array([self.h(float(a), float(b)) for a, b in zip(e_vals, g_vals)], dtype=float)


QualityMetric = Union[AbsFidelity, CosineFidelity, CustomMetric]


def fidelity(metric: QualityMetric, e: Explanation, g: BlackBox, x) -> float:
    """Score how well the explanation matches the black box at ``x``.

    AbsFidelity and custom metrics evaluate the black box once (one
    query); cosine fidelity works from local coefficients and does not
    touch the query counter. A non-finite score raises.
    """
    x = as_point(x)
    if isinstance(metric, CosineFidelity):
        val = metric.score(e, x)
    else:
        g_val = g.evaluate(x)
        e_val = e.apply(x)
        val = float(metric.from_values(np.array([e_val]), np.array([g_val]))[0])
    if not np.isfinite(val):
        raise ValueError("fidelity evaluated to a non-finite value")
    return val


class FidelityFn:
    """Bound (metric, explanation, black box) triple with batch support.

    The sampling strategies only ever see this closure. ``batch``
    splits the black-box evaluation across ``workers`` threads when
    asked to, which is where wall-clock parallelism lives; results are
    merged in input order so the outcome does not depend on the worker
    count.
    """

    def __init__(
        self,
        metric: QualityMetric,
        e: Explanation,
        g: BlackBox,
        workers: int = 1,
    ) -> None:
        self.metric = metric
        self.e = e
        self.g = g
        self.workers = max(1, int(workers))

    def __call__(self, x) -> float:
        return fidelity(self.metric, self.e, self.g, x)

    def _g_batch(self, xs: np.ndarray) -> np.ndarray:
        if self.workers == 1 or xs.shape[0] < 2 * self.workers:
            return self.g.evaluate_batch(xs)
        chunks = np.array_split(np.arange(xs.shape[0]), self.workers)
        out = np.empty(xs.shape[0], dtype=float)
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            futs = [(idx, pool.submit(self.g.evaluate_batch, xs[idx])) for idx in chunks if idx.size]
            for idx, fut in futs:
                out[idx] = fut.result()
        return out

    def batch(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if xs.ndim != 2:
            raise ValueError("batch expects an (n, d) array")
        if isinstance(self.metric, CosineFidelity):
            vals = np.array([self.metric.score(self.e, x) for x in xs], dtype=float)
        else:
            g_vals = self._g_batch(xs)
            e_vals = self.e.apply_batch(xs)
            vals = self.metric.from_values(e_vals, g_vals)
        if not np.all(np.isfinite(vals)):
            raise ValueError("fidelity evaluated to a non-finite value")
        return vals


@dataclass(frozen=True)
class ShellRegion:
    """Hollow cube around ``center``: outer half-width ``ub``, inner ``lb``.

    Membership under the max norm is closed at the outer boundary and
    open at the inner one, so a point sitting exactly on the inner
    cube's surface does not belong. With ``lb == 0`` the inner
    exclusion is empty and membership degenerates to the full cube.
    """

    center: np.ndarray
    lb: float
    ub: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", as_point(self.center))
        object.__setattr__(self, "lb", float(self.lb))
        object.__setattr__(self, "ub", float(self.ub))
        if not (0.0 <= self.lb < self.ub):
            raise ValueError("shell requires 0 <= lb < ub")

    @property
    def dim(self) -> int:
        return self.center.size

    def contains(self, x) -> bool:
        x = as_point(x, dim=self.dim)
        cheb = float(np.max(np.abs(x - self.center)))
        return cheb <= self.ub and (self.lb == 0.0 or cheb > self.lb)

    def contains_batch(self, xs: np.ndarray) -> np.ndarray:
        cheb = np.max(np.abs(xs - self.center), axis=1)
        inside_outer = cheb <= self.ub
        if self.lb == 0.0:
            return inside_outer
        return inside_outer & (cheb > self.lb)


def shell_contains(s: ShellRegion, x) -> bool:
    """Membership test for a shell region."""
    return s.contains(x)


@dataclass(frozen=True)
class Provenance:
    """Where a fidelity sample came from.

    ``kind`` is "uniform" for direct shell-uniform draws and
    "prototype" for Gaussian draws around a prototype, in which case
    ``iteration`` and ``prototype`` are the 1-based outer iteration and
    prototype index.
    """

    kind: str
    iteration: int = 0
    prototype: int = 0


UNIFORM = Provenance("uniform")


@dataclass(frozen=True)
class FidelitySample:
    point: Optional[np.ndarray]
    fidelity: float
    region_index: int
    provenance: Provenance


@dataclass
class CertifyOutcome:
    """Result of one certification attempt on a single shell.

    ``violator`` is present exactly when ``certified`` is false and is
    the worst (lowest fidelity) point found. ``survivors`` is filled by
    the adaptive strategy only: outer iteration -> prototype index that
    survived the halving rounds.
    """

    certified: bool
    min_fidelity: float
    violator: Optional[np.ndarray]
    samples: list[FidelitySample] = field(default_factory=list)
    queries_used: int = 0
    survivors: Optional[dict[int, int]] = None

    def __post_init__(self) -> None:
        if self.certified and self.violator is not None:
            raise ValueError("a certified outcome cannot carry a violator")
        if not self.certified and self.violator is None:
            raise ValueError("a failed outcome must carry its worst point")

    def group_fidelities(self) -> dict[tuple[str, int, int], np.ndarray]:
        """Sample fidelities keyed by provenance group."""
        groups: dict[tuple[str, int, int], list[float]] = {}
        for s in self.samples:
            key = (s.provenance.kind, s.provenance.iteration, s.provenance.prototype)
            groups.setdefault(key, []).append(s.fidelity)
        return {k: np.array(v, dtype=float) for k, v in groups.items()}


@dataclass
class RegionRecord:
    shell: ShellRegion
    outcome: CertifyOutcome
    strategy: str


@dataclass
class CertificationReport:
    """Full trace of a driver run.

    ``w`` is the largest certified outer half-width, 0.0 when nothing
    was certified, and -1.0 when the center itself failed the
    threshold. ``f_hat_star_w`` is the smallest sampled fidelity over
    certified regions and ``f_hat_second`` the second smallest within
    the region attaining that minimum (the pair feeds the tail-based
    confidence estimates); both are None when there is nothing
    certified.
    """

    w: float
    regions: list[RegionRecord]
    total_queries: int
    config: dict
    x0_fidelity: float
    dim: int
    f_hat_star_w: Optional[float] = None
    f_hat_second: Optional[float] = None

    @property
    def certified_regions(self) -> list[tuple[int, RegionRecord]]:
        return [(i, r) for i, r in enumerate(self.regions) if r.outcome.certified]

    def strategy_kinds(self) -> set[str]:
        return {r.strategy for r in self.regions}
