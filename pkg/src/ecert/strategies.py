"""Certification strategies for a single shell region.

Every strategy gets a query budget Q and answers the same question: do
all points of the shell reach fidelity theta, or can it produce a
counterexample? Three samplers are offered plus an i.i.d. variant:

* ``unif``: Q shell-uniform queries, verdict from the worst one.
* ``unifi``: staged uniform prototypes with Gaussian probes around
  each, early exit on the first sub-threshold batch.
* ``adapti``: like ``unifi`` but successively halves the prototype set,
  spending later probes only around the most suspicious prototypes.
* ``unifi-iid``: prototypes as in ``unifi``, then Q independent draws
  from the uniform-weight Gaussian mixture over all prototypes.

All strategies spend at most Q black-box queries per call. Randomness
is derived from per-(iteration, prototype) streams so that results do
not depend on evaluation order or worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    UNIFORM,
    CertifyOutcome,
    FidelityFn,
    FidelitySample,
    Provenance,
    ShellRegion,
)

__all__ = [
    "StrategyConfig",
    "STRATEGY_KINDS",
    "sub_budget",
    "unifi_schedule",
    "adapti_schedule",
    "sample_uniform_shell",
    "sample_gaussian_shell",
    "certify_region",
    "certify_unif",
    "certify_unifi",
    "certify_adapti",
    "certify_unifi_iid",
]

STRATEGY_KINDS = ("unif", "unifi", "adapti", "unifi-iid")

# spawn_key tags keeping RNG streams for different purposes disjoint
_K_UNIF = 0
_K_PROTO = 1
_K_GAUSS = 2
_K_MIX = 3


@dataclass(frozen=True)
class StrategyConfig:
    """Sampling strategy selection and its knobs.

    ``budget`` is the per-call query cap Q. Budgets below 4 force the
    plain uniform strategy because the staged schedules need at least
    two outer iterations to make sense. ``sigma`` is the default
    Gaussian probe width; the driver overrides it per region.
    """

    kind: str
    budget: int
    sigma: float = 1.0
    rng_seed: int = 0
    max_rejection_factor: int = 100
    workers: int = 1

    def __post_init__(self) -> None:
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if int(self.budget) < 1:
            raise ValueError("budget must be a positive integer")
        if not (self.sigma > 0.0):
            raise ValueError("sigma must be positive")
        if int(self.rng_seed) < 0:
            raise ValueError("rng_seed must be non-negative")
        if int(self.max_rejection_factor) < 1:
            raise ValueError("max_rejection_factor must be >= 1")
        if int(self.workers) < 1:
            raise ValueError("workers must be >= 1")
        object.__setattr__(self, "budget", int(self.budget))
        object.__setattr__(self, "rng_seed", int(self.rng_seed))
        object.__setattr__(self, "max_rejection_factor", int(self.max_rejection_factor))
        object.__setattr__(self, "workers", int(self.workers))

    @property
    def effective_kind(self) -> str:
        return "unif" if self.budget < 4 else self.kind


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def sub_budget(Q: int) -> int:
    """Per-iteration budget q = floor(Q / log2(Q)) of the staged strategies."""
    if Q < 4:
        raise ValueError("staged schedules need Q >= 4")
    return math.floor(Q / math.log2(Q))


def outer_iterations(Q: int) -> int:
    return math.floor(math.log2(Q))


def unifi_schedule(Q: int) -> list[tuple[int, int]]:
    """Per outer iteration: (prototype count n, probes per prototype).

    n doubles until it saturates at q; each prototype then receives
    floor(q / n) Gaussian probes, so no iteration exceeds q queries.
    """
    q = sub_budget(Q)
    out = []
    for i in range(1, outer_iterations(Q) + 1):
        n = min(2**i, q)
        out.append((n, q // n))
    return out


def adapti_schedule(Q: int) -> list[int]:
    """Prototype count per outer iteration for the adaptive strategy.

    n = 2^i while i * 2^i fits in q; afterwards it stays at the last
    power that fit. That guard keeps the first halving round at one or
    more probes per prototype.
    """
    q = sub_budget(Q)
    out = []
    k_last = None
    for i in range(1, outer_iterations(Q) + 1):
        if i * 2**i <= q:
            n = 2**i
            k_last = i
        else:
            # i=1 always fits because q >= 2
            n = 2**k_last
        out.append(n)
    return out


def survivor_budget(n: int, q: int) -> int:
    """Total probes the last surviving prototype accumulates for one
    outer iteration of the adaptive strategy (exact, with floors)."""
    if n == 1:
        return q
    rounds = math.ceil(math.log2(n))
    m = n
    total = 0
    for _ in range(rounds):
        total += q // (m * rounds)
        m = math.ceil(m / 2)
    return total


# ---------------------------------------------------------------------------
# samplers


def sample_uniform_shell(shell: ShellRegion, count: int, rng: np.random.Generator) -> np.ndarray:
    """Exactly uniform draws from a hollow cube.

    A candidate is built by picking an "active" axis and sign, placing
    that coordinate in (lb, ub] and the rest anywhere in the outer
    cube; it is kept only when the active coordinate is the strict
    absolute maximum. Each shell point then has exactly one accepted
    representation, which makes the scheme exact. With lb == 0 the
    shell is the full cube and plain cube-uniform sampling is used.
    """
    d = shell.dim
    lb, ub = shell.lb, shell.ub
    if count <= 0:
        return np.empty((0, d), dtype=float)
    if lb == 0.0:
        return rng.uniform(-ub, ub, size=(count, d)) + shell.center

    out = np.empty((count, d), dtype=float)
    have = 0
    proposed = 0
    accepted = 0
    while have < count:
        need = count - have
        if accepted > 0:
            rate = max(accepted / proposed, 1.0 / (8.0 * d))
            m = int(min(max(need / rate * 1.2, need), 8_000_000 // max(d, 1) + need))
        else:
            m = max(2 * need, 64)
        axis = rng.integers(0, d, size=m)
        sign = rng.integers(0, 2, size=m) * 2 - 1
        pts = rng.uniform(-ub, ub, size=(m, d))
        # 1 - U is in (0, 1], keeping the active coordinate off the inner face
        active = lb + (ub - lb) * (1.0 - rng.random(m))
        rows = np.arange(m)
        pts[rows, axis] = sign * active
        others = np.abs(pts)
        others[rows, axis] = -np.inf
        ok = active > others.max(axis=1)
        proposed += m
        accepted += int(ok.sum())
        take = pts[ok][:need]
        out[have : have + take.shape[0]] = take
        have += take.shape[0]
    return out + shell.center


def sample_gaussian_shell(
    shell: ShellRegion,
    proto: np.ndarray,
    sigma: float,
    count: int,
    rng: np.random.Generator,
    max_rejection_factor: int = 100,
) -> np.ndarray:
    """Draws from N(proto, sigma^2 I) conditioned on the shell.

    Straight rejection; once the number of proposals exceeds
    ``max_rejection_factor * count`` the remaining slots are filled
    with shell-uniform points so the call always returns ``count``
    rows. The prototype must itself lie in the shell.
    """
    d = shell.dim
    if count <= 0:
        return np.empty((0, d), dtype=float)
    if not shell.contains(proto):
        raise ValueError("prototype must lie inside the shell")
    budget = max_rejection_factor * count
    out = np.empty((count, d), dtype=float)
    have = 0
    used = 0
    while have < count and used < budget:
        need = count - have
        m = min(max(2 * need, 8), budget - used)
        pts = proto + sigma * rng.standard_normal(size=(m, d))
        used += m
        ok = shell.contains_batch(pts)
        take = pts[ok][:need]
        out[have : have + take.shape[0]] = take
        have += take.shape[0]
    if have < count:
        out[have:] = sample_uniform_shell(shell, count - have, rng)
    return out


def _mixture_sample(
    shell: ShellRegion,
    protos_by_iter: list[np.ndarray],
    sigma: float,
    count: int,
    rng: np.random.Generator,
    max_rejection_factor: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``count`` i.i.d. draws from the uniform-weight prototype mixture.

    Each draw first commits to an outer iteration (uniform) and a
    prototype within it (uniform), then rejection-samples that single
    Gaussian conditioned on the shell. Returns (points, iteration
    indices, prototype indices), both index arrays 1-based.
    """
    d = shell.dim
    iters = len(protos_by_iter)
    sizes = np.array([p.shape[0] for p in protos_by_iter])
    it_idx = rng.integers(0, iters, size=count)
    pr_idx = np.floor(rng.random(count) * sizes[it_idx]).astype(int)
    pr_idx = np.minimum(pr_idx, sizes[it_idx] - 1)
    centers = np.empty((count, d), dtype=float)
    for i in range(iters):
        mask = it_idx == i
        if mask.any():
            centers[mask] = protos_by_iter[i][pr_idx[mask]]
    pts = np.empty((count, d), dtype=float)
    pending = np.arange(count)
    budget = max_rejection_factor * count
    used = 0
    while pending.size and used < budget:
        draw = centers[pending] + sigma * rng.standard_normal(size=(pending.size, d))
        used += pending.size
        ok = shell.contains_batch(draw)
        pts[pending[ok]] = draw[ok]
        pending = pending[~ok]
    if pending.size:
        pts[pending] = sample_uniform_shell(shell, pending.size, rng)
    return pts, it_idx + 1, pr_idx + 1


# ---------------------------------------------------------------------------
# strategies


def certify_unif(
    shell: ShellRegion,
    fid: FidelityFn,
    theta: float,
    cfg: StrategyConfig,
    region_index: int = 0,
) -> CertifyOutcome:
    """Uniform strategy: Q shell-uniform queries, no early exit."""
    Q = cfg.budget
    rng = _stream(cfg.rng_seed, region_index, _K_UNIF, 0, 0)
    pts = sample_uniform_shell(shell, Q, rng)
    fids = fid.batch(pts)
    worst = int(np.argmin(fids))
    certified = bool(fids[worst] >= theta)
    samples = [
        FidelitySample(pts[i], float(fids[i]), region_index, UNIFORM) for i in range(Q)
    ]
    return CertifyOutcome(
        certified=certified,
        min_fidelity=float(fids[worst]),
        violator=None if certified else pts[worst].copy(),
        samples=samples,
        queries_used=Q,
    )


class _Tracker:
    """Running worst point over batches of evaluated samples."""

    def __init__(self) -> None:
        self.min_fid = math.inf
        self.argmin: Optional[np.ndarray] = None

    def update(self, pts: np.ndarray, fids: np.ndarray) -> None:
        i = int(np.argmin(fids))
        if fids[i] < self.min_fid:
            self.min_fid = float(fids[i])
            self.argmin = pts[i].copy()


def certify_unifi(
    shell: ShellRegion,
    fid: FidelityFn,
    theta: float,
    cfg: StrategyConfig,
    sigma: Optional[float] = None,
    region_index: int = 0,
) -> CertifyOutcome:
    """Staged strategy: uniform prototypes, Gaussian probes around each.

    Prototype positions are free (not queried); only the probes hit the
    black box. Probe batches are checked in sampling order and the
    first sub-threshold batch ends the call with the worst point found.
    """
    Q = cfg.budget
    sigma = cfg.sigma if sigma is None else float(sigma)
    samples: list[FidelitySample] = []
    track = _Tracker()
    queries = 0
    for i, (n, per_proto) in enumerate(unifi_schedule(Q), start=1):
        proto_rng = _stream(cfg.rng_seed, region_index, _K_PROTO, i, 0)
        protos = sample_uniform_shell(shell, n, proto_rng)
        for k in range(1, n + 1):
            g_rng = _stream(cfg.rng_seed, region_index, _K_GAUSS, i, k)
            pts = sample_gaussian_shell(
                shell, protos[k - 1], sigma, per_proto, g_rng, cfg.max_rejection_factor
            )
            fids = fid.batch(pts)
            queries += pts.shape[0]
            prov = Provenance("prototype", i, k)
            samples.extend(
                FidelitySample(pts[j], float(fids[j]), region_index, prov)
                for j in range(pts.shape[0])
            )
            track.update(pts, fids)
            if track.min_fid < theta:
                return CertifyOutcome(
                    certified=False,
                    min_fidelity=track.min_fid,
                    violator=track.argmin,
                    samples=samples,
                    queries_used=queries,
                )
    return CertifyOutcome(
        certified=True,
        min_fidelity=track.min_fid,
        violator=None,
        samples=samples,
        queries_used=queries,
    )


def certify_adapti(
    shell: ShellRegion,
    fid: FidelityFn,
    theta: float,
    cfg: StrategyConfig,
    sigma: Optional[float] = None,
    region_index: int = 0,
) -> CertifyOutcome:
    """Adaptive strategy: probe budgets migrate to suspicious prototypes.

    Within each outer iteration the prototype set is halved
    ceil(log2 n) times, keeping the prototypes whose probes reached the
    lowest fidelity so far (ties resolved toward the lower index). The
    probes of the last survivor are the concentrated evidence the
    confidence bounds later lean on, so the survivor's identity is
    recorded per outer iteration.
    """
    Q = cfg.budget
    sigma = cfg.sigma if sigma is None else float(sigma)
    q = sub_budget(Q)
    samples: list[FidelitySample] = []
    track = _Tracker()
    queries = 0
    survivors: dict[int, int] = {}
    for i, n in enumerate(adapti_schedule(Q), start=1):
        proto_rng = _stream(cfg.rng_seed, region_index, _K_PROTO, i, 0)
        protos = sample_uniform_shell(shell, n, proto_rng)
        streams = {
            k: _stream(cfg.rng_seed, region_index, _K_GAUSS, i, k + 1) for k in range(n)
        }
        rounds = max(1, math.ceil(math.log2(n)))
        alive = list(range(n))
        best = np.full(n, math.inf)
        m = n
        for _ in range(rounds):
            per_proto = q // (m * rounds)
            for k in alive:
                pts = sample_gaussian_shell(
                    shell, protos[k], sigma, per_proto, streams[k], cfg.max_rejection_factor
                )
                fids = fid.batch(pts)
                queries += pts.shape[0]
                prov = Provenance("prototype", i, k + 1)
                samples.extend(
                    FidelitySample(pts[j], float(fids[j]), region_index, prov)
                    for j in range(pts.shape[0])
                )
                best[k] = min(best[k], float(fids.min()))
                track.update(pts, fids)
                if track.min_fid < theta:
                    return CertifyOutcome(
                        certified=False,
                        min_fidelity=track.min_fid,
                        violator=track.argmin,
                        samples=samples,
                        queries_used=queries,
                        survivors=survivors or None,
                    )
            m = math.ceil(m / 2)
            alive = sorted(alive, key=lambda k: (best[k], k))[:m]
            alive.sort()
        survivors[i] = alive[0] + 1
    return CertifyOutcome(
        certified=True,
        min_fidelity=track.min_fid,
        violator=None,
        samples=samples,
        queries_used=queries,
        survivors=survivors,
    )


def certify_unifi_iid(
    shell: ShellRegion,
    fid: FidelityFn,
    theta: float,
    cfg: StrategyConfig,
    sigma: Optional[float] = None,
    region_index: int = 0,
) -> CertifyOutcome:
    """Mixture variant: prototypes as in ``unifi``, then Q i.i.d. draws.

    The mixture weights are uniform over outer iterations and uniform
    over the prototypes within each, which makes the Q fidelity values
    independent draws from one fixed distribution. Verdict as in
    ``unif``: all Q evaluated, worst decides.
    """
    Q = cfg.budget
    sigma = cfg.sigma if sigma is None else float(sigma)
    protos_by_iter = []
    for i, (n, _) in enumerate(unifi_schedule(Q), start=1):
        proto_rng = _stream(cfg.rng_seed, region_index, _K_PROTO, i, 0)
        protos_by_iter.append(sample_uniform_shell(shell, n, proto_rng))
    mix_rng = _stream(cfg.rng_seed, region_index, _K_MIX, 0, 0)
    pts, it_idx, pr_idx = _mixture_sample(
        shell, protos_by_iter, sigma, Q, mix_rng, cfg.max_rejection_factor
    )
    fids = fid.batch(pts)
    worst = int(np.argmin(fids))
    certified = bool(fids[worst] >= theta)
    samples = [
        FidelitySample(
            pts[j],
            float(fids[j]),
            region_index,
            Provenance("prototype", int(it_idx[j]), int(pr_idx[j])),
        )
        for j in range(Q)
    ]
    return CertifyOutcome(
        certified=certified,
        min_fidelity=float(fids[worst]),
        violator=None if certified else pts[worst].copy(),
        samples=samples,
        queries_used=Q,
    )


_DISPATCH = {
    "unif": certify_unif,
    "unifi": certify_unifi,
    "adapti": certify_adapti,
    "unifi-iid": certify_unifi_iid,
}


def certify_region(
    shell: ShellRegion,
    fid: FidelityFn,
    theta: float,
    cfg: StrategyConfig,
    sigma: Optional[float] = None,
    region_index: int = 0,
) -> CertifyOutcome:
    """Run the configured strategy on one shell. At most Q queries."""
    kind = cfg.effective_kind
    if kind == "unif":
        return certify_unif(shell, fid, theta, cfg, region_index=region_index)
    return _DISPATCH[kind](shell, fid, theta, cfg, sigma=sigma, region_index=region_index)
