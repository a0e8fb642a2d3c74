"""Region-growing driver.

Starting from a candidate interval (lb, ub) of half-widths around the
anchor point, the driver repeatedly asks a strategy to certify the
shell between lb and ub. A certified shell extends the trusted
half-width to ub and the next shell reaches further out; a violation
tightens an upper barrier B derived from the violator's coordinates
and the next shell retreats to the midpoint. The loop stops when the
shell gets thinner than a dimension-scaled gap or after a fixed number
of rounds.

The returned half-width w is the largest certified ub, 0.0 when no
shell was certified, and -1.0 when the anchor itself fails the
fidelity threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    CertificationReport,
    FidelityFn,
    RegionRecord,
    ShellRegion,
    as_point,
)
from .strategies import StrategyConfig, certify_region

__all__ = [
    "DriverConfig",
    "B_POLICIES",
    "barrier_from_violation",
    "should_exit",
    "ecertify",
]

B_POLICIES = ("min", "max", "mean")


@dataclass(frozen=True)
class DriverConfig:
    """Driver loop settings.

    ``max_regions`` caps the number of shells attempted. ``b_policy``
    picks which qualifying violator coordinate feeds the barrier:
    "min" is conservative, "max" optimistic, "mean" in between. The
    loop exits early once ub - lb < exit_gap_factor / d.
    """

    theta: float
    strategy: StrategyConfig
    max_regions: int = 10
    initial_lb: float = 0.0
    initial_ub: float = 1.0
    b_policy: str = "min"
    exit_gap_factor: float = 0.1

    def __post_init__(self) -> None:
        if not (0.0 < self.theta < 1.0):
            raise ValueError("theta must be in (0, 1)")
        if int(self.max_regions) < 1:
            raise ValueError("max_regions must be >= 1")
        if not (0.0 <= self.initial_lb < self.initial_ub):
            raise ValueError("need 0 <= initial_lb < initial_ub")
        if self.b_policy not in B_POLICIES:
            raise ValueError(f"unknown b_policy {self.b_policy!r}")
        if not (self.exit_gap_factor > 0.0):
            raise ValueError("exit_gap_factor must be positive")
        object.__setattr__(self, "max_regions", int(self.max_regions))


def should_exit(lb: float, ub: float, dim: int, factor: float = 0.1) -> bool:
    """True once the shell is thinner than factor / dim (strictly)."""
    return (ub - lb) < factor / dim


def barrier_from_violation(
    x0: np.ndarray,
    violator: np.ndarray,
    lb: float,
    barrier: float,
    policy: str,
) -> float:
    """New barrier after a violation.

    Coordinates of the violator closer to the anchor than lb carry no
    information about where the shell went bad, so only gaps above lb
    qualify. At least one always does: the violator sits in the shell,
    hence its largest coordinate gap exceeds lb. The barrier never
    increases.
    """
    gaps = np.abs(np.asarray(violator, dtype=float) - x0)
    qual = gaps[gaps > lb]
    if qual.size == 0:
        raise ValueError("violator does not reach beyond lb")
    if policy == "min":
        cand = float(qual.min())
    elif policy == "max":
        cand = float(qual.max())
    elif policy == "mean":
        cand = float(qual.mean())
    else:
        raise ValueError(f"unknown b_policy {policy!r}")
    return min(barrier, cand)


def ecertify(x0, fid: FidelityFn, cfg: DriverConfig) -> CertificationReport:
    """Find the largest certified half-width around ``x0``.

    ``fid`` must evaluate fidelity at arbitrary points; its query
    count is the budget currency. One evaluation is spent on the
    anchor itself before any region work.
    """
    x0 = as_point(x0)
    d = x0.size
    scfg = cfg.strategy
    f0 = fid(x0)
    q0 = 1 if fid.metric.queries_black_box else 0
    if f0 < cfg.theta:
        return CertificationReport(
            w=-1.0,
            regions=[],
            total_queries=q0,
            config=cfg,
            x0_fidelity=f0,
            dim=d,
        )

    w = 0.0
    barrier = math.inf
    lb, ub = cfg.initial_lb, cfg.initial_ub
    regions: list[RegionRecord] = []
    for z in range(cfg.max_regions):
        if should_exit(lb, ub, d, cfg.exit_gap_factor):
            break
        sigma = (ub - lb) / d
        shell = ShellRegion(x0, lb, ub)
        outcome = certify_region(shell, fid, cfg.theta, scfg, sigma=sigma, region_index=z)
        regions.append(RegionRecord(shell=shell, outcome=outcome, strategy=scfg.effective_kind))
        if outcome.certified:
            w = ub
            lb = ub
            ub = 2.0 * ub if math.isinf(barrier) else min((barrier + ub) / 2.0, 2.0 * ub)
        else:
            barrier = barrier_from_violation(x0, outcome.violator, lb, barrier, cfg.b_policy)
            ub = (barrier + lb) / 2.0

    f_star = None
    f_second = None
    certified = [r for r in regions if r.outcome.certified]
    if certified:
        i_hat = min(range(len(certified)), key=lambda i: certified[i].outcome.min_fidelity)
        f_star = certified[i_hat].outcome.min_fidelity
        vals = sorted(s.fidelity for s in certified[i_hat].outcome.samples)
        if len(vals) >= 2:
            f_second = float(vals[1])

    total = q0 + sum(r.outcome.queries_used for r in regions)
    return CertificationReport(
        w=w,
        regions=regions,
        total_queries=total,
        config=cfg,
        x0_fidelity=f0,
        dim=d,
        f_hat_star_w=f_star,
        f_hat_second=f_second,
    )
