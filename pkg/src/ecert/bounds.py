"""Probabilistic confidence for a finished certification run.

Certification by sampling can miss low-fidelity pockets. Two
complementary estimates quantify how unlikely that is:

* An exponential bound per certified region. The sampled fidelity
  values feed a kernel density estimate; the mass F below an
  evaluation point v turns into confidence 1 - exp(-c * F), where c is
  the number of draws that can be treated as coming from one fixed
  distribution (all Q for uniform and i.i.d. mixture sampling, the
  per-prototype batch for staged sampling, the surviving prototype's
  accumulated batch for adaptive sampling). The report-level value is
  the best region.

* An extreme-value bound built only from the two smallest observed
  fidelities, valid for the i.i.d. strategies. Its inverse gives the
  fidelity margin needed to hit a target confidence, together with a
  closed-form upper approximation of that margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import ndtr

from .core import CertificationReport, RegionRecord
from .strategies import adapti_schedule, sub_budget, unifi_schedule

__all__ = [
    "KdeCdf",
    "RegionBound",
    "ExpBoundResult",
    "adapti_survivor_count",
    "exponential_bound",
    "evt_bound",
    "evt_bound_report",
    "evt_epsilon_width",
    "evt_epsilon_width_simplified",
]

_MIN_BANDWIDTH = 1e-6


class KdeCdf:
    """Smoothed distribution function of a 1-D sample.

    Gaussian kernels with Scott's bandwidth (sample std, ddof=1, times
    n^(-1/5)); a zero spread collapses the bandwidth to a tiny floor.
    A single observation falls back to the empirical step function.
    """

    def __init__(self, values) -> None:
        v = np.asarray(values, dtype=float).ravel()
        if v.size == 0:
            raise ValueError("need at least one value")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        self.values = v
        self.n = v.size
        if self.n >= 2:
            s = float(v.std(ddof=1))
            self.bandwidth: Optional[float] = max(s * self.n ** (-0.2), _MIN_BANDWIDTH)
        else:
            self.bandwidth = None

    def cdf(self, x: float) -> float:
        if self.bandwidth is None:
            return float(np.mean(self.values <= x))
        return float(np.mean(ndtr((x - self.values) / self.bandwidth)))


def adapti_survivor_count(n: int, q: int) -> int:
    """Probe count credited to the surviving prototype of one outer
    iteration: floor((n - 1) * q / (n * log2(n))), with n = 1 meaning
    the whole per-iteration budget."""
    if n == 1:
        return q
    return math.floor((n - 1) * q / (n * math.log2(n)))


@dataclass(frozen=True)
class RegionBound:
    region_index: int
    exponent: float
    bound: float


@dataclass(frozen=True)
class ExpBoundResult:
    value: float
    eval_point: float
    epsilon: float
    proxy: str
    regions: list[RegionBound]


def _region_exponent(record: RegionRecord, budget: int, v: float) -> float:
    """Largest count * F(v) over this region's sample groups."""
    outcome = record.outcome
    groups = outcome.group_fidelities()
    kind = record.strategy
    if kind in ("unif", "unifi-iid"):
        vals = np.concatenate(list(groups.values()))
        return vals.size * KdeCdf(vals).cdf(v)
    if kind == "unifi":
        best = 0.0
        for (_, it, proto), vals in groups.items():
            best = max(best, vals.size * KdeCdf(vals).cdf(v))
        return best
    if kind == "adapti":
        if not outcome.survivors:
            raise ValueError("adaptive outcome lacks survivor records")
        q = sub_budget(budget)
        schedule = adapti_schedule(budget)
        best = 0.0
        for it, proto in outcome.survivors.items():
            key = ("prototype", it, proto)
            if key not in groups:
                raise ValueError(f"missing samples for surviving prototype {key}")
            count = adapti_survivor_count(schedule[it - 1], q)
            best = max(best, count * KdeCdf(groups[key]).cdf(v))
        return best
    raise ValueError(f"unknown strategy kind {kind!r}")


def exponential_bound(
    report: CertificationReport,
    epsilon: float = 0.01,
    proxy: str = "theta",
) -> ExpBoundResult:
    """Confidence that certified regions hide no fidelity below the
    evaluation point, one minus an exponentially small miss term.

    ``proxy`` picks the reference level: "theta" uses the decision
    threshold, "fhat" the smallest observed fidelity. The evaluation
    point sits ``epsilon`` above it. Without certified regions the
    confidence is 0.
    """
    if not (epsilon > 0.0):
        raise ValueError("epsilon must be positive")
    if proxy == "theta":
        base = report.config.theta
    elif proxy == "fhat":
        if report.f_hat_star_w is None:
            raise ValueError("no observed fidelity to anchor the proxy")
        base = report.f_hat_star_w
    else:
        raise ValueError(f"unknown proxy {proxy!r}")
    v = base + epsilon
    budget = report.config.strategy.budget
    region_bounds = []
    for idx, record in enumerate(report.regions):
        if not record.outcome.certified:
            continue
        exponent = _region_exponent(record, budget, v)
        region_bounds.append(
            RegionBound(region_index=idx, exponent=exponent, bound=1.0 - math.exp(-exponent))
        )
    value = max((rb.bound for rb in region_bounds), default=0.0)
    return ExpBoundResult(
        value=value, eval_point=v, epsilon=epsilon, proxy=proxy, regions=region_bounds
    )


# ---------------------------------------------------------------------------
# extreme-value estimates


def evt_bound(f_star: float, f_second: float, epsilon: float, kappa: float) -> float:
    """Confidence the true minimum is within epsilon of the observed
    one, from the gap between the two smallest i.i.d. observations:
    (1 + gap/epsilon)^(-kappa). A zero gap gives exactly 1."""
    if not (epsilon > 0.0):
        raise ValueError("epsilon must be positive")
    if not (kappa > 0.0):
        raise ValueError("kappa must be positive")
    gap = f_second - f_star
    if gap < -1e-12:
        raise ValueError("f_second must not be below f_star")
    gap = max(gap, 0.0)
    return (1.0 + gap / epsilon) ** (-kappa)


def evt_bound_report(
    report: CertificationReport,
    epsilon: float,
    kappa: Optional[float] = None,
) -> float:
    """Extreme-value confidence for a report produced by an i.i.d.
    strategy (uniform or mixture). kappa defaults to dim / 2."""
    kinds = report.strategy_kinds()
    bad = kinds - {"unif", "unifi-iid"}
    if bad:
        raise ValueError(
            "extreme-value bound needs i.i.d. samples; "
            f"strategy {sorted(bad)} does not provide them"
        )
    if report.f_hat_star_w is None or report.f_hat_second is None:
        raise ValueError("report lacks the two smallest observed fidelities")
    if kappa is None:
        kappa = report.dim / 2.0
    return evt_bound(report.f_hat_star_w, report.f_hat_second, epsilon, kappa)


def evt_epsilon_width(gap: float, p: float, kappa: float) -> float:
    """Fidelity margin at which the extreme-value confidence equals
    1 - p: gap / ((1 - p)^(-1/kappa) - 1)."""
    if not (0.0 < p < 1.0):
        raise ValueError("p must be in (0, 1)")
    if not (kappa > 0.0):
        raise ValueError("kappa must be positive")
    if not (gap > 0.0):
        raise ValueError("gap must be positive")
    return gap / ((1.0 - p) ** (-1.0 / kappa) - 1.0)


def evt_epsilon_width_simplified(gap: float, p: float, kappa: float) -> float:
    """Closed-form upper approximation of the margin:
    kappa * gap / ln(1 / (1 - p)). Never below the exact value."""
    if not (0.0 < p < 1.0):
        raise ValueError("p must be in (0, 1)")
    if not (kappa > 0.0):
        raise ValueError("kappa must be positive")
    if not (gap > 0.0):
        raise ValueError("gap must be positive")
    return kappa * gap / math.log(1.0 / (1.0 - p))
