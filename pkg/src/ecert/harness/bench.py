"""Benchmark grid: certified width and runtime across dimensions,
budgets and strategies on the built-in piecewise-linear model."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from ..core import AbsFidelity, FidelityFn
from ..driver import DriverConfig, ecertify
from ..special import make_synthetic
from ..strategies import StrategyConfig

__all__ = ["BenchSpec", "run_bench", "bench_rows_to_csv"]

CSV_COLUMNS = ["d", "Q", "strategy", "w_mean", "w_stderr", "time_mean", "time_stderr", "seeds"]


@dataclass(frozen=True)
class BenchSpec:
    dims: Sequence[int]
    budgets: Sequence[int]
    strategies: Sequence[str]
    seeds: Sequence[int] = field(default_factory=lambda: tuple(range(10)))
    theta: float = 0.75
    slope: float = 0.75
    max_regions: int = 10
    b_policy: str = "min"
    workers: int = 1

    def __post_init__(self) -> None:
        for name in ("dims", "budgets", "strategies", "seeds"):
            if not list(getattr(self, name)):
                raise ValueError(f"{name} must be non-empty")


def _stats(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    if values.size < 2:
        return mean, 0.0
    return mean, float(values.std(ddof=1) / np.sqrt(values.size))


def run_bench(spec: BenchSpec) -> list[dict]:
    """One row per (dim, budget, strategy): mean and standard error of
    the certified width and the wall time over the seeds."""
    rows = []
    for d in spec.dims:
        box, expl, _ = make_synthetic(d, spec.slope)
        for Q in spec.budgets:
            for kind in spec.strategies:
                ws = []
                times = []
                for seed in spec.seeds:
                    fid = FidelityFn(AbsFidelity(), expl, box, workers=spec.workers)
                    cfg = DriverConfig(
                        theta=spec.theta,
                        strategy=StrategyConfig(
                            kind=kind, budget=Q, rng_seed=seed, workers=spec.workers
                        ),
                        max_regions=spec.max_regions,
                        b_policy=spec.b_policy,
                    )
                    t0 = time.perf_counter()
                    report = ecertify(np.zeros(d), fid, cfg)
                    times.append(time.perf_counter() - t0)
                    ws.append(report.w)
                w_mean, w_se = _stats(np.array(ws))
                t_mean, t_se = _stats(np.array(times))
                rows.append(
                    {
                        "d": d,
                        "Q": Q,
                        "strategy": kind,
                        "w_mean": w_mean,
                        "w_stderr": w_se,
                        "time_mean": t_mean,
                        "time_stderr": t_se,
                        "seeds": len(list(spec.seeds)),
                    }
                )
    return rows


def bench_rows_to_csv(rows: list[dict], dest: IO[str]) -> None:
    writer = csv.DictWriter(dest, fieldnames=CSV_COLUMNS)
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row[k] for k in CSV_COLUMNS})
