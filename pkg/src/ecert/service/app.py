"""FastAPI application around the certification core.

Endpoints mirror the CLI subcommands one to one: /v1/certify,
/v1/bounds, /v1/bench, /v1/coverage, /v1/stability, plus /health.
Responses carry full result documents; wall-clock time sits under
``meta`` so the payload minus meta is reproducible byte for byte.
"""

from __future__ import annotations

import time
from contextlib import contextmanager

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..bounds import evt_bound_report, exponential_bound
from ..core import AbsFidelity, CertificationReport, FidelityFn, LinearExplanation
from ..driver import DriverConfig, ecertify
from ..harness.bench import BenchSpec, run_bench
from ..harness.blackbox_proc import SubprocessBlackBox
from ..harness.coverage import CoverageConfig, make_clusters, run_coverage
from ..harness.reportio import build_document, report_to_dict, summarize_runs
from ..harness.stability import run_stability
from ..special import make_synthetic
from ..strategies import StrategyConfig
from . import schemas

__all__ = ["create_app"]


@contextmanager
def _open_box(bb: schemas.BlackBoxModel):
    if bb.command:
        box = SubprocessBlackBox(bb.command, timeout=bb.timeout)
        try:
            yield box
        finally:
            box.close()
    else:
        box, _, _ = make_synthetic(bb.dim, bb.slope)
        yield box


def _explanation(req) -> LinearExplanation:
    if req.explanation is not None:
        e = req.explanation
        if len(e.alpha) != req.blackbox.dim:
            raise HTTPException(422, detail="explanation alpha length must equal dim")
        return LinearExplanation(np.array(e.alpha, dtype=float), e.intercept)
    if req.blackbox.command:
        raise HTTPException(
            422, detail="an explicit explanation is required for a command black box"
        )
    return LinearExplanation(np.full(req.blackbox.dim, req.blackbox.slope))


def _anchor(req) -> np.ndarray:
    if req.x0 is None:
        return np.zeros(req.blackbox.dim)
    x0 = np.array(req.x0, dtype=float)
    if x0.size != req.blackbox.dim:
        raise HTTPException(422, detail="x0 length must equal dim")
    return x0


def _strategy_config(s: schemas.StrategyModel, seed_offset: int = 0) -> StrategyConfig:
    return StrategyConfig(
        kind=s.kind,
        budget=s.budget,
        sigma=s.sigma,
        rng_seed=s.rng_seed + seed_offset,
        max_rejection_factor=s.max_rejection_factor,
        workers=s.workers,
    )


def _run_certify(req: schemas.CertifyRequest) -> list[CertificationReport]:
    x0 = _anchor(req)
    expl = _explanation(req)
    reports = []
    try:
        with _open_box(req.blackbox) as box:
            fid = FidelityFn(AbsFidelity(), expl, box, workers=req.strategy.workers)
            for r in range(req.repeat):
                cfg = DriverConfig(
                    theta=req.driver.theta,
                    strategy=_strategy_config(req.strategy, r),
                    max_regions=req.driver.max_regions,
                    initial_lb=req.driver.initial_lb,
                    initial_ub=req.driver.initial_ub,
                    b_policy=req.driver.b_policy,
                    exit_gap_factor=req.driver.exit_gap_factor,
                )
                reports.append(ecertify(x0, fid, cfg))
    except HTTPException:
        raise
    except ValueError as e:
        raise HTTPException(422, detail=str(e))
    except RuntimeError as e:
        raise HTTPException(502, detail=str(e))
    return reports


def create_app() -> FastAPI:
    app = FastAPI(title="ecert", version=__version__)

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/v1/certify", response_model=schemas.CertifyResponse)
    def certify(req: schemas.CertifyRequest):
        t0 = time.perf_counter()
        runs = [report_to_dict(rep) for rep in _run_certify(req)]
        wall = time.perf_counter() - t0
        return build_document(runs, summarize_runs(runs), {"wall_clock": wall})

    @app.post("/v1/bounds", response_model=schemas.BoundsResponse)
    def bounds(req: schemas.BoundsRequest):
        t0 = time.perf_counter()
        reports = _run_certify(req)
        rows = []
        for i, rep in enumerate(reports):
            try:
                eb = exponential_bound(rep, epsilon=req.epsilon, proxy=req.proxy)
                evt = evt_bound_report(rep, req.epsilon, req.kappa) if req.evt else None
            except ValueError as e:
                raise HTTPException(422, detail=str(e))
            rows.append(
                schemas.RunBounds(
                    run=i,
                    w=rep.w,
                    exp_bound=eb.value,
                    eval_point=eb.eval_point,
                    regions=[
                        {"region_index": rb.region_index, "exponent": rb.exponent, "bound": rb.bound}
                        for rb in eb.regions
                    ],
                    evt_bound=evt,
                )
            )
        wall = time.perf_counter() - t0
        vals = np.array([r.exp_bound for r in rows])
        summary = {
            "n_runs": len(rows),
            "exp_bound_mean": float(vals.mean()),
            "exp_bound_min": float(vals.min()),
            "exp_bound_max": float(vals.max()),
        }
        if req.evt:
            evs = np.array([r.evt_bound for r in rows])
            summary["evt_bound_mean"] = float(evs.mean())
        return schemas.BoundsResponse(
            schema_version=1,
            epsilon=req.epsilon,
            proxy=req.proxy,
            kappa=req.kappa,
            runs=rows,
            summary=summary,
            meta={"wall_clock": wall},
        )

    @app.post("/v1/bench", response_model=schemas.BenchResponse)
    def bench(req: schemas.BenchRequest):
        t0 = time.perf_counter()
        try:
            rows = run_bench(
                BenchSpec(
                    dims=req.dims,
                    budgets=req.budgets,
                    strategies=req.strategies,
                    seeds=req.seeds,
                    theta=req.theta,
                    slope=req.slope,
                    max_regions=req.max_regions,
                    b_policy=req.b_policy,
                    workers=req.workers,
                )
            )
        except ValueError as e:
            raise HTTPException(422, detail=str(e))
        return {"rows": rows, "meta": {"wall_clock": time.perf_counter() - t0}}

    @app.post("/v1/coverage", response_model=schemas.CoverageResponse)
    def coverage(req: schemas.CoverageRequest):
        t0 = time.perf_counter()
        if req.samples is not None:
            try:
                xs = np.array(req.samples, dtype=float)
            except ValueError:
                raise HTTPException(422, detail="samples must be rows of length dim")
            if xs.ndim != 2 or xs.shape[1] != req.blackbox.dim:
                raise HTTPException(422, detail="samples must be rows of length dim")
        else:
            c = req.clusters
            if c.dim != req.blackbox.dim:
                raise HTTPException(422, detail="cluster dim must equal blackbox dim")
            xs = make_clusters(
                c.clusters, c.per_cluster, c.dim, c.spread, c.center_scale, c.seed
            )
        if req.explanation is not None:
            expl = LinearExplanation(
                np.array(req.explanation.alpha, dtype=float), req.explanation.intercept
            )
            if expl.alpha.size != req.blackbox.dim:
                raise HTTPException(422, detail="explanation alpha length must equal dim")
        elif req.blackbox.command:
            raise HTTPException(
                422, detail="an explicit explanation is required for a command black box"
            )
        else:
            expl = LinearExplanation(np.full(req.blackbox.dim, req.blackbox.slope))
        cfg = CoverageConfig(
            theta=req.theta,
            strategy=_strategy_config(req.strategy),
            max_regions=req.max_regions,
            b_policy=req.b_policy,
            top_fraction=req.top_fraction,
            expl_cost=req.expl_cost,
            workers=req.strategy.workers,
        )
        try:
            with _open_box(req.blackbox) as box:
                res = run_coverage(xs, box, lambda x: expl, cfg)
        except ValueError as e:
            raise HTTPException(422, detail=str(e))
        except RuntimeError as e:
            raise HTTPException(502, detail=str(e))
        return schemas.CoverageResponse(
            picks=[
                schemas.CoveragePickModel(
                    index=p.index, w=p.w, queries=p.queries, covered=p.covered
                )
                for p in res.picks
            ],
            excluded=res.excluded,
            n_effective=res.n_effective,
            total_cert_queries=res.total_cert_queries,
            savings=res.savings,
            covered_fid_mean=res.covered_fid_mean,
            covered_fid_std=res.covered_fid_std,
            meta={"wall_clock": time.perf_counter() - t0},
        )

    @app.post("/v1/stability", response_model=schemas.StabilityResponse)
    def stability(req: schemas.StabilityRequest):
        t0 = time.perf_counter()
        try:
            res = run_stability(req.pairs, req.k)
        except ValueError as e:
            raise HTTPException(422, detail=str(e))
        return schemas.StabilityResponse(
            n_pairs=res.n_pairs,
            k=res.k,
            topk_mean=res.topk_mean,
            topk_median=res.topk_median,
            topk_se_mean=res.topk_se_mean,
            topk_se_median=res.topk_se_median,
            spearman_mean=res.spearman_mean,
            spearman_median=res.spearman_median,
            spearman_se_mean=res.spearman_se_mean,
            spearman_se_median=res.spearman_se_median,
            meta={"wall_clock": time.perf_counter() - t0},
        )

    return app
