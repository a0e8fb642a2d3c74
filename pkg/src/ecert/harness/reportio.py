"""Result documents: a stable JSON form for certification runs.

A document is ``{"schema_version": 1, "runs": [...], "summary": {...},
"meta": {...}}``. Everything outside ``meta`` is a pure function of
the inputs and seeds; wall-clock time and similar execution detail
live under ``meta``. The canonical byte form (sorted keys, no
whitespace, meta stripped) is what reproducibility checks compare.
"""

from __future__ import annotations

import json
from typing import IO, Union

import numpy as np

from ..core import CertificationReport

__all__ = [
    "SCHEMA_VERSION",
    "report_to_dict",
    "summarize_runs",
    "build_document",
    "canonical_bytes",
    "dump_document",
    "load_document",
]

SCHEMA_VERSION = 1


def _prov_key(kind: str, iteration: int, prototype: int) -> str:
    if kind == "uniform":
        return "uniform"
    return f"{kind}:{iteration}:{prototype}"


def report_to_dict(report: CertificationReport) -> dict:
    """JSON-ready form of one certification run.

    Sampled points are dropped; their fidelity values stay, grouped by
    region and provenance. Worker count is an execution detail and is
    deliberately not serialized.
    """
    cfg = report.config
    scfg = cfg.strategy
    regions = []
    for rec in report.regions:
        o = rec.outcome
        fids = {
            _prov_key(*key): [float(v) for v in vals]
            for key, vals in o.group_fidelities().items()
        }
        entry = {
            "lb": float(rec.shell.lb),
            "ub": float(rec.shell.ub),
            "strategy": rec.strategy,
            "certified": bool(o.certified),
            "min_fidelity": float(o.min_fidelity),
            "queries_used": int(o.queries_used),
            "fidelities": fids,
        }
        if o.violator is not None:
            entry["violator"] = [float(v) for v in o.violator]
        if o.survivors:
            entry["survivors"] = {str(k): int(v) for k, v in o.survivors.items()}
        regions.append(entry)
    return {
        "w": float(report.w),
        "dim": int(report.dim),
        "x0_fidelity": float(report.x0_fidelity),
        "total_queries": int(report.total_queries),
        "f_hat_star_w": None if report.f_hat_star_w is None else float(report.f_hat_star_w),
        "f_hat_second": None if report.f_hat_second is None else float(report.f_hat_second),
        "driver": {
            "theta": float(cfg.theta),
            "max_regions": int(cfg.max_regions),
            "initial_lb": float(cfg.initial_lb),
            "initial_ub": float(cfg.initial_ub),
            "b_policy": cfg.b_policy,
            "exit_gap_factor": float(cfg.exit_gap_factor),
        },
        "strategy": {
            "kind": scfg.kind,
            "budget": int(scfg.budget),
            "sigma": float(scfg.sigma),
            "rng_seed": int(scfg.rng_seed),
            "max_rejection_factor": int(scfg.max_rejection_factor),
        },
        "regions": regions,
    }


def summarize_runs(runs: list[dict]) -> dict:
    """Aggregate widths and query counts over a document's runs."""
    if not runs:
        return {"n_runs": 0}
    ws = np.array([r["w"] for r in runs], dtype=float)
    qs = np.array([r["total_queries"] for r in runs], dtype=float)
    out = {
        "n_runs": len(runs),
        "w_mean": float(ws.mean()),
        "w_min": float(ws.min()),
        "w_max": float(ws.max()),
        "queries_mean": float(qs.mean()),
    }
    if len(runs) >= 2:
        out["w_stderr"] = float(ws.std(ddof=1) / np.sqrt(len(runs)))
    return out


def build_document(runs: list[dict], summary: dict, meta: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "runs": runs,
        "summary": summary,
        "meta": meta,
    }


def canonical_bytes(doc: dict) -> bytes:
    """Deterministic byte form: meta stripped, keys sorted, no spaces."""
    trimmed = {k: v for k, v in doc.items() if k != "meta"}
    return json.dumps(trimmed, sort_keys=True, separators=(",", ":")).encode("utf-8")


def dump_document(doc: dict, dest: Union[str, IO[str]]) -> None:
    if isinstance(dest, str):
        with open(dest, "w") as fp:
            json.dump(doc, fp, indent=2, sort_keys=True)
            fp.write("\n")
    else:
        json.dump(doc, dest, indent=2, sort_keys=True)
        dest.write("\n")


def load_document(src: Union[str, IO[str]]) -> dict:
    if isinstance(src, str):
        with open(src) as fp:
            doc = json.load(fp)
    else:
        doc = json.load(src)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported document schema: {doc.get('schema_version')!r}")
    return doc
