"""Operational wrappers: external model processes, result documents,
benchmark, coverage and stability experiments."""

from .blackbox_proc import BlackBoxProtocolError, SubprocessBlackBox
from .reportio import (
    build_document,
    canonical_bytes,
    dump_document,
    load_document,
    report_to_dict,
    summarize_runs,
)
from .bench import BenchSpec, bench_rows_to_csv, run_bench
from .coverage import (
    CoverageConfig,
    CoveragePick,
    CoverageResult,
    make_clusters,
    run_coverage,
)
from .stability import StabilityResult, run_stability, spearman_abs, topk_overlap

__all__ = [
    "BlackBoxProtocolError",
    "SubprocessBlackBox",
    "build_document",
    "canonical_bytes",
    "dump_document",
    "load_document",
    "report_to_dict",
    "summarize_runs",
    "BenchSpec",
    "bench_rows_to_csv",
    "run_bench",
    "CoverageConfig",
    "CoveragePick",
    "CoverageResult",
    "make_clusters",
    "run_coverage",
    "StabilityResult",
    "run_stability",
    "spearman_abs",
    "topk_overlap",
]
