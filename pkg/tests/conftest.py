"""Shared test fixtures and independent oracles.

The oracles re-derive expected values from scratch (separate formulas,
brute-force grids) so the package under test never checks itself.
"""

import numpy as np
import pytest

# One line per acceptance criterion, echoed in the terminal summary so
# the verdicts survive output capture. Populated by test_acceptance.py.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def tent_sum(xs: np.ndarray) -> np.ndarray:
    """Independent reimplementation of the benchmark response:
    per-coordinate tent map via the sign(t) * (4 - |t|) fold."""
    xs = np.asarray(xs, dtype=float)
    t = np.where(np.abs(xs) <= 2.0, xs, np.sign(xs) * (4.0 - np.abs(xs)))
    return t.sum(axis=-1)


def brute_grid_min_fidelity(dim: int, slope: float, w: float, points: int = 2001) -> float:
    """Exhaustive grid minimum of benchmark fidelity over [-w, w]^dim
    around the origin. Only viable for dim <= 2."""
    assert dim in (1, 2)
    axis = np.linspace(-w, w, points)
    if dim == 1:
        xs = axis[:, None]
        fid = 1.0 - np.abs(tent_sum(xs) - slope * xs.sum(axis=-1))
        return float(fid.min())
    g1 = tent_sum(axis[:, None])
    e1 = slope * axis
    g = g1[:, None] + g1[None, :]
    e = e1[:, None] + e1[None, :]
    return float((1.0 - np.abs(g - e)).min())


def grid_min_fidelity(dim: int, slope: float, w: float, points: int = 2001) -> float:
    """Grid-oracle minimum fidelity for any dim, exploiting that the
    benchmark separates per coordinate for w <= 2: the minimum sits at
    a grid corner, giving 1 - (1 - slope) * dim * w exactly (the grid
    includes the endpoints). Cross-validated against the brute force
    version in the oracle self-test."""
    assert 0.0 <= w <= 2.0
    axis = np.linspace(-w, w, points)
    per_axis_max = float(np.max(np.abs(axis - slope * axis)))
    # per-axis deviations add up; signs can align at a corner
    return 1.0 - dim * per_axis_max


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
