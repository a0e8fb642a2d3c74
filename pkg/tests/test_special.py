"""Benchmark model, Lipschitz head start, piecewise early stop."""

import numpy as np
import pytest

from ecert.core import AbsFidelity, CosineFidelity, FidelityFn, fidelity
from ecert.special import (
    PiecewiseEarlyStop,
    lipschitz_headstart,
    make_synthetic,
    pwl_response,
    synthetic_min_fidelity,
)

from conftest import brute_grid_min_fidelity, grid_min_fidelity, tent_sum


class TestPwlResponse:
    def test_identity_inside(self):
        assert pwl_response(np.array([0.5, -1.0])) == pytest.approx(-0.5)

    def test_folds_outside(self):
        assert pwl_response(np.array([3.0])) == pytest.approx(1.0)
        assert pwl_response(np.array([-3.0])) == pytest.approx(-1.0)
        assert pwl_response(np.array([2.0])) == pytest.approx(2.0)
        assert pwl_response(np.array([4.0])) == pytest.approx(0.0)

    def test_matches_independent_reimplementation(self):
        xs = np.random.default_rng(0).uniform(-6, 6, size=(500, 3))
        assert np.allclose(pwl_response(xs), tent_sum(xs))

    def test_batch_shape(self):
        assert pwl_response(np.zeros((7, 2))).shape == (7,)


class TestMakeSynthetic:
    def test_ideal_width_is_reciprocal_dim(self):
        for d in (1, 2, 10):
            _, _, w = make_synthetic(d)
            assert w == pytest.approx(1.0 / d)

    def test_explanation_slope(self):
        _, expl, _ = make_synthetic(3, slope=0.6)
        assert np.allclose(expl.alpha, 0.6)
        assert expl.intercept == 0.0

    def test_corner_fidelity_d10(self):
        box, expl, _ = make_synthetic(10)
        x = np.full(10, 0.1)
        assert fidelity(AbsFidelity(), expl, box, x) == pytest.approx(0.75)

    def test_fidelity_at_ideal_width_boundary(self):
        # at w = 1/d the worst corner sits exactly on the threshold
        for d in (1, 2, 5):
            assert synthetic_min_fidelity(d, 0.75, 1.0 / d) == pytest.approx(0.75)

    def test_validates_arguments(self):
        with pytest.raises(ValueError):
            make_synthetic(0)
        with pytest.raises(ValueError):
            make_synthetic(2, slope=1.0)


class TestOracleAgreement:
    """The closed-form minimum, the separable grid oracle and the brute
    force grid all agree where they overlap."""

    @pytest.mark.parametrize("dim", [1, 2])
    @pytest.mark.parametrize("w", [0.1, 0.5, 1.0, 1.9])
    def test_brute_matches_closed_form(self, dim, w):
        brute = brute_grid_min_fidelity(dim, 0.75, w)
        closed = synthetic_min_fidelity(dim, 0.75, w)
        assert brute == pytest.approx(closed, abs=1e-9)

    @pytest.mark.parametrize("dim", [1, 2])
    @pytest.mark.parametrize("w", [0.25, 0.75])
    def test_grid_oracle_matches_brute(self, dim, w):
        assert grid_min_fidelity(dim, 0.75, w) == pytest.approx(
            brute_grid_min_fidelity(dim, 0.75, w), abs=1e-9
        )

    def test_grid_oracle_d3_closed_form(self):
        assert grid_min_fidelity(3, 0.75, 0.2) == pytest.approx(
            synthetic_min_fidelity(3, 0.75, 0.2), abs=1e-12
        )


class TestHeadstart:
    def test_d1_frozen_value(self):
        hs = lipschitz_headstart(np.array([0.75]), theta=0.75, lipschitz=1.0)
        assert hs.r_l2 == pytest.approx(0.25 / 1.75)
        assert hs.w_inf == pytest.approx(0.25 / 1.75)

    def test_d2_frozen_value(self):
        hs = lipschitz_headstart(np.full(2, 0.75), theta=0.75, lipschitz=np.sqrt(2.0))
        assert hs.r_l2 == pytest.approx(0.25 / (0.75 * np.sqrt(2.0) + np.sqrt(2.0)))
        assert hs.w_inf == pytest.approx(hs.r_l2 / np.sqrt(2.0))
        assert hs.w_inf == pytest.approx(0.0714286, abs=1e-6)

    def test_certified_region_truly_safe(self):
        # the head start must never overshoot the true safe width
        for d in (1, 2, 3):
            hs = lipschitz_headstart(np.full(d, 0.75), 0.75, np.sqrt(d))
            assert synthetic_min_fidelity(d, 0.75, hs.w_inf) >= 0.75

    def test_anchor_gap_shrinks_radius(self):
        base = lipschitz_headstart(np.array([0.75]), 0.75, 1.0)
        shifted = lipschitz_headstart(np.array([0.75]), 0.75, 1.0, anchor_gap=0.1)
        assert shifted.r_l2 < base.r_l2

    def test_no_slack_gives_zero(self):
        hs = lipschitz_headstart(np.array([1.0]), 0.75, 1.0, anchor_gap=0.3)
        assert hs.r_l2 == 0.0
        assert hs.w_inf == 0.0

    def test_deterministic(self):
        a = lipschitz_headstart(np.full(2, 0.75), 0.75, np.sqrt(2.0))
        b = lipschitz_headstart(np.full(2, 0.75), 0.75, np.sqrt(2.0))
        assert a == b


class TestPiecewiseEarlyStop:
    def test_certifies_once_all_pieces_seen(self):
        stop = PiecewiseEarlyStop(pieces=2, theta=0.75)
        assert not stop.observe(0.9)
        assert not stop.observe(0.9)  # same piece again
        assert stop.observe(0.8)
        assert stop.certified

    def test_low_value_blocks_certification(self):
        stop = PiecewiseEarlyStop(pieces=2, theta=0.75)
        stop.observe(0.9)
        assert not stop.observe(0.5)
        assert stop.complete
        assert not stop.certified

    def test_merge_tolerance(self):
        stop = PiecewiseEarlyStop(pieces=1, theta=0.5, tol=1e-9)
        stop.observe(0.8)
        assert stop.observe(0.8 + 5e-10)
        assert len(stop.values) == 1

    def test_too_many_distinct_values_is_an_error(self):
        stop = PiecewiseEarlyStop(pieces=2, theta=0.5)
        stop.observe(0.8)
        stop.observe(0.9)
        with pytest.raises(ValueError):
            stop.observe(0.7)

    def test_observe_many(self):
        stop = PiecewiseEarlyStop(pieces=3, theta=0.6)
        assert stop.observe_many([0.7, 0.8, 0.7, 0.9])
        assert stop.certified

    def test_with_cosine_metric_on_pwl_model(self):
        # the benchmark's local gradient has two pieces along coordinate
        # 0 (d=2): (1, 1) inside |t| <= 2 and (-1, 1) beyond the fold
        def beta_of(x):
            return np.array([1.0 if abs(x[0]) <= 2.0 else -1.0, 1.0])

        box, _, _ = make_synthetic(2)
        from ecert.core import LinearExplanation

        expl = LinearExplanation(np.array([1.0, 0.5]))
        metric = CosineFidelity(beta_of)
        fid = FidelityFn(metric, expl, box)
        # |cos| values: 0.9487 on the inner piece, 0.3162 on the fold
        stop = PiecewiseEarlyStop(pieces=2, theta=0.3)
        assert not stop.observe(fid(np.array([0.5, 0.0])))
        assert not stop.observe(fid(np.array([1.5, 1.0])))  # same piece
        assert stop.observe(fid(np.array([3.0, 0.0])))  # second piece seen
        assert stop.certified
        assert box.query_count == 0  # cosine metric never queries

        # a piece below theta completes the count but never certifies
        strict = PiecewiseEarlyStop(pieces=2, theta=0.75)
        strict.observe(fid(np.array([0.5, 0.0])))
        assert not strict.observe(fid(np.array([3.0, 0.0])))
        assert strict.complete
        assert not strict.certified
