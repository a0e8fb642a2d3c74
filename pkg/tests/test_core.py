"""Core vocabulary: black boxes, explanations, fidelity, shells."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecert.core import (
    AbsFidelity,
    BlackBox,
    CallableBlackBox,
    CertifyOutcome,
    CosineFidelity,
    CustomMetric,
    FidelityFn,
    FidelitySample,
    GenericExplanation,
    LinearExplanation,
    Provenance,
    ShellRegion,
    apply_explanation,
    as_point,
    fidelity,
)

from conftest import tent_sum


class TestPoints:
    def test_accepts_lists_and_arrays(self):
        assert as_point([1.0, 2.0]).dtype == np.float64

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            as_point([1.0, np.nan])
        with pytest.raises(ValueError):
            as_point([np.inf])

    def test_rejects_wrong_dim(self):
        with pytest.raises(ValueError):
            as_point([1.0, 2.0], dim=3)

    def test_rejects_matrix(self):
        with pytest.raises(ValueError):
            as_point([[1.0], [2.0]])


class TestBlackBox:
    def test_counts_single_queries(self):
        box = CallableBlackBox(lambda x: float(x.sum()))
        box.evaluate(np.array([1.0, 2.0]))
        box.evaluate(np.array([0.0, 0.0]))
        assert box.query_count == 2

    def test_counts_batch_queries(self):
        box = CallableBlackBox(lambda x: float(x.sum()))
        ys = box.evaluate_batch(np.arange(6, dtype=float).reshape(3, 2))
        assert ys.shape == (3,)
        assert box.query_count == 3

    def test_batch_fn_used_when_given(self):
        calls = []

        def batch(xs):
            calls.append(xs.shape)
            return xs.sum(axis=1)

        box = CallableBlackBox(lambda x: float(x.sum()), batch_fn=batch)
        box.evaluate_batch(np.zeros((4, 3)))
        assert calls == [(4, 3)]
        assert box.query_count == 4

    def test_batch_validates_shapes(self):
        box = CallableBlackBox(lambda x: float(x.sum()))
        with pytest.raises(ValueError):
            box.evaluate_batch(np.zeros(3))

    def test_thread_safe_counting(self):
        from concurrent.futures import ThreadPoolExecutor

        box = CallableBlackBox(lambda x: float(x.sum()))
        x = np.array([1.0])
        with ThreadPoolExecutor(8) as pool:
            list(pool.map(lambda _: box.evaluate(x), range(400)))
        assert box.query_count == 400


class TestExplanations:
    def test_linear_apply(self):
        e = LinearExplanation(np.array([0.75, 0.75]))
        # slope 0.75 on both coordinates at (1, 1)
        assert apply_explanation(e, np.array([1.0, 1.0])) == pytest.approx(1.5)

    def test_linear_apply_scalar_example(self):
        e = LinearExplanation(np.array([0.75]))
        assert apply_explanation(e, np.array([2.0])) == pytest.approx(1.5)

    def test_linear_intercept(self):
        e = LinearExplanation(np.array([2.0]), intercept=1.0)
        assert apply_explanation(e, np.array([3.0])) == pytest.approx(7.0)

    def test_linear_batch_matches_single(self):
        e = LinearExplanation(np.array([1.0, -2.0]), intercept=0.5)
        xs = np.array([[1.0, 1.0], [0.0, 3.0]])
        batch = e.apply_batch(xs)
        singles = [apply_explanation(e, x) for x in xs]
        assert np.allclose(batch, singles)

    def test_generic_explanation(self):
        e = GenericExplanation(lambda x: float(x.max()))
        assert apply_explanation(e, np.array([1.0, 5.0])) == 5.0

    def test_linear_rejects_dim_mismatch(self):
        e = LinearExplanation(np.array([1.0]))
        with pytest.raises(ValueError):
            e.apply(np.array([1.0, 2.0]))


class TestFidelity:
    def test_abs_metric_value(self):
        box = CallableBlackBox(lambda x: float(tent_sum(x)))
        e = LinearExplanation(np.array([0.75] * 10))
        # corner of the 0.1-cube in 10 dimensions
        x = np.full(10, 0.1)
        assert fidelity(AbsFidelity(), e, box, x) == pytest.approx(0.75)

    def test_abs_metric_is_one_at_perfect_match(self):
        box = CallableBlackBox(lambda x: float(x.sum()))
        e = LinearExplanation(np.array([1.0, 1.0]))
        assert fidelity(AbsFidelity(), e, box, np.array([0.3, -0.2])) == pytest.approx(1.0)

    def test_abs_metric_queries_box_once(self):
        box = CallableBlackBox(lambda x: float(x.sum()))
        e = LinearExplanation(np.array([1.0]))
        fidelity(AbsFidelity(), e, box, np.array([1.0]))
        assert box.query_count == 1

    def test_cosine_metric_no_queries(self):
        box = CallableBlackBox(lambda x: float(x.sum()))
        beta = lambda x: np.array([1.0, 0.0])
        metric = CosineFidelity(beta)
        e = LinearExplanation(np.array([1.0, 0.0]))
        val = fidelity(metric, e, box, np.array([0.0, 0.0]))
        assert val == pytest.approx(1.0)
        assert box.query_count == 0

    def test_cosine_orthogonal_is_zero(self):
        metric = CosineFidelity(lambda x: np.array([0.0, 1.0]))
        e = LinearExplanation(np.array([1.0, 0.0]))
        box = CallableBlackBox(lambda x: 0.0)
        assert fidelity(metric, e, box, np.zeros(2)) == pytest.approx(0.0)

    def test_cosine_requires_linear_explanation(self):
        metric = CosineFidelity(lambda x: np.array([1.0]))
        box = CallableBlackBox(lambda x: 0.0)
        with pytest.raises(TypeError):
            fidelity(metric, GenericExplanation(lambda x: 0.0), box, np.zeros(1))

    def test_custom_metric(self):
        metric = CustomMetric(lambda ev, gv: 1.0 - (gv - ev) ** 2)
        box = CallableBlackBox(lambda x: float(x.sum()))
        e = LinearExplanation(np.array([0.0]))
        assert fidelity(metric, e, box, np.array([0.5])) == pytest.approx(0.75)

    def test_non_finite_fidelity_raises(self):
        box = CallableBlackBox(lambda x: float("nan"))
        e = LinearExplanation(np.array([1.0]))
        with pytest.raises(ValueError):
            fidelity(AbsFidelity(), e, box, np.array([0.0]))

    def test_fidelity_fn_batch_matches_loop(self):
        box = CallableBlackBox(lambda x: float(tent_sum(x)))
        e = LinearExplanation(np.array([0.75, 0.75]))
        fid = FidelityFn(AbsFidelity(), e, box)
        xs = np.random.default_rng(0).uniform(-1, 1, size=(40, 2))
        batch = fid.batch(xs)
        singles = np.array([fid(x) for x in xs])
        assert np.allclose(batch, singles)

    def test_fidelity_fn_parallel_matches_serial(self):
        box = CallableBlackBox(lambda x: float(tent_sum(x)))
        e = LinearExplanation(np.array([0.75, 0.75]))
        xs = np.random.default_rng(1).uniform(-1, 1, size=(101, 2))
        serial = FidelityFn(AbsFidelity(), e, box).batch(xs)
        parallel = FidelityFn(AbsFidelity(), e, box, workers=4).batch(xs)
        assert np.array_equal(serial, parallel)


class TestShellRegion:
    def test_validates_bounds(self):
        c = np.zeros(2)
        with pytest.raises(ValueError):
            ShellRegion(c, 0.5, 0.5)
        with pytest.raises(ValueError):
            ShellRegion(c, -0.1, 0.5)
        with pytest.raises(ValueError):
            ShellRegion(c, 0.6, 0.5)

    def test_membership_half_open(self):
        s = ShellRegion(np.zeros(1), 0.25, 0.5)
        assert not s.contains(np.array([0.25]))  # inner face excluded
        assert s.contains(np.array([0.5]))  # outer face included
        assert s.contains(np.array([-0.3]))
        assert not s.contains(np.array([0.0]))
        assert not s.contains(np.array([0.51]))

    def test_full_cube_when_lb_zero(self):
        s = ShellRegion(np.zeros(2), 0.0, 1.0)
        assert s.contains(np.zeros(2))
        assert s.contains(np.array([1.0, -1.0]))
        assert not s.contains(np.array([1.0, 1.01]))

    def test_membership_respects_center(self):
        # exact binary fractions keep the offsets representable
        s = ShellRegion(np.array([2.0, -1.0]), 0.0625, 0.25)
        assert s.contains(np.array([2.125, -1.0]))
        assert not s.contains(np.array([2.0, -1.0]))

    def test_batch_matches_single(self):
        s = ShellRegion(np.array([0.5]), 0.2, 0.7)
        xs = np.linspace(-1.5, 2.5, 201)[:, None]
        batch = s.contains_batch(xs)
        singles = np.array([s.contains(x) for x in xs])
        assert np.array_equal(batch, singles)

    @given(
        lb=st.floats(0.0, 0.9),
        width=st.floats(0.01, 1.0),
        seed=st.integers(0, 10_000),
    )
    @settings(max_examples=60, deadline=None)
    def test_chebyshev_characterization(self, lb, width, seed):
        s = ShellRegion(np.zeros(3), lb, lb + width)
        x = np.random.default_rng(seed).uniform(-1.5, 1.5, size=3)
        cheb = np.max(np.abs(x))
        expected = (cheb <= lb + width) and (lb == 0.0 or cheb > lb)
        assert s.contains(x) == expected


class TestOutcomeContainers:
    def _sample(self, fid=0.9):
        return FidelitySample(np.zeros(1), fid, 0, Provenance("uniform"))

    def test_certified_forbids_violator(self):
        with pytest.raises(ValueError):
            CertifyOutcome(
                certified=True,
                min_fidelity=0.9,
                violator=np.zeros(1),
                samples=[self._sample()],
                queries_used=1,
            )

    def test_failed_requires_violator(self):
        with pytest.raises(ValueError):
            CertifyOutcome(
                certified=False,
                min_fidelity=0.1,
                violator=None,
                samples=[self._sample(0.1)],
                queries_used=1,
            )

    def test_group_fidelities_keys(self):
        samples = [
            FidelitySample(np.zeros(1), 0.9, 0, Provenance("prototype", 1, 2)),
            FidelitySample(np.zeros(1), 0.8, 0, Provenance("prototype", 1, 2)),
            FidelitySample(np.zeros(1), 0.7, 0, Provenance("uniform")),
        ]
        out = CertifyOutcome(
            certified=True, min_fidelity=0.7, violator=None, samples=samples, queries_used=3
        )
        groups = out.group_fidelities()
        assert set(groups) == {("prototype", 1, 2), ("uniform", 0, 0)}
        assert np.allclose(groups[("prototype", 1, 2)], [0.9, 0.8])


def test_abstract_blackbox_subclass_contract():
    class Stub(BlackBox):
        def _eval_one(self, x):
            return float(x[0])

    box = Stub()
    assert box.evaluate(np.array([2.5])) == 2.5
    assert np.allclose(box.evaluate_batch(np.array([[1.0], [2.0]])), [1.0, 2.0])
    assert box.query_count == 3
