import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lrdtrend.design import make_equidistant
from lrdtrend.errors import InfeasibleWindow
from lrdtrend.fda import CosineBasis, FunctionalModel, PolynomialTrend, Sine, default_model
from lrdtrend.hermite import hermite2, identity
from lrdtrend.kernels import build_default_kernel, double_kernel_integral
from lrdtrend.lrd import LrdGaussianModel
from lrdtrend.theory import (
    TheoryConstants,
    bandwidth_window,
    condition_statistics,
    finite_sample_variance,
    lower_exponent,
    lrd_variance_term,
    theory_bias,
    theory_variance,
)

K0 = build_default_kernel(0)
LRD = LrdGaussianModel(0.3)


class TestBias:
    @pytest.mark.parametrize("b", [0.05, 0.1, 0.2])
    def test_sine_quarter(self, b):
        model = FunctionalModel(Sine(), (), ())
        assert theory_bias(model, K0, 0.25, b) == pytest.approx(-(2 * math.pi**2 / 5) * b**2, rel=1e-12)

    @pytest.mark.parametrize("v", [0, 1, 2])
    def test_linear_trend(self, v):
        model = FunctionalModel(PolynomialTrend((2.0, -1.0)), (), ())
        assert theory_bias(model, build_default_kernel(v), 0.4, 0.1) == 0.0

    def test_constants_agree(self):
        model = default_model()
        const = TheoryConstants(model, K0)
        t = np.linspace(0.2, 0.8, 7)
        np.testing.assert_allclose(0.1**2 * const.c_bias(t), theory_bias(model, K0, t, 0.1), rtol=1e-14)


class TestVariance:
    def test_leading_node_and_edge(self):
        model = FunctionalModel(PolynomialTrend((0.0,)), (1.0,), (CosineBasis(1),))
        const = TheoryConstants(model, K0, LRD, identity())
        at_node = theory_variance(const, 100, 0.1, 1000, 0.3, 1, 0, 2, 0.5)
        at_zero = theory_variance(const, 100, 0.1, 1000, 0.3, 1, 0, 2, 0.0)
        assert at_node.leading == pytest.approx(0.0, abs=1e-15)
        assert at_zero.leading == pytest.approx(0.02, rel=1e-12)

    def test_long_memory_order(self):
        const = TheoryConstants(default_model(), K0, LRD, identity())
        res = theory_variance(const, 100, 0.1, 1000, 0.3, 1, 0, 2, 0.5)
        assert res.correction_orders["long_memory"] == pytest.approx(100**-0.4)
        assert abs(100**-0.4 - 0.158) < 1e-3
        assert res.correction_orders["smoothing"] == pytest.approx(0.01)

    def test_requires_inheritance(self):
        const = TheoryConstants(default_model(), K0, LrdGaussianModel(0.2), hermite2())
        with pytest.raises(ValueError):
            theory_variance(const, 10, 0.1, 1000, 0.2, 2, 0, 2, 0.5)

    @pytest.mark.parametrize("b", [0.05, 0.1, 0.2, 0.3])
    def test_leading_invariant_to_b(self, b):
        const = TheoryConstants(default_model(), K0, LRD, identity())
        ref = theory_variance(const, 50, 0.1, 1000, 0.3, 1, 0, 2, 0.4).leading
        assert theory_variance(const, 50, b, 1000, 0.3, 1, 0, 2, 0.4).leading == ref

    def test_lrd_term_decreasing_in_t_max(self):
        const = TheoryConstants(default_model(), K0, LRD, identity())
        terms = [lrd_variance_term(const, 10, 0.1, tm, 0.5) for tm in (500, 1000, 4000, 16000, 64000)]
        assert np.all(np.diff(terms) < 0)

    def test_i_q_identity(self):
        const = TheoryConstants(default_model(), K0, LRD, identity())
        expected = LRD.c_z * double_kernel_integral(K0, -0.4)
        assert const.i_q(0.5) == pytest.approx(expected, rel=1e-10)
        assert const.q == 1

    def test_i_q_zero_without_noise(self):
        const = TheoryConstants(default_model(), K0)
        np.testing.assert_array_equal(const.i_q(np.array([0.3, 0.5])), 0.0)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.0, 1.0), st.integers(0, 2))
    def test_nonnegative(self, t, v):
        const = TheoryConstants(default_model(), build_default_kernel(v), LrdGaussianModel(0.4), hermite2())
        assert const.c_var(t) >= 0
        assert const.i_q(t) >= 0

    def test_truncation_error(self):
        model = default_model()
        const = TheoryConstants(model, K0)
        err = const.truncation_error(np.array([0.5]))
        assert np.all(err >= 0)


class TestFiniteSample:
    @pytest.mark.parametrize("smap,d", [(identity(), 0.3), (hermite2(), 0.4)])
    @pytest.mark.parametrize("t_max", [1000, 16000])
    def test_noise_matches_asymptotic(self, smap, d, t_max):
        lrd = LrdGaussianModel(d)
        model = default_model()
        const = TheoryConstants(model, K0, lrd, smap)
        _, noise = finite_sample_variance(make_equidistant(1, t_max), K0, 0.1, 0.5, model, lrd, smap)
        assert noise == pytest.approx(lrd_variance_term(const, 1, 0.1, t_max, 0.5), rel=0.01)

    def test_curve_part_tends_to_c_var(self):
        model = default_model()
        b = 0.02
        curve, noise = finite_sample_variance(make_equidistant(4, 10_000), K0, b, 0.5, model, None, None)
        assert noise == 0.0
        assert 4 * curve == pytest.approx(model.covariance(0.5, 0.5), rel=20 * b**2)


class TestBandwidth:
    def test_feasible_example(self):
        w = bandwidth_window(100, 10_000, 0.3, 1, 0, 2, 1.0)
        assert w.b_low == pytest.approx(10 ** (-2 / 3), rel=1e-12)
        assert round(w.b_low, 3) == 0.215
        assert round(w.b_high, 3) == 0.316
        assert w.feasible and w.contains(0.25)

    def test_second_derivative_infeasible(self):
        w = bandwidth_window(100, 10_000, 0.3, 1, 2, 4, 1.0)
        assert round(w.b_low, 3) == 0.562
        assert round(w.b_high, 3) == 0.316
        assert not w.feasible
        assert w.growth_condition == f"n = o(N^{4 * 0.4 / 6.4:.6g})"
        with pytest.raises(InfeasibleWindow, match="n = o"):
            bandwidth_window(100, 10_000, 0.3, 1, 2, 4, 1.0, raise_if_empty=True)

    @pytest.mark.parametrize("n_points", [10**3, 10**4, 10**6])
    def test_half_limit(self, n_points):
        w = bandwidth_window(2, n_points, 0.5 - 1e-9, 1, 0, 2)
        assert w.b_low == pytest.approx(1.0, abs=1e-6)
        assert not w.feasible

    @pytest.mark.parametrize("d,v,expected", [(0.3, 0, 0.4 / 2.4), (0.3, 2, 0.4 / 6.4), (0.1, 0, 0.8 / 2.8)])
    def test_exponents(self, d, v, expected):
        assert lower_exponent(d, 1, v) == pytest.approx(expected, rel=1e-12)

    def test_general_design_branch(self):
        a = bandwidth_window(100, 10_000, 0.3)
        b = bandwidth_window(100, 10_000, 0.3, beta_n=10_000, t_max=10_000)
        assert b.b_low == pytest.approx(a.b_low, rel=1e-12)

    def test_condition_statistics(self):
        stats = condition_statistics(100, 0.1, 1e4, 1e4, 0.3, 1, 0, 2)
        assert stats["bias_negligible"] == pytest.approx(100 * 0.1**4)
        assert stats["tightness"] == pytest.approx(0.1**4 * 1e8 * (1e3) ** -1.6)
        assert stats["tightness_alt"] == pytest.approx(0.1**4 * 1e8 * (1e3) ** -0.4)
