from __future__ import annotations

import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fblkit.asymptotics import (
    ArqParams, AsymptoticParams, ErrorSpec, ListParams, erasure_logM, expected_rate_erasure,
    gaussian_cdf, gaussian_cdf_quantile, gaussian_quantile, hoeffding_interval, list_rates,
    ordinary_logM, sw_second_order,
)
from fblkit.dmc_core import JointPmf, SourceStats, source_conditional_stats
from fblkit.errors import ArgumentError

mpmath.mp.dps = 40


def quantile_oracle(p):
    """Bisection on the high-precision erfc-based cdf."""
    lo, hi = mpmath.mpf(-40), mpmath.mpf(40)
    target = mpmath.mpf(p)
    for _ in range(200):
        mid = (lo + hi) / 2
        if mpmath.erfc(-mid / mpmath.sqrt(2)) / 2 < target:
            lo = mid
        else:
            hi = mid
    return float((lo + hi) / 2)


BSC = AsymptoticParams(2000, 0.5, 0.891)


class TestGaussian:
    def test_fixed_points(self):
        assert gaussian_quantile(0.5) == 0.0
        assert gaussian_cdf(0.0) == 0.5

    def test_small_quantile(self):
        assert gaussian_quantile(1e-6) == pytest.approx(quantile_oracle(1e-6), abs=1e-10)
        assert gaussian_quantile(1e-6) == pytest.approx(-4.75342, abs=1e-4)

    @pytest.mark.parametrize("x", [-30.0, -8.0, -3.3, -0.5, 0.0, 1.7, 6.0])
    def test_cdf_against_mpmath(self, x):
        assert gaussian_cdf(x) == pytest.approx(float(mpmath.ncdf(x)), abs=1e-12, rel=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(1e-12, 1 - 1e-12))
    def test_inverse_consistency(self, p):
        assert abs(gaussian_cdf(gaussian_quantile(p)) - p) <= 1e-10

    def test_direction_dispatch(self):
        assert gaussian_cdf_quantile(0.0, "cdf") == 0.5
        assert gaussian_cdf_quantile(0.5, "quantile") == 0.0
        with pytest.raises(ArgumentError):
            gaussian_cdf_quantile(0.5, "pdf")

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 2.0])
    def test_quantile_domain(self, p):
        with pytest.raises(ArgumentError):
            gaussian_quantile(p)


class TestErrorSpec:
    def test_sum_enforced(self):
        with pytest.raises(ArgumentError):
            ErrorSpec(0.01, 0.02, 0.05)

    def test_ordering_enforced(self):
        with pytest.raises(ArgumentError):
            ErrorSpec.from_undetected_erasure(0.5, 0.6)

    def test_constructors(self):
        a = ErrorSpec.from_undetected_erasure(1e-6, 1e-2)
        b = ErrorSpec.from_undetected_total(1e-6, 1e-6 + 1e-2)
        assert a.eps_t == pytest.approx(b.eps_t, abs=1e-15)


class TestOrdinary:
    def test_value(self):
        val = ordinary_logM(BSC, 1e-6)
        expect = 2000 * 0.5 + math.sqrt(2000 * 0.891) * quantile_oracle(1e-6)
        assert val == pytest.approx(expect, abs=1e-8)
        assert val == pytest.approx(799.3, abs=0.2)

    def test_half_and_zero_dispersion(self):
        assert ordinary_logM(AsymptoticParams(100, 0.5, 0.9, 3.0), 0.5) == 53.0
        assert ordinary_logM(AsymptoticParams(100, 0.5, 0.0, 3.0), 1e-3) == 53.0

    @settings(max_examples=100, deadline=None)
    @given(st.floats(1e-9, 0.999), st.floats(1e-9, 0.999), st.integers(2, 10_000))
    def test_monotone(self, e1, e2, n):
        # growth in n holds once n C outpaces the sqrt(n) penalty; at eps = 0.1 that is n >= 2
        lo, hi = sorted((e1, e2))
        if hi - lo < 1e-9:
            return
        p = AsymptoticParams(n, 0.5, 0.891)
        assert ordinary_logM(p, lo) < ordinary_logM(p, hi)
        assert ordinary_logM(AsymptoticParams(n + 1, 0.5, 0.891), 0.1) > ordinary_logM(p, 0.1)


class TestErasure:
    def test_value(self):
        val = erasure_logM(BSC, ErrorSpec.from_undetected_erasure(1e-6, 1e-2))
        assert val == pytest.approx(2000 * 0.5 + math.sqrt(2000 * 0.891) * quantile_oracle(0.010001), abs=1e-8)
        assert val == pytest.approx(901.8, abs=0.4)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.01, 0.9), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    def test_invariant_in_eps_u(self, eps_t, f1, f2):
        a = ErrorSpec.from_undetected_total(f1 * eps_t * 0.999, eps_t)
        b = ErrorSpec.from_undetected_total(f2 * eps_t * 0.999, eps_t)
        assert erasure_logM(BSC, a) == erasure_logM(BSC, b)

    def test_half(self):
        assert erasure_logM(BSC, ErrorSpec.from_undetected_total(0.1, 0.5)) == 1000.0


class TestExpectedRate:
    def test_example(self):
        r = expected_rate_erasure(BSC, ErrorSpec.from_undetected_erasure(1e-6, 1e-2))
        assert r.r_erasure == pytest.approx(0.4464, abs=5e-4)
        assert r.r_ordinary == pytest.approx(0.3997, abs=5e-4)
        assert r.r_erasure > r.r_ordinary
        assert r.support_probs == pytest.approx((0.99, 0.01))
        assert r.support[1] == 0.0

    def test_small_eps_e_limit(self):
        r = expected_rate_erasure(BSC, ErrorSpec.from_undetected_erasure(1e-3, 1e-12))
        assert r.r_erasure == pytest.approx(r.r_ordinary, abs=1e-9)

    def test_large_n(self):
        err = ErrorSpec.from_undetected_erasure(1e-6, 1e-2)
        r = expected_rate_erasure(AsymptoticParams(10 ** 9, 0.5, 0.891), err)
        assert r.r_ordinary > r.r_erasure
        assert r.r_erasure == pytest.approx(0.99 * 0.5, abs=1e-3)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(1e-8, 0.2), st.floats(1e-8, 0.2), st.integers(10, 100_000))
    def test_below_capacity(self, eps_u, eps_e, n):
        r = expected_rate_erasure(AsymptoticParams(n, 0.5, 0.891), ErrorSpec.from_undetected_erasure(eps_u, eps_e))
        assert r.r_erasure < 0.5


class TestHoeffding:
    ERR = ErrorSpec.from_undetected_erasure(1e-6, 0.25)

    def test_confidence(self):
        h = hoeffding_interval(BSC, self.ERR, ArqParams(100, 0.1))
        assert h.confidence == pytest.approx(1 - 2 * math.exp(-1), abs=1e-12)
        assert h.confidence == pytest.approx(0.26424, abs=1e-5)
        assert not h.vacuous

    def test_vacuous(self):
        h = hoeffding_interval(BSC, self.ERR, ArqParams(100, 1e-3))
        assert h.confidence == 0.0 and h.vacuous

    def test_endpoint_ratio(self):
        h = hoeffding_interval(BSC, self.ERR, ArqParams(100, 0.1))
        assert h.lo == pytest.approx(h.hi * (1 - 0.25 - 0.1) / (1 - 0.25 + 0.1), rel=1e-14)

    def test_delta_range(self):
        with pytest.raises(ArgumentError):
            hoeffding_interval(BSC, ErrorSpec.from_undetected_erasure(1e-6, 1e-2), ArqParams(100, 0.1))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 5000), st.floats(0.01, 0.2))
    def test_confidence_range_and_monotone(self, b, delta):
        h1 = hoeffding_interval(BSC, self.ERR, ArqParams(b, delta))
        h2 = hoeffding_interval(BSC, self.ERR, ArqParams(b + 1, delta))
        assert 0.0 <= h1.confidence < 1.0
        assert h2.confidence >= h1.confidence


class TestListRates:
    def test_l_zero(self):
        assert list_rates(0.891, 0.1, ListParams()).second_order_r == pytest.approx(
            math.sqrt(0.891) * gaussian_quantile(0.1))

    def test_half(self):
        assert list_rates(0.891, 0.5, ListParams(l=0.2)).second_order_r == 0.2

    def test_third_order(self):
        r = list_rates(0.891, 0.1, ListParams(alpha=1.0, symmetric_singular=True))
        assert (r.third_order_lo, r.third_order_hi) == (1.0, 1.0)
        r = list_rates(0.891, 0.1, ListParams(alpha=1.0))
        assert (r.third_order_lo, r.third_order_hi) == (1.0, 1.5)


class TestSlepianWolf:
    def test_half(self):
        assert sw_second_order(SourceStats(0.5, 0.891), 0.5, 100)[0] == 0.0

    def test_deterministic(self):
        assert sw_second_order(SourceStats(0.0, 0.0), 0.1, 100) == (0.0, 0.0)

    def test_dsbs(self):
        src = source_conditional_stats(JointPmf.dsbs(0.11))
        r, logm = sw_second_order(src, 0.1, 2000)
        expect = 2000 * src.cond_entropy_bits + math.sqrt(2000 * src.cond_varentropy_bits2) * quantile_oracle(0.9)
        assert logm == pytest.approx(expect, abs=1e-8)

    def test_rounded_constants(self):
        # H = 0.5 and V = 0.891 as rounded for DSBS(0.11)
        r, logm = sw_second_order(SourceStats(0.5, 0.891), 0.1, 2000)
        assert logm == pytest.approx(1000 + 54.13, abs=0.2)
