import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from caplab.curve import (
    ExpFlatCurve,
    IterExpFlatCurve,
    PowerCurve,
    TabulatedCurve,
    curve_from_table,
    curve_to_table,
    partition,
    partition_brute_force,
    partition_weight_scan,
)
from caplab.errors import (
    DomainError,
    EstimationError,
    RangeError,
    UnsupportedOrderError,
)

FAMILIES = [PowerCurve(3), PowerCurve(4), PowerCurve(6), ExpFlatCurve(1.0), ExpFlatCurve(2.0)]


def fd_derivative(curve, t, order):
    """Central-difference stencils with Richardson: the derivative oracle."""
    f = lambda x: curve.eval(x, 0)
    h = t * {1: 1e-6, 2: 2e-4, 3: 2e-3}[order]

    def stencil(hh):
        if order == 1:
            return (f(t + hh) - f(t - hh)) / (2 * hh)
        if order == 2:
            return (f(t + hh) - 2 * f(t) + f(t - hh)) / hh ** 2
        return (f(t + 2 * hh) - 2 * f(t + hh) + 2 * f(t - hh) - f(t - 2 * hh)) / (
            2 * hh ** 3
        )

    return (4 * stencil(h / 2) - stencil(h)) / 3


class TestEval:
    def test_power_golden(self):
        assert PowerCurve(4).eval(0.5) == 0.0625

    @pytest.mark.parametrize("curve", FAMILIES)
    def test_zero_at_origin(self, curve):
        for order in range(3):
            assert curve.eval(0.0, order) == 0.0

    def test_expflat_closed_form(self):
        # gamma(t) = exp(-1/t), checked at a point inside the admissible
        # domain (no domain for a=1 reaches t=0.5)
        c = ExpFlatCurve(1.0)
        t = 0.09
        assert c.eval(t) == pytest.approx(math.exp(-1.0 / t), rel=1e-14)

    @pytest.mark.parametrize("curve", FAMILIES)
    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_derivatives_match_finite_differences(self, curve, order):
        t = 0.7 * curve.domain_end
        exact = curve.eval(t, order)
        approx = fd_derivative(curve, t, order)
        assert approx == pytest.approx(exact, rel=5e-4)

    def test_iterexpflat_derivatives(self):
        c = IterExpFlatCurve(1, 1.0, 1.0)
        t = 0.8 * c.domain_end
        for order in (1, 2):
            assert fd_derivative(c, t, order) == pytest.approx(
                c.eval(t, order), rel=1e-4
            )

    def test_domain_violation(self):
        with pytest.raises(DomainError):
            PowerCurve(4).eval(1.5)

    def test_scalar_and_array_paths_agree(self):
        # libm vs vectorized exp may differ in the last ulp
        c = ExpFlatCurve(1.5)
        ts = np.linspace(0.01, c.domain_end, 7)
        for order in range(4):
            arr = c.eval(ts, order)
            scal = [c.eval(float(t), order) for t in ts]
            np.testing.assert_allclose(arr, scal, rtol=5e-16)


class TestInverse:
    def test_power_golden(self):
        assert PowerCurve(4).inverse(2.0 ** -8) == pytest.approx(0.25, rel=1e-12)

    def test_endpoint(self):
        c = PowerCurve(3)
        assert c.inverse(c.eval(c.domain_end)) == c.domain_end

    def test_expflat_closed_form(self):
        # gamma^{-1}(s) = (ln (1/s))^{-1/a}; s = e^-4 exceeds gamma(T) for
        # a=2 and must raise, so the form is checked at an in-range s
        c = ExpFlatCurve(2.0)
        s = c.eval(0.2)
        assert c.inverse(s) == pytest.approx(math.log(1.0 / s) ** -0.5, rel=1e-12)
        with pytest.raises(RangeError):
            c.inverse(math.exp(-4.0))

    @pytest.mark.parametrize("curve", FAMILIES)
    def test_round_trip(self, curve):
        gT = curve.eval(curve.domain_end)
        for s in np.geomspace(1e-10 * gT, gT, 37):
            assert curve.eval(curve.inverse(s)) == pytest.approx(s, rel=1e-10)

    @given(frac=st.floats(1e-9, 1.0))
    @settings(max_examples=60, deadline=None)
    def test_round_trip_property(self, frac):
        curve = PowerCurve(4)
        s = frac * curve.eval(curve.domain_end)
        assert curve.eval(curve.inverse(s)) == pytest.approx(s, rel=1e-10)


class TestHeightBound:
    def test_power_closed_form(self):
        c = PowerCurve(4)
        t = 0.3
        assert c.height_bound(t) == pytest.approx(12 * t ** 4, rel=1e-14)
        assert c.height_bound_inverse(2.0 ** -8) == pytest.approx(
            (2.0 ** -8 / 12) ** 0.25, rel=1e-12
        )

    def test_h_at_zero(self):
        assert PowerCurve(3).height_bound(0.0) == 0.0

    def test_expflat_inverse_vs_scan(self):
        # brute-force monotone scan oracle on a million-point grid; the scan
        # starts where h is representable (it underflows to 0 near 0)
        c = ExpFlatCurve(1.0)
        ts = np.linspace(c.domain_end / 1e6, c.domain_end, 1_000_000)
        h = ts * ts * c.eval(ts, 2)
        for s in np.geomspace(c.height_bound(c.domain_end / 50), h[-1], 11):
            t_scan = ts[np.searchsorted(h, s)]
            assert c.height_bound_inverse(s) == pytest.approx(t_scan, abs=1e-6)

    def test_range_error(self):
        c = PowerCurve(4)
        with pytest.raises(RangeError):
            c.height_bound_inverse(2 * c.height_bound(c.domain_end))

    @pytest.mark.parametrize("curve", FAMILIES)
    def test_round_trip(self, curve):
        hT = curve.height_bound(curve.domain_end)
        for s in np.geomspace(1e-10 * hT, hT, 23):
            assert curve.height_bound(curve.height_bound_inverse(s)) == pytest.approx(
                s, rel=1e-10
            )


class TestWeight:
    def test_power_golden(self):
        assert PowerCurve(4).dyadic_weight(8) == pytest.approx(4.0, rel=1e-12)

    def test_endpoint(self):
        # 2^-k equal to gamma(T) gives exactly 1/T (Power(m): gamma(1) = 1)
        assert PowerCurve(4).dyadic_weight(0) == pytest.approx(1.0, rel=1e-12)

    def test_expflat_definition(self):
        # w_k = 1/gamma^{-1}(2^-k) = k ln 2; k=10 sits above gamma(T) for a=1
        # on every admissible domain, so the value is pinned at k=14 instead
        c = ExpFlatCurve(1.0)
        assert c.dyadic_weight(14) == pytest.approx(14 * math.log(2), rel=1e-12)
        with pytest.raises(RangeError):
            c.dyadic_weight(10)

    def test_extended_weight_saturates(self):
        c = ExpFlatCurve(1.0)
        assert c.dyadic_weight_extended(3) == pytest.approx(1.0 / c.domain_end)
        assert c.dyadic_weight_extended(20) == pytest.approx(c.dyadic_weight(20))


class TestRatioLimit:
    @pytest.mark.parametrize("m", [3, 4, 6])
    def test_power(self, m):
        assert PowerCurve(m).ratio_limit() == pytest.approx(1.0 / (m - 2), abs=1e-10)

    @pytest.mark.parametrize("a", [1.0, 2.0])
    def test_expflat(self, a):
        assert abs(ExpFlatCurve(a).ratio_limit()) < 1e-3

    def test_iterexpflat(self):
        assert abs(IterExpFlatCurve(1, 1.0, 1.0).ratio_limit()) < 1e-3

    def test_power_defect_is_zero(self):
        c = PowerCurve(4)
        g2T = c.eval(c.domain_end, 2)
        for s in np.geomspace(1e-8 * g2T, g2T, 17):
            assert abs(c.ratio_defect(s).value) < 1e-9

    def test_defect_threshold(self):
        c = ExpFlatCurve(1.0)
        s_star = c.ratio_defect_threshold(bound=0.01)
        for s in np.geomspace(s_star * 1e-6, s_star, 25):
            assert abs(c.ratio_defect(s).value) < 0.01

    def test_non_convergence_error(self):
        class Wobbly(PowerCurve):
            def curvature_ratio(self, t):
                return math.sin(1.0 / t)

        with pytest.raises(EstimationError):
            Wobbly(4).ratio_limit()


class TestPartition:
    def test_power_golden(self):
        table = partition(PowerCurve(4), 8)
        assert table.t0 == pytest.approx((2.0 ** -8 / 12) ** 0.25, rel=1e-10)
        assert table.rho[0] == pytest.approx(12 * table.t0 ** 2, rel=1e-10)
        assert table.nk == 5
        assert table.t[table.nk] == 1.0

    @pytest.mark.parametrize("curve", FAMILIES)
    def test_invariants(self, curve):
        k = curve.k_floor + 5
        table = partition(curve, k)
        assert all(b > a for a, b in zip(table.t, table.t[1:]))
        assert table.t[table.nk] == curve.domain_end
        g2T = curve.eval(curve.domain_end, 2)
        # exact doubling below the cap (definitional)
        for n in range(table.nk):
            if table.rho[n + 1] < g2T:
                assert table.rho[n + 1] == 2.0 * table.rho[n]
        assert table.rho[table.nk] == g2T

    @pytest.mark.parametrize("curve", [PowerCurve(4), ExpFlatCurve(1.0)])
    def test_matches_brute_force_scan(self, curve):
        k = curve.k_floor + 5
        table = partition(curve, k)
        oracle = partition_brute_force(curve, k, grid_points=1_000_000)
        assert table.nk == oracle.nk
        # the oracle rounds t0 (hence rho0) to its grid, shifting later
        # entries by a few grid steps
        np.testing.assert_allclose(
            table.t, oracle.t, rtol=0, atol=6 * curve.domain_end / 1e6
        )

    def test_precondition(self):
        c = PowerCurve(4)
        with pytest.raises(DomainError):
            partition(c, c.k_floor)


class TestComparisonLemma:
    """The two-sided comparison between gamma and h = t^2 gamma''."""

    @pytest.mark.parametrize("curve", FAMILIES)
    def test_hinv_below_ginv(self, curve):
        gT = curve.eval(curve.domain_end)
        for s in np.geomspace(1e-12 * gT, gT, 101):
            assert curve.height_bound_inverse(s) <= curve.inverse(s) * (1 + 1e-9)

    @pytest.mark.parametrize("curve", FAMILIES)
    def test_ginv_below_3hinv(self, curve):
        hT3 = curve.height_bound(curve.domain_end / 3)
        for s in np.geomspace(1e-12 * hT3, hT3, 101):
            assert curve.inverse(s) <= 3 * curve.height_bound_inverse(s) * (1 + 1e-9)

    @pytest.mark.parametrize("curve", FAMILIES)
    def test_sharpened_taylor(self, curve):
        ts = np.geomspace(curve.domain_end * 1e-3, curve.domain_end, 101)
        assert np.all(curve.eval(ts) <= curve.height_bound(ts) / 2 + 1e-300)

    @pytest.mark.parametrize("curve", FAMILIES)
    def test_h_below_gamma_of_3t(self, curve):
        ts = np.geomspace(curve.domain_end * 1e-3, curve.domain_end / 3, 101)
        assert np.all(curve.height_bound(ts) <= curve.eval(3 * ts) * (1 + 1e-12))

    @pytest.mark.parametrize("curve", FAMILIES)
    def test_weight_anchor(self, curve):
        # w_k t_{k,0} <= 1 on a sampled k range
        for k in range(curve.k_floor + 1, curve.k_floor + 12):
            assert curve.dyadic_weight(k) * partition(curve, k).t0 <= 1.0 + 1e-12


class TestWeightScan:
    def test_bounded_no_trend(self):
        scan = partition_weight_scan(PowerCurve(4), 20, 0.1)
        assert math.isfinite(scan.max_value)
        assert scan.trend_slope <= 0.05
        # pure powers: the n=0 slice is exactly (m(m-1))^(-1/m); the overall
        # max can exceed it only through the t = T cap at small k
        assert 12 ** -0.25 <= scan.max_value <= 1.0

    def test_eps_validation(self):
        with pytest.raises(DomainError):
            partition_weight_scan(PowerCurve(4), 20, 0.0)


class TestTabulated:
    def make(self):
        base = PowerCurve(4)
        ts = np.linspace(0.0, 1.0, 41)
        return TabulatedCurve(ts, base.eval(ts))

    def test_eval_orders(self):
        c = self.make()
        assert c.eval(0.5) == pytest.approx(0.0625, rel=1e-3)
        assert c.eval(0.5, 1) == pytest.approx(0.5, rel=5e-2)
        with pytest.raises(UnsupportedOrderError):
            c.eval(0.5, 3)

    def test_rejects_third_order_calculus(self):
        c = self.make()
        with pytest.raises(UnsupportedOrderError):
            c.ratio_limit()
        with pytest.raises(UnsupportedOrderError):
            c.ratio_defect(0.1)

    def test_inverse_works(self):
        c = self.make()
        s = c.eval(0.6)
        assert c.inverse(s) == pytest.approx(0.6, abs=1e-9)

    def test_rejects_nonconvex_data(self):
        ts = np.linspace(0.0, 1.0, 21)
        with pytest.raises(DomainError):
            TabulatedCurve(ts, np.sqrt(ts))


class TestConstruction:
    def test_power_needs_m_above_2(self):
        with pytest.raises(DomainError):
            PowerCurve(2.0)

    def test_expflat_rejects_nonmonotone_domain(self):
        # T = 0.25 makes gamma'' non-monotone for a = 1 (turning point 0.2113)
        with pytest.raises(DomainError):
            ExpFlatCurve(1.0, domain_end=0.25)

    def test_expflat_default_domain(self):
        c = ExpFlatCurve(1.0)
        x1 = (6 - math.sqrt(12)) / 12
        assert c.domain_end == pytest.approx(0.5 * x1, rel=1e-12)

    def test_domain_end_bounds(self):
        with pytest.raises(DomainError):
            PowerCurve(4, domain_end=1.5)


class TestToml:
    def test_round_trip(self):
        for curve in (PowerCurve(4, 0.7), ExpFlatCurve(1.5), IterExpFlatCurve(1, 1.0, 2.0)):
            again = curve_from_table(curve_to_table(curve))
            assert type(again) is type(curve)
            assert again.domain_end == curve.domain_end
            t = 0.5 * curve.domain_end
            assert again.eval(t) == curve.eval(t)

    def test_unknown_keys_rejected(self):
        with pytest.raises(DomainError):
            curve_from_table({"family": "power", "m": 4.0, "bogus": 1})

    def test_missing_keys_rejected(self):
        with pytest.raises(DomainError):
            curve_from_table({"family": "expflat"})

    def test_partition_csv(self):
        table = partition(PowerCurve(4), 8)
        text = table.to_csv()
        lines = text.strip().split("\r\n")
        assert lines[0] == "k,n,t,rho"
        assert len(lines) == table.nk + 2
