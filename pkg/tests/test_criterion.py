import math

import numpy as np
import pytest

from caplab.body import circle, ellipse, flat_spot_body
from caplab.criterion import (
    DIVERGENT,
    FINITE,
    cap_integral,
    cap_weight,
    classify,
    classify_multi,
    delta_grid,
    l2_decision,
    lq_functional,
    sup_cap_function,
)
from caplab.curve import ExpFlatCurve
from caplab.errors import DomainError, RangeError


class TestCapIntegral:
    def test_circle_integrand_limit(self):
        # Lambda(delta)^2 / delta -> 8 as delta -> 0
        body = circle(1.0)
        for delta in (1e-6, 1e-8):
            lam = body.cap_function((0.0, 1.0), delta)
            assert lam ** 2 / delta == pytest.approx(8.0, rel=1e-3)

    def test_circle_finite(self):
        value, slope = cap_integral(circle(1.0), (0.0, 1.0), 2.0, delta0=1.0)
        assert math.isfinite(value)
        assert abs(slope) < 0.05

    def test_empty_range(self):
        assert cap_integral(circle(1.0), (0, 1), 2.0, delta0=0.5, delta_min=0.5) == (
            0.0,
            0.0,
        )

    def test_bad_range(self):
        with pytest.raises(DomainError):
            cap_integral(circle(1.0), (0, 1), 2.0, delta0=0.5, delta_min=0.7)

    def test_flat_partial_growth(self):
        # ExpFlat(3) on a domain reaching gamma(T) ~ 1e-2 keeps the final two
        # decades inside the pure graph regime: integrand ~ u^(-2/3), and the
        # partial integral grows like u^(1/3) up to slow-asymptotic pollution
        body = flat_spot_body(ExpFlatCurve(3.0, domain_end=0.6))
        report = classify(body, 2.0, n_directions=36)
        flat = min(
            report.directions,
            key=lambda d: abs((d.angle % (2 * math.pi)) - 3 * math.pi / 2),
        )
        assert flat.integrand_exponent == pytest.approx(-2.0 / 3.0, abs=0.05)
        assert 0.2 < flat.partial_slope < 0.8
        assert report.verdict == DIVERGENT

    def test_integrand_monotone_in_q_where_small(self):
        # pointwise: Lambda <= 1 makes Lambda^q nonincreasing in q
        body = ellipse(2.0, 1.0)
        deltas = delta_grid(0.5, 1e-10)
        lams = body.cap_profile((0.0, 1.0), deltas)
        small = lams <= 1.0
        assert np.all(lams[small] ** 2.5 <= lams[small] ** 1.5 + 1e-15)


class TestVerdicts:
    def test_circle(self):
        assert l2_decision(circle(1.0)).verdict == FINITE

    @pytest.mark.parametrize(
        "a,expected", [(1.0, FINITE), (1.9, FINITE), (2.1, DIVERGENT), (3.0, DIVERGENT)]
    )
    def test_expflat_threshold_rule(self, a, expected):
        body = flat_spot_body(ExpFlatCurve(a))
        report = classify(body, 2.0, n_directions=72)
        assert report.verdict == expected

    def test_flat_normal_exponent_value(self):
        # at the flat normal the integrand exponent equals -q/a exactly
        body = flat_spot_body(ExpFlatCurve(1.9))
        report = classify(body, 2.0, n_directions=36)
        expos = [d.integrand_exponent for d in report.directions]
        assert min(expos, key=lambda e: abs(e + 2.0 / 1.9)) == pytest.approx(
            -2.0 / 1.9, abs=1e-3
        )

    def test_multi_q_shares_profiles(self):
        body = flat_spot_body(ExpFlatCurve(2.0))
        r15, r30 = classify_multi(body, [1.5, 3.0], n_directions=36)
        assert r15.verdict == DIVERGENT  # a=2.0 > q=1.5
        assert r30.verdict == FINITE     # a=2.0 < q=3
        assert r15.q == 1.5 and r30.q == 3.0

    def test_q_validation(self):
        with pytest.raises(DomainError):
            classify(circle(1.0), 0.5)

    def test_dead_band_inconclusive(self):
        # a = 1.98 puts the flat-normal exponent at -1.0101, inside the
        # +/- 0.02 dead band around the critical exponent
        from caplab.criterion import INCONCLUSIVE

        body = flat_spot_body(ExpFlatCurve(1.98))
        report = classify(body, 2.0, n_directions=36)
        assert report.verdict == INCONCLUSIVE

    def test_thread_fanout_matches_serial(self, monkeypatch):
        body = ellipse(1.5, 0.8)
        serial = classify(body, 2.0, n_directions=24)
        monkeypatch.setenv("CAPLAB_THREADS", "3")
        threaded = classify(body, 2.0, n_directions=24)
        assert [d.integral for d in serial.directions] == [
            d.integral for d in threaded.directions
        ]
        assert serial.verdict == threaded.verdict


class TestFunctional:
    def test_monotone_in_delta0(self):
        body = circle(1.0)
        small = lq_functional(body, 2.0, delta0=0.25)
        large = lq_functional(body, 2.0, delta0=1.0)
        assert small <= large

    def test_circle_value_against_closed_form(self):
        # integral of (2 acos(1-d))^2 dd/d via direct quadrature oracle
        from scipy.integrate import quad

        oracle, _ = quad(
            lambda d: (2 * math.acos(1 - d)) ** 2 / d, 1e-12, 1.0, limit=200
        )
        mine = lq_functional(circle(1.0), 2.0, delta0=1.0)
        assert mine == pytest.approx(oracle ** 0.5, rel=1e-3)

    def test_refinement_stability(self):
        # doubling both the direction grid and the delta density
        body = ellipse(1.5, 0.8)
        base = classify(
            body, 2.0, n_directions=90, delta_min=1e-10, per_decade=64
        ).functional()
        fine = classify(
            body, 2.0, n_directions=180, delta_min=1e-10, per_decade=128
        ).functional()
        assert abs(fine - base) / base < 0.01


class TestCapWeight:
    def test_circle_closed_form(self):
        for k in (2, 5, 9):
            expect = 1.0 / (2 * math.acos(1 - 2.0 ** -k))
            assert cap_weight(circle(1.0), k) == pytest.approx(expect, rel=1e-8)

    def test_nondecreasing_in_k(self):
        body = ellipse(1.5, 0.8)
        vals = [cap_weight(body, k, n_directions=90) for k in range(2, 9)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_range_error(self):
        with pytest.raises(RangeError):
            cap_weight(circle(1.0), 0)

    def test_comparable_to_curve_weight(self):
        # flat body built from the curve: sup-cap weight tracks the curve's
        # dyadic weight up to a k-uniform factor
        curve = ExpFlatCurve(1.0)
        body = flat_spot_body(curve)
        ratios = []
        for k in range(15, 22):
            omega = 1.0 / sup_cap_function(body, 2.0 ** -k, n_directions=90)
            ratios.append(curve.dyadic_weight(k) / omega)
        assert max(ratios) / min(ratios) < 1.5
        assert 1.0 < np.mean(ratios) < 4.0
