import math

import numpy as np
import pytest

from caplab.body import circle, flat_spot_body
from caplab.curve import ExpFlatCurve, PowerCurve
from caplab.errors import DomainError, RangeError, ResolutionError, ScaleError
from caplab.grid import (
    Field2D,
    band_weights,
    band_project,
    constant_field,
    dilated_average,
    along_curve_max,
    hyperbolic_growth,
    hyperbolic_max,
    k_top,
    lacunary_max,
    load_field,
    opnorm_lower,
    projector,
    random_bandlimited,
    save_field,
    square_function,
    strip_field,
    strip_masks_disjoint,
    strip_spec,
    strip_test,
    splat_kernel,
)
from caplab.oscint import LocalCurve


class TestField:
    def test_power_of_two_required(self):
        with pytest.raises(DomainError):
            Field2D(np.zeros((100, 100)))

    def test_parseval(self):
        f = random_bandlimited(128, 30, seed=0)
        spec = np.fft.fft2(f.values)
        freq_norm = math.sqrt(float((np.abs(spec) ** 2).mean())) / 128
        assert f.norm(2.0) == pytest.approx(freq_norm, rel=1e-10)

    def test_seeded_determinism(self):
        a = random_bandlimited(64, 10, seed=7)
        b = random_bandlimited(64, 10, seed=7)
        assert np.array_equal(a.values, b.values)

    def test_io_round_trip(self, tmp_path):
        f = random_bandlimited(64, 10, seed=1)
        path = tmp_path / "f.capf"
        save_field(f, path)
        g = load_field(path)
        assert np.array_equal(f.values, g.values)
        assert path.stat().st_size == 16 + 64 * 64 * 8

    def test_io_magic_check(self, tmp_path):
        path = tmp_path / "bad.capf"
        path.write_bytes(b"NOPE" + b"\x00" * 700)
        with pytest.raises(DomainError):
            load_field(path)


class TestProjectors:
    def test_telescoping_partition_of_unity(self):
        n = 128
        total = sum(projector(n, k).multiplier for k in range(k_top(n) + 1))
        assert np.abs(total - 1.0).max() <= 1e-10

    def test_reconstruction(self):
        f = random_bandlimited(128, 40, seed=2)
        total = np.zeros_like(f.values)
        for k in range(k_top(128) + 1):
            total += band_project(f, k).values
        assert np.abs(total - f.values).max() <= 1e-10

    def test_disjoint_bands_annihilate(self):
        n = 128
        for k, j in ((2, 4), (3, 7), (0, 2)):
            prod = projector(n, k).multiplier * projector(n, j).multiplier
            assert np.abs(prod).max() == 0.0

    def test_spike_energy_bookkeeping(self):
        # per-band energies of a delta spike sum to the total energy
        n = 64
        vals = np.zeros((n, n))
        vals[5, 9] = 1.0
        f = Field2D(vals)
        energies = []
        for k in range(k_top(n) + 1):
            p = band_project(f, k)
            spec = np.fft.fft2(f.values) * projector(n, k).multiplier
            energies.append(float((np.abs(spec) ** 2).mean()) / n ** 2)
        # bands overlap pairwise, so compare the reconstruction energy instead
        recon = sum(band_project(f, k).values for k in range(k_top(n) + 1))
        assert float((recon ** 2).mean()) == pytest.approx(
            f.norm(2.0) ** 2, rel=1e-10
        )

    def test_band_beyond_nyquist(self):
        with pytest.raises(RangeError):
            projector(64, k_top(64) + 1)
        with pytest.raises(RangeError):
            projector(64, -1)


class TestDilatedAverage:
    def test_mass_preservation(self):
        body = circle(0.2)
        out = dilated_average(constant_field(128), body, 0)
        assert out.values.mean() == pytest.approx(body.arclength(), rel=1e-12)
        assert out.values.std() <= 1e-10

    def test_positivity(self):
        body = circle(0.2)
        f = Field2D(np.abs(random_bandlimited(128, 20, seed=3).values))
        out = dilated_average(f, body, 0)
        assert out.values.min() >= -1e-10

    def test_wraparound_guard(self):
        with pytest.raises(ScaleError):
            dilated_average(constant_field(128), circle(0.2), 2)

    def test_quadrature_refinement(self):
        # doubling node density changes smooth-field output below 1e-6; the
        # residual is the node-position jitter of the bilinear rasterization,
        # which scales like h^2 |grad^2 f| and needs a genuinely smooth field
        from caplab.grid import _convolve

        import caplab.grid as g

        body = circle(0.2)
        n = 256
        f = random_bandlimited(n, 3, seed=5)
        base = dilated_average(f, body, 0).values
        pts, wts = g._body_nodes(body, (1.0 / n) / 8.0)
        fine = _convolve(f, splat_kernel(n, pts, wts)).values
        assert np.abs(base - fine).max() < 1e-6

    def test_splat_total_mass(self):
        pts = np.random.default_rng(0).uniform(0, 1, size=(100, 2))
        w = np.random.default_rng(1).uniform(0, 1, size=100)
        kern = splat_kernel(64, pts, w)
        assert kern.sum() == pytest.approx(w.sum(), rel=1e-12)
        assert kern.min() >= 0.0


class TestLacunaryMax:
    def test_constant_field(self):
        body = circle(0.1)
        out = lacunary_max(constant_field(128), body, -3, 1)
        assert np.abs(out.values - body.arclength()).max() <= 1e-10

    def test_sublinearity(self):
        body = circle(0.1)
        f = random_bandlimited(128, 20, seed=1)
        g = random_bandlimited(128, 20, seed=2)
        mf = lacunary_max(f, body, -3, 1).values
        mg = lacunary_max(g, body, -3, 1).values
        mfg = lacunary_max(Field2D(f.values + g.values), body, -3, 1).values
        assert np.all(mfg <= mf + mg + 1e-12)

    def test_dominates_single_scale(self):
        body = circle(0.1)
        f = random_bandlimited(128, 20, seed=4)
        mf = lacunary_max(f, body, -3, 1).values
        single = np.abs(dilated_average(f, body, 0).values)
        assert np.all(mf >= single - 1e-12)

    def test_origin_requirement(self):
        shifted = circle(0.1, center=(0.7, 0.0))
        with pytest.raises(DomainError):
            lacunary_max(constant_field(64), shifted, -2, 0)

    def test_empty_range(self):
        with pytest.raises(DomainError):
            lacunary_max(constant_field(64), circle(0.1), 2, 1)


class TestStrip:
    def test_norm_normalization(self):
        f = strip_field(256, 16 / 256, 2.0)
        assert f.norm(2.0) == pytest.approx(1.0, abs=0.05)

    def test_masks_disjoint(self):
        spec = strip_spec(PowerCurve(4), eta_cells=32, n=1024)
        assert strip_masks_disjoint(spec, 1024)

    def test_bound_fractions_small_grid(self):
        spec = strip_spec(PowerCurve(4), eta_cells=16, n=256)
        report = strip_test(PowerCurve(4), spec=spec, n=256)
        assert min(report.fractions) >= 0.95
        assert all(b > 0 for b in report.bounds)
        assert all(
            b >= a for a, b in zip(report.partial_sums, report.partial_sums[1:])
        )

    def test_resolution_error(self):
        with pytest.raises(ResolutionError):
            strip_spec(PowerCurve(4), eta_cells=4, n=256)

    def test_infeasible_geometry_raises(self):
        # very flat curves cannot fit the k0 band structure on a desk grid
        with pytest.raises(ScaleError):
            strip_spec(ExpFlatCurve(1.0), eta_cells=32, n=1024)


class TestSquareFunction:
    def test_zero_input_flag(self):
        sf, res = square_function(constant_field(64, 0.0), PowerCurve(4, 0.45))
        assert res.zero_input
        assert math.isnan(res.ratio)
        assert np.all(sf.values == 0.0)

    def test_ratio_positive(self):
        f = random_bandlimited(128, 20, seed=6)
        _, res = square_function(f, PowerCurve(4, 0.45), p=2.0)
        assert res.ratio > 0

    def test_weight_sources_comparable(self):
        curve = ExpFlatCurve(1.0)
        body = flat_spot_body(curve)
        f = random_bandlimited(128, 20, seed=8)
        _, via_w = square_function(f, curve, p=2.0)
        _, via_omega = square_function(f, body, p=2.0)
        quotient = via_omega.ratio / via_w.ratio
        assert 0.25 < quotient < 4.0

    def test_explicit_weights_respected(self):
        f = random_bandlimited(64, 10, seed=9)
        ks = (1, 2, 3)
        _, res1 = square_function(f, PowerCurve(4, 0.45), ks=ks, weights=[1.0] * 3)
        _, res2 = square_function(f, PowerCurve(4, 0.45), ks=ks, weights=[2.0] * 3)
        assert res2.ratio == pytest.approx(2 * res1.ratio, rel=1e-12)

    def test_band_weights_sources(self):
        ks = range(3, 7)
        w_curve = band_weights(PowerCurve(4, 0.45), ks)
        w_body = band_weights(circle(0.2), ks, n_directions=60)
        assert all(w > 0 for w in w_curve + w_body)


class TestAlongCurveMax:
    def test_constant(self):
        out = along_curve_max(constant_field(128), PowerCurve(4, 0.45))
        assert np.abs(out.values - 1.0).max() <= 1e-9

    def test_dominates_each_scale(self):
        from caplab.grid import _convolve, _interval_nodes

        curve = PowerCurve(4, 0.45)
        n = 128
        f = random_bandlimited(n, 16, seed=10)
        out = along_curve_max(f, curve).values
        g = Field2D(np.abs(f.values))
        for j in (0, 2):
            r = curve.domain_end * 2.0 ** (-j)
            pts, wts = _interval_nodes(curve, r, 1.0 / (4 * n))
            single = _convolve(g, splat_kernel(n, pts, wts / r)).values
            assert np.all(out >= single - 1e-10)

    def test_ensemble_ratio_bounded(self):
        curve = PowerCurve(4, 0.45)
        ratios = []
        for seed in range(6):
            f = random_bandlimited(128, 16, seed=seed)
            out = along_curve_max(f, curve)
            ratios.append(out.norm(2.0) / f.norm(2.0))
        assert max(ratios) < 5.0


class TestHyperbolic:
    def test_n0_contraction(self):
        # |multiplier| <= 1, so by Parseval the N=0 operator contracts L^2
        f = random_bandlimited(128, 30, seed=11)
        out = hyperbolic_max(f, 0)
        assert out.norm(2.0) <= f.norm(2.0) * (1 + 1e-12)

    def test_growth_monotone(self):
        rep = hyperbolic_growth(128, 6, seed=0, n_random=3)
        assert np.all(np.diff(rep.estimates) >= -1e-12)
        assert math.isfinite(rep.power_exponent)
        assert rep.sqrt_residual >= 0 and rep.log_residual >= 0

    def test_n_validation(self):
        with pytest.raises(DomainError):
            hyperbolic_max(constant_field(64), -1)


class TestOpNorm:
    def test_circle_lower_bound_vs_functional(self):
        from caplab.criterion import lq_functional

        body = circle(0.2)
        est = opnorm_lower(body, 2.0, n=128, seed=0, n_random=4)
        func = lq_functional(body, 2.0)
        c = est.value / func
        assert c > 0.5  # recorded constant, stable under refinement below
        est2 = opnorm_lower(body, 2.0, n=256, seed=0, n_random=4)
        assert est2.value / func == pytest.approx(c, rel=0.25)
