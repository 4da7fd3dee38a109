"""Estimator behavior: calibration controls, frames, merging, smoothing."""

import math

import numpy as np
import pytest

from rmtlab import ensembles as E
from rmtlab import estimators as S
from rmtlab.sumrules import bulk_rho2T

F2 = E.FieldClass(2)


def point_cloud(points, N=4):
    spec = E.EnsembleSpec(E.GINIBRE, F2, N=N)
    return E.EigenvalueCloud(
        points=np.asarray(points, dtype=complex), field=F2, n_real=0, spec=spec, seed=0
    )


class TestRadialDensity:
    def test_single_deterministic_point(self):
        clouds = [point_cloud([1.0 + 0j]) for _ in range(5)]
        est = S.radial_density(clouds, [0.5, 1.5])
        area = math.pi * (1.5**2 - 0.5**2)
        assert est.density[0] == pytest.approx(1.0 / area)
        assert est.n_points == 5

    def test_circle_law_band(self):
        spec = E.EnsembleSpec(E.GINIBRE, F2, N=128)
        clouds = E.sample_clouds(spec, 120, 7, workers=1)
        edges = np.sqrt(np.linspace((0.2 * math.sqrt(128)) ** 2, (0.8 * math.sqrt(128)) ** 2, 7))
        est = S.radial_density(clouds, edges)
        assert np.abs(est.density * math.pi - 1).max() < 0.04

    def test_unit_frame_mass(self):
        spec = E.EnsembleSpec(E.GINIBRE, F2, N=64)
        clouds = E.sample_clouds(spec, 40, 8, workers=1)
        edges = np.linspace(0, 1.05, 22)
        est = S.radial_density(clouds, edges, frame=S.UNIT)
        mass = float(np.sum(est.density * math.pi * np.diff(edges**2)))
        assert mass == pytest.approx(64.0, rel=0.02)

    def test_edge_shifted_frame(self):
        spec = E.EnsembleSpec(E.GINIBRE, F2, N=64)
        clouds = E.sample_clouds(spec, 10, 9, workers=1)
        est = S.radial_density(clouds, np.linspace(-2, 2, 9), frame=S.EDGE_SHIFTED)
        assert est.shift == pytest.approx(8.0)
        # bulk side populated, vacuum side nearly empty
        assert est.density[0] > 5 * est.density[-1]

    def test_mixed_specs_rejected(self):
        a = point_cloud([1.0], N=4)
        b = point_cloud([1.0], N=5)
        with pytest.raises(S.EstimatorInputError):
            S.radial_density([a, b], [0, 1, 2])

    def test_poisson_control_uniform(self):
        clouds = S.make_poisson_clouds(N=128, n_samples=150, seed=11)
        edges = np.sqrt(np.linspace(1.0, 0.9 * 128, 9))
        est = S.radial_density(clouds, edges)
        dev = np.abs(est.density - 1 / math.pi)
        assert np.all(dev <= 3.5 * est.stderr + 1e-12)


class TestPairCorrelation:
    def test_poisson_control_is_uncorrelated(self):
        clouds = S.make_poisson_clouds(N=128, n_samples=200, seed=21)
        edges = np.linspace(0.0, 6.0, 25)
        est = S.pair_correlation_isotropic(clouds, edges, rho_b=1 / math.pi)
        assert np.all(np.abs(est.rho2T) <= 3.0 * est.stderr + 1e-12)

    def test_ginibre_matches_bulk_kernel(self):
        spec = E.EnsembleSpec(E.GINIBRE, F2, N=128)
        clouds = E.sample_clouds(spec, 300, 22, workers=1)
        edges = np.linspace(0.0, 3.0, 13)
        est = S.pair_correlation_isotropic(clouds, edges, rho_b=1 / math.pi)
        centers = est.centers
        model = bulk_rho2T(centers, 1 / math.pi)
        assert np.all(np.abs(est.rho2T - model) <= 3.0 * est.stderr)

    def test_low_power_flag(self):
        clouds = S.make_poisson_clouds(N=8, n_samples=3, seed=23)
        est = S.pair_correlation_isotropic(clouds, np.linspace(0, 2, 5))
        assert est.low_power

    def test_window_fraction_guard(self):
        clouds = S.make_poisson_clouds(N=8, n_samples=2, seed=24)
        with pytest.raises(S.EstimatorInputError):
            S.pair_correlation_isotropic(clouds, [0, 1], window_radius_fraction=0.9)


class TestMoments:
    @staticmethod
    def tabulated_estimate(nbins=4000, r_max=8.0):
        edges = np.linspace(0.0, r_max, nbins + 1)
        centers = 0.5 * (edges[:-1] + edges[1:])
        return S.PairCorrelationEstimate(
            r_edges=edges,
            rho2T=bulk_rho2T(centers, 1 / math.pi),
            rho_b=1 / math.pi,
            window="analytic tabulation",
            n_samples=1,
            stderr=np.zeros(nbins),
        )

    def test_bulk_kernel_moments(self):
        est = self.tabulated_estimate()
        out = S.moments_of_rho2T(est)
        want = [-1.0, -1 / math.pi, -2 / math.pi**2, -6 / math.pi**3]
        for rec, target in zip(out, want):
            assert rec["value"] == pytest.approx(target, abs=1e-4)
            assert rec["stderr"] is None

    def test_poisson_zeroth_moment(self):
        clouds = S.make_poisson_clouds(N=128, n_samples=300, seed=31)
        edges = np.linspace(0.0, 6.0, 25)
        est = S.pair_correlation_isotropic(clouds, edges, rho_b=1 / math.pi)
        rec = S.moments_of_rho2T(est, powers=(0,))[0]
        assert abs(rec["value"]) <= 3.0 * rec["stderr"]

    def test_ginibre_zeroth_moment_screens(self):
        spec = E.EnsembleSpec(E.GINIBRE, F2, N=128)
        clouds = E.sample_clouds(spec, 300, 32, workers=1)
        edges = np.linspace(0.0, 5.0, 26)
        est = S.pair_correlation_isotropic(clouds, edges, rho_b=1 / math.pi)
        rec = S.moments_of_rho2T(est, powers=(0,))[0]
        assert rec["value"] == pytest.approx(-1.0, abs=3.0 * rec["stderr"])

    def test_jackknife_shrinks_like_sqrt_n(self):
        edges = np.linspace(0.0, 6.0, 25)
        ses = []
        for n in (60, 600):
            clouds = S.make_poisson_clouds(N=64, n_samples=n, seed=33)
            est = S.pair_correlation_isotropic(clouds, edges, rho_b=1 / math.pi)
            ses.append(S.moments_of_rho2T(est, powers=(0,))[0]["stderr"])
        slope = math.log(ses[1] / ses[0]) / math.log(600 / 60)
        assert -0.6 <= slope <= -0.4


class TestSmoothing:
    def test_constant_histogram(self):
        est = S.RadialDensityEstimate(
            bin_edges=np.linspace(0, 1, 11), density=np.full(10, 2.0),
            stderr=np.zeros(10), n_samples=1, n_points=0, frame=S.RAW,
        )
        curve = S.smooth(est, bandwidth=0.12)
        inner = (curve.x > 0.3) & (curve.x < 0.7)
        assert np.abs(curve.y[inner] - 2.0).max() < 1e-6

    def test_delta_bin_mass(self):
        density = np.zeros(40)
        density[20] = 7.0
        est = S.RadialDensityEstimate(
            bin_edges=np.linspace(0, 4, 41), density=density,
            stderr=np.zeros(40), n_samples=1, n_points=0, frame=S.RAW,
        )
        curve = S.smooth(est, bandwidth=0.15)
        mass_in = 7.0 * 0.1
        mass_out = np.trapezoid(curve.y, curve.x)
        assert mass_out == pytest.approx(mass_in, rel=5e-3)
        assert curve.x[np.argmax(curve.y)] == pytest.approx(2.05, abs=0.06)

    def test_integral_preserved(self):
        rng = np.random.default_rng(5)
        density = rng.random(30)
        est = S.RadialDensityEstimate(
            bin_edges=np.linspace(0, 3, 31), density=density,
            stderr=np.zeros(30), n_samples=1, n_points=0, frame=S.RAW,
        )
        curve = S.smooth(est, bandwidth=0.2)
        assert np.trapezoid(curve.y, curve.x) == pytest.approx(
            float(np.sum(density * 0.1)), rel=5e-3
        )


class TestShapeMatch:
    def test_identity(self):
        x = np.linspace(0.2, 2.0, 40)
        curve = S.SmoothedCurve(x=x, y=np.exp(-x), bandwidth=0.1)
        out = S.shape_match(curve, lambda t: np.exp(-t))
        assert out["scale"] == pytest.approx(1.0, rel=1e-12)
        assert out["max_rel_dev"] == pytest.approx(0.0, abs=1e-12)

    def test_doubled_amplitude(self):
        x = np.linspace(0.2, 2.0, 40)
        curve = S.SmoothedCurve(x=x, y=2.0 * np.exp(-x), bandwidth=0.1)
        out = S.shape_match(curve, lambda t: np.exp(-t))
        assert out["scale"] == pytest.approx(2.0, rel=1e-12)

    def test_degenerate_model(self):
        x = np.linspace(0, 1, 5)
        curve = S.SmoothedCurve(x=x, y=np.ones(5), bandwidth=0.1)
        with pytest.raises(S.EstimatorInputError):
            S.shape_match(curve, lambda t: np.zeros_like(t))


class TestMergeInvariance:
    def test_order_independent_density(self):
        spec = E.EnsembleSpec(E.GINIBRE, F2, N=16)
        clouds = E.sample_clouds(spec, 12, 41, workers=1)
        edges = np.linspace(0, 5, 11)
        fwd = S.radial_density(clouds, edges)
        rev = S.radial_density(list(reversed(clouds)), edges)
        assert np.array_equal(fwd.density, rev.density)
        assert np.array_equal(fwd.stderr, rev.stderr)

    def test_order_independent_paircorr_values(self):
        clouds = S.make_poisson_clouds(N=32, n_samples=20, seed=42)
        edges = np.linspace(0, 4, 9)
        fwd = S.pair_correlation_isotropic(clouds, edges, rho_b=1 / math.pi)
        rev = S.pair_correlation_isotropic(list(reversed(clouds)), edges, rho_b=1 / math.pi)
        assert np.array_equal(fwd.rho2T, rev.rho2T)
