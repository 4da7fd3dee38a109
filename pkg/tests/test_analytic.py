"""Closed-form kernel and density-model tests against independent oracles."""

import math

import mpmath as mp
import numpy as np
import pytest
from scipy import integrate

from rmtlab import analytic as A
from rmtlab import ensembles as E

mp.mp.dps = 40


def erf_maclaurin(z, terms=200):
    """Series oracle: 200-term Maclaurin sum at 40-digit precision."""
    z = mp.mpc(z)
    s = mp.mpc(0)
    for k in range(terms):
        s += (-1) ** k * z ** (2 * k + 1) / (mp.factorial(k) * (2 * k + 1))
    return complex(2 / mp.sqrt(mp.pi) * s)


class TestErfComplex:
    def test_zero(self):
        assert A.erf_complex(0.0) == 0.0

    def test_schwarz_reflection(self):
        z = 1 + 2j
        assert A.erf_complex(np.conj(z)) == pytest.approx(np.conj(A.erf_complex(z)), rel=1e-14)

    def test_against_series_oracle(self):
        # Frozen oracle value for the headline point, then a live sweep.
        assert A.erf_complex(1 + 1j) == pytest.approx(
            1.3161512816979476 + 0.19045346923783469j, rel=1e-13
        )
        for z in (1 + 1j, 2 + 2j, 3 - 1j, 0.5 + 2.5j, -1.7 + 0.3j):
            want = erf_maclaurin(z)
            got = complex(A.erf_complex(z))
            assert abs(got - want) <= 1e-12 * abs(want)

    def test_domain_limit(self):
        with pytest.raises(A.DomainError):
            A.erf_complex(31.0)


class TestEdgeProfile:
    def test_h_zero(self):
        assert A.edge_profile_H(0.0).real == pytest.approx(1 / (2 * math.pi), abs=1e-15)

    def test_h_limits(self):
        assert A.edge_profile_H(8.0).real == pytest.approx(1 / math.pi, abs=1e-15)
        assert A.edge_profile_H(-8.0).real == pytest.approx(0.0, abs=1e-15)

    def test_dipole_integral_oracle(self):
        # Independent quadrature oracle for the first-moment rule.
        val, err = integrate.quad(
            lambda r: r * (A.edge_profile_H(r).real - (1 / math.pi if r > 0 else 0.0)),
            -9, 9, limit=200,
        )
        assert err < 1e-10
        assert val == pytest.approx(-1 / (8 * math.pi), abs=1e-10)


class TestEdgeRho2:
    def test_swap_symmetry(self):
        a = A.edge_rho2(0.3, 0.1, -1.2, 0.7)
        b = A.edge_rho2(-1.2, 0.1, 0.3, 0.7)
        assert a == pytest.approx(b, rel=1e-14)

    def test_coincident_truncated_tends_to_bulk(self):
        # rho2T at coincident points is -H(y)^2, reaching -1/pi^2 in the bulk.
        val = A.edge_rho2T(0.4, 3.0, 0.4, 3.0)
        assert val == pytest.approx(-A.edge_profile_H(3.0).real ** 2, rel=1e-13)
        assert A.edge_rho2T(0.0, 8.0, 0.0, 8.0) == pytest.approx(-1 / math.pi**2, rel=1e-10)

    def test_truncated_nonpositive_on_grid(self):
        ys = np.linspace(-2, 3, 11)
        dxs = np.linspace(0, 6, 13)
        for y in ys:
            vals = A.edge_rho2T(0.0, y, dxs, y)
            assert np.all(vals <= 1e-15)


class TestRqKernels:
    def test_f_antisymmetry(self):
        assert A.rq_f(0.7 + 0.2j, 0.7 + 0.2j) == pytest.approx(0.0, abs=1e-15)
        a = A.rq_f(0.3 + 1j, -0.2 + 0.5j)
        b = A.rq_f(-0.2 + 0.5j, 0.3 + 1j)
        assert a == pytest.approx(-b, rel=1e-14)

    def test_f_oracle_value(self):
        # (i/sqrt(2 pi)) e^{1/2} erf(1/sqrt2), from the series oracle.
        assert complex(A.rq_f(0.0, 1.0)) == pytest.approx(0.44903534295908922j, rel=1e-13)

    def test_rho1_matches_unsimplified_form(self):
        for x, y in ((0.0, 1.0), (5.0, 1.0), (2.0, 0.3)):
            z = x + 1j * y
            literal = (2 * y * np.exp(-(x**2 + y**2)) * A.rq_f(z, np.conj(z))).real
            assert A.rq_rho1(x, y) == pytest.approx(literal, rel=1e-12)

    def test_rho1_x_independence_and_axis(self):
        assert A.rq_rho1(0.0, 1.0) == pytest.approx(A.rq_rho1(5.0, 1.0), rel=1e-12)
        assert A.rq_rho1(3.0, 0.0) == 0.0

    def test_rho1_bulk_limit(self):
        # The bulk value is approached algebraically: (1/pi)(1 + 1/(4y^2) + ...).
        assert A.rq_rho1(0.0, 6.0) == pytest.approx(
            (1 + 1 / 144) / math.pi, abs=2e-4
        )
        assert A.rq_rho1(0.0, 400.0) == pytest.approx(1 / math.pi, abs=1e-6)

    def test_rho2T_matches_unsimplified_form(self):
        z1, z2 = 0.3 + 0.7j, -0.4 + 1.1j
        literal = (
            -4 * z1.imag * z2.imag * np.exp(-abs(z1) ** 2 - abs(z2) ** 2)
            * (A.rq_f(z1, np.conj(z2)) * A.rq_f(z2, np.conj(z1))
               + A.rq_f(z1, z2) * A.rq_f(np.conj(z1), np.conj(z2)))
        )
        assert abs(literal.imag) <= 1e-12
        assert A.rq_rho2T(z1, z2) == pytest.approx(literal.real, rel=1e-12)

    def test_rho2T_axis_zero_and_even(self):
        assert A.rq_rho2T(0.5 + 0j, 1.0 + 1j) == 0.0
        z1, z2 = 1j * 0.8, 0.4 + 0.6j
        assert A.rq_rho2T(z1, np.conj(z2)) == pytest.approx(A.rq_rho2T(z1, z2), rel=1e-13)

    def test_rho2T_symmetry_and_translation(self):
        z1, z2 = 0.2 + 0.5j, -0.7 + 1.3j
        assert A.rq_rho2T(z1, z2) == pytest.approx(A.rq_rho2T(z2, z1), rel=1e-12)
        for t in (0.7, -2.3):
            assert A.rq_rho2T(z1 + t, z2 + t) == pytest.approx(
                A.rq_rho2T(z1, z2), rel=1e-10
            )

    def test_rho2T_gaussian_decay(self):
        assert abs(A.rq_rho2T(1j, 6.0 + 1j)) <= 1e-9
        assert abs(A.rq_rho2T(1j, 7.0 + 1j)) <= 1e-12


class TestProductWeight:
    def test_ginibre_m1_is_plain_gaussian(self):
        x = np.linspace(0, 5, 11)
        assert np.array_equal(A.product_weight_asymptotic(x, "ginibre", 1, 0), np.exp(-x))

    def test_spherical_m1(self):
        assert A.product_weight_asymptotic(2.0, "spherical", 1, 7) == pytest.approx(3.0**-7)

    def test_truncated_support_edge(self):
        assert A.product_weight_asymptotic(1.0, "truncated", 1, 5) == 0.0
        assert A.product_weight_asymptotic(1.2, "truncated", 1, 5) == 0.0


def quad_mass(model: A.DensityModel, r_hi: float) -> float:
    """Numeric oracle: integrate the pointwise density over radii."""
    val, err = integrate.quad(
        lambda r: model.solid * 2 * math.pi * r * float(model.evaluate(r + 0j)),
        0.0, r_hi, limit=400,
    )
    assert err < 1e-7
    return val


class TestDensityModels:
    @pytest.mark.parametrize(
        "model,r_hi,mass",
        [
            (A.DensityModel(A.UNIFORM_DISK, {"radius": 4.0, "density": 1 / math.pi}), 4.0, 16.0),
            (A.DensityModel(A.ANNULUS, {"r_inner": 2.0, "r_outer": 3.0, "density": 1 / math.pi}), 3.0, 5.0),
            (A.DensityModel(A.SPHERE_PROJECTED, {"prefactor": 24.0, "r_star": 1.0}), 400.0, 24.0 * (0.5 - 1.0 / 160001.0)),
            (A.DensityModel(A.PSEUDOSPHERE, {"prefactor": 16.0, "r_outer": 1 / math.sqrt(2)}), 1 / math.sqrt(2), 16.0),
            (A.DensityModel(A.PRODUCT_GINIBRE, {"m": 2.0, "mass": 1.0}), 1.0, 1.0),
            (A.DensityModel(A.PRODUCT_SPHERICAL, {"m": 3.0, "mass": 8.0}), 2000.0, 8.0 * (2000 ** (2 / 3)) / (1 + 2000 ** (2 / 3))),
            (A.DensityModel(A.CSE_TRUNC_EXACT, {"N": 6.0}), 1.0, 6.0),
        ],
    )
    def test_mass_against_quadrature_oracle(self, model, r_hi, mass):
        assert quad_mass(model, r_hi) == pytest.approx(mass, abs=2e-6)
        assert float(model.radial_cumulative(r_hi)) == pytest.approx(mass, rel=1e-9)

    def test_declared_total_mass(self):
        spec = E.EnsembleSpec(E.TRUNCATED_UNITARY, E.FieldClass(2), N=64, n=64)
        model = A.model_for_spec(spec)
        assert model.kind == A.PSEUDOSPHERE
        assert model.params["r_outer"] ** 2 == pytest.approx(0.5)
        assert model.mass == pytest.approx(64.0, rel=1e-9)

    def test_product_m1_reduces_to_circle_law(self):
        model = A.DensityModel(A.PRODUCT_GINIBRE, {"m": 1.0, "mass": 1.0})
        w = np.array([0.2 + 0j, 0.9 + 0j, 1.1 + 0j])
        out = A.predicted_density(model, w)
        assert out[0] == pytest.approx(1 / math.pi)
        assert out[1] == pytest.approx(1 / math.pi)
        assert out[2] == 0.0

    def test_annulus_mass_is_N(self):
        n, N = 128, 64
        model = A.DensityModel(
            A.ANNULUS,
            {"r_inner": math.sqrt(n - N), "r_outer": math.sqrt(n), "density": 1 / math.pi},
        )
        assert model.mass == pytest.approx(N)

    def test_ellipse_density_and_mass(self):
        model = A.DensityModel(A.ELLIPSE, {"semi_major": 3.0, "semi_minor": 1.0, "mass": 6.0})
        assert float(model.evaluate(0.0 + 0j)) == pytest.approx(6.0 / (3 * math.pi))
        assert float(model.evaluate(2.9 + 0.9j)) == 0.0
        assert model.mass == 6.0

    def test_rectangular_truncation_model_matches_exact_sum(self):
        # Oracle: the exact finite-size radial density of the induced
        # truncation, evaluated by stable log-sum, against the annular
        # pseudosphere law and its support radii.
        from scipy.special import betaln, logsumexp

        M, n, N = 400, 200, 100
        spec = E.EnsembleSpec(
            E.INDUCED, E.FieldClass(2), N=N, n=n, M=M, base_family=E.TRUNCATED_UNITARY
        )
        model = A.model_for_spec(spec)
        assert model.params["r_inner"] ** 2 == pytest.approx((n - N) / (M - N))
        assert model.params["r_outer"] ** 2 == pytest.approx(n / M)
        assert model.mass == pytest.approx(N, rel=1e-9)
        k = np.arange(N)
        log_inv_h = -betaln(k + n - N + 1, M - n)
        # Deep-interior points; the finite-M edge layers reach to s ~ 0.38/0.46.
        for s in (0.40, 0.42, 0.44):
            logw = (n - N) * math.log(s) + (M - n - 1) * math.log1p(-s)
            exact = math.exp(logsumexp(logw + k * math.log(s) + log_inv_h)) / math.pi
            assert float(model.evaluate(math.sqrt(s) + 0j)) == pytest.approx(exact, rel=0.02)


class TestCseTruncation:
    def test_matches_normalized_single_point_law(self):
        # For one retained eigenvalue the joint PDF is itself the density:
        # (2/pi)(1 - |z|^2).
        for r in (0.0, 0.3, 0.8):
            assert A.cse_trunc_rho1(r, 1) == pytest.approx(
                2 / math.pi * (1 - r**2), rel=1e-12
            )

    def test_two_point_marginal_oracle(self):
        # Independent oracle at N=2: integrate the joint PDF numerically.
        # p(z1, z2) ~ (1-|z1|^2)(1-|z2|^2) |z1-z2|^2 |1-z1 conj(z2)|^2.
        def joint(z1, z2):
            return (
                (1 - abs(z1) ** 2) * (1 - abs(z2) ** 2)
                * abs(z1 - z2) ** 2 * abs(1 - z1 * np.conj(z2)) ** 2
            )

        gl_r, gl_wr = np.polynomial.legendre.leggauss(60)
        r = 0.5 * (gl_r + 1.0)
        wr = 0.5 * gl_wr
        th = (np.arange(120) + 0.5) * (2 * math.pi / 120)
        wth = 2 * math.pi / 120
        zg = (r[:, None] * np.exp(1j * th[None, :])).ravel()
        wg = ((r[:, None] * wr[:, None]) * np.ones_like(th)[None, :]).ravel() * wth

        def marginal(z1):
            return float(np.sum(joint(z1, zg) * wg))

        norm = float(np.sum([marginal(z) * w for z, w in zip(zg, wg)]))
        for radius in (0.0, 0.4, 0.75):
            want = 2.0 * marginal(radius + 0j) / norm
            assert A.cse_trunc_rho1(radius, 2) == pytest.approx(want, rel=1e-6)

    def test_center_value_and_limit(self):
        for N in (1, 5, 20, 200):
            assert A.cse_trunc_rho1(0.0, N) == pytest.approx(
                (2 * N / (2 * N - 1)) / math.pi, rel=1e-12
            )
        # Large-N interior limit 1/(pi (1-s)^2), approached at O(1/N).
        limit = 1 / (math.pi * (1 - 0.25) ** 2)
        dev_coarse = abs(A.cse_trunc_rho1(0.5, 400) - limit) / limit
        dev_fine = abs(A.cse_trunc_rho1(0.5, 4000) - limit) / limit
        assert dev_fine < 3e-4
        assert dev_coarse / dev_fine == pytest.approx(10.0, rel=0.2)

    def test_boundary_vanishes(self):
        assert A.cse_trunc_rho1(1 - 1e-9, 12) == pytest.approx(0.0, abs=1e-5)
        with pytest.raises(A.DomainError):
            A.cse_trunc_rho1(1.0, 12)

    def test_mass_is_N(self):
        for N in (1, 4, 20):
            val, err = integrate.quad(
                lambda r: 2 * math.pi * r * A.cse_trunc_rho1(r, N), 0, 1, limit=200
            )
            assert val == pytest.approx(N, abs=1e-8)
            assert A.cse_trunc_mass(1.0, N) == pytest.approx(N, rel=1e-12)


class TestCseLimit:
    def test_one_point_center(self):
        assert A.cse_limit_rhok([0.0]) == pytest.approx(1 / math.pi)

    def test_coincidence_vanishes(self):
        near = A.cse_limit_rhok([0.3 + 0.1j, 0.3 + 0.1j + 1e-9])
        assert abs(near) < 1e-12

    def test_mobius_invariance(self):
        a = 0.3
        phi = lambda z: (z - a) / (1 - np.conj(a) * z)
        dphi = lambda z: (1 - abs(a) ** 2) / (1 - np.conj(a) * z) ** 2
        pts = [0.2 + 0.1j, -0.4 + 0.35j]
        lhs = A.cse_limit_rhok(pts)
        rhs = A.cse_limit_rhok([phi(p) for p in pts]) * np.prod(
            [abs(dphi(p)) ** 2 for p in pts]
        )
        assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_domain(self):
        with pytest.raises(A.DomainError):
            A.cse_limit_rhok([1.2])
