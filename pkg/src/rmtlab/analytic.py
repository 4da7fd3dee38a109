"""Closed-form densities, correlation kernels, and the special functions behind them.

Everything here is a pure function; coordinates are in the sampling
frames documented in :mod:`rmtlab.ensembles` (Ginibre droplet radius
sqrt(N) at beta=2, sqrt(2N) for the beta=4 complex representation).
Density models carry their support and integrate to their declared
mass; that normalization is what fixes the prefactors of the
pseudosphere and product laws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import special

from . import ensembles
from .ensembles import EnsembleSpec

ERF_DOMAIN_RADIUS = 30.0


class DomainError(ValueError):
    """Argument outside a function's validated domain."""


def erf_complex(z):
    """Error function of complex argument, validated for |z| <= 30.

    Relative accuracy is at the 1e-13 level on the validated domain
    (Faddeeva-based evaluation).  Values grow like exp(|Im z|^2), which
    stays in double range on the domain.
    """
    z = np.asarray(z, dtype=np.complex128)
    if np.any(np.abs(z) > ERF_DOMAIN_RADIUS):
        raise DomainError(f"|z| exceeds validated domain radius {ERF_DOMAIN_RADIUS}")
    out = special.erf(z)
    return out if out.ndim else out[()]


def bulk_rho2T(r, rho: float):
    """Bulk truncated two-point function: -rho^2 exp(-pi rho r^2)."""
    r = np.asarray(r, dtype=np.float64)
    if rho <= 0:
        raise ValueError("rho must be positive")
    out = -(rho**2) * np.exp(-math.pi * rho * r**2)
    return out if out.ndim else float(out)


def edge_profile_H(y):
    """Edge density profile H(y) = (1 + erf(sqrt2 y)) / (2 pi); bulk at y -> +inf."""
    return (1.0 + erf_complex(np.asarray(y, dtype=np.complex128) * math.sqrt(2.0))) / (2.0 * math.pi)


def edge_profile_H_prime(y):
    """d/dy of the edge profile: sqrt(2/pi) exp(-2 y^2) / pi."""
    y = np.asarray(y, dtype=np.float64)
    return math.sqrt(2.0 / math.pi) / math.pi * np.exp(-2.0 * y**2)


def edge_rho2(x1, y1, x2, y2):
    """Two-point function in the edge scaling frame (bulk at y -> +inf)."""
    h1 = edge_profile_H(y1).real
    h2 = edge_profile_H(y2).real
    cross = edge_profile_H(0.5 * (y1 + y2 + 1j * (x1 - x2)))
    damp = np.exp(-((x1 - x2) ** 2) - ((y1 - y2) ** 2))
    return h1 * h2 - damp * np.abs(cross) ** 2


def edge_rho2T(x1, y1, x2, y2):
    """Truncated edge two-point function: edge_rho2 minus H(y1) H(y2)."""
    cross = edge_profile_H(0.5 * (y1 + y2 + 1j * (x1 - x2)))
    damp = np.exp(-((x1 - x2) ** 2) - ((y1 - y2) ** 2))
    return -damp * np.abs(cross) ** 2


def rq_f(w, z):
    """Antisymmetric kernel (i/sqrt(2 pi)) e^{(w^2+z^2)/2} erf((z - w)/sqrt2)."""
    w = np.asarray(w, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    return (
        1j / math.sqrt(2.0 * math.pi)
        * np.exp((w**2 + z**2) / 2.0)
        * erf_complex((z - w) / math.sqrt(2.0))
    )


def rq_rho1(x, y):
    """Limiting density of the real-quaternion Ginibre ensemble near the real axis.

    Equals 2 y e^{-(x^2+y^2)} f(z, conj z) with z = x + iy.  The
    e^{x^2} factors cancel algebraically, leaving the Dawson-function
    form (2 sqrt2 / pi) y D(sqrt2 y), which is what is evaluated (it
    cannot overflow).  The value is real, independent of x, and tends
    to the bulk value 1/pi as y -> +inf.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any(y < 0):
        raise DomainError("rq_rho1 requires y >= 0")
    out = (2.0 * math.sqrt(2.0) / math.pi) * y * special.dawsn(math.sqrt(2.0) * y)
    out = np.broadcast_arrays(out, x)[0]
    return out if out.ndim else float(out)


def rq_rho2T(z1, z2):
    """Truncated two-point function of the real-quaternion Ginibre ensemble.

    The result is real, symmetric under swap, even in each imaginary
    part, and decays as a Gaussian along the axis direction.  The two
    f-kernel products are evaluated with their Gaussian prefactor fused
    into the erf factors, which keeps every intermediate bounded:

        rho2T = (2/pi) y1 y2 [ |erf(c) e^{-(y1-y2)^2/2}|^2 e^{-(y1+y2)^2}
                              - |erf(a) e^{-(y1+y2)^2/2}|^2 e^{-(y1-y2)^2} ]

    with a = (conj(z2) - z1)/sqrt2 and c = (z2 - z1)/sqrt2.  The value
    is even in each imaginary part, so lower-half arguments are
    accepted and mirror their upper-half images.
    """
    z1 = np.asarray(z1, dtype=np.complex128)
    z2 = np.asarray(z2, dtype=np.complex128)
    y1 = z1.imag
    y2 = z2.imag
    rt2 = math.sqrt(2.0)
    a = (np.conj(z2) - z1) / rt2
    c = (z2 - z1) / rt2
    s_plus = 0.5 * (y1 + y2) ** 2
    s_minus = 0.5 * (y1 - y2) ** 2
    t_same = np.abs(erf_complex(c) * np.exp(-s_minus)) ** 2 * np.exp(-2.0 * s_plus)
    t_conj = np.abs(erf_complex(a) * np.exp(-s_plus)) ** 2 * np.exp(-2.0 * s_minus)
    out = (2.0 / math.pi) * y1 * y2 * (t_same - t_conj)
    out = np.asarray(out)
    return out if out.ndim else float(out)


def product_weight_asymptotic(x, kind: str, m: int, dim: int) -> np.ndarray:
    """Large-argument one-body weight of m-fold products, as a function of x = |z|^2.

    kind 'ginibre': exp(-m x^{1/m}); 'spherical': (1 + m x^{1/m})^{-dim}
    with dim = N; 'truncated': (1 - m x^{1/m})^{dim} with dim = n on its
    support and 0 outside.
    """
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0):
        raise DomainError("x = |z|^2 must be nonnegative")
    if m < 1:
        raise ValueError("m must be at least 1")
    u = m * x ** (1.0 / m)
    if kind == "ginibre":
        out = np.exp(-u)
    elif kind == "spherical":
        out = (1.0 + u) ** (-float(dim))
    elif kind == "truncated":
        out = np.where(u < 1.0, np.where(u < 1.0, 1.0 - u, 1.0) ** float(dim), 0.0)
    else:
        raise ValueError(f"unknown product weight kind {kind!r}")
    return out if out.ndim else out[()]


def _cse_coefficients(N: int) -> np.ndarray:
    a = np.arange(N)
    k = (a + 1) * (2 * N - a) / (np.pi * (2 * N - 1 - 2 * a))
    coef = np.zeros(2 * N)
    coef[a] += k
    coef[2 * N - 1 - a] -= k
    return coef


def cse_trunc_rho1(z, N: int):
    """Exact finite-N radial density of the CSE single-truncation representatives.

    rho(z) = sum_{a=0}^{N-1} (a+1)(2N-a) / (pi (2N-1-2a)) *
             (|z|^{2a} - |z|^{2(2N-1-a)}),   |z| < 1.

    The coefficient (2N-a)/(2N-1-2a) restores the normalization
    int rho = N, which the plain truncated-geometric form misses; the
    boundary value vanishes and the N -> inf limit is 1/(pi (1-|z|^2)^2).
    """
    if N < 1:
        raise ValueError("N must be positive")
    z = np.asarray(z, dtype=np.complex128)
    s = np.abs(z) ** 2
    if np.any(s >= 1.0):
        raise DomainError("cse_trunc_rho1 is defined on the open unit disk")
    out = npoly.polyval(s, _cse_coefficients(N))
    return out if np.ndim(out) else float(out)


def cse_trunc_mass(r: float, N: int) -> float:
    """Mass of cse_trunc_rho1 inside radius r (closed form)."""
    if not 0.0 <= r <= 1.0:
        raise DomainError("radius must lie in [0, 1]")
    a = np.arange(N)
    k = (a + 1) * (2 * N - a) / (np.pi * (2 * N - 1 - 2 * a))
    s = r * r
    terms = k * (s ** (a + 1) / (a + 1) - s ** (2 * N - a) / (2 * N - a))
    return float(np.pi * terms.sum())


def cse_limit_rhok(points, k: int | None = None) -> float:
    """k-point correlation of the truncation limit process: pi^{-k} det[(1 - z_j conj z_l)^{-2}]."""
    pts = np.asarray(points, dtype=np.complex128).ravel()
    if k is None:
        k = pts.size
    if k != pts.size:
        raise ValueError(f"got {pts.size} points for k={k}")
    if not 1 <= k <= 3:
        raise ValueError("k must be between 1 and 3")
    if np.any(np.abs(pts) >= 1.0):
        raise DomainError("all points must lie in the open unit disk")
    kernel = 1.0 / (1.0 - pts[:, None] * pts[None, :].conj()) ** 2
    return float(np.linalg.det(kernel).real) / math.pi**k


UNIFORM_DISK = "UniformDisk"
ELLIPSE = "Ellipse"
ANNULUS = "Annulus"
SPHERE_PROJECTED = "SphereProjected"
PSEUDOSPHERE = "Pseudosphere"
PRODUCT_GINIBRE = "ProductGinibre"
PRODUCT_SPHERICAL = "ProductSpherical"
PRODUCT_TRUNCATED = "ProductTruncated"
RQ_GINIBRE_PROFILE = "RqGinibreProfile"
CSE_TRUNC_EXACT = "CseTruncExact"
CSE_TRUNC_LIMIT = "CseTruncLimit"
EDGE_PROFILE = "EdgeProfile"


@dataclass(frozen=True)
class DensityModel:
    """Closed-form predicted density: a kind tag plus named real parameters.

    `evaluate` returns the pointwise density with the support indicator
    applied.  Radially symmetric kinds also expose the cumulative mass
    inside radius r, which is what binned comparisons should use.
    `solid` is the angular fraction of the plane occupied by the cloud
    (0.5 for upper-half-plane representative conventions).
    """

    kind: str
    params: dict = dataclass_field(default_factory=dict)

    def _p(self, name: str, default=None):
        if name in self.params:
            return self.params[name]
        if default is None:
            raise KeyError(f"model {self.kind} missing parameter {name!r}")
        return default

    @property
    def solid(self) -> float:
        return float(self._p("solid", 1.0))

    def evaluate(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.complex128)
        s = np.abs(z) ** 2
        kind = self.kind
        if kind == UNIFORM_DISK:
            r2 = self._p("radius") ** 2
            return np.where(s < r2, self._p("density"), 0.0)
        if kind == ELLIPSE:
            a, b = self._p("semi_major"), self._p("semi_minor")
            inside = (z.real / a) ** 2 + (z.imag / b) ** 2 < 1.0
            return np.where(inside, self._p("mass") / (math.pi * a * b), 0.0)
        if kind == ANNULUS:
            inside = (s > self._p("r_inner") ** 2) & (s < self._p("r_outer") ** 2)
            return np.where(inside, self._p("density"), 0.0)
        if kind == SPHERE_PROJECTED:
            pref = self._p("prefactor")
            out = pref / (math.pi * (1.0 + s) ** 2)
            return np.where(s >= self._p("r_star", 0.0) ** 2, out, 0.0)
        if kind == PSEUDOSPHERE:
            pref = self._p("prefactor")
            inside = (s >= self._p("r_inner", 0.0) ** 2) & (s < self._p("r_outer") ** 2)
            return np.where(inside, pref / (math.pi * (1.0 - s) ** 2), 0.0)
        if kind in (PRODUCT_GINIBRE, PRODUCT_SPHERICAL, PRODUCT_TRUNCATED):
            m = self._p("m")
            u = s ** (1.0 / m)
            mass = self._p("mass", 1.0)
            with np.errstate(divide="ignore"):
                radial = np.where(s > 0, s ** (1.0 / m - 1.0), np.inf)
            if kind == PRODUCT_GINIBRE:
                out = mass * radial / (m * math.pi)
                return np.where(s < 1.0, out, 0.0)
            if kind == PRODUCT_SPHERICAL:
                return mass * radial / (math.pi * m * (1.0 + u) ** 2)
            r_out = self._p("r_outer")
            out = self._p("prefactor") * radial / (math.pi * m * (1.0 - u) ** 2)
            return np.where(s < r_out ** 2, out, 0.0)
        if kind == RQ_GINIBRE_PROFILE:
            return rq_rho1(np.zeros_like(z.real), np.abs(z.imag))
        if kind == CSE_TRUNC_EXACT:
            n_param = int(self._p("N"))
            out = np.zeros_like(s)
            ok = s < 1.0
            out[ok] = npoly.polyval(s[ok], _cse_coefficients(n_param))
            return out
        if kind == CSE_TRUNC_LIMIT:
            return np.where(s < 1.0, 1.0 / (math.pi * (1.0 - s) ** 2), 0.0)
        if kind == EDGE_PROFILE:
            # Coordinate is the signed distance past the edge; bulk at u < 0.
            rho_b = self._p("rho_b")
            u = z.real
            return rho_b * (1.0 + special.erf(-math.sqrt(2.0 * math.pi * rho_b) * u)) / 2.0
        raise ValueError(f"unknown density model kind {self.kind!r}")

    def radial_cumulative(self, r) -> np.ndarray:
        """Mass inside radius r (radially symmetric kinds only)."""
        r = np.asarray(r, dtype=np.float64)
        s = r * r
        kind = self.kind
        solid = self.solid
        if kind == UNIFORM_DISK:
            r2 = self._p("radius") ** 2
            return solid * math.pi * self._p("density") * np.minimum(s, r2)
        if kind == ANNULUS:
            lo, hi = self._p("r_inner") ** 2, self._p("r_outer") ** 2
            return solid * math.pi * self._p("density") * np.clip(s - lo, 0.0, hi - lo)
        if kind == SPHERE_PROJECTED:
            pref = self._p("prefactor")
            lo = self._p("r_star", 0.0) ** 2
            inner = 1.0 / (1.0 + lo)
            return solid * pref * np.clip(inner - 1.0 / (1.0 + np.maximum(s, lo)), 0.0, None)
        if kind == PSEUDOSPHERE:
            pref = self._p("prefactor")
            lo = self._p("r_inner", 0.0) ** 2
            hi = self._p("r_outer") ** 2
            sc = np.clip(s, lo, hi)
            return solid * pref * (sc / (1.0 - sc) - lo / (1.0 - lo))
        if kind == PRODUCT_GINIBRE:
            m = self._p("m")
            return solid * self._p("mass", 1.0) * np.minimum(s, 1.0) ** (1.0 / m)
        if kind == PRODUCT_SPHERICAL:
            m = self._p("m")
            u = s ** (1.0 / m)
            return solid * self._p("mass", 1.0) * u / (1.0 + u)
        if kind == PRODUCT_TRUNCATED:
            m = self._p("m")
            hi = self._p("r_outer") ** 2
            u = np.minimum(s, hi) ** (1.0 / m)
            return solid * self._p("prefactor") * u / (1.0 - u)
        if kind == CSE_TRUNC_EXACT:
            n_param = int(self._p("N"))
            flat = np.atleast_1d(r)
            vals = np.array([cse_trunc_mass(min(float(rv), 1.0), n_param) for rv in flat])
            vals = solid * vals
            return vals if r.ndim else vals[0]
        raise ValueError(f"model kind {self.kind!r} has no radial cumulative")

    @property
    def mass(self) -> float:
        """Total integral over the support."""
        kind = self.kind
        if kind == ELLIPSE:
            return float(self._p("mass"))
        caps = {
            UNIFORM_DISK: lambda: self._p("radius"),
            ANNULUS: lambda: self._p("r_outer"),
            SPHERE_PROJECTED: lambda: 1e8,
            PRODUCT_SPHERICAL: lambda: 1e8,
            PSEUDOSPHERE: lambda: self._p("r_outer"),
            PRODUCT_TRUNCATED: lambda: self._p("r_outer"),
            PRODUCT_GINIBRE: lambda: 1.0,
            CSE_TRUNC_EXACT: lambda: 1.0,
        }
        if kind not in caps:
            raise ValueError(f"model kind {self.kind!r} has no finite total mass")
        return float(self.radial_cumulative(caps[kind]()))

    def bin_average(self, r_lo, r_hi) -> np.ndarray:
        """Mean density over the annulus [r_lo, r_hi] (the honest binned model)."""
        r_lo = np.asarray(r_lo, dtype=np.float64)
        r_hi = np.asarray(r_hi, dtype=np.float64)
        area = self.solid * math.pi * (r_hi**2 - r_lo**2)
        return (self.radial_cumulative(r_hi) - self.radial_cumulative(r_lo)) / area


def predicted_density(model: DensityModel, z) -> np.ndarray:
    """Pointwise predicted density of `model` at plane coordinates `z`."""
    return model.evaluate(z)


def model_for_spec(spec: EnsembleSpec, frame: str = "raw") -> DensityModel | None:
    """The closed-form density model matching an ensemble run, if one exists.

    The model describes the representative cloud produced by
    :func:`rmtlab.ensembles.sample_cloud` in the requested estimator
    frame, so Monte-Carlo histograms can be compared without hidden
    rescaling.  Families without a usable closed form return None.
    """
    beta = spec.field.beta
    fam = spec.family
    if frame not in ("raw", "unit", "edge_shifted"):
        raise ValueError(f"unknown frame {frame!r}")

    def _unit_scaled(model: DensityModel) -> DensityModel | None:
        radius = ensembles.spectral_radius(spec)
        if radius is None:
            return None
        # Unit frame: lengths divided by the support radius, densities
        # multiplied by radius^2 so bin masses are preserved.
        p = dict(model.params)
        for key in ("radius", "r_inner", "r_outer", "r_star"):
            if key in p:
                p[key] = p[key] / radius
        for key in ("density",):
            if key in p:
                p[key] = p[key] * radius**2
        if model.kind in (SPHERE_PROJECTED, PSEUDOSPHERE, CSE_TRUNC_EXACT,
                          PRODUCT_SPHERICAL, PRODUCT_TRUNCATED):
            return None  # curvature laws do not rescale linearly
        return DensityModel(model.kind, p)

    model: DensityModel | None = None
    if fam == ensembles.GINIBRE:
        radius = ensembles.spectral_radius(spec)
        if beta == 4:
            model = DensityModel(UNIFORM_DISK, {"radius": radius, "density": 1.0 / math.pi, "solid": 0.5})
        else:
            model = DensityModel(UNIFORM_DISK, {"radius": radius, "density": 1.0 / math.pi})
        if frame == "edge_shifted":
            return DensityModel(EDGE_PROFILE, {"rho_b": 1.0 / math.pi})
    elif fam == ensembles.ELLIPTIC:
        # Semi-axes of the sampler's droplet; the single-draw construction
        # shrinks the nominal sqrt(N)(1 +- tau) ellipse by 1/sqrt(1 + tau).
        root = math.sqrt(spec.N) / math.sqrt(1.0 + spec.tau)
        if beta == 4:
            root *= math.sqrt(2.0)
        model = DensityModel(
            ELLIPSE,
            {"semi_major": root * (1.0 + spec.tau), "semi_minor": root * (1.0 - spec.tau),
             "mass": float(spec.N)},
        )
        if frame != "raw":
            return None
        return model
    elif fam == ensembles.SPHERICAL:
        # Upper-half representative clouds see the full-cloud local density,
        # so the beta=4 prefactor doubles while the solid angle halves.
        solid = 0.5 if beta == 4 else 1.0
        model = DensityModel(
            SPHERE_PROJECTED, {"prefactor": spec.N / solid, "solid": solid}
        )
    elif fam == ensembles.TRUNCATED_UNITARY:
        r_out = math.sqrt(1.0 / (1.0 + spec.n / spec.N))
        solid = 0.5 if beta == 4 else 1.0
        model = DensityModel(
            PSEUDOSPHERE,
            {"prefactor": spec.n / solid, "r_outer": r_out, "solid": solid},
        )
    elif fam == ensembles.INDUCED:
        solid = 0.5 if beta == 4 else 1.0
        if spec.base_family == ensembles.GINIBRE:
            scale = math.sqrt(2.0) if beta == 4 else 1.0
            model = DensityModel(
                ANNULUS,
                {"r_inner": scale * math.sqrt(spec.n - spec.N),
                 "r_outer": scale * math.sqrt(spec.n),
                 "density": 1.0 / math.pi,
                 "solid": solid},
            )
        elif spec.base_family == ensembles.SPHERICAL:
            r_star = math.sqrt(max(spec.n / spec.N - 1.0, 0.0))
            model = DensityModel(
                SPHERE_PROJECTED,
                {"prefactor": spec.n / solid, "r_star": r_star, "solid": solid},
            )
        else:
            M = spec.M if spec.M is not None else 2 * (spec.n + spec.N)
            r_in = math.sqrt((spec.n - spec.N) / (M - spec.N))
            r_out = math.sqrt(spec.n / M)
            model = DensityModel(
                PSEUDOSPHERE,
                {"prefactor": (M - spec.n) / solid, "r_inner": r_in,
                 "r_outer": r_out, "solid": solid},
            )
    elif fam == ensembles.PRODUCT:
        solid = 0.5 if beta == 4 else 1.0
        if spec.factor_family == ensembles.GINIBRE:
            if frame == "unit":
                return DensityModel(
                    PRODUCT_GINIBRE,
                    {"m": float(spec.m), "mass": spec.N / solid, "solid": solid},
                )
            return None  # raw-frame product law needs the N^{m/2} rescale
        if spec.factor_family == ensembles.SPHERICAL:
            model = DensityModel(
                PRODUCT_SPHERICAL,
                {"m": float(spec.m), "mass": spec.N / solid, "solid": solid},
            )
        else:
            r_out = math.sqrt(1.0 / (1.0 + spec.n / spec.N)) ** spec.m
            model = DensityModel(
                PRODUCT_TRUNCATED,
                {"m": float(spec.m), "prefactor": spec.n / solid, "r_outer": r_out,
                 "solid": solid},
            )
    elif fam == ensembles.SELF_DUAL:
        rho_b = 1.0 / (4.0 * math.pi * spec.sigma**2)
        radius = 2.0 * spec.sigma * math.sqrt(spec.N)
        if frame == "edge_shifted":
            return None  # overshooting profile has no closed form
        model = DensityModel(UNIFORM_DISK, {"radius": radius, "density": rho_b})
    elif fam == ensembles.CSE_TRUNCATION:
        model = DensityModel(CSE_TRUNC_EXACT, {"N": float(spec.N)})

    if model is None:
        return None
    if frame == "raw":
        return model
    if frame == "unit":
        return _unit_scaled(model)
    return None
