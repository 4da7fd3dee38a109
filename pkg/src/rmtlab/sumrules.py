"""Adaptive quadrature and the battery of analytic sum-rule checks.

The quadrature engine works in polar coordinates: composite
Gauss-Legendre panels radially and angularly (periodic trapezoid on the
full circle), refined level by level until two consecutive levels agree
to the requested tolerance; unbounded regions get a probed radial
cutoff plus a double-exponential (exp-sinh) tail rule.  Evaluation is
vectorized: integrands receive an ndarray of complex plane points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field
from typing import Callable

import numpy as np
from scipy import special

from .analytic import (
    bulk_rho2T,
    edge_profile_H,
    edge_profile_H_prime,
    edge_rho2T,
    rq_f,
    rq_rho1,
    rq_rho2T,
)

__all__ = [
    "QuadratureResult",
    "SumRuleReport",
    "BudgetError",
    "integrate_2d",
    "integrate_line",
    "bulk_rho2T",
    "moment_rule_expected",
    "check_moment_rules",
    "check_dipole",
    "check_complex_moments",
    "check_identity_T8",
    "check_edge_asymptotic",
    "run_suite",
    "SUITES",
    "REGIONS",
]

REGIONS = ("disk", "half_plane", "plane", "annulus")

# Beyond this radius complex-exponential evaluations can overflow and the
# Gaussian-decay integrands this engine accepts are identically negligible.
_MAX_EVAL_RADIUS = 30.0
_GL_ORDER = 10
_MAX_LEVELS = 7


class BudgetError(RuntimeError):
    """Quadrature failed to converge within its evaluation budget."""


@dataclass
class QuadratureResult:
    value: complex
    abs_error_estimate: float
    n_evaluations: int


@dataclass
class SumRuleReport:
    """One verified identity: expected vs computed with an explicit tolerance.

    `mode` records whether the tolerance is absolute (used for expected
    values at or near zero) or relative.  Skipped entries record rules
    that have no closed-form kernel for the requested parameters.
    """

    rule_id: str
    expected: float
    computed: float
    tolerance: float
    passed: bool
    mode: str = "abs"
    params: dict = dataclass_field(default_factory=dict)
    error_estimate: float = 0.0
    skipped: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "rule_id": self.rule_id,
            "expected": self.expected,
            "computed": self.computed if math.isfinite(self.computed) else None,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "mode": self.mode,
            "params": self.params,
            "error_estimate": self.error_estimate,
            "skipped": self.skipped,
            "note": self.note,
        }


def _compare(expected: float, computed: float, tol: float, mode: str) -> bool:
    if mode == "rel":
        return abs(computed - expected) <= tol * abs(expected)
    return abs(computed - expected) <= tol


def _gl_panels(lo: float, hi: float, n_panels: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(_GL_ORDER)
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return x, w


def _expsinh_tail(r0: float, r_max: float, h: float = 0.1, t_max: float = 3.2):
    # Nodes of r = r0 + exp((pi/2) sinh t); double-exponential for smooth
    # rapidly decaying tails.
    t = np.arange(-t_max, t_max + h / 2, h)
    e = np.exp(0.5 * math.pi * np.sinh(t))
    r = r0 + e
    w = h * 0.5 * math.pi * np.cosh(t) * e
    keep = r <= r_max
    return r[keep], w[keep]


def _theta_rule(region: str, level: int) -> tuple[np.ndarray, np.ndarray]:
    if region == "half_plane":
        return _gl_panels(0.0, math.pi, 2 * 2**level)
    n = 16 * 2**level
    theta = (np.arange(n) + 0.5) * (2.0 * math.pi / n)
    return theta, np.full(n, 2.0 * math.pi / n)


def _probe_cutoff(f: Callable, region: str, tol: float) -> float:
    theta = np.linspace(0.05, (math.pi if region == "half_plane" else 2 * math.pi) - 0.05, 32)
    r_cut = 6.0
    while r_cut < _MAX_EVAL_RADIUS:
        z = r_cut * np.exp(1j * theta)
        mag = np.abs(np.asarray(f(z), dtype=np.complex128))
        if np.nanmax(mag) < tol * 1e-3:
            return r_cut
        r_cut += 3.0
    return _MAX_EVAL_RADIUS


def integrate_2d(
    f: Callable[[np.ndarray], np.ndarray],
    region: str,
    tol: float = 1e-8,
    radius: float | None = None,
    r_inner: float | None = None,
    r_outer: float | None = None,
    max_evals: int = 20_000_000,
) -> QuadratureResult:
    """Integrate f over a planar region to absolute tolerance `tol`.

    f takes an ndarray of complex points and returns values; on
    unbounded regions it must decay at a Gaussian-like rate.
    """
    if region not in REGIONS:
        raise ValueError(f"unknown region {region!r}")
    if region == "disk":
        if radius is None:
            raise ValueError("disk region requires radius")
        r_lo, r_hi, unbounded = 0.0, float(radius), False
    elif region == "annulus":
        if r_inner is None or r_outer is None:
            raise ValueError("annulus region requires r_inner and r_outer")
        r_lo, r_hi, unbounded = float(r_inner), float(r_outer), False
    else:
        r_lo, r_hi, unbounded = 0.0, _probe_cutoff(f, region, tol), True

    n_evals = 0
    prev = None
    err = math.inf
    for level in range(_MAX_LEVELS):
        r, wr = _gl_panels(r_lo, r_hi, 4 * 2**level)
        if unbounded:
            rt, wt = _expsinh_tail(r_hi, _MAX_EVAL_RADIUS)
            r = np.concatenate([r, rt])
            wr = np.concatenate([wr, wt])
        theta, wth = _theta_rule(region, level)
        z = r[:, None] * np.exp(1j * theta[None, :])
        vals = np.asarray(f(z.ravel()), dtype=np.complex128).reshape(z.shape)
        n_evals += z.size
        if n_evals > max_evals:
            raise BudgetError(
                f"exceeded {max_evals} evaluations at level {level} "
                f"(last error estimate {err:.3e}, tol {tol:.3e})"
            )
        value = complex(((vals * r[:, None]) @ wth) @ wr)
        if prev is not None:
            err = abs(value - prev)
            if err <= tol:
                return QuadratureResult(value=value, abs_error_estimate=err, n_evaluations=n_evals)
        prev = value
    raise BudgetError(
        f"no convergence after {_MAX_LEVELS} refinement levels "
        f"(last error estimate {err:.3e}, tol {tol:.3e})"
    )


def integrate_line(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float = -math.inf,
    hi: float = math.inf,
    tol: float = 1e-10,
    span: float = 12.0,
) -> QuadratureResult:
    """1-d companion rule: adaptive GL panels with exp-sinh tails."""
    lo_f = -span if math.isinf(lo) else lo
    hi_f = span if math.isinf(hi) else hi
    n_evals = 0
    prev = None
    err = math.inf
    for level in range(_MAX_LEVELS + 2):
        x, w = _gl_panels(lo_f, hi_f, 8 * 2**level)
        if math.isinf(hi):
            rt, wt = _expsinh_tail(hi_f, hi_f + 8.0)
            x, w = np.concatenate([x, rt]), np.concatenate([w, wt])
        if math.isinf(lo):
            rt, wt = _expsinh_tail(-lo_f, -lo_f + 8.0)
            x, w = np.concatenate([x, -rt]), np.concatenate([w, wt])
        vals = np.asarray(f(x), dtype=np.float64)
        n_evals += x.size
        value = float(vals @ w)
        if prev is not None:
            err = abs(value - prev)
            if err <= tol:
                return QuadratureResult(value=value, abs_error_estimate=err, n_evaluations=n_evals)
        prev = value
    raise BudgetError(f"1-d rule did not converge (last error {err:.3e}, tol {tol:.3e})")


def moment_rule_expected(p: int, beta: float) -> float:
    """Right-hand sides of the screening moment rules for p in {0, 2, 4, 6}."""
    if p == 0:
        return -1.0
    if p == 2:
        return -2.0 / (math.pi * beta)
    if p == 4:
        return -(16.0 / (math.pi * beta) ** 2) * (1.0 - beta / 4.0)
    if p == 6:
        return -(18.0 / (math.pi * beta) ** 3) * (beta - 6.0) * (beta - 8.0 / 3.0)
    raise ValueError(f"no moment rule for power {p}")


_MOMENT_PREFACTOR_POWER = {0: -1, 2: 0, 4: 1, 6: 2}


def check_moment_rules(
    rho2T: Callable[[np.ndarray], np.ndarray],
    rho: float,
    beta: float,
    tolerance: float = 1e-8,
) -> list[SumRuleReport]:
    """Verify the four moment rules for a radial truncated two-point kernel."""
    reports = []
    for p in (0, 2, 4, 6):
        integrand = lambda z, _p=p: rho2T(np.abs(z)) * np.abs(z) ** _p
        quad = integrate_2d(integrand, "plane", tol=tolerance / 20.0)
        computed = rho ** _MOMENT_PREFACTOR_POWER[p] * quad.value.real
        expected = moment_rule_expected(p, beta)
        reports.append(
            SumRuleReport(
                rule_id=f"Moment{p}",
                expected=expected,
                computed=computed,
                tolerance=tolerance,
                passed=_compare(expected, computed, tolerance, "abs"),
                mode="abs",
                params={"beta": beta, "rho": rho, "p": p},
                error_estimate=quad.abs_error_estimate,
            )
        )
    return reports


def check_dipole(
    profile: Callable[[np.ndarray], np.ndarray],
    rho_b: float,
    beta: float,
    tolerance: float = 1e-8,
) -> SumRuleReport:
    """First-moment (dipole) rule of an edge density profile against its background step."""
    def integrand(r):
        return r * (np.asarray(profile(r), dtype=np.float64) - np.where(r > 0, rho_b, 0.0))

    quad = integrate_line(integrand, tol=tolerance / 20.0, span=10.0)
    expected = -(1.0 / (2.0 * math.pi * beta)) * (1.0 - beta / 4.0)
    return SumRuleReport(
        rule_id="Dipole",
        expected=expected,
        computed=quad.value.real if isinstance(quad.value, complex) else float(quad.value),
        tolerance=tolerance,
        passed=_compare(expected, float(np.real(quad.value)), tolerance, "abs"),
        mode="abs",
        params={"beta": beta, "rho_b": rho_b},
        error_estimate=quad.abs_error_estimate,
    )


def check_complex_moments(p: int, y1: float, tolerance: float = 1e-6) -> SumRuleReport:
    """Vanishing even complex moments of the near-axis screening cloud.

    Computes the half-plane integral of w^{2p} rho2T((0, y1), w) plus
    (i y1)^{2p} rho1(y1); perfect screening makes the sum zero.
    """
    if p not in (0, 1, 2):
        raise ValueError("p must be 0, 1 or 2")
    if y1 <= 0:
        raise ValueError("y1 must be positive")
    z1 = 1j * y1

    def integrand(w):
        return w ** (2 * p) * rq_rho2T(z1, w)

    quad = integrate_2d(integrand, "half_plane", tol=tolerance / 50.0)
    point_term = (1j * y1) ** (2 * p) * rq_rho1(0.0, y1)
    computed = quad.value + point_term
    return SumRuleReport(
        rule_id=f"ComplexMomentP{p}",
        expected=0.0,
        computed=float(computed.real),
        tolerance=tolerance,
        passed=abs(computed) <= tolerance,
        mode="abs",
        params={"p": p, "y1": y1},
        error_estimate=quad.abs_error_estimate,
        note=f"imag residue {abs(computed.imag):.2e}",
    )


def _t8_integrand(w: np.ndarray, alpha: float, y1: float) -> np.ndarray:
    """Cancellation-safe integrand of the exponential screening identity.

    The raw erf products cancel to machine noise at large |Re w| when
    alpha > 0; rewriting each product through scaled Faddeeva factors
    exp(...) wofz(i u) keeps every term bounded and fused.
    """
    x = w.real
    y = w.imag
    s = np.where(x >= 0, 1.0, -1.0)
    rt2 = math.sqrt(2.0)
    u1 = s * (np.conj(w) - 1j * y1) / rt2
    u2 = s * (w + 1j * y1) / rt2
    v1 = s * (w - 1j * y1) / rt2
    v2 = s * (np.conj(w) + 1j * y1) / rt2
    base = alpha * w**2 - 2.0 * y**2

    def fused(*args):
        expo = base - sum(a**2 for a in args)
        out = np.exp(expo)
        for a in args:
            out = out * special.wofz(1j * a)
        return out

    bracket = fused(u1) + fused(u2) - fused(u1, u2) - fused(v1) - fused(v2) + fused(v1, v2)
    return -(y / (2.0 * math.pi)) * math.exp(-(y1**2)) * bracket


def check_identity_T8(alpha: float, y1: float, tolerance: float = 1e-6) -> SumRuleReport:
    """Exponential-moment screening identity over the full plane.

    The displayed full-plane form is exact; the half-plane reading gives
    exactly half the right side (the even moments' integrals are real).
    """
    if not abs(alpha) < 1.0:
        raise ValueError("need |alpha| < 1 for integrability")
    if y1 < 0:
        raise ValueError("y1 must be nonnegative")
    rhs = complex(np.exp(-alpha * y1**2) * rq_f(1j * y1, -1j * y1))
    quad = integrate_2d(
        lambda w: _t8_integrand(w, alpha, y1), "plane",
        tol=max(tolerance * abs(rhs) / 20.0, 1e-12),
    )
    lhs = quad.value
    if y1 == 0.0:
        passed = abs(lhs) <= tolerance and abs(rhs) <= tolerance
        mode = "abs"
    else:
        passed = abs(lhs - rhs) <= tolerance * abs(rhs)
        mode = "rel"
    return SumRuleReport(
        rule_id="IdentityT8",
        expected=rhs.real,
        computed=lhs.real,
        tolerance=tolerance,
        passed=bool(passed),
        mode=mode,
        params={"alpha": alpha, "y1": y1},
        error_estimate=quad.abs_error_estimate,
        note=f"imag residue {abs(lhs.imag):.2e}",
    )


def check_edge_asymptotic(
    dx: float, y1: float, y2: float, tolerance: float = 0.10
) -> SumRuleReport:
    """Edge correlations against their inverse-square tail along the boundary.

    The tail is -H'(y1) H'(y2) / (4 dx^2): the profile-derivative form
    whose double integral over (y1, y2) carries total weight 1/(2 beta pi^2)
    as the boundary sum rule requires at beta=2.
    """
    if dx < 6:
        raise ValueError("asymptotic comparison needs dx >= 6")
    lhs = float(edge_rho2T(0.0, y1, dx, y2))
    rhs = float(
        -edge_profile_H_prime(y1) * edge_profile_H_prime(y2) / (4.0 * dx**2)
    )
    if abs(rhs) < 1e-12:
        passed = abs(lhs) < 1e-6 and abs(rhs) < 1e-6
        mode = "abs"
        tol = 1e-6
    else:
        passed = abs(lhs - rhs) <= tolerance * abs(rhs)
        mode = "rel"
        tol = tolerance
    return SumRuleReport(
        rule_id="EdgeAsymptotic",
        expected=rhs,
        computed=lhs,
        tolerance=tol,
        passed=bool(passed),
        mode=mode,
        params={"dx": dx, "y1": y1, "y2": y2},
    )


SUITES = ("moments", "dipole", "complex_moments", "identity_t8", "edge_asymptotic", "all")


def run_suite(suite: str, beta: float = 2.0) -> list[SumRuleReport]:
    """Run a named battery of checks and return its reports.

    Closed-form kernels exist only at beta=2; other betas produce
    skipped entries for the kernel-based rules (the right-hand sides
    themselves are beta-general).
    """
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")
    reports: list[SumRuleReport] = []
    if suite in ("moments", "all"):
        if beta == 2.0:
            rho = 1.0 / math.pi
            reports += check_moment_rules(lambda r: bulk_rho2T(r, rho), rho, beta)
        else:
            for p in (0, 2, 4, 6):
                reports.append(
                    SumRuleReport(
                        rule_id=f"Moment{p}",
                        expected=moment_rule_expected(p, beta),
                        computed=math.nan,
                        tolerance=1e-8,
                        passed=True,
                        params={"beta": beta, "p": p},
                        skipped=True,
                        note=f"no closed-form bulk kernel at beta={beta:g}",
                    )
                )
    if suite in ("dipole", "all"):
        if beta == 2.0:
            reports.append(
                check_dipole(lambda r: edge_profile_H(r).real, 1.0 / math.pi, beta)
            )
        else:
            reports.append(
                SumRuleReport(
                    rule_id="Dipole",
                    expected=-(1.0 / (2.0 * math.pi * beta)) * (1.0 - beta / 4.0),
                    computed=math.nan,
                    tolerance=1e-8,
                    passed=True,
                    params={"beta": beta},
                    skipped=True,
                    note=f"no closed-form edge profile at beta={beta:g}",
                )
            )
    if suite in ("complex_moments", "all"):
        for p in (0, 1, 2):
            for y1 in (0.5, 1.0):
                reports.append(check_complex_moments(p, y1))
    if suite in ("identity_t8", "all"):
        for alpha, y1 in ((0.0, 1.0), (0.3, 0.7), (-0.2, 1.2), (0.5, 0.0)):
            reports.append(check_identity_T8(alpha, y1))
    if suite in ("edge_asymptotic", "all"):
        r8 = check_edge_asymptotic(8.0, 0.0, 0.0)
        r16 = check_edge_asymptotic(16.0, 0.0, 0.0)
        dev8 = abs(r8.computed - r8.expected) / abs(r8.expected)
        dev16 = abs(r16.computed - r16.expected) / abs(r16.expected)
        r16.passed = bool(r16.passed and dev16 < dev8)
        r16.note = f"deviation {dev16:.3e} vs {dev8:.3e} at dx=8"
        deep = check_edge_asymptotic(8.0, -3.0, -3.0)
        reports += [r8, r16, deep]
    return reports
