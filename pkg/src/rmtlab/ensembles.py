"""Matrix samplers for the non-Hermitian ensembles and their eigenvalue clouds.

Conventions
-----------
Gaussian variance: beta=2 entries are standard complex (E|g|^2 = 1,
real/imag parts N(0, 1/2)); beta=1 entries are N(0, 1); beta=4 entries
are real quaternions whose two free complex parameters are standard
complex Gaussians.  With these choices the Ginibre droplet sits at
radius sqrt(N) for beta in {1, 2} and sqrt(2N) for the complex
representation used at beta=4, so the closed-form density models apply
without hidden rescales.

A real quaternion entry q = a + b j is stored as the 2x2 complex block
[[a, b], [-conj(b), conj(a)]]; an N x N quaternion matrix is its
2N x 2N complex representation with blocks aligned on even indices.

Eigenvalue clouds keep one representative per conjugate pair (beta=1
and the conjugate-symmetric beta=4 families, mapped to the closed upper
half-plane) or per degenerate pair (the self-dual and CSE-truncation
families, kept at their true positions -- folding those would distort
plane statistics).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field, replace
from typing import Iterator, Sequence

import numpy as np

from .rng import rng_stream

GINIBRE = "ginibre"
ELLIPTIC = "elliptic"
SPHERICAL = "spherical"
TRUNCATED_UNITARY = "truncated_unitary"
INDUCED = "induced"
PRODUCT = "product"
SELF_DUAL = "self_dual"
CSE_TRUNCATION = "cse_truncation"

FAMILIES = (
    GINIBRE,
    ELLIPTIC,
    SPHERICAL,
    TRUNCATED_UNITARY,
    INDUCED,
    PRODUCT,
    SELF_DUAL,
    CSE_TRUNCATION,
)

# Families whose spectra are doubly degenerate rather than conjugate-paired.
DEGENERATE_FAMILIES = (SELF_DUAL, CSE_TRUNCATION)

_SPHERICAL_COND_LIMIT = 1e14
_SPHERICAL_MAX_REDRAWS = 8


class DimensionError(ValueError):
    """Matrix dimensions are invalid for the requested operation."""


class ParameterError(ValueError):
    """An ensemble parameter is out of its documented range."""


class SamplingError(RuntimeError):
    """A sampler could not produce a usable draw."""


class SolverError(RuntimeError):
    """The eigensolver failed; carries the seed when known."""


class PairingError(RuntimeError):
    """Eigenvalue pairing violated the field convention; carries the seed."""


@dataclass(frozen=True)
class FieldClass:
    """Number field of the matrix entries, encoded by beta in {1, 2, 4}."""

    beta: int

    def __post_init__(self) -> None:
        if self.beta not in (1, 2, 4):
            raise ParameterError(f"beta must be 1, 2 or 4, got {self.beta}")

    @property
    def blowup(self) -> int:
        """Complex-representation size factor: 2 for quaternions, else 1."""
        return 2 if self.beta == 4 else 1


@dataclass(frozen=True)
class EnsembleSpec:
    """Declarative descriptor of a matrix ensemble draw.

    N is the eigenvalue (representative) count: the quaternion block
    size at beta=4.  n is the truncation depth or rectangularity for
    families that use it, M the parent unitary size in the rectangular
    truncated case, m the number of product factors, tau the elliptic
    parameter and sigma the Gaussian scale of the self-dual family.
    base_family names the rectangular base draw of the induced family;
    factor_family the repeated factor of the product family.
    """

    family: str
    field: FieldClass = dataclass_field(default_factory=lambda: FieldClass(2))
    N: int = 1
    n: int = 0
    M: int | None = None
    m: int = 1
    tau: float = 0.0
    sigma: float = 1.0
    base_family: str = GINIBRE
    factor_family: str = GINIBRE

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}")
        if self.N < 1:
            raise ParameterError("N must be positive")
        if self.n < 0:
            raise ParameterError("n must be nonnegative")
        if not 0.0 <= self.tau < 1.0:
            raise ParameterError("tau must lie in [0, 1)")
        if self.sigma <= 0:
            raise ParameterError("sigma must be positive")
        if self.m < 1:
            raise ParameterError("m must be at least 1")
        if self.family == TRUNCATED_UNITARY and self.M is not None:
            if self.M < self.n + self.N:
                raise ParameterError("rectangular truncation requires M >= n + N")
        if self.family == INDUCED:
            if self.base_family not in (GINIBRE, SPHERICAL, TRUNCATED_UNITARY):
                raise ParameterError(
                    f"induced base family {self.base_family!r} unsupported"
                )
            if self.n < self.N:
                raise ParameterError("induced construction requires n >= N")

    @property
    def beta(self) -> int:
        return self.field.beta


@dataclass
class ComplexMatrixBuffer:
    """Dense complex matrix with its field tag and an optional log scale.

    The matrix represented is ``entries * exp(log_scale)``; the scale is
    tracked separately so long products cannot overflow, and is applied
    when eigenvalues are extracted.
    """

    rows: int
    cols: int
    entries: np.ndarray
    field: FieldClass
    log_scale: float = 0.0

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols


@dataclass
class EigenvalueCloud:
    """Representative eigenvalues of one draw, with field conventions applied."""

    points: np.ndarray
    field: FieldClass
    n_real: int
    spec: EnsembleSpec
    seed: int
    max_pair_gap: float = 0.0


def _buffer(entries: np.ndarray, field: FieldClass, log_scale: float = 0.0) -> ComplexMatrixBuffer:
    entries = np.ascontiguousarray(entries, dtype=np.complex128)
    r, c = entries.shape
    return ComplexMatrixBuffer(rows=r, cols=c, entries=entries, field=field, log_scale=log_scale)


def symplectic_unit(N: int) -> np.ndarray:
    """The 2N x 2N block-diagonal matrix I_N (x) [[0, -1], [1, 0]]."""
    Z = np.zeros((2 * N, 2 * N))
    Z[0::2, 1::2] = -np.eye(N)
    Z[1::2, 0::2] = np.eye(N)
    return Z


def _apply_Z(v: np.ndarray) -> np.ndarray:
    # Z @ v for the symplectic unit, without forming Z.
    out = np.empty_like(v)
    out[0::2] = -v[1::2]
    out[1::2] = v[0::2]
    return out


def quaternion_from_blocks(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Assemble the 2N x 2N complex representation from quaternion parameters."""
    if a.shape != b.shape:
        raise DimensionError("quaternion parameter arrays must share a shape")
    n0, n1 = a.shape
    out = np.empty((2 * n0, 2 * n1), dtype=np.complex128)
    out[0::2, 0::2] = a
    out[0::2, 1::2] = b
    out[1::2, 0::2] = -b.conj()
    out[1::2, 1::2] = a.conj()
    return out


def quaternion_structure_error(entries: np.ndarray) -> float:
    """Max deviation of 2x2 blocks from [[a, b], [-conj(b), conj(a)]]."""
    a = entries[0::2, 0::2]
    b = entries[0::2, 1::2]
    err_c = np.abs(entries[1::2, 0::2] + b.conj()).max(initial=0.0)
    err_d = np.abs(entries[1::2, 1::2] - a.conj()).max(initial=0.0)
    return max(err_c, err_d)


def enforce_quaternion_structure(entries: np.ndarray) -> np.ndarray:
    """Project onto the exact quaternion block structure (averages the blocks)."""
    a = 0.5 * (entries[0::2, 0::2] + entries[1::2, 1::2].conj())
    b = 0.5 * (entries[0::2, 1::2] - entries[1::2, 0::2].conj())
    return quaternion_from_blocks(a, b)


def _standard_complex(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def sample_gaussian_matrix(
    field: FieldClass, rows: int, cols: int, rng: np.random.Generator
) -> ComplexMatrixBuffer:
    """iid Gaussian matrix over the field; dimensions count field entries.

    At beta=4 the returned buffer is the 2rows x 2cols complex
    representation.
    """
    if rows < 1 or cols < 1:
        raise DimensionError(f"dimensions must be positive, got {rows} x {cols}")
    if field.beta == 1:
        g = rng.standard_normal((rows, cols))
        return _buffer(g.astype(np.complex128), field)
    if field.beta == 2:
        return _buffer(_standard_complex(rng, (rows, cols)), field)
    a = _standard_complex(rng, (rows, cols))
    b = _standard_complex(rng, (rows, cols))
    return _buffer(quaternion_from_blocks(a, b), field)


def sample_elliptic(
    field: FieldClass, N: int, tau: float, rng: np.random.Generator
) -> ComplexMatrixBuffer:
    """Interpolation between a Ginibre draw and its Hermitian part."""
    if not 0.0 <= tau < 1.0:
        raise ParameterError(f"tau must lie in [0, 1), got {tau}")
    g = sample_gaussian_matrix(field, N, N, rng).entries
    c = (1.0 - tau) / (1.0 + tau)
    y = 0.5 * (1.0 + math.sqrt(c)) * g + 0.5 * (1.0 - math.sqrt(c)) * g.conj().T
    if field.beta == 4:
        y = enforce_quaternion_structure(y)
    return _buffer(y, field)


def sample_spherical(
    field: FieldClass, n: int, N: int, rng: np.random.Generator
) -> ComplexMatrixBuffer:
    """G1^{-1} G2 with G1 n x n and G2 n x N Gaussian over the field."""
    if not n >= N >= 1:
        raise DimensionError(f"need n >= N >= 1, got n={n}, N={N}")
    for _ in range(_SPHERICAL_MAX_REDRAWS):
        g1 = sample_gaussian_matrix(field, n, n, rng).entries
        g2 = sample_gaussian_matrix(field, n, N, rng).entries
        if np.linalg.cond(g1) > _SPHERICAL_COND_LIMIT:
            continue
        out = np.linalg.solve(g1, g2)
        if field.beta == 1:
            out = out.real.astype(np.complex128)
        elif field.beta == 4 and n == N:
            out = enforce_quaternion_structure(out)
        return _buffer(out, field)
    raise SamplingError(
        f"G1 numerically singular after {_SPHERICAL_MAX_REDRAWS} redraws (n={n})"
    )


def sample_haar_unitary(
    field: FieldClass, size: int, rng: np.random.Generator
) -> ComplexMatrixBuffer:
    """Haar element of U(size), O(size), or Sp(size) in complex representation.

    Orthonormalizes a Gaussian draw with the diagonal phase/sign fix
    that makes the QR-based construction exactly Haar.  The beta=4 case
    runs a quaternion-respecting Gram-Schmidt whose odd columns are the
    symplectic partners of the even ones, which yields exact Haar on
    the unitary-symplectic group by left invariance.
    """
    if size < 1:
        raise DimensionError(f"size must be positive, got {size}")
    if field.beta in (1, 2):
        g = sample_gaussian_matrix(field, size, size, rng).entries
        if field.beta == 1:
            q, r = np.linalg.qr(g.real)
            d = np.sign(np.diagonal(r))
            d[d == 0.0] = 1.0
            return _buffer((q * d).astype(np.complex128), field)
        q, r = np.linalg.qr(g)
        d = np.diagonal(r)
        return _buffer(q * (d.conj() / np.abs(d)), field)
    x = sample_gaussian_matrix(field, size, size, rng).entries
    two_n = 2 * size
    q = np.zeros((two_n, two_n), dtype=np.complex128)
    for k in range(size):
        v = x[:, 2 * k].copy()
        # Two orthogonalization passes keep loss of orthogonality at eps level.
        for _ in range(2):
            if k:
                coeffs = q[:, : 2 * k].conj().T @ v
                v -= q[:, : 2 * k] @ coeffs
        nrm = np.linalg.norm(v)
        if nrm == 0.0:
            raise SamplingError("degenerate Gaussian column during orthonormalization")
        v /= nrm
        q[:, 2 * k] = v
        q[:, 2 * k + 1] = _apply_Z(v.conj())
    return _buffer(q, field)


def sample_truncated_unitary(
    field: FieldClass,
    N: int,
    n: int,
    M: int | None = None,
    rng: np.random.Generator | None = None,
) -> ComplexMatrixBuffer:
    """Sub-block of a Haar unitary.

    Square case (M is None): parent size N + n, returns the leading
    N x N block.  Rectangular case: parent size M >= n + N, returns the
    leading n x N block (used as the base draw of induced ensembles).
    Haar invariance makes the block position immaterial.
    """
    if rng is None:
        raise ParameterError("rng is required")
    if N < 1 or n < 0:
        raise ParameterError(f"need N >= 1 and n >= 0, got N={N}, n={n}")
    if M is None:
        parent = N + n
        rows = cols = N
    else:
        if M < n + N:
            raise ParameterError(f"need M >= n + N, got M={M}, n={n}, N={N}")
        parent = M
        rows, cols = n, N
    u = sample_haar_unitary(field, parent, rng).entries
    blow = field.blowup
    return _buffer(u[: blow * rows, : blow * cols], field)


def _rectangular_base(
    spec: EnsembleSpec, n: int, N: int, rng: np.random.Generator
) -> np.ndarray:
    if spec.base_family == GINIBRE:
        return sample_gaussian_matrix(spec.field, n, N, rng).entries
    if spec.base_family == SPHERICAL:
        return sample_spherical(spec.field, n, N, rng).entries
    if spec.base_family == TRUNCATED_UNITARY:
        M = spec.M if spec.M is not None else 2 * (n + N)
        return sample_truncated_unitary(spec.field, N, n, M, rng).entries
    raise ParameterError(f"induced base family {spec.base_family!r} unsupported")


def sample_induced(
    base: EnsembleSpec, n: int, N: int, rng: np.random.Generator
) -> ComplexMatrixBuffer:
    """(G^dag G)^{1/2} U for a rectangular n x N base draw G and Haar U."""
    if n < N:
        raise ParameterError(f"induced construction requires n >= N, got n={n}, N={N}")
    g = _rectangular_base(base, n, N, rng)
    c = g.conj().T @ g
    c = 0.5 * (c + c.conj().T)
    w, v = np.linalg.eigh(c)
    root = (v * np.sqrt(np.maximum(w, 0.0))) @ v.conj().T
    u = sample_haar_unitary(base.field, N, rng).entries
    a = root @ u
    if base.field.beta == 1:
        a = a.real.astype(np.complex128)
    elif base.field.beta == 4:
        a = enforce_quaternion_structure(a)
    return _buffer(a, base.field)


def _sample_factor(spec: EnsembleSpec, rng: np.random.Generator) -> ComplexMatrixBuffer:
    if spec.factor_family == GINIBRE:
        return sample_gaussian_matrix(spec.field, spec.N, spec.N, rng)
    if spec.factor_family == SPHERICAL:
        return sample_spherical(spec.field, spec.N, spec.N, rng)
    if spec.factor_family == TRUNCATED_UNITARY:
        return sample_truncated_unitary(spec.field, spec.N, spec.n, None, rng)
    raise ParameterError(f"product factor family {spec.factor_family!r} unsupported")


def sample_product(
    factor: EnsembleSpec, m: int, rng: np.random.Generator
) -> ComplexMatrixBuffer:
    """Ordered product of m independent square factor draws.

    Ginibre factors are divided by sqrt(N) with the total log-scale
    tracked on the buffer, so products stay in floating-point range at
    any m; factors with O(1) spectra are multiplied as drawn.
    """
    if m < 1:
        raise ParameterError(f"m must be at least 1, got {m}")
    first = _sample_factor(factor, rng)
    scale = math.sqrt(factor.N) if factor.factor_family == GINIBRE else 1.0
    log_scale = m * math.log(scale)
    prod = first.entries / scale
    for _ in range(m - 1):
        prod = prod @ (_sample_factor(factor, rng).entries / scale)
    if factor.field.beta == 4:
        prod = enforce_quaternion_structure(prod)
    return _buffer(prod, factor.field, log_scale=log_scale)


def sample_selfdual(N: int, sigma: float, rng: np.random.Generator) -> ComplexMatrixBuffer:
    """Z_{2N} A_{2N} with A complex antisymmetric Gaussian.

    Independent upper-triangle entries of A have real and imaginary
    parts N(0, sigma^2); the spectrum is doubly degenerate.
    """
    if N < 1:
        raise ParameterError(f"N must be positive, got {N}")
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    two_n = 2 * N
    a = np.zeros((two_n, two_n), dtype=np.complex128)
    iu = np.triu_indices(two_n, k=1)
    vals = sigma * (
        rng.standard_normal(iu[0].size) + 1j * rng.standard_normal(iu[0].size)
    )
    a[iu] = vals
    a = a - a.T
    d = np.empty_like(a)
    d[0::2] = -a[1::2]
    d[1::2] = a[0::2]
    return _buffer(d, FieldClass(4))


def sample_cse_truncation(N: int, rng: np.random.Generator) -> ComplexMatrixBuffer:
    """Single quaternion row/column truncation of a CSE element.

    Forms S = Z^{-1} U^T Z U from Haar U in U(2(N+1)) and deletes the
    last quaternion row and column (the choice is immaterial by Haar
    invariance; fixing it aids reproducibility).
    """
    if N < 1:
        raise ParameterError(f"N must be positive, got {N}")
    u = sample_haar_unitary(FieldClass(2), 2 * (N + 1), rng).entries
    z = symplectic_unit(N + 1)
    s = np.linalg.solve(z, u.T @ z @ u)
    return _buffer(s[: 2 * N, : 2 * N], FieldClass(4))


def sample_matrix(spec: EnsembleSpec, rng: np.random.Generator) -> ComplexMatrixBuffer:
    """Draw one matrix of the ensemble described by `spec`."""
    if spec.family == GINIBRE:
        return sample_gaussian_matrix(spec.field, spec.N, spec.N, rng)
    if spec.family == ELLIPTIC:
        return sample_elliptic(spec.field, spec.N, spec.tau, rng)
    if spec.family == SPHERICAL:
        return sample_spherical(spec.field, spec.N, spec.N, rng)
    if spec.family == TRUNCATED_UNITARY:
        if spec.M is not None:
            raise ParameterError(
                "rectangular truncations are base draws for induced ensembles; "
                "set M=None for an eigenvalue run"
            )
        return sample_truncated_unitary(spec.field, spec.N, spec.n, None, rng)
    if spec.family == INDUCED:
        base = replace(spec, family=spec.base_family)
        return sample_induced(base, spec.n, spec.N, rng)
    if spec.family == PRODUCT:
        return sample_product(spec, spec.m, rng)
    if spec.family == SELF_DUAL:
        return sample_selfdual(spec.N, spec.sigma, rng)
    if spec.family == CSE_TRUNCATION:
        return sample_cse_truncation(spec.N, rng)
    raise ParameterError(f"unknown family {spec.family!r}")


def eigenvalues(matrix: ComplexMatrixBuffer) -> np.ndarray:
    """All eigenvalues of a square buffer, with any log scale applied."""
    if not matrix.is_square:
        raise DimensionError(f"matrix is {matrix.rows} x {matrix.cols}, need square")
    entries = matrix.entries
    try:
        if np.all(entries.imag == 0.0):
            # Real input: the real-arithmetic path returns exact conjugate
            # pairs and exactly real real-eigenvalues.
            eigs = np.linalg.eigvals(entries.real)
        else:
            eigs = np.linalg.eigvals(entries)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigensolver failed to converge: {exc}") from exc
    eigs = np.asarray(eigs, dtype=np.complex128)
    if matrix.log_scale != 0.0:
        eigs = eigs * math.exp(matrix.log_scale)
    return eigs


def _pair_up(
    vals: np.ndarray, gap_tol: float, seed: int | None
) -> tuple[np.ndarray, float]:
    """Greedily pair lexicographically sorted values; return means and max gap."""
    if vals.size % 2:
        raise PairingError(f"odd number of values to pair (seed={seed})")
    order = np.lexsort((vals.imag, vals.real))
    v = vals[order]
    gaps = np.abs(v[0::2] - v[1::2])
    max_gap = float(gaps.max(initial=0.0))
    if max_gap > gap_tol:
        raise PairingError(
            f"pair gap {max_gap:.3e} exceeds tolerance {gap_tol:.3e} (seed={seed})"
        )
    return 0.5 * (v[0::2] + v[1::2]), max_gap


def to_cloud(
    eigs: Sequence[complex] | np.ndarray,
    spec: EnsembleSpec,
    matrix_scale: float | None = None,
    seed: int | None = None,
) -> EigenvalueCloud:
    """Apply the field convention to raw eigenvalues.

    beta=2 passes through.  beta=4 pairs degenerate or conjugate pairs
    (gap tolerance 1e-6 sqrt(N), pure roundoff in exact arithmetic) and
    keeps one representative each; conjugate-symmetric families map the
    representative to the closed upper half-plane, the doubly
    degenerate families keep its true position.  beta=1 classifies an
    eigenvalue as real iff |Im| <= 1e-8 max(1, matrix_scale) and keeps
    the reals plus upper-half conjugate representatives.
    """
    eigs = np.asarray(eigs, dtype=np.complex128)
    beta = spec.field.beta
    if beta == 2:
        return EigenvalueCloud(
            points=eigs.copy(), field=spec.field, n_real=0, spec=spec,
            seed=-1 if seed is None else seed, max_pair_gap=0.0,
        )
    if beta == 4:
        if eigs.size != 2 * spec.N:
            raise PairingError(
                f"expected {2 * spec.N} eigenvalues at beta=4, got {eigs.size} (seed={seed})"
            )
        gap_tol = 1e-6 * math.sqrt(spec.N)
        if spec.family in DEGENERATE_FAMILIES:
            reps, max_gap = _pair_up(eigs, gap_tol, seed)
        else:
            folded = eigs.real + 1j * np.abs(eigs.imag)
            reps, max_gap = _pair_up(folded, gap_tol, seed)
            reps = reps.real + 1j * np.abs(reps.imag)
        return EigenvalueCloud(
            points=reps, field=spec.field, n_real=0, spec=spec,
            seed=-1 if seed is None else seed, max_pair_gap=max_gap,
        )
    # beta = 1
    scale = 1.0 if matrix_scale is None else max(1.0, matrix_scale)
    eps_real = 1e-8 * scale
    real_mask = np.abs(eigs.imag) <= eps_real
    n_real = int(real_mask.sum())
    if (eigs.size - n_real) % 2:
        raise PairingError(
            f"non-real eigenvalues do not pair up: {eigs.size - n_real} left (seed={seed})"
        )
    complex_part = eigs[~real_mask]
    max_gap = 0.0
    if complex_part.size:
        folded = complex_part.real + 1j * np.abs(complex_part.imag)
        gap_tol = 1e-6 * math.sqrt(max(spec.N, 1))
        reps, max_gap = _pair_up(folded, gap_tol, seed)
        reps = reps.real + 1j * np.abs(reps.imag)
    else:
        reps = np.empty(0, dtype=np.complex128)
    points = np.concatenate([eigs[real_mask].real.astype(np.complex128), reps])
    return EigenvalueCloud(
        points=points, field=spec.field, n_real=n_real, spec=spec,
        seed=-1 if seed is None else seed, max_pair_gap=max_gap,
    )


def sample_cloud(spec: EnsembleSpec, seed: int, index: int = 0) -> EigenvalueCloud:
    """Draw `index` of the run (spec, seed), reduced to its eigenvalue cloud."""
    rng = rng_stream(seed, index)
    buf = sample_matrix(spec, rng)
    scale = None
    if spec.field.beta == 1:
        norm = float(np.linalg.norm(buf.entries))
        scale = norm / math.sqrt(buf.rows) if buf.rows else 1.0
    try:
        eigs = eigenvalues(buf)
    except SolverError as exc:
        raise SolverError(f"{exc} (seed={seed}, index={index})") from exc
    return to_cloud(eigs, spec, matrix_scale=scale, seed=seed)


def iter_clouds(spec: EnsembleSpec, n_samples: int, seed: int) -> Iterator[EigenvalueCloud]:
    """Serial stream of the run's clouds in draw order."""
    for index in range(n_samples):
        yield sample_cloud(spec, seed, index)


def _cloud_payload(args: tuple[EnsembleSpec, int, int]):
    spec, seed, index = args
    cloud = sample_cloud(spec, seed, index)
    return index, cloud.points, cloud.n_real, cloud.max_pair_gap


def sample_clouds(
    spec: EnsembleSpec, n_samples: int, seed: int, workers: int = 1
) -> list[EigenvalueCloud]:
    """All clouds of a run, optionally drawn on a process pool.

    Each draw derives its stream from (seed, index), so the result is
    identical for any worker count; payloads are reassembled in draw
    order.
    """
    if workers <= 1 or n_samples <= 1:
        return list(iter_clouds(spec, n_samples, seed))
    from concurrent.futures import ProcessPoolExecutor

    args = ((spec, seed, i) for i in range(n_samples))
    chunk = max(1, n_samples // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        payloads = list(pool.map(_cloud_payload, args, chunksize=chunk))
    payloads.sort(key=lambda item: item[0])
    return [
        EigenvalueCloud(
            points=pts, field=spec.field, n_real=n_real, spec=spec,
            seed=seed, max_pair_gap=gap,
        )
        for _, pts, n_real, gap in payloads
    ]


def spectral_radius(spec: EnsembleSpec) -> float | None:
    """Leading-order support radius of the eigenvalue cloud, if bounded.

    Used to size estimator windows.  Returns None for the spherical
    family, whose plane support is unbounded.
    """
    beta = spec.field.beta
    if spec.family == GINIBRE:
        return math.sqrt(2.0 * spec.N) if beta == 4 else math.sqrt(spec.N)
    if spec.family == ELLIPTIC:
        root = math.sqrt(2.0 * spec.N) if beta == 4 else math.sqrt(spec.N)
        return root * (1.0 + spec.tau) / math.sqrt(1.0 + spec.tau)
    if spec.family == SPHERICAL:
        return None
    if spec.family == TRUNCATED_UNITARY:
        return math.sqrt(1.0 / (1.0 + spec.n / spec.N))
    if spec.family == INDUCED:
        if spec.base_family == GINIBRE:
            radius = math.sqrt(spec.n)
            return radius * math.sqrt(2.0) if beta == 4 else radius
        if spec.base_family == SPHERICAL:
            return None
        M = spec.M if spec.M is not None else 2 * (spec.n + spec.N)
        return math.sqrt(spec.n / M)
    if spec.family == PRODUCT:
        if spec.factor_family == GINIBRE:
            per = 2.0 * spec.N if beta == 4 else float(spec.N)
            return per ** (spec.m / 2.0)
        if spec.factor_family == SPHERICAL:
            return None
        return math.sqrt(1.0 / (1.0 + spec.n / spec.N)) ** spec.m
    if spec.family == SELF_DUAL:
        return 2.0 * spec.sigma * math.sqrt(spec.N)
    if spec.family == CSE_TRUNCATION:
        return 1.0
    return None
