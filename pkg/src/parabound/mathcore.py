"""Dense SPD linear algebra and the special functions behind the closed forms.

Everything here is deterministic: the Jacobi eigensolver sweeps the upper
triangle in a fixed order, and quadrature fallbacks accumulate in a fixed
order, so repeated runs produce bit-identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import (
    AsymmetricInput,
    DivergentIntegral,
    DomainError,
    NotPositiveDefinite,
    QuadratureFailure,
)

MAX_DIM = 8

# Relative tolerance on |m - m.T| before input is rejected.
SYMMETRY_TOL = 1e-14
# Smallest admissible eigenvalue, relative to the largest.
POSDEF_RATIO = 1e-12

_JACOBI_MAX_SWEEPS = 60


def _jacobi_eigh(a):
    """Cyclic Jacobi eigendecomposition of a small symmetric matrix.

    Sweeps (p, q) over the strict upper triangle in row-major order until
    the off-diagonal mass is negligible. Returns eigenvalues sorted
    ascending (stable sort, preserving sweep order among ties) and the
    matching orthonormal eigenvector columns.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return a[0, :1].copy(), v
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = math.sqrt(2.0 * sum(a[p, q] ** 2 for p in range(n - 1) for q in range(p + 1, n)))
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-18 * scale:
                    continue
                theta = 0.5 * (a[q, q] - a[p, p]) / apq
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    eigvals = np.diag(a).copy()
    order = np.argsort(eigvals, kind="stable")
    return eigvals[order], v[:, order]


class SpdMatrix:
    """Symmetric positive definite matrix of order 1..8.

    The stored entries are exactly symmetric. Construction rejects inputs
    whose asymmetry exceeds ``SYMMETRY_TOL`` relative to the largest entry
    (AsymmetricInput) or whose smallest eigenvalue is at or below
    ``POSDEF_RATIO`` times the largest (NotPositiveDefinite). Instances are
    immutable and safe to share across threads.
    """

    __slots__ = ("entries", "_eigvals", "_eigvecs")

    def __init__(self, entries):
        m = np.array(entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"expected a square matrix, got shape {m.shape}")
        n = m.shape[0]
        if not 1 <= n <= MAX_DIM:
            raise DomainError(f"dimension {n} outside supported range 1..{MAX_DIM}")
        if not np.all(np.isfinite(m)):
            raise DomainError("matrix entries must be finite")
        scale = float(np.abs(m).max())
        if scale > 0.0 and float(np.abs(m - m.T).max()) > SYMMETRY_TOL * scale:
            raise AsymmetricInput("matrix asymmetry exceeds tolerance")
        m = 0.5 * (m + m.T)
        eigvals, eigvecs = _jacobi_eigh(m)
        if eigvals[-1] <= 0.0 or eigvals[0] <= POSDEF_RATIO * eigvals[-1]:
            raise NotPositiveDefinite(
                f"eigenvalue {eigvals[0]:.3e} at or below threshold "
                f"{POSDEF_RATIO:.0e} * {eigvals[-1]:.3e}"
            )
        m.setflags(write=False)
        eigvals.setflags(write=False)
        eigvecs.setflags(write=False)
        self.entries = m
        self._eigvals = eigvals
        self._eigvecs = eigvecs

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, n: int) -> "SpdMatrix":
        return cls(np.eye(n))

    @classmethod
    def diagonal(cls, diag) -> "SpdMatrix":
        return cls(np.diag(np.asarray(diag, dtype=float)))

    def __repr__(self):
        return f"SpdMatrix({self.entries.tolist()!r})"


@dataclass(frozen=True)
class SpdDecomposition:
    """Eigendecomposition of an SpdMatrix with the derived SPD matrices.

    ``eigenvalues`` are sorted ascending and ``eigenvectors`` holds the
    matching orthonormal columns, so column 0 spans (a deterministic choice
    of) the lowest eigendirection.
    """

    matrix: SpdMatrix
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sqrt: SpdMatrix
    inv_sqrt: SpdMatrix
    inverse: SpdMatrix
    det_sqrt: float


def _assemble_spd(eigvecs, diag_values):
    m = (eigvecs * diag_values) @ eigvecs.T
    return SpdMatrix(0.5 * (m + m.T))


def decompose(m: SpdMatrix) -> SpdDecomposition:
    """Eigendecompose an SPD matrix and derive sqrt, inv_sqrt, inverse.

    Deterministic for a given input (fixed Jacobi sweep order).
    """
    lam, q = m._eigvals, m._eigvecs
    return SpdDecomposition(
        matrix=m,
        eigenvalues=lam,
        eigenvectors=q,
        sqrt=_assemble_spd(q, np.sqrt(lam)),
        inv_sqrt=_assemble_spd(q, 1.0 / np.sqrt(lam)),
        inverse=_assemble_spd(q, 1.0 / lam),
        det_sqrt=float(np.prod(np.sqrt(lam))),
    )


def spectral_norm_inv_sqrt(d: SpdDecomposition) -> float:
    """Spectral norm of the inverse square root: (lowest eigenvalue)^(-1/2).

    Equals the maximum of |inv_sqrt @ l| over unit vectors l.
    """
    return 1.0 / math.sqrt(float(d.eigenvalues[0]))


# Lanczos approximation with g = 7 and 9 coefficients. Accurate to ~1e-14
# relative on the positive real axis; reflection is never needed here since
# the domain is x > 0 (values in (0, 0.5) go through the recurrence).
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

GAMMA_MAX_ARG = 172.0


def _lanczos_series(z: float) -> float:
    s = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        s += _LANCZOS_COEF[i] / (z + i)
    return s


def gamma(x: float) -> float:
    """Gamma function on (0, 172].

    Relative error <= 1e-12 against high-precision references.
    """
    if not x > 0.0:
        raise DomainError(f"gamma requires x > 0, got {x}")
    if x > GAMMA_MAX_ARG:
        raise DomainError(f"gamma({x}) overflows float64; domain capped at {GAMMA_MAX_ARG}")
    if x < 0.5:
        return gamma(x + 1.0) / x
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    # Single exponential keeps t**(z+0.5) from overflowing before e^{-t}
    # can compensate near the top of the domain.
    return math.sqrt(2.0 * math.pi) * _lanczos_series(z) * math.exp((z + 0.5) * math.log(t) - t)


def log_gamma(x: float) -> float:
    """log(gamma(x)) for x > 0, stable for arbitrarily large x."""
    if not x > 0.0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    if x < 0.5:
        return log_gamma(x + 1.0) - math.log(x)
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + math.log(_lanczos_series(z)) + (z + 0.5) * math.log(t) - t


_INCGAMMA_MAX_ITER = 600
_INCGAMMA_EPS = 1e-16


def lower_incomplete_gamma(a: float, x: float) -> float:
    """Lower incomplete gamma integral of t^(a-1) e^(-t) over (0, x).

    Series expansion for x < a + 1, continued fraction for the upper tail
    otherwise (the classical regime split).
    """
    if not a > 0.0:
        raise DomainError(f"lower_incomplete_gamma requires a > 0, got {a}")
    if x < 0.0:
        raise DomainError(f"lower_incomplete_gamma requires x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    log_front = a * math.log(x) - x
    if x < a + 1.0:
        term = 1.0 / a
        total = term
        k = 0
        while k < _INCGAMMA_MAX_ITER:
            k += 1
            term *= x / (a + k)
            total += term
            if abs(term) < _INCGAMMA_EPS * abs(total):
                return total * math.exp(log_front)
        raise QuadratureFailure("incomplete gamma series did not converge")
    # Modified Lentz continued fraction for the upper integral.
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _INCGAMMA_MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _INCGAMMA_EPS:
            upper = math.exp(log_front) * h
            return gamma(a) - upper
    raise QuadratureFailure("incomplete gamma continued fraction did not converge")


def _singularity_exponent(n: int, p_conj: float) -> float:
    return 0.5 * (n * (p_conj - 1.0) + p_conj)


def duhamel_time_integral(t: float, n: int, p_conj: float, c: float) -> float:
    """Integral over (0, t) of e^(p' c tau) * tau^(-s), s = (n(p'-1)+p')/2.

    This is the time factor of the nonhomogeneous gradient bound; it
    converges exactly when s < 1, i.e. p > n + 2. Negative reaction rates
    go through the lower-incomplete-gamma closed form; nonnegative ones
    through a singularity-removing substitution plus adaptive quadrature
    (the two paths agree on overlapping domains).
    """
    if not t > 0.0:
        raise DomainError(f"time integral requires t > 0, got {t}")
    if p_conj < 1.0:
        raise DomainError(f"conjugate exponent must be >= 1, got {p_conj}")
    s = _singularity_exponent(n, p_conj)
    if s >= 1.0:
        raise DivergentIntegral(
            f"singularity exponent s = {s:.6g} >= 1 (requires p > n + 2)"
        )
    if c == 0.0:
        return t ** (1.0 - s) / (1.0 - s)
    if c < 0.0:
        beta = -p_conj * c
        return math.exp((s - 1.0) * math.log(beta)) * lower_incomplete_gamma(1.0 - s, beta * t)
    return duhamel_time_integral_quadrature(t, n, p_conj, c)


def duhamel_time_integral_quadrature(
    t: float, n: int, p_conj: float, c: float, rel_tol: float = 1e-10
) -> float:
    """Quadrature path of the Duhamel time integral for any sign of c.

    Substitutes tau = v^(1/(1-s)) so the integrand becomes the bounded
    function e^(p' c tau(v)) / (1-s), then applies adaptive Gauss-Kronrod.
    Kept callable on c < 0 as the cross-check of the closed form.
    """
    if not t > 0.0:
        raise DomainError(f"time integral requires t > 0, got {t}")
    if p_conj < 1.0:
        raise DomainError(f"conjugate exponent must be >= 1, got {p_conj}")
    s = _singularity_exponent(n, p_conj)
    if s >= 1.0:
        raise DivergentIntegral(
            f"singularity exponent s = {s:.6g} >= 1 (requires p > n + 2)"
        )
    power = 1.0 / (1.0 - s)
    upper = t ** (1.0 - s)

    def integrand(v):
        return math.exp(p_conj * c * v**power) / (1.0 - s)

    value, err = integrate.quad(integrand, 0.0, upper, epsabs=0.0, epsrel=1e-12, limit=200)
    if not math.isfinite(value) or err > rel_tol * max(abs(value), 1e-300):
        raise QuadratureFailure(
            f"time-integral quadrature error {err:.3e} exceeds {rel_tol:.1e} relative"
        )
    return value
