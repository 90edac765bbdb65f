"""Boys function and Rys quadrature nodes.

All computations in this module are double precision, whatever precision
the integral kernel later runs in.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

M_MAX = 28
N_RYS_MAX = 7

# Below this argument the series + downward recursion is used; above it the
# closed-form F_0 with upward recursion is stable for every m <= M_MAX.
_SERIES_LIMIT = 60.0

# exp(-T t^2) is truncated where T t^2 reaches this value and the remaining
# support is discretized with a fixed Gauss-Legendre rule.
_SUPPORT_EXPONENT = 80.0
_DISCRETE_POINTS = 96


class RysConvergenceError(ArithmeticError):
    """Root computation produced an invalid quadrature rule."""


def boys(m_max: int, T: float) -> np.ndarray:
    """Values ``F_0(T) .. F_{m_max}(T)`` of the Boys function.

    ``F_m(T) = integral_0^1 u^(2m) exp(-T u^2) du``.
    """
    if not 0 <= m_max <= M_MAX:
        raise ValueError(f"m_max must be in [0, {M_MAX}], got {m_max}")
    T = float(T)
    if not T >= 0.0:
        raise ValueError(f"Boys argument must be non-negative, got {T}")
    out = np.empty(m_max + 1)
    if T < _SERIES_LIMIT:
        # F_m(T) = e^{-T} sum_k (2T)^k / ((2m+1)(2m+3)...(2m+2k+1))
        term = 1.0 / (2 * m_max + 1)
        total = term
        k = 1
        while term > 1e-17 * total:
            term *= 2.0 * T / (2 * m_max + 2 * k + 1)
            total += term
            k += 1
        emt = math.exp(-T)
        out[m_max] = total * emt
        for m in range(m_max - 1, -1, -1):
            out[m] = (2.0 * T * out[m + 1] + emt) / (2 * m + 1)
    else:
        emt = math.exp(-T)
        out[0] = 0.5 * math.sqrt(math.pi / T) * math.erf(math.sqrt(T))
        for m in range(m_max):
            out[m + 1] = ((2 * m + 1) * out[m] - emt) / (2.0 * T)
    return out


@dataclass(frozen=True)
class RysNodeSet:
    """Roots ``t`` in (0, 1) and weights ``w`` of an order-``n`` Rys rule."""

    n_rys: int
    T: float
    roots: np.ndarray
    weights: np.ndarray

    def moments(self, m_max: int) -> np.ndarray:
        """``sum_mu w_mu t_mu^(2m)`` for m = 0..m_max."""
        t2 = self.roots**2
        return np.array([np.dot(self.weights, t2**m) for m in range(m_max + 1)])


@lru_cache(maxsize=None)
def _legendre_rule(npts: int):
    """Gauss-Legendre nodes and weights in extended precision.

    Double-precision starting values are refined by Newton steps on the
    Legendre recurrence evaluated in ``np.longdouble``.
    """
    x = np.polynomial.legendre.leggauss(npts)[0].astype(np.longdouble)
    for _ in range(3):
        p0, p1 = np.ones_like(x), x.copy()
        for k in range(2, npts + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        dp = npts * (x * p1 - p0) / (x * x - 1)
        x = x - p1 / dp
    p0, p1 = np.ones_like(x), x.copy()
    for k in range(2, npts + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = npts * (x * p1 - p0) / (x * x - 1)
    return x, 2 / ((1 - x * x) * dp * dp)


def _lanczos(nodes: np.ndarray, weights: np.ndarray, n: int):
    """Jacobi matrix ``(alpha, sqrt(beta))`` of a discrete measure.

    Lanczos on ``diag(nodes)`` started from ``sqrt(weights)``, with full
    reorthogonalization so the recurrence stays accurate to rounding.
    Runs in the dtype of ``nodes``.
    """
    dt = nodes.dtype
    q = np.sqrt(weights)
    norm0 = np.sqrt(q @ q)
    Q = np.zeros((n, nodes.size), dtype=dt)
    Q[0] = q / norm0
    alpha = np.zeros(n, dtype=dt)
    offdiag = np.zeros(n - 1, dtype=dt)
    for k in range(n):
        v = nodes * Q[k]
        alpha[k] = Q[k] @ v
        v -= alpha[k] * Q[k]
        if k > 0:
            v -= offdiag[k - 1] * Q[k - 1]
        for _ in range(2):
            v -= Q[: k + 1].T @ (Q[: k + 1] @ v)
        if k + 1 < n:
            offdiag[k] = np.sqrt(v @ v)
            if not offdiag[k] > 0:
                raise RysConvergenceError("Lanczos breakdown")
            Q[k + 1] = v / offdiag[k]
    return alpha, offdiag, norm0**2


def _polish(x, offdiag, mass, steps: int = 3):
    """Newton steps on the roots of the degree-``len(offdiag)+1`` orthonormal
    polynomial of a symmetric measure, then Christoffel weights.

    ``x`` are approximate roots; arithmetic follows the dtype of ``offdiag``.
    """
    npts = offdiag.size + 1
    x = x.astype(offdiag.dtype)
    p0 = 1.0 / np.sqrt(mass)
    for it in range(steps + 1):
        # orthonormal p_k and derivatives by the three-term recurrence
        pm, p = np.zeros_like(x), np.full_like(x, p0)
        dm, d = np.zeros_like(x), np.zeros_like(x)
        ssum = p * p
        for k in range(npts):
            beta_k = offdiag[k - 1] if k > 0 else 0.0
            beta_next = offdiag[k] if k < npts - 1 else 1.0
            pn = (x * p - beta_k * pm) / beta_next
            dn = (p + x * d - beta_k * dm) / beta_next
            pm, p, dm, d = p, pn, d, dn
            if k < npts - 1:
                ssum = ssum + p * p
        if it == steps:
            return x, 1.0 / ssum
        x = x - p / d


def rys_roots_weights(n_rys: int, T: float) -> RysNodeSet:
    """Order-``n_rys`` Rys quadrature for argument ``T``.

    The rule satisfies ``sum w t^(2m) = F_m(T)`` for ``m <= 2 n_rys - 1``.
    It is the positive half of the symmetric ``2 n_rys``-point Gauss rule for
    ``exp(-T t^2)`` on [-1, 1].  The weight is supported on [-h, h] with
    ``h = min(1, sqrt(80 / T))``; beyond that it is below exp(-80) of its
    peak, far under double precision for every moment used.
    """
    if not 1 <= n_rys <= N_RYS_MAX:
        raise ValueError(f"Rys order must be in [1, {N_RYS_MAX}], got {n_rys}")
    T = float(T)
    if not T >= 0.0:
        raise ValueError(f"Rys argument must be non-negative, got {T}")
    npts = 2 * n_rys
    h = 1.0 if T <= _SUPPORT_EXPONENT else math.sqrt(_SUPPORT_EXPONENT / T)
    x, wx = _legendre_rule(_DISCRETE_POINTS)
    # the recurrence is built in extended precision and the double
    # eigenvalues are refined against it, so the rule is exact to rounding
    ext = np.longdouble
    t = ext(h) * x
    _, offdiag, mass = _lanczos(t, ext(h) * wx * np.exp(-ext(T) * t * t), npts)
    # symmetric weight: the diagonal vanishes exactly
    nodes = eigh_tridiagonal(np.zeros(npts), offdiag.astype(float), eigvals_only=True)
    nodes, weights = _polish(nodes[nodes > 0], offdiag, mass)
    roots = nodes.astype(float)
    w = weights.astype(float)
    if roots.size != n_rys or not (np.all(roots < 1.0) and np.all(w > 0)):
        raise RysConvergenceError(f"invalid Rys rule (n={n_rys}, T={T})")
    return RysNodeSet(n_rys, T, roots, w)


def quartet_argument(q) -> float:
    """Quadrature argument ``T = rho |P - Q|^2`` of a quartet.

    ``P`` and ``Q`` are the Gaussian product centers of the bra and ket
    pairs and ``rho = p q / (p + q)`` the reduced exponent.
    """
    centers = q.centers
    a, b, c, d = q.exponents
    p = a + b
    qq = c + d
    P = (a * centers[0] + b * centers[1]) / p
    Q = (c * centers[2] + d * centers[3]) / qq
    PQ = P - Q
    return float(p * qq / (p + qq) * np.dot(PQ, PQ))


def prepare_quartet_rys(q) -> RysNodeSet:
    """Rys rule of the order required by the quartet's class."""
    return rys_roots_weights(q.qclass.n_rys, quartet_argument(q))
