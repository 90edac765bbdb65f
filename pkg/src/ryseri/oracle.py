"""Reference integrals by the McMurchie-Davidson scheme, in double precision.

Shares nothing with the Rys kernel except the Boys function.  Hermite
expansion coefficients come from the two-term recurrence for Gaussian
overlap distributions and the Hermite Coulomb integrals from the usual
recursion in (t, u, v, n).  Slow, simple and independent.
"""
from __future__ import annotations

import math

import numpy as np

from .rys import boys
from .shells import QuartetInput, cartesian_components, normalization


def hermite_coefficients(la: int, lb: int, alpha: float, beta: float, AB: float) -> np.ndarray:
    """``E[i, j, t]`` for one Cartesian axis, i <= la, j <= lb, t <= i + j.

    ``AB`` is A - B along the axis; E[0, 0, 0] carries exp(-mu AB^2).
    """
    p = alpha + beta
    mu = alpha * beta / p
    XPA = -beta / p * AB
    XPB = alpha / p * AB
    E = np.zeros((la + 1, lb + 1, la + lb + 2))
    E[0, 0, 0] = math.exp(-mu * AB * AB)
    for i in range(la + 1):
        for j in range(lb + 1):
            if i == 0 and j == 0:
                continue
            if i > 0:
                prev, X = E[i - 1, j], XPA
            else:
                prev, X = E[i, j - 1], XPB
            for t in range(i + j + 1):
                val = X * prev[t] + (t + 1) * prev[t + 1]
                if t > 0:
                    val += prev[t - 1] / (2.0 * p)
                E[i, j, t] = val
    return E[:, :, : la + lb + 1]


def hermite_coulomb(L: int, alpha: float, PQ) -> np.ndarray:
    """``R[t, u, v]`` (n = 0) for t + u + v <= L."""
    X, Y, Z = PQ
    T = alpha * (X * X + Y * Y + Z * Z)
    F = boys(L, T)
    # R[n][t, u, v]; R^n_000 = (-2 alpha)^n F_n(T)
    R = np.zeros((L + 1, L + 1, L + 1, L + 1))
    for n in range(L + 1):
        R[n, 0, 0, 0] = (-2.0 * alpha) ** n * F[n]
    # build downward in n: level n needs total order <= L - n
    for n in range(L - 1, -1, -1):
        top = L - n
        for t in range(top + 1):
            for u in range(top + 1 - t):
                for v in range(top + 1 - t - u):
                    if t == u == v == 0:
                        continue
                    if t > 0:
                        val = X * R[n + 1, t - 1, u, v]
                        if t > 1:
                            val += (t - 1) * R[n + 1, t - 2, u, v]
                    elif u > 0:
                        val = Y * R[n + 1, t, u - 1, v]
                        if u > 1:
                            val += (u - 1) * R[n + 1, t, u - 2, v]
                    else:
                        val = Z * R[n + 1, t, u, v - 1]
                        if v > 1:
                            val += (v - 1) * R[n + 1, t, u, v - 2]
                    R[n, t, u, v] = val
    return R[0]


def _pair_expansion(La, Lb, alpha, beta, A, B):
    """Hermite coefficients of every component pair, shape (na, nb, box)."""
    E = [hermite_coefficients(La, Lb, alpha, beta, A[x] - B[x]) for x in range(3)]
    n = La + Lb + 1
    comps_a = cartesian_components(La)
    comps_b = cartesian_components(Lb)
    out = np.zeros((len(comps_a), len(comps_b), n, n, n))
    for ia, (ax, ay, az) in enumerate(comps_a):
        for ib, (bx, by, bz) in enumerate(comps_b):
            out[ia, ib] = np.einsum(
                "t,u,v->tuv", E[0][ax, bx], E[1][ay, by], E[2][az, bz]
            )
    return out


def md_eri(q: QuartetInput) -> np.ndarray:
    """Integrals of ``q`` as a tensor indexed ``[a, b, c, d]``."""
    (A, B, C, D) = q.centers
    (a, b, c, d) = q.exponents
    La, Lb, Lc, Ld = q.qclass
    p, qq = a + b, c + d
    P = (a * A + b * B) / p
    Q = (c * C + d * D) / qq
    alpha = p * qq / (p + qq)
    Eab = _pair_expansion(La, Lb, a, b, A, B)
    Ecd = _pair_expansion(Lc, Ld, c, d, C, D)
    nab, ncd = La + Lb + 1, Lc + Ld + 1
    R = hermite_coulomb(La + Lb + Lc + Ld, alpha, P - Q)
    # ket Hermite functions enter with (-1)^(tau + nu + phi)
    sign = np.array([(-1.0) ** k for k in range(ncd)])
    Ecd = Ecd * np.einsum("t,u,v->tuv", sign, sign, sign)
    t = np.arange(nab)
    s = np.arange(ncd)
    ts = t[:, None] + s[None, :]
    # Rmat[(t,u,v), (tau,nu,phi)] = R[t+tau, u+nu, v+phi]
    Rmat = R[ts[:, None, None, :, None, None], ts[None, :, None, None, :, None], ts[None, None, :, None, None, :]]
    Rmat = Rmat.reshape(nab**3, ncd**3)
    na, nb, nc, nd = Eab.shape[0], Eab.shape[1], Ecd.shape[0], Ecd.shape[1]
    eri = Eab.reshape(na * nb, -1) @ Rmat @ Ecd.reshape(nc * nd, -1).T
    pref = 2.0 * math.pi**2.5 / (p * qq * math.sqrt(p + qq))
    norm = math.prod(normalization(s.exponent, (s.L, 0, 0)) for s in q.shells)
    return (pref * norm) * eri.reshape(na, nb, nc, nd)


def ssss_closed_form(q: QuartetInput) -> float:
    """Analytic [ss|ss] through F_0."""
    if any(s.L != 0 for s in q.shells):
        raise ValueError("closed form only applies to four s shells")
    (A, B, C, D) = q.centers
    (a, b, c, d) = q.exponents
    p, qq = a + b, c + d
    P = (a * A + b * B) / p
    Q = (c * C + d * D) / qq
    rho = p * qq / (p + qq)
    T = rho * float(np.dot(P - Q, P - Q))
    if T < 1e-15:
        f0 = 1.0 - T / 3.0
    else:
        f0 = 0.5 * math.sqrt(math.pi / T) * math.erf(math.sqrt(T))
    k_ab = math.exp(-a * b / p * float(np.dot(A - B, A - B)))
    k_cd = math.exp(-c * d / qq * float(np.dot(C - D, C - D)))
    norm = math.prod((2.0 * x / math.pi) ** 0.75 for x in (a, b, c, d))
    return 2.0 * math.pi**2.5 / (p * qq * math.sqrt(p + qq)) * k_ab * k_cd * norm * f0
