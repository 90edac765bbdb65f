import itertools
import math

import numpy as np
import pytest
from scipy.integrate import quad, quad_vec

from conftest import eri_deviation, normwise, random_quartet
from ryseri.oracle import hermite_coefficients, md_eri, ssss_closed_form
from ryseri.shells import QuartetClass, QuartetInput, cartesian_components, normalization

GH_X, GH_W = np.polynomial.hermite.hermgauss(10)


def _axis_integral(u, ex, pos, powers):
    """int int (x1-A)^i (x1-B)^j (x2-C)^k (x2-D)^l exp(...) exp(-u^2 (x1-x2)^2).

    Exact 2-D Gauss-Hermite after whitening the Gaussian part.
    """
    a, b, c, d = ex
    A, B, C, D = pos
    u2 = u * u
    M = np.array([[a + b + u2, -u2], [-u2, c + d + u2]])
    h = np.array([a * A + b * B, c * C + d * D])
    m = np.linalg.solve(M, h)
    const = h @ m - (a * A * A + b * B * B + c * C * C + d * D * D)
    L = np.linalg.cholesky(M)
    y = np.stack(np.meshgrid(GH_X, GH_X, indexing="ij")).reshape(2, -1)
    w = np.outer(GH_W, GH_W).ravel()
    z = m[:, None] + np.linalg.solve(L.T, y)
    x1, x2 = z
    i, j, k, l = powers
    poly = (x1 - A) ** i * (x1 - B) ** j * (x2 - C) ** k * (x2 - D) ** l
    return math.exp(const) / np.prod(np.diag(L)) * float(w @ poly)


def numeric_eri(q: QuartetInput) -> np.ndarray:
    """1/r12 = 2/sqrt(pi) int_0^inf exp(-u^2 r12^2) du, axis-factorized."""
    comps = [cartesian_components(L) for L in q.qclass]
    ex = q.exponents
    cen = q.centers
    idx = list(itertools.product(*[range(len(c)) for c in comps]))

    def integrand(u):
        out = np.empty(len(idx))
        for n, (ia, ib, ic, id_) in enumerate(idx):
            val = 1.0
            for x in range(3):
                powers = (comps[0][ia][x], comps[1][ib][x], comps[2][ic][x], comps[3][id_][x])
                val *= _axis_integral(u, ex, cen[:, x], powers)
            out[n] = val
        return out

    val, _ = quad_vec(integrand, 0, np.inf, epsabs=1e-15, epsrel=1e-12)
    norm = math.prod(normalization(s.exponent, (s.L, 0, 0)) for s in q.shells)
    shape = tuple(len(c) for c in comps)
    return (2 / math.sqrt(math.pi)) * norm * val.reshape(shape)


@pytest.mark.parametrize("cls", ["ss|ss", "ps|ss", "pp|ss", "ps|ps", "pp|pp", "ds|ps", "sd|sp", "dp|sd"])
def test_md_against_numeric(cls, rng):
    for _ in range(2):
        q = random_quartet(QuartetClass.parse(cls), rng)
        assert eri_deviation(md_eri(q), numeric_eri(q), 1e-9, floor=1e-11) <= 1.0


def test_ssss_closed_form_matches_md(rng):
    for _ in range(10):
        q = random_quartet((0, 0, 0, 0), rng, box=3.0)
        assert md_eri(q)[0, 0, 0, 0] == pytest.approx(ssss_closed_form(q), rel=1e-14)


def test_ssss_closed_form_rejects(rng):
    with pytest.raises(ValueError):
        ssss_closed_form(random_quartet((1, 0, 0, 0), rng))


def test_ssss_coincident_value():
    q = QuartetInput.from_arrays((0, 0, 0, 0), np.zeros((4, 3)), [1.0] * 4)
    # 2 pi^2.5 / (4 sqrt 4) (2/pi)^3
    assert ssss_closed_form(q) == pytest.approx(2 * math.pi**2.5 / 8 * (2 / math.pi) ** 3, rel=1e-15)


def test_hermite_coefficients_overlap():
    # E^{00}_0 times (pi/p)^(1/2) is the 1-D overlap; check one p-p pair by quadrature
    alpha, beta, A, B = 0.9, 1.4, 0.3, -0.5
    E = hermite_coefficients(1, 1, alpha, beta, A - B)
    p = alpha + beta
    ref, _ = quad(lambda x: (x - A) * (x - B) * math.exp(-alpha * (x - A) ** 2 - beta * (x - B) ** 2), -np.inf, np.inf, epsabs=0, epsrel=1e-13)
    assert E[1, 1, 0] * math.sqrt(math.pi / p) == pytest.approx(ref, rel=1e-11)


def test_translation_and_inversion(rng):
    q = random_quartet(QuartetClass.parse("dp|fs"), rng)
    base = md_eri(q)
    assert normwise(md_eri(q.translated(np.array([1.5, -4.0, 2.0]))), base) < 1e-13
    # inversion through the origin flips the sign by (-1)^(sum L)
    inv = QuartetInput.from_arrays(q.qclass, -q.centers, q.exponents)
    assert normwise(md_eri(inv), (-1) ** sum(q.qclass) * base) < 1e-13


def test_symmetry_bra_ket(rng):
    q = random_quartet(QuartetClass.parse("pd|sp"), rng)
    swapped = QuartetInput.from_arrays((0, 1, 1, 2), q.centers[[2, 3, 0, 1]], q.exponents[[2, 3, 0, 1]])
    assert normwise(md_eri(swapped), md_eri(q).transpose(2, 3, 0, 1)) < 1e-14
