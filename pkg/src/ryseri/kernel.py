"""Rys quadrature integral kernel, specialized per quartet class.

A quartet passes through four stages: setup (auxiliary arrays B and C and
the scalar prefactor), the recurrence stage (vertical then horizontal
recurrences building the intermediate tensor I), Gaussian quadrature over
the Rys nodes, and finally compression (see :mod:`ryseri.compress`).

The stage functions are written against plain numpy arithmetic so the same
code runs in float32, float64, or on object arrays of instrumented scalars
(used by :mod:`ryseri.flops` to count operations).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .rys import RysNodeSet, prepare_quartet_rys
from .shells import (
    QuartetClass,
    QuartetInput,
    canonicalize,
    cartesian_components,
    normalization,
    permute_eri_tensor,
    permute_input,
)

PRECISIONS = {"single": np.float32, "double": np.float64}

# 2 pi^(5/2), the constant of the [ss|ss] integral
_TWO_PI_52 = 2.0 * math.pi**2.5


def pow2(n: int) -> int:
    """Smallest power of two >= n."""
    return 1 << max(n - 1, 0).bit_length()


def _dtype(mode) -> np.dtype:
    if mode in PRECISIONS:
        return np.dtype(PRECISIONS[mode])
    return np.dtype(mode)


def _const(x, dt):
    return np.array(x, dtype=dt)[()]


@dataclass(frozen=True)
class ClassPlan:
    """Per-class constants: extents, padded layout and component indices."""

    qclass: QuartetClass
    n_rys: int
    n_g: tuple[int, int, int, int]
    # logical extents of the VRR slab
    ni: int
    nk: int
    # padded shape of I, outermost first: (l, k, j, i, xi, mu)
    tensor_shape: tuple[int, int, int, int, int, int]
    pad_ab: int
    # component exponents gathered per ERI, shape (3, n_cd, n_ab) per shell
    idx_a: np.ndarray
    idx_b: np.ndarray
    idx_c: np.ndarray
    idx_d: np.ndarray

    @property
    def n_ab(self) -> int:
        return self.n_g[0] * self.n_g[1]

    @property
    def n_cd(self) -> int:
        return self.n_g[2] * self.n_g[3]

    @property
    def n_eriq(self) -> int:
        return self.n_ab * self.n_cd

    @property
    def final_extents(self) -> tuple[int, int, int, int]:
        La, Lb, Lc, Ld = self.qclass
        return La + 1, Lb + 1, Lc + 1, Ld + 1

    @property
    def final_size(self) -> int:
        """Logical entries of I consumed by the quadrature."""
        return math.prod(self.final_extents) * 3 * self.n_rys


@lru_cache(maxsize=None)
def class_plan(qclass) -> ClassPlan:
    qclass = QuartetClass(*qclass).validate()
    La, Lb, Lc, Ld = qclass
    n_rys = qclass.n_rys
    n_g = qclass.n_g
    ni, nk = La + Lb + 1, Lc + Ld + 1
    shape = (Ld + 1, pow2(nk), pow2(Lb + 1), pow2(ni), 4, pow2(n_rys))
    ca, cb, cc, cd = (np.array(cartesian_components(L)).T for L in qclass)
    # fused (a, b) with a fastest; fused (c, d) with c fastest
    na, nb, nc, nd = n_g
    a_of_ab = np.tile(np.arange(na), nb)
    b_of_ab = np.repeat(np.arange(nb), na)
    c_of_cd = np.tile(np.arange(nc), nd)
    d_of_cd = np.repeat(np.arange(nd), nc)
    idx_a = np.broadcast_to(ca[:, a_of_ab][:, None, :], (3, nc * nd, na * nb))
    idx_b = np.broadcast_to(cb[:, b_of_ab][:, None, :], (3, nc * nd, na * nb))
    idx_c = np.broadcast_to(cc[:, c_of_cd][:, :, None], (3, nc * nd, na * nb))
    idx_d = np.broadcast_to(cd[:, d_of_cd][:, :, None], (3, nc * nd, na * nb))
    return ClassPlan(
        qclass, n_rys, n_g, ni, nk, shape, pow2(na * nb),
        idx_a, idx_b, idx_c, idx_d,
    )


@dataclass
class SetupArrays:
    """Auxiliary arrays of the setup stage.

    ``B`` rows are (B1, B2, B3) = (B00, B10, B01) of the Rys recurrences,
    ``C`` rows are C_x, C_y, C_z (bra shift) then C_2x, C_2y, C_2z (ket
    shift), each over the Rys roots.  ``prefactor`` collects the Gaussian
    product factors, normalizations and 2 pi^(5/2) / (p q sqrt(p + q)).
    """

    B: np.ndarray
    C: np.ndarray
    prefactor: object
    AB: np.ndarray
    CD: np.ndarray


def _norm_factors(L: int) -> tuple[float, float]:
    # normalization = factor * alpha ** power
    return normalization(1.0, (L, 0, 0)), (2 * L + 3) / 4.0


def setup_stage(centers, exponents, roots, qclass, dt) -> SetupArrays:
    """Build B, C and the prefactor from the quartet geometry and Rys roots.

    ``centers`` (4, 3), ``exponents`` (4,) and ``roots`` (n,) must already be
    arrays of dtype ``dt``.
    """
    A, Bc, Cc, D = centers
    a, b, c, d = exponents
    one = _const(1.0, dt)
    half = _const(0.5, dt)

    p = a + b
    q = c + d
    s = p + q
    pq = p * q
    inv_p = one / p
    inv_q = one / q
    rho = pq / s
    two_p = p + p
    two_q = q + q

    AB = A - Bc
    CD = Cc - D
    ab2 = AB[0] * AB[0] + AB[1] * AB[1] + AB[2] * AB[2]
    cd2 = CD[0] * CD[0] + CD[1] * CD[1] + CD[2] * CD[2]
    k_ab = np.exp(-(a * b * inv_p * ab2))
    k_cd = np.exp(-(c * d * inv_q * cd2))

    PA = -(AB * (b * inv_p))
    QC = -(CD * (d * inv_q))
    PQ = (A - Cc) + PA - QC

    norms = []
    for L, alpha in zip(qclass, exponents):
        factor, power = _norm_factors(L)
        norms.append(_const(factor, dt) * alpha ** _const(power, dt))
    n_prod = norms[0] * norms[1] * norms[2] * norms[3]
    prefactor = _const(_TWO_PI_52, dt) * n_prod * k_ab * k_cd / (pq * np.sqrt(s))

    # per root; u = t^2 / (1 - t^2) is the classic Rys variable
    t2 = roots * roots
    u = t2 / (one - t2)
    u2 = rho * u
    tmp4 = half / (u2 * s + pq)
    b00 = u2 * tmp4
    b10 = b00 + tmp4 * q
    b01 = b00 + tmp4 * p
    tmp2 = b00 * two_q
    tmp3 = b00 * two_p
    c00 = PA[:, None] - tmp2[None, :] * PQ[:, None]
    c0p = QC[:, None] + tmp3[None, :] * PQ[:, None]

    B = np.stack([b00, b10, b01])
    C = np.concatenate([c00, c0p])
    return SetupArrays(B, C, prefactor, AB, CD)


def initial_intermediates(setup: SetupArrays, n_rys: int, dt) -> np.ndarray:
    """``I(0,0,0,0,mu,xi)`` as a (3, n_rys) array.

    The y and z origins are 1; the x origin carries the whole prefactor so
    the quadrature needs nothing but the Rys weights.
    """
    origin = np.empty((3, n_rys), dtype=dt)
    origin[0] = setup.prefactor
    origin[1:] = _const(1.0, dt)
    return origin


def _index_multiples(coef, count):
    # n * coef for n = 0..count-1; n = 0, 1 need no multiplication
    out = [None, coef]
    for n in range(2, count):
        out.append(n * coef)
    return out


def vrr_stage(setup: SetupArrays, origin: np.ndarray, plan: ClassPlan, dt) -> np.ndarray:
    """Vertical recurrences: slab ``I(i, 0, k, 0)`` as (ni, nk, 3, n_rys)."""
    ni, nk = plan.ni, plan.nk
    B1, B2, B3 = setup.B
    Cx, C2x = setup.C[:3], setup.C[3:]
    iB2 = _index_multiples(B2, ni)
    iB1 = _index_multiples(B1, max(ni, nk))
    kB3 = _index_multiples(B3, nk)
    slab = np.zeros((ni, nk) + origin.shape, dtype=dt)
    slab[0, 0] = origin
    for i in range(ni - 1):
        nxt = Cx * slab[i, 0]
        if i > 0:
            nxt = nxt + iB2[i] * slab[i - 1, 0]
        slab[i + 1, 0] = nxt
    for k in range(nk - 1):
        for i in range(ni):
            nxt = C2x * slab[i, k]
            if k > 0:
                nxt = nxt + kB3[k] * slab[i, k - 1]
            if i > 0:
                nxt = nxt + iB1[i] * slab[i - 1, k]
            slab[i, k + 1] = nxt
    return slab


@dataclass
class IntermediateTensor:
    """``I(i, j, k, l, mu, xi)`` in its padded layout.

    Storage is ``data[l, k, j, i, xi, mu]`` (mu fastest) with power-of-two
    padding on the mu, xi, i, j and k extents; padding is never read.
    """

    plan: ClassPlan
    data: np.ndarray

    def final(self) -> np.ndarray:
        """Logical view over i <= La, j <= Lb, k <= Lc, l <= Ld, indexed [i,j,k,l,mu,xi]."""
        La, Lb, Lc, Ld = self.plan.qclass
        n = self.plan.n_rys
        view = self.data[: Ld + 1, : Lc + 1, : Lb + 1, : La + 1, :3, :n]
        return view.transpose(3, 2, 1, 0, 5, 4)


def hrr_stage(AB, CD, slab: np.ndarray, plan: ClassPlan, dt) -> IntermediateTensor:
    """Horizontal recurrences: transfer into j (from i), then l (from k)."""
    La, Lb, Lc, Ld = plan.qclass
    ni, nk, n = plan.ni, plan.nk, plan.n_rys
    data = np.zeros(plan.tensor_shape, dtype=dt)
    # slab is (i, k, xi, mu); the tensor stores (l, k, j, i, xi, mu)
    data[0, :nk, 0, :ni, :3, :n] = slab.transpose(1, 0, 2, 3)
    ab = AB[:, None]
    cd = CD[:, None]
    for j in range(1, Lb + 1):
        top = ni - j
        data[0, :nk, j, :top, :3, :n] = (
            data[0, :nk, j - 1, 1 : top + 1, :3, :n] + ab * data[0, :nk, j - 1, :top, :3, :n]
        )
    for l in range(1, Ld + 1):
        top = nk - l
        data[l, :top, : Lb + 1, : La + 1, :3, :n] = (
            data[l - 1, 1 : top + 1, : Lb + 1, : La + 1, :3, :n]
            + cd * data[l - 1, :top, : Lb + 1, : La + 1, :3, :n]
        )
    return IntermediateTensor(plan, data)


@dataclass
class QuartetERIs:
    """Integrals of one quartet in the fused (c,d)-major, (a,b)-minor layout.

    ``buffer`` has shape (n_cd, pad_ab); the fused ab index is ``b * n_ga + a``
    and the fused cd index is ``d * n_gc + c``.
    """

    qclass: QuartetClass
    buffer: np.ndarray
    b_max: float

    @property
    def plan(self) -> ClassPlan:
        return class_plan(self.qclass)

    @property
    def values(self) -> np.ndarray:
        """Flat integrals in output order, padding removed."""
        return self.buffer[:, : self.plan.n_ab].reshape(-1)

    def tensor(self) -> np.ndarray:
        """Integrals indexed ``[a, b, c, d]`` by Cartesian component."""
        na, nb, nc, nd = self.plan.n_g
        return self.values.reshape(nd, nc, nb, na).transpose(3, 2, 1, 0)


def quadrature_stage(tensor: IntermediateTensor, weights, dt) -> QuartetERIs:
    """``[ab|cd] = sum_mu w_mu prod_xi I(a_xi, b_xi, c_xi, d_xi, mu, xi)``."""
    plan = tensor.plan
    La, Lb, Lc, Ld = plan.qclass
    n = plan.n_rys
    data = tensor.data
    ix = data[: Ld + 1, : Lc + 1, : Lb + 1, : La + 1, 0, :n]
    iy = data[: Ld + 1, : Lc + 1, : Lb + 1, : La + 1, 1, :n]
    iz = data[: Ld + 1, : Lc + 1, : Lb + 1, : La + 1, 2, :n]
    # the weight rides on the x factor, computed once per distinct x-tuple
    wix = ix * weights
    a, b, c, d = plan.idx_a, plan.idx_b, plan.idx_c, plan.idx_d
    gx = wix[d[0], c[0], b[0], a[0]]
    gy = iy[d[1], c[1], b[1], a[1]]
    gz = iz[d[2], c[2], b[2], a[2]]
    eris = (gx * gy * gz).sum(axis=-1)
    buffer = np.zeros((plan.n_cd, plan.pad_ab), dtype=dt)
    buffer[:, : plan.n_ab] = eris
    b_max = np.max(np.abs(eris))
    return QuartetERIs(plan.qclass, buffer, b_max)


def _narrow(q: QuartetInput, rys: RysNodeSet, dt):
    return (
        np.asarray(q.centers, dtype=dt),
        np.asarray(q.exponents, dtype=dt),
        np.asarray(rys.roots, dtype=dt),
        np.asarray(rys.weights, dtype=dt),
    )


def run_stages(plan: ClassPlan, centers, exponents, roots, weights, dt):
    """All arithmetic stages on prepared (already narrowed) inputs."""
    setup = setup_stage(centers, exponents, roots, plan.qclass, dt)
    origin = initial_intermediates(setup, plan.n_rys, dt)
    slab = vrr_stage(setup, origin, plan, dt)
    tensor = hrr_stage(setup.AB, setup.CD, slab, plan, dt)
    return quadrature_stage(tensor, weights, dt)


def compute_quartet(q: QuartetInput, mode: str = "single", rys: RysNodeSet | None = None) -> QuartetERIs:
    """Integrals of one quartet.

    Rys roots and weights are prepared in double precision (unless given)
    and narrowed; in single mode every later operation is float32.
    """
    plan = class_plan(q.qclass)
    if rys is None:
        rys = prepare_quartet_rys(q)
    elif rys.n_rys != plan.n_rys:
        raise ValueError(f"class {plan.qclass} needs {plan.n_rys} Rys roots, got {rys.n_rys}")
    dt = _dtype(mode)
    out = run_stages(plan, *_narrow(q, rys, dt), dt)
    out.b_max = float(out.b_max)
    return out


def compute_quartet_canonical(q: QuartetInput, mode: str = "single") -> np.ndarray:
    """Integrals of ``q`` through the kernel of its canonical class.

    The inputs are reordered to the canonical class, evaluated there and the
    result is reindexed back; returns a tensor indexed ``[a, b, c, d]`` of
    the original ordering.
    """
    canon, perm = canonicalize(q.qclass)
    eris = compute_quartet(permute_input(q, perm), mode)
    return permute_eri_tensor(eris.tensor(), perm.inverse())
