"""Shell and quartet-class algebra for primitive Cartesian Gaussians.

Everything here is a pure function of small immutable values.  Angular
momenta are limited to s, p, d and f (0 <= L <= 3).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

L_MAX = 3
SHELL_LETTERS = "spdf"
BOHR_PER_ANGSTROM = 1.8897259886


def _check_l(L: int) -> int:
    if not isinstance(L, (int, np.integer)) or not 0 <= L <= L_MAX:
        raise ValueError(f"angular momentum must be an integer in [0, {L_MAX}], got {L!r}")
    return int(L)


def num_gtos(L: int) -> int:
    """Number of Cartesian components in a shell of angular momentum ``L``."""
    L = _check_l(L)
    return (L + 1) * (L + 2) // 2


@lru_cache(maxsize=None)
def cartesian_components(L: int) -> tuple[tuple[int, int, int], ...]:
    """Cartesian exponent vectors of a shell.

    Order is lexicographically descending in ``ax`` then ``ay``, e.g. for a
    d shell: xx, xy, xz, yy, yz, zz.
    """
    L = _check_l(L)
    return tuple(
        (ax, ay, L - ax - ay)
        for ax in range(L, -1, -1)
        for ay in range(L - ax, -1, -1)
    )


def _double_factorial(n: int) -> int:
    # (-1)!! = 1
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def normalization(alpha: float, comp) -> float:
    """Normalization constant shared by every member of the shell of ``comp``.

    The constant is the one that gives the axis-aligned member (x^L) unit
    self-overlap; mixed components such as xy are not individually
    normalized.
    """
    if alpha <= 0:
        raise ValueError("exponent must be positive")
    L = int(sum(comp))
    return (
        (2.0 * alpha / math.pi) ** 0.75
        * (4.0 * alpha) ** (0.5 * L)
        / math.sqrt(_double_factorial(2 * L - 1))
    )


class QuartetClass(NamedTuple):
    """Angular momenta ``(La, Lb, Lc, Ld)`` of a quartet ``[ab|cd]``."""

    La: int
    Lb: int
    Lc: int
    Ld: int

    @classmethod
    def parse(cls, text: str) -> "QuartetClass":
        """Parse ``"fd|ps"``, ``"[fd|ps]"``, ``"fdps"`` or ``"fd,ps"``."""
        letters = "".join(ch for ch in text.strip().lower() if ch not in "[]|, ")
        if len(letters) != 4 or any(ch not in SHELL_LETTERS for ch in letters):
            raise ValueError(f"unknown quartet class {text!r}")
        return cls(*(SHELL_LETTERS.index(ch) for ch in letters))

    def validate(self) -> "QuartetClass":
        for L in self:
            _check_l(L)
        return self

    @property
    def n_g(self) -> tuple[int, int, int, int]:
        return tuple(num_gtos(L) for L in self)

    @property
    def n_rys(self) -> int:
        return sum(self) // 2 + 1

    @property
    def label(self) -> str:
        a, b, c, d = (SHELL_LETTERS[L] for L in self)
        return f"[{a}{b}|{c}{d}]"

    def __str__(self) -> str:
        return self.label


def num_eriq(cls: QuartetClass) -> int:
    """Number of integrals in one quartet of class ``cls``."""
    return math.prod(num_gtos(L) for L in cls)


def all_classes() -> list[QuartetClass]:
    """The 256 generic classes, ``La`` slowest."""
    r = range(L_MAX + 1)
    return [QuartetClass(a, b, c, d) for a in r for b in r for c in r for d in r]


@dataclass(frozen=True)
class QuartetPermutation:
    """One element of the eightfold index symmetry of ``[ab|cd]``.

    Applied in the order: swap a<->b, swap c<->d, then swap bra<->ket.
    """

    swap_ab: bool = False
    swap_cd: bool = False
    swap_braket: bool = False

    def order(self) -> tuple[int, int, int, int]:
        """Source position of each slot of the permuted quartet."""
        bra = (1, 0) if self.swap_ab else (0, 1)
        ket = (3, 2) if self.swap_cd else (2, 3)
        return ket + bra if self.swap_braket else bra + ket

    def apply(self, items):
        """Reorder a length-4 sequence (class, shells, ...)."""
        return tuple(items[i] for i in self.order())

    def inverse(self) -> "QuartetPermutation":
        if self.swap_braket:
            return QuartetPermutation(self.swap_cd, self.swap_ab, True)
        return self

    @property
    def is_identity(self) -> bool:
        return not (self.swap_ab or self.swap_cd or self.swap_braket)


IDENTITY = QuartetPermutation()
ALL_PERMUTATIONS = tuple(
    QuartetPermutation(ab, cd, bk)
    for bk in (False, True)
    for ab in (False, True)
    for cd in (False, True)
)


def is_canonical(cls: QuartetClass) -> bool:
    na, nb, nc, nd = cls.n_g
    return cls.La >= cls.Lb and cls.Lc >= cls.Ld and na * nb >= nc * nd


def canonicalize(cls: QuartetClass) -> tuple[QuartetClass, QuartetPermutation]:
    """Canonical representative of ``cls`` and the permutation that maps to it."""
    cls = QuartetClass(*cls).validate()
    for perm in ALL_PERMUTATIONS:
        candidate = QuartetClass(*perm.apply(cls))
        if is_canonical(candidate):
            return candidate, perm
    raise AssertionError(f"no canonical variant for {cls}")  # pragma: no cover


def canonical_classes() -> list[QuartetClass]:
    return sorted({canonicalize(c)[0] for c in all_classes()})


def permute_eri_tensor(tensor: np.ndarray, perm: QuartetPermutation) -> np.ndarray:
    """Reindex an ``[a, b, c, d]`` integral tensor to match ``permute_input``."""
    return np.transpose(tensor, perm.order())


@dataclass(frozen=True)
class PrimitiveShell:
    """One primitive Cartesian shell; coordinates in Bohr."""

    center: tuple[float, float, float]
    exponent: float
    L: int

    def __post_init__(self):
        center = tuple(float(x) for x in self.center)
        if len(center) != 3 or not all(math.isfinite(x) for x in center):
            raise ValueError(f"center must be 3 finite coordinates, got {self.center!r}")
        if not (self.exponent > 0 and math.isfinite(self.exponent)):
            raise ValueError(f"exponent must be positive and finite, got {self.exponent!r}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "exponent", float(self.exponent))
        object.__setattr__(self, "L", _check_l(self.L))

    @property
    def norm(self) -> float:
        return normalization(self.exponent, (self.L, 0, 0))


@dataclass(frozen=True)
class QuartetInput:
    """The four shells of one quartet in (a, b, c, d) order."""

    shells: tuple[PrimitiveShell, PrimitiveShell, PrimitiveShell, PrimitiveShell]

    def __post_init__(self):
        shells = tuple(self.shells)
        if len(shells) != 4:
            raise ValueError("a quartet needs exactly four shells")
        object.__setattr__(self, "shells", shells)

    @classmethod
    def from_arrays(cls, qclass, centers, exponents) -> "QuartetInput":
        if isinstance(qclass, str):
            qclass = QuartetClass.parse(qclass)
        centers = np.asarray(centers, dtype=float).reshape(4, 3)
        return cls(tuple(
            PrimitiveShell(tuple(centers[i]), float(exponents[i]), int(qclass[i]))
            for i in range(4)
        ))

    @property
    def qclass(self) -> QuartetClass:
        return QuartetClass(*(s.L for s in self.shells))

    @property
    def centers(self) -> np.ndarray:
        return np.array([s.center for s in self.shells])

    @property
    def exponents(self) -> np.ndarray:
        return np.array([s.exponent for s in self.shells])

    def translated(self, shift) -> "QuartetInput":
        shift = np.asarray(shift, dtype=float)
        return QuartetInput.from_arrays(self.qclass, self.centers + shift, self.exponents)


def permute_input(q: QuartetInput, perm: QuartetPermutation) -> QuartetInput:
    return QuartetInput(perm.apply(q.shells))
