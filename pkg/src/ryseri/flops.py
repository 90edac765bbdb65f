"""Operation counts per quartet by instrumented execution of the kernel.

The kernel stages run unchanged on numpy object arrays of
:class:`CountingFloat`, so every scalar addition, multiplication and
division the kernel performs for one quartet is tallied.  Negation,
absolute value and comparisons are free; ``exp``, ``sqrt`` and ``pow`` are
tallied separately and excluded from the FLOP total.  A division counts as
one operation.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from . import kernel
from .compress import max_code, num_chunks
from .shells import QuartetClass, num_eriq

STAGES = ("setup", "recurrence", "quadrature", "compress")
_lock = threading.Lock()


class Tally:
    __slots__ = ("add", "mul", "div", "special")

    def __init__(self):
        self.add = self.mul = self.div = self.special = 0

    def snapshot(self) -> tuple[int, int, int, int]:
        return (self.add, self.mul, self.div, self.special)


def _val(x):
    return x.v if isinstance(x, CountingFloat) else x


class CountingFloat:
    """A float that reports each arithmetic operation to a shared tally."""

    __slots__ = ("v", "t")

    def __init__(self, v, tally: Tally):
        self.v = float(v)
        self.t = tally

    def _new(self, v):
        return CountingFloat(v, self.t)

    def __add__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        self.t.add += 1
        return self._new(self.v + _val(o))

    __radd__ = __add__

    def __sub__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        self.t.add += 1
        return self._new(self.v - _val(o))

    def __rsub__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        self.t.add += 1
        return self._new(_val(o) - self.v)

    def __mul__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        self.t.mul += 1
        return self._new(self.v * _val(o))

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        self.t.div += 1
        return self._new(self.v / _val(o))

    def __rtruediv__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        self.t.div += 1
        return self._new(_val(o) / self.v)

    def __pow__(self, o):
        self.t.special += 1
        return self._new(self.v ** _val(o))

    def __neg__(self):
        return self._new(-self.v)

    def __abs__(self):
        return self._new(abs(self.v))

    def __lt__(self, o):
        return self.v < _val(o)

    def __le__(self, o):
        return self.v <= _val(o)

    def __gt__(self, o):
        return self.v > _val(o)

    def __ge__(self, o):
        return self.v >= _val(o)

    def __eq__(self, o):
        return self.v == _val(o)

    __hash__ = None

    def __float__(self):
        return self.v

    # numpy ufuncs on object arrays dispatch to these
    def exp(self):
        self.t.special += 1
        return self._new(math.exp(self.v))

    def sqrt(self):
        self.t.special += 1
        return self._new(math.sqrt(self.v))

    def __repr__(self):
        return f"CountingFloat({self.v!r})"


@dataclass(frozen=True)
class StageCount:
    add: int = 0
    mul: int = 0
    div: int = 0

    @property
    def total(self) -> int:
        return self.add + self.mul + self.div


@dataclass(frozen=True)
class FlopCounts:
    qclass: QuartetClass
    stages: dict = field(default_factory=dict)
    special: int = 0

    @property
    def total(self) -> int:
        return sum(s.total for s in self.stages.values())

    @property
    def divisions(self) -> int:
        return sum(s.div for s in self.stages.values())

    def __getitem__(self, stage: str) -> StageCount:
        return self.stages[stage]


def _sample_inputs(qclass: QuartetClass):
    # any non-degenerate geometry; the operation sequence does not depend on it
    rng = np.random.default_rng(0)
    centers = rng.uniform(-1.0, 1.0, size=(4, 3))
    exponents = rng.uniform(0.5, 2.0, size=4)
    n = qclass.n_rys
    roots = np.linspace(0.1, 0.9, n)
    weights = np.full(n, 1.0 / n)
    return centers, exponents, roots, weights


def _wrap(arr, tally):
    out = np.empty(np.shape(arr), dtype=object)
    for idx, v in np.ndenumerate(np.asarray(arr)):
        out[idx] = CountingFloat(v, tally)
    return out


def _diff(after, before) -> StageCount:
    return StageCount(*(a - b for a, b in zip(after[:3], before[:3])))


def compress_stage(values, b_max, n: int):
    """Arithmetic of the compress-store stage (codes before rounding)."""
    eps = b_max * (1.0 / max_code(n))
    inv_eps = 1.0 / eps
    return eps, [v * inv_eps for v in values]


def count_flops(qclass, n: int = 16) -> FlopCounts:
    """Instrumented operation counts of one quartet of ``qclass``."""
    qclass = QuartetClass.parse(qclass) if isinstance(qclass, str) else QuartetClass(*qclass)
    qclass.validate()
    plan = kernel.class_plan(qclass)
    tally = Tally()
    centers, exponents, roots, weights = (_wrap(x, tally) for x in _sample_inputs(qclass))
    dt = np.dtype(object)
    with _lock:
        s0 = tally.snapshot()
        setup = kernel.setup_stage(centers, exponents, roots, qclass, dt)
        s1 = tally.snapshot()
        origin = kernel.initial_intermediates(setup, plan.n_rys, dt)
        slab = kernel.vrr_stage(setup, origin, plan, dt)
        tensor = kernel.hrr_stage(setup.AB, setup.CD, slab, plan, dt)
        s2 = tally.snapshot()
        eris = kernel.quadrature_stage(tensor, weights, dt)
        s3 = tally.snapshot()
        compress_stage(eris.values, eris.b_max, n)
        s4 = tally.snapshot()
    stages = dict(zip(STAGES, (_diff(s1, s0), _diff(s2, s1), _diff(s3, s2), _diff(s4, s3))))
    return FlopCounts(qclass, stages, s4[3] - s0[3])


def flops_table(classes, n: int = 16) -> str:
    head = ["class", "n_ERIQ", *STAGES, "div", "n_FLOPQ", "n_CS"]
    body = []
    for c in classes:
        c = QuartetClass.parse(c) if isinstance(c, str) else QuartetClass(*c)
        f = count_flops(c, n)
        body.append([
            c.label, num_eriq(c), *(f[s].total for s in STAGES), f.divisions, f.total,
            num_chunks(num_eriq(c), n),
        ])
    widths = [max(len(str(x)) for x in col) for col in zip(head, *body)]
    return "\n".join("  ".join(str(x).rjust(w) for x, w in zip(r, widths)) for r in [head, *body]) + "\n"
