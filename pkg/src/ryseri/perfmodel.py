"""Analytic trip-count and throughput model of the streaming kernel.

Three sequential stages bound the initiation interval of a quartet:
the recurrence loops (``n_RR``), the quadrature loops (``n_GQ``) and the
compress-store loops (``n_CS``).  Further unrolling trades local-memory
layout for parallelism and is decided per class at build time.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Mapping

from .compress import check_bits, num_chunks
from .shells import QuartetClass, num_eriq

RR_PATTERNS = ("ijk", "ijkl", "ijklμ", "ijklμξ")
GQ_PATTERNS = ("ξμab", "ξμabc", "ξμabcd")
BRAM, REGISTERS = "block-memory", "registers"

REGISTER_LIMIT = 108
"""Largest intermediate (elements) allowed in registers."""

IJKL_LIMIT = 144
"""Largest intermediate for the l-unrolled block-memory layout.

Empirical: the smallest value consistent with the tabulated classes,
which pin it to 144 <= limit < 840.
"""

LOOP_OVERHEAD = 10
"""Cycles per quartet-loop iteration outside the three stages."""


@dataclass(frozen=True)
class TripCounts:
    n_RR: int
    n_GQ: int
    n_CS: int

    def __post_init__(self):
        if min(self.n_RR, self.n_GQ, self.n_CS) < 1:
            raise ValueError(f"trip counts must be >= 1: {self}")

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n_RR, self.n_GQ, self.n_CS)

    @property
    def cycles(self) -> int:
        return max(self.as_tuple())

    @property
    def bottleneck(self) -> str:
        """Name of the slowest stage; ties go to compress-store, then GQ."""
        top = self.cycles
        for name, v in (("n_CS", self.n_CS), ("n_GQ", self.n_GQ), ("n_RR", self.n_RR)):
            if v == top:
                return name
        raise AssertionError


@dataclass(frozen=True)
class UnrollPlan:
    rr_pattern: str = "ijk"
    gq_pattern: str = "ξμab"

    def __post_init__(self):
        if self.rr_pattern not in RR_PATTERNS or self.gq_pattern not in GQ_PATTERNS:
            raise ValueError(f"unknown unroll pattern {self}")

    @property
    def rr_storage(self) -> str:
        return REGISTERS if RR_PATTERNS.index(self.rr_pattern) >= 2 else BRAM

    @property
    def gq_storage(self) -> str:
        return REGISTERS if GQ_PATTERNS.index(self.gq_pattern) >= 1 else BRAM


@dataclass(frozen=True)
class PerfEstimate:
    f_max: float
    geris: float


def base_trip_counts(qclass, n: int = 16) -> TripCounts:
    qclass = QuartetClass.parse(qclass) if isinstance(qclass, str) else QuartetClass(*qclass)
    check_bits(n)
    ga, gb, gc, gd = qclass.n_g
    return TripCounts(
        3 * qclass.n_rys * (qclass.Ld + 1),
        gd * gc,
        num_chunks(num_eriq(qclass), n),
    )


def intermediate_size(qclass: QuartetClass) -> int:
    """Basic size of I(i, j, k, l, mu) for one axis and one xi."""
    La, Lb, Lc, Ld = qclass
    return (La + Lb + 1) * (Lb + 1) * (Lc + Ld + 1) * (Ld + 1) * qclass.n_rys


def _rr_cycles(qclass: QuartetClass, pattern: str) -> int:
    return {
        "ijk": 3 * qclass.n_rys * (qclass.Ld + 1),
        "ijkl": 3 * qclass.n_rys,
        "ijklμ": 3,
        "ijklμξ": 1,
    }[pattern]


def _gq_cycles(qclass: QuartetClass, pattern: str) -> int:
    ga, gb, gc, gd = qclass.n_g
    return {"ξμab": gd * gc, "ξμabc": gd, "ξμabcd": 1}[pattern]


def _rr_allowed(qclass: QuartetClass, pattern: str) -> bool:
    size = intermediate_size(qclass)
    if pattern == "ijkl":
        return size <= IJKL_LIMIT
    if pattern in ("ijklμ", "ijklμξ"):
        return size <= REGISTER_LIMIT
    return True


def _gq_allowed(qclass: QuartetClass, pattern: str, rr_pattern: str) -> bool:
    if UnrollPlan(rr_pattern).rr_storage != REGISTERS:
        return False
    ga, gb, gc, gd = qclass.n_g
    if pattern == "ξμabc":
        return ga * gb * gc <= REGISTER_LIMIT
    if pattern == "ξμabcd":
        # the whole quartet plus the b_max reduction register
        return ga * gb * gc * gd + 1 <= REGISTER_LIMIT
    return True


def apply_further_unrolling(qclass, base: TripCounts | None = None, n: int = 16):
    """Escalate the recurrence, then the quadrature unrolling, one row at a time.

    Recurrence loops escalate while they are slower than compress-store;
    quadrature loops escalate while slower than both other stages.
    Returns ``(UnrollPlan, TripCounts)``.
    """
    qclass = QuartetClass.parse(qclass) if isinstance(qclass, str) else QuartetClass(*qclass)
    if base is None:
        base = base_trip_counts(qclass, n)
    rr, gq = 0, 0
    n_rr, n_gq, n_cs = base.as_tuple()
    while n_rr > n_cs and rr + 1 < len(RR_PATTERNS):
        nxt = RR_PATTERNS[rr + 1]
        if not _rr_allowed(qclass, nxt):
            break
        rr += 1
        n_rr = _rr_cycles(qclass, nxt)
    while n_gq > max(n_cs, n_rr) and gq + 1 < len(GQ_PATTERNS):
        nxt = GQ_PATTERNS[gq + 1]
        if not _gq_allowed(qclass, nxt, RR_PATTERNS[rr]):
            break
        gq += 1
        n_gq = _gq_cycles(qclass, nxt)
    return UnrollPlan(RR_PATTERNS[rr], GQ_PATTERNS[gq]), TripCounts(n_rr, n_gq, n_cs)


def modeled_geris(qclass, final: TripCounts, f_max: float) -> PerfEstimate:
    """Cycle-model throughput in 10^9 ERIs/s at ``f_max`` MHz."""
    if not f_max > 0:
        raise ValueError(f"f_max must be positive, got {f_max}")
    qclass = QuartetClass.parse(qclass) if isinstance(qclass, str) else QuartetClass(*qclass)
    geris = f_max * 1e6 * num_eriq(qclass) / (final.cycles + LOOP_OVERHEAD) / 1e9
    return PerfEstimate(f_max, geris)


def pattern_combinations(classes: Iterable[QuartetClass], n: int = 16) -> set[tuple[str, str]]:
    return {
        (p.rr_pattern, p.gq_pattern)
        for p, _ in (apply_further_unrolling(c, n=n) for c in classes)
    }


@dataclass(frozen=True)
class ModelRow:
    qclass: QuartetClass
    base: TripCounts
    plan: UnrollPlan
    final: TripCounts
    geris: float | None


def model_rows(classes, n: int = 16, f_max: Mapping | None = None) -> list[ModelRow]:
    rows = []
    for c in classes:
        c = QuartetClass.parse(c) if isinstance(c, str) else QuartetClass(*c)
        base = base_trip_counts(c, n)
        plan, final = apply_further_unrolling(c, base)
        f = (f_max or {}).get(c)
        rows.append(ModelRow(c, base, plan, final, modeled_geris(c, final, f).geris if f else None))
    return rows


def emit_model_table(classes, n: int = 16, f_max: Mapping | None = None, fmt: str = "text") -> str:
    """Render base and unrolled trip counts; ``*`` marks the bottleneck."""
    rows = model_rows(classes, n, f_max)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["class", "n_RR", "n_GQ", "n_CS", "bottleneck", "geris"])
        for r in rows:
            g = "" if r.geris is None else f"{r.geris:.2f}"
            w.writerow([r.qclass.label, *r.final.as_tuple(), r.final.bottleneck, g])
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"unknown table format {fmt!r}")

    def cells(t: TripCounts):
        names = ("n_RR", "n_GQ", "n_CS")
        return [f"{v}{'*' if nm == t.bottleneck else ''}" for nm, v in zip(names, t.as_tuple())]

    head = ["class", "n_RR", "n_GQ", "n_CS", "|", "n_RR", "n_GQ", "n_CS", "rr", "gq", "GERIS"]
    body = []
    for r in rows:
        g = "-" if r.geris is None else f"{r.geris:.2f}"
        b, f = cells(r.base), cells(r.final)
        body.append([r.qclass.label, *b, "|", *f, r.plan.rr_pattern, r.plan.gq_pattern, g])
    widths = [max(len(str(x)) for x in col) for col in zip(head, *body)]
    lines = ["  ".join(str(x).rjust(w) for x, w in zip(line, widths)) for line in [head, *body]]
    return "\n".join(lines) + "\n"
