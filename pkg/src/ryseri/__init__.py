"""Electron repulsion integrals by Rys quadrature with per-quartet lossy compression."""
from .compress import CompressedQuartet, compress, decompress, quantum_value
from .kernel import QuartetERIs, compute_quartet
from .oracle import md_eri
from .perfmodel import apply_further_unrolling, base_trip_counts, modeled_geris
from .rys import boys, rys_roots_weights
from .shells import (
    PrimitiveShell,
    QuartetClass,
    QuartetInput,
    all_classes,
    canonical_classes,
    canonicalize,
)

__version__ = "0.1.0"

__all__ = [
    "CompressedQuartet",
    "PrimitiveShell",
    "QuartetClass",
    "QuartetERIs",
    "QuartetInput",
    "all_classes",
    "apply_further_unrolling",
    "base_trip_counts",
    "boys",
    "canonical_classes",
    "canonicalize",
    "compress",
    "compute_quartet",
    "decompress",
    "md_eri",
    "modeled_geris",
    "quantum_value",
    "rys_roots_weights",
]
