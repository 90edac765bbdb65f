"""Binary input records and compressed output streams.

QuartetRecord, 128 bytes, little-endian float32:
  word 1 (64 bytes): centers a, b, c, d as x, y, z (12 values) then the
  four exponents; coordinates in Bohr.
  word 2 (64 bytes): up to seven (root, weight) pairs then zero padding.
  An all-zero word 2 marks a geometry-only record whose Rys nodes are
  computed on the fly.

CompressedStream: per quartet, in input order, float32 eps followed by
n_CS chunks of 64 bytes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import BinaryIO, Iterable, Iterator

import numpy as np

from .compress import CHUNK_BYTES, CompressedQuartet, MalformedChunksError, num_chunks
from .rys import N_RYS_MAX, RysNodeSet, quartet_argument
from .shells import QuartetClass, QuartetInput, num_eriq

RECORD_BYTES = 128
WORD_BYTES = 64
_F32 = np.dtype("<f4")


class MalformedRecordError(ValueError):
    """A record file whose contents do not decode to valid quartets."""


@dataclass(frozen=True)
class QuartetRecord:
    centers: np.ndarray  # (4, 3) float32
    exponents: np.ndarray  # (4,) float32
    roots: np.ndarray | None = None  # (n,) float32
    weights: np.ndarray | None = None

    def to_bytes(self) -> bytes:
        word1 = np.concatenate([np.ravel(self.centers), np.ravel(self.exponents)]).astype(_F32)
        if word1.size != 16:
            raise ValueError("a record holds 4 centers and 4 exponents")
        word2 = np.zeros(16, dtype=_F32)
        if self.roots is not None:
            n = len(self.roots)
            if n > N_RYS_MAX or len(self.weights) != n:
                raise ValueError(f"a record holds at most {N_RYS_MAX} (root, weight) pairs")
            word2[0 : 2 * n : 2] = self.roots
            word2[1 : 2 * n : 2] = self.weights
        return word1.tobytes() + word2.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "QuartetRecord":
        if len(data) != RECORD_BYTES:
            raise MalformedRecordError(f"record must be {RECORD_BYTES} bytes, got {len(data)}")
        v = np.frombuffer(data, dtype=_F32)
        centers = v[:12].reshape(4, 3).copy()
        exponents = v[12:16].copy()
        pairs = v[16:].reshape(8, 2)
        if not np.any(pairs):
            return cls(centers, exponents)
        if np.any(pairs[7]):
            raise MalformedRecordError("word 2 padding must be zero")
        n = int(np.count_nonzero(pairs[:, 1]))
        if np.any(pairs[n:]) or np.any(pairs[:n, 1] == 0):
            raise MalformedRecordError("(root, weight) pairs must be contiguous with nonzero weights")
        return cls(centers, exponents, pairs[:n, 0].copy(), pairs[:n, 1].copy())

    @classmethod
    def from_quartet(cls, q: QuartetInput, rys: RysNodeSet | None = None) -> "QuartetRecord":
        roots = weights = None
        if rys is not None:
            roots, weights = rys.roots.astype(_F32), rys.weights.astype(_F32)
        return cls(q.centers.astype(_F32), q.exponents.astype(_F32), roots, weights)

    def quartet(self, qclass) -> QuartetInput:
        if not (np.all(np.isfinite(self.centers)) and np.all(np.isfinite(self.exponents))):
            raise MalformedRecordError("non-finite geometry in record")
        if np.any(self.exponents <= 0):
            raise MalformedRecordError("exponents must be positive")
        return QuartetInput.from_arrays(qclass, self.centers, self.exponents)

    def rys_nodes(self, q: QuartetInput) -> RysNodeSet | None:
        """Stored nodes, or None for a geometry-only record."""
        if self.roots is None:
            return None
        n = q.qclass.n_rys
        if len(self.roots) != n:
            raise MalformedRecordError(
                f"class {q.qclass} needs {n} (root, weight) pairs, record has {len(self.roots)}"
            )
        return RysNodeSet(n, quartet_argument(q), self.roots.astype(float), self.weights.astype(float))


def write_records(path, records: Iterable[QuartetRecord]) -> int:
    count = 0
    with open(path, "wb") as fh:
        for r in records:
            fh.write(r.to_bytes())
            count += 1
    return count


def read_records(path) -> list[QuartetRecord]:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) % RECORD_BYTES:
        raise MalformedRecordError(
            f"record file size {len(data)} is not a multiple of {RECORD_BYTES} bytes"
        )
    return [QuartetRecord.from_bytes(data[i : i + RECORD_BYTES]) for i in range(0, len(data), RECORD_BYTES)]


def quartet_stream_bytes(qclass, n: int) -> int:
    return 4 + CHUNK_BYTES * num_chunks(num_eriq(QuartetClass(*qclass)), n)


def write_stream(fh: BinaryIO, quartets: Iterable[CompressedQuartet]) -> int:
    total = 0
    for c in quartets:
        total += fh.write(c.to_bytes())
    return total


def iter_stream(data: bytes, qclass, n: int) -> Iterator[CompressedQuartet]:
    """Split a stream of one class and width back into quartets."""
    qclass = QuartetClass(*qclass)
    count = num_eriq(qclass)
    stride = quartet_stream_bytes(qclass, n)
    if len(data) % stride:
        raise MalformedChunksError(
            f"stream length {len(data)} is not a multiple of {stride} bytes "
            f"({qclass}, {n}-bit)"
        )
    for off in range(0, len(data), stride):
        eps = np.frombuffer(data, dtype=_F32, count=1, offset=off)[0]
        yield CompressedQuartet(eps, n, count, data[off + 4 : off + stride])
