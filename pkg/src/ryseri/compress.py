"""Per-quartet lossy compression of integrals to n-bit signed integers.

Each quartet is scaled by its own quantum ``eps = b_max / (2^(n-1) - 1)``,
rounded half away from zero and packed into 512-bit chunks holding
``floor(512 / n)`` codes each.  Within a chunk code 0 occupies the lowest
bits, codes are two's complement, unused high bits are zero, and the chunk
is serialized as 64 little-endian bytes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

CHUNK_BITS = 512
CHUNK_BYTES = CHUNK_BITS // 8
MIN_BITS, MAX_BITS = 2, 32


class MalformedChunksError(ValueError):
    """Chunk data does not match the declared code count and width."""


def check_bits(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or not MIN_BITS <= n <= MAX_BITS:
        raise ValueError(f"bit width must be an integer in [{MIN_BITS}, {MAX_BITS}], got {n!r}")
    return int(n)


def max_code(n: int) -> int:
    return (1 << (check_bits(n) - 1)) - 1


def codes_per_chunk(n: int) -> int:
    return CHUNK_BITS // check_bits(n)


def num_chunks(count: int, n: int) -> int:
    """``n_CS``: chunks needed for ``count`` codes of ``n`` bits."""
    return -(-count // codes_per_chunk(n))


def quantum_value(b_max: float, n: int) -> np.float32:
    """Single-precision quantum ``eps`` for a quartet with maximum ``b_max``.

    The double-precision quotient is rounded *up* to float32 so that
    ``|value| / eps`` never exceeds the largest code and the eps/2 error bound
    holds against the stored eps for every width.
    """
    b_max = float(b_max)
    if not math.isfinite(b_max) or b_max < 0:
        raise ValueError(f"b_max must be finite and non-negative, got {b_max}")
    exact = b_max / max_code(n)
    eps = np.float32(exact)
    if float(eps) < exact:
        eps = np.nextafter(eps, np.float32(np.inf))
    return eps


def anint(x: np.ndarray) -> np.ndarray:
    """Nearest integer, ties away from zero (Fortran ANINT)."""
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


def quantize(values, eps, n: int) -> np.ndarray:
    """Integer codes ``ANINT(value * eps^-1)`` clamped to +-(2^(n-1) - 1)."""
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise ValueError("cannot quantize non-finite integrals")
    top = max_code(n)
    eps = float(eps)
    if eps == 0.0:
        return np.zeros(values.shape, dtype=np.int64)
    codes = anint(values * (1.0 / eps))
    return np.clip(codes, -top, top).astype(np.int64)


def pack(codes, n: int) -> bytes:
    """Pack signed codes into 64-byte chunks."""
    n = check_bits(n)
    codes = np.asarray(codes, dtype=np.int64).ravel()
    top = max_code(n)
    if codes.size and (codes.max() > top or codes.min() < -top):
        raise ValueError(f"codes out of range for {n}-bit encoding")
    per = codes_per_chunk(n)
    nchunk = num_chunks(codes.size, n)
    words = np.zeros(nchunk * per, dtype=np.uint64)
    words[: codes.size] = codes.astype(np.uint64) & np.uint64((1 << n) - 1)
    shifts = np.arange(n, dtype=np.uint64)
    bits = ((words[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)
    bits = bits.reshape(nchunk, per * n)
    chunk_bits = np.zeros((nchunk, CHUNK_BITS), dtype=np.uint8)
    chunk_bits[:, : per * n] = bits
    return np.packbits(chunk_bits, axis=1, bitorder="little").tobytes()


def unpack(data: bytes, count: int, n: int) -> np.ndarray:
    """Inverse of :func:`pack`; padding bits are ignored."""
    n = check_bits(n)
    nchunk = num_chunks(count, n)
    if len(data) != nchunk * CHUNK_BYTES:
        raise MalformedChunksError(
            f"expected {nchunk} chunks ({nchunk * CHUNK_BYTES} bytes) for {count} "
            f"{n}-bit codes, got {len(data)} bytes"
        )
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    per = codes_per_chunk(n)
    raw = np.frombuffer(data, dtype=np.uint8).reshape(nchunk, CHUNK_BYTES)
    bits = np.unpackbits(raw, axis=1, bitorder="little")[:, : per * n]
    bits = bits.reshape(-1, n)[:count].astype(np.int64)
    unsigned = bits @ (np.int64(1) << np.arange(n, dtype=np.int64))
    sign = np.int64(1) << np.int64(n - 1)
    return np.where(unsigned & sign, unsigned - (sign << np.int64(1)), unsigned)


@dataclass(frozen=True)
class CompressedQuartet:
    epsilon: np.float32
    n: int
    count: int
    chunks: bytes

    @property
    def n_chunks(self) -> int:
        return len(self.chunks) // CHUNK_BYTES

    def to_bytes(self) -> bytes:
        """Stream form: little-endian float32 eps followed by the chunks."""
        return np.float32(self.epsilon).astype("<f4").tobytes() + self.chunks


def compress_values(values, n: int, b_max: float | None = None) -> CompressedQuartet:
    values = np.asarray(values, dtype=np.float64).ravel()
    if b_max is None:
        b_max = float(np.max(np.abs(values))) if values.size else 0.0
    eps = quantum_value(b_max, n)
    codes = quantize(values, eps, n)
    return CompressedQuartet(eps, n, values.size, pack(codes, n))


def compress(eris, n: int) -> CompressedQuartet:
    """Compress a :class:`~ryseri.kernel.QuartetERIs` in its output order."""
    return compress_values(eris.values, n, eris.b_max)


def decompress(c: CompressedQuartet) -> np.ndarray:
    """``code * eps`` in double precision."""
    codes = unpack(c.chunks, c.count, c.n)
    return codes.astype(np.float64) * float(c.epsilon)
