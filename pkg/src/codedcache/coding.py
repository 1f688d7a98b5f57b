"""Systematic MDS coding over GF(256).

Each fragment of k segments is expanded into n coded segments (one per base
station) such that any k of them reconstruct the originals. The generator is
a Vandermonde matrix over GF(256) normalized so its first k columns are the
identity; every k-column submatrix of it stays invertible, which is the MDS
property.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

FIELD_POLY = 0x11D  # x^8 + x^4 + x^3 + x^2 + 1, primitive element 2
FIELD_ORDER = 256
MAX_TOTAL_SEGMENTS = FIELD_ORDER - 1


def gf_mul(a: int, b: int) -> int:
    """Carry-less polynomial product reduced modulo the field polynomial."""
    if not 0 <= a < FIELD_ORDER or not 0 <= b < FIELD_ORDER:
        raise ValueError("field elements must lie in [0, 255]")
    product = 0
    while b:
        if b & 1:
            product ^= a
        b >>= 1
        a <<= 1
        if a & 0x100:
            a ^= FIELD_POLY
    return product


def _build_tables() -> tuple[np.ndarray, np.ndarray]:
    exp = np.zeros(510, dtype=np.int64)
    log = np.zeros(FIELD_ORDER, dtype=np.int64)
    value = 1
    for power in range(255):
        exp[power] = value
        log[value] = power
        value <<= 1
        if value & 0x100:
            value ^= FIELD_POLY
    exp[255:510] = exp[0:255]
    return exp, log


_EXP, _LOG = _build_tables()


def _build_mul_table() -> np.ndarray:
    a = np.arange(FIELD_ORDER)
    table = _EXP[(_LOG[a, None] + _LOG[a[None, :]]) % 255].astype(np.uint8)
    table[0, :] = 0
    table[:, 0] = 0
    table.flags.writeable = False
    return table


_MUL_TABLE = _build_mul_table()


def gf_inv(a: int) -> int:
    """Multiplicative inverse in GF(256)."""
    if not 0 < a < FIELD_ORDER:
        raise ValueError("zero has no inverse" if a == 0 else "element out of range")
    return int(_EXP[255 - _LOG[a]])


def gf_pow(base: int, exponent: int) -> int:
    if not 0 <= base < FIELD_ORDER:
        raise ValueError("field elements must lie in [0, 255]")
    if exponent < 0:
        raise ValueError("exponent must be nonnegative")
    if base == 0:
        return 0 if exponent else 1
    return int(_EXP[(_LOG[base] * exponent) % 255])


def _mat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.uint8)
    for i in range(a.shape[0]):
        acc = np.zeros(b.shape[1], dtype=np.uint8)
        for j in range(a.shape[1]):
            acc ^= _MUL_TABLE[a[i, j], b[j]]
        out[i] = acc
    return out


def _mat_inv(matrix: np.ndarray) -> np.ndarray:
    """Gauss-Jordan inversion over GF(256)."""
    size = matrix.shape[0]
    work = matrix.astype(np.uint8).copy()
    inverse = np.eye(size, dtype=np.uint8)
    for col in range(size):
        candidates = np.nonzero(work[col:, col])[0]
        if candidates.size == 0:
            raise ValueError("matrix is singular over GF(256)")
        pivot = col + int(candidates[0])
        if pivot != col:
            work[[col, pivot]] = work[[pivot, col]]
            inverse[[col, pivot]] = inverse[[pivot, col]]
        scale = gf_inv(int(work[col, col]))
        work[col] = _MUL_TABLE[scale, work[col]]
        inverse[col] = _MUL_TABLE[scale, inverse[col]]
        for row in range(size):
            if row != col and work[row, col]:
                factor = work[row, col]
                work[row] ^= _MUL_TABLE[factor, work[col]]
                inverse[row] ^= _MUL_TABLE[factor, inverse[col]]
    return inverse


@lru_cache(maxsize=None)
def _generator(source_count: int, total_count: int) -> np.ndarray:
    """Systematic k-by-n generator with every k-column submatrix invertible."""
    points = np.arange(1, total_count + 1)
    vander = np.zeros((source_count, total_count), dtype=np.uint8)
    for i in range(source_count):
        for j, point in enumerate(points):
            vander[i, j] = gf_pow(int(point), i)
    left_inv = _mat_inv(vander[:, :source_count])
    generator = _mat_mul(left_inv, vander)
    assert np.array_equal(
        generator[:, :source_count], np.eye(source_count, dtype=np.uint8)
    )
    generator.flags.writeable = False
    return generator


@dataclass(frozen=True)
class CodeSpec:
    """Parameters of one fragment's code: k source segments, n coded ones."""

    source_count: int
    total_count: int

    def __post_init__(self):
        if not 1 <= self.source_count <= self.total_count:
            raise ValueError("need 1 <= source_count <= total_count")
        if self.total_count > MAX_TOTAL_SEGMENTS:
            raise ValueError(f"total_count must not exceed {MAX_TOTAL_SEGMENTS}")

    @property
    def generator(self) -> np.ndarray:
        return _generator(self.source_count, self.total_count)


@dataclass(frozen=True)
class CodedSegment:
    """One coded segment as stored by a base station (1-based index)."""

    sbs_index: int
    payload: bytes

    def __post_init__(self):
        if self.sbs_index < 1:
            raise ValueError("sbs_index is 1-based")
        if not isinstance(self.payload, (bytes, bytearray)):
            raise ValueError("payload must be bytes")
        object.__setattr__(self, "payload", bytes(self.payload))


def encode(spec: CodeSpec, segments: list[bytes]) -> list[CodedSegment]:
    """Encode k equal-length segments into n coded segments.

    The first k outputs are byte-identical to the sources (systematic code).
    """
    if len(segments) != spec.source_count:
        raise ValueError(
            f"expected {spec.source_count} segments, got {len(segments)}"
        )
    lengths = {len(s) for s in segments}
    if len(lengths) != 1 or 0 in lengths:
        raise ValueError("segments must be nonempty and of equal length")
    source = np.stack([np.frombuffer(bytes(s), dtype=np.uint8) for s in segments])
    generator = spec.generator
    coded = np.bitwise_xor.reduce(
        _MUL_TABLE[generator[:, :, None], source[:, None, :]], axis=0
    )
    return [
        CodedSegment(sbs_index=j + 1, payload=coded[j].tobytes())
        for j in range(spec.total_count)
    ]


def decode(spec: CodeSpec, shares: list[CodedSegment]) -> list[bytes]:
    """Reconstruct the k source segments from exactly k coded segments.

    Fewer shares than the threshold is a hard error: playback cannot start
    on a partially collected fragment.
    """
    if len(shares) < spec.source_count:
        raise ValueError(
            f"need {spec.source_count} shares to decode, got {len(shares)}"
        )
    if len(shares) > spec.source_count:
        raise ValueError(
            f"expected exactly {spec.source_count} shares, got {len(shares)}"
        )
    indices = [share.sbs_index for share in shares]
    if len(set(indices)) != len(indices):
        raise ValueError("shares must come from distinct base stations")
    if min(indices) < 1 or max(indices) > spec.total_count:
        raise ValueError(f"share indices must lie in [1, {spec.total_count}]")
    lengths = {len(share.payload) for share in shares}
    if len(lengths) != 1 or 0 in lengths:
        raise ValueError("share payloads must be nonempty and of equal length")
    # share j carries sum_i G[i, idx_j] * source_i, so invert the transpose
    columns = spec.generator[:, [i - 1 for i in indices]]
    inverse = _mat_inv(columns.T)
    stacked = np.stack([np.frombuffer(share.payload, dtype=np.uint8) for share in shares])
    sources = np.bitwise_xor.reduce(
        _MUL_TABLE[inverse[:, :, None], stacked[None, :, :]], axis=1
    )
    return [sources[i].tobytes() for i in range(spec.source_count)]
