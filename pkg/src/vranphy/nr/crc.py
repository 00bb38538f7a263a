"""Cyclic redundancy checks used by transport-block processing.

Three generator polynomials are supported: the 24-bit A and B variants and
the 16-bit CCITT polynomial. Bits are processed MSB-first with zero initial
state and no final inversion, so an all-zero payload yields an all-zero
checksum and appending the checksum makes the remainder zero.

The checksum is computed through the linearity of polynomial division:
``crc(m) = sum over set bits i of (x^(L + n - 1 - i) mod g)``. Powers of x
mod g are precomputed once per polynomial and the reduction is a single
vectorized XOR over the payload's set-bit positions.
"""
from __future__ import annotations

import numpy as np

from ..errors import InvalidConfigError

# generator polynomials, MSB (x^len) implicit
_POLYS = {
    "CRC24A": (0x864CFB, 24),
    "CRC24B": (0x800063, 24),
    "CRC16": (0x1021, 16),
}

_POWER_CACHE: dict[str, np.ndarray] = {}


def crc_length(kind: str) -> int:
    if kind not in _POLYS:
        raise InvalidConfigError(f"unknown CRC kind {kind!r}")
    return _POLYS[kind][1]


def _x_powers(kind: str, needed: int) -> np.ndarray:
    """Array P with P[k] = x^k mod g as an integer, grown on demand."""
    poly, length = _POLYS[kind]
    mask = (1 << length) - 1
    top = 1 << (length - 1)
    cached = _POWER_CACHE.get(kind)
    if cached is not None and cached.size >= needed:
        return cached
    size = max(needed, 1 << 12)
    if cached is not None:
        size = max(size, 2 * cached.size)
    out = np.empty(size, dtype=np.uint32)
    if cached is not None:
        out[: cached.size] = cached
        start = cached.size
        reg = int(cached[start - 1])
    else:
        out[0] = 1
        start = 1
        reg = 1
    for k in range(start, size):
        if reg & top:
            reg = ((reg << 1) ^ poly) & mask
        else:
            reg = (reg << 1) & mask
        out[k] = reg
    _POWER_CACHE[kind] = out
    return out


def crc_compute(payload, kind: str) -> np.ndarray:
    """Checksum of ``payload`` (array-like of 0/1) as a bit array."""
    if kind not in _POLYS:
        raise InvalidConfigError(f"unknown CRC kind {kind!r}")
    length = _POLYS[kind][1]
    bits = np.asarray(payload, dtype=np.uint8)
    if bits.ndim != 1:
        raise InvalidConfigError("payload must be a flat bit sequence")
    n = bits.size
    reg = 0
    if n:
        powers = _x_powers(kind, n + length)
        idx = np.flatnonzero(bits)
        if idx.size:
            exps = (length + n - 1) - idx
            reg = int(np.bitwise_xor.reduce(powers[exps]))
    out = np.zeros(length, dtype=np.uint8)
    for i in range(length):
        out[i] = (reg >> (length - 1 - i)) & 1
    return out


def crc_append(payload, kind: str) -> np.ndarray:
    bits = np.asarray(payload, dtype=np.uint8)
    return np.concatenate([bits, crc_compute(bits, kind)])


def crc_check(block, kind: str) -> bool:
    """True when ``block`` ends with a valid checksum over its head."""
    bits = np.asarray(block, dtype=np.uint8)
    length = crc_length(kind)
    if bits.size < length:
        return False
    expected = crc_compute(bits[:-length], kind)
    return bool(np.array_equal(expected, bits[-length:]))
