"""Bitmask helpers for element index sets.

Subsets of a group's index domain 0..n-1 are stored as arbitrary-precision
Python ints, so intersection, union and subset tests are single C-level
operations regardless of n.  Conversion to and from numpy index arrays goes
through packbits/unpackbits with little-endian bit order.
"""

from __future__ import annotations

import base64

import numpy as np


def mask_from_bools(flags: np.ndarray) -> int:
    packed = np.packbits(flags.astype(np.uint8, copy=False), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def mask_from_indices(indices, n: int) -> int:
    flags = np.zeros(n, dtype=bool)
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size:
        flags[idx] = True
    return mask_from_bools(flags)


def bools_from_mask(mask: int, n: int) -> np.ndarray:
    raw = mask.to_bytes((n + 7) // 8, "little")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), count=n, bitorder="little")
    return bits.astype(bool)


def indices_from_mask(mask: int, n: int) -> np.ndarray:
    return np.flatnonzero(bools_from_mask(mask, n))


def iter_bits(mask: int):
    """Yield set bit positions in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def is_subset(a: int, b: int) -> bool:
    return a & ~b == 0


def mask_to_b64(mask: int, n: int) -> str:
    """Encode as little-endian 64-bit words, padded to the domain size."""
    nwords = (n + 63) // 64
    return base64.b64encode(mask.to_bytes(8 * nwords, "little")).decode("ascii")


def mask_from_b64(text: str) -> int:
    return int.from_bytes(base64.b64decode(text), "little")
