"""Exact dense kernels for measures on N^k.

Convolution on N^k is multivariate polynomial multiplication.  Weights are
brought to a common denominator and the integer numerator arrays are
multiplied by Kronecker substitution: each array is packed into one big
integer with fixed-width slots and the product is taken with GMP.  The
result is exact; slot widths are chosen so that no carries cross slots.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import NamedTuple

import gmpy2
import numpy as np

# Below this many pairwise products the dict loop is faster.
DENSE_THRESHOLD = 20_000


class Dense(NamedTuple):
    origin: tuple
    shape: tuple
    nums: dict        # multi-index offset (tuple) -> nonnegative int numerator
    den: int


def to_dense(weights: dict) -> Dense:
    keys = list(weights)
    k = len(keys[0])
    origin = tuple(min(key[i] for key in keys) for i in range(k))
    top = tuple(max(key[i] for key in keys) for i in range(k))
    shape = tuple(t - o + 1 for t, o in zip(top, origin))
    den = 1
    for v in weights.values():
        den = math.lcm(den, v.denominator)
    nums = {}
    for key, v in weights.items():
        off = tuple(a - o for a, o in zip(key, origin))
        nums[off] = v.numerator * (den // v.denominator)
    return Dense(origin, shape, nums, den)


def _flat(offsets, strides):
    return sum(o * s for o, s in zip(offsets, strides))


def _strides(shape):
    strides = [1] * len(shape)
    for i in range(len(shape) - 2, -1, -1):
        strides[i] = strides[i + 1] * shape[i + 1]
    return strides


def _pack(nums: dict, strides, width: int) -> tuple[int, int]:
    flat = {_flat(off, strides): v for off, v in nums.items()}
    length = max(flat) + 1
    zero = bytes(width)
    chunks = [zero] * length
    for pos, v in flat.items():
        chunks[pos] = v.to_bytes(width, "little")
    return int.from_bytes(b"".join(chunks), "little"), length


def convolve_dense(a: Dense, b: Dense) -> tuple[dict, int]:
    """Exact convolution; returns ({key: numerator}, denominator)."""
    out_shape = tuple(x + y - 1 for x, y in zip(a.shape, b.shape))
    strides = _strides(out_shape)
    max_a = max(a.nums.values())
    max_b = max(b.nums.values())
    terms = min(len(a.nums), len(b.nums))
    bits = max_a.bit_length() + max_b.bit_length() + terms.bit_length() + 1
    width = (bits + 7) // 8
    pa, la = _pack(a.nums, strides, width)
    pb, lb = _pack(b.nums, strides, width)
    prod = int(gmpy2.mpz(pa) * gmpy2.mpz(pb))
    length = la + lb - 1
    buf = prod.to_bytes(length * width, "little")
    origin = tuple(x + y for x, y in zip(a.origin, b.origin))
    out = {}
    from_bytes = int.from_bytes
    for pos in range(length):
        chunk = buf[pos * width:(pos + 1) * width]
        if chunk.count(0) == width:
            continue
        v = from_bytes(chunk, "little")
        idx = []
        rem = pos
        for s in strides:
            q, rem = divmod(rem, s)
            idx.append(q)
        out[tuple(o + i for o, i in zip(origin, idx))] = v
    return out, a.den * b.den


def fractions_from(nums: dict, den: int) -> dict:
    return {key: Fraction(v, den) for key, v in nums.items()}


def to_array(weights: dict, pad: tuple | None = None):
    """Dense numerator array (int64 when safe, else object) plus origin and denominator."""
    d = to_dense(weights)
    shape = d.shape if pad is None else tuple(s + p for s, p in zip(d.shape, pad))
    # sums over the whole array must also fit in int64
    bits = max(abs(v) for v in d.nums.values()).bit_length() + math.prod(shape).bit_length()
    arr = np.zeros(shape, dtype=object if bits > 61 else np.int64)
    for off, v in d.nums.items():
        arr[off] = v
    return arr, d.origin, d.den


def shift_deviations(weights: dict, shifts) -> dict:
    """Exact ||theta - delta_s * theta|| for every shift s in N^k."""
    shifts = [tuple(s) for s in shifts]
    if not shifts:
        return {}
    k = len(shifts[0])
    pad = tuple(max(s[i] for s in shifts) for i in range(k))
    arr, _, den = to_array(weights, pad)
    base_shape = tuple(n - p for n, p in zip(arr.shape, pad))
    out = {}
    for s in shifts:
        moved = np.zeros_like(arr)
        dst = tuple(slice(si, si + n) for si, n in zip(s, base_shape))
        src = tuple(slice(0, n) for n in base_shape)
        moved[dst] = arr[src]
        diff = np.abs(arr - moved).sum()
        out[s] = Fraction(int(diff), den)
    return out


def sumset(a, b) -> set:
    """{x + y : x in a, y in b} for finite subsets of N^k, via indicator products."""
    da = Dense(*_box(a))
    db = Dense(*_box(b))
    nums, _ = convolve_dense(da, db)
    return set(nums)


def _box(points):
    points = list(points)
    k = len(points[0])
    origin = tuple(min(p[i] for p in points) for i in range(k))
    top = tuple(max(p[i] for p in points) for i in range(k))
    shape = tuple(t - o + 1 for t, o in zip(top, origin))
    nums = {tuple(x - o for x, o in zip(p, origin)): 1 for p in points}
    return origin, shape, nums, 1
