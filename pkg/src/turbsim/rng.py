"""Deterministic counter-based random streams.

Every stochastic quantity in the library (white-noise fields, measurement
noise, protocol draws, basis training draws) is pulled from a named Philox
stream keyed by ``(seed, stream id)``.  Streams are independent of call
order, worker count and platform word size, which is what makes sidecar
replay possible: re-running with the recorded seeds reproduces the same
bits.

The normal variates are produced by an explicit Box-Muller transform on the
raw 64-bit Philox output rather than by ``numpy.random.Generator`` methods,
so the mapping from counters to floats is pinned by this module and not by
the numpy version.  ``GENERATOR_ID`` names the exact algorithm and is
recorded in sidecars; a replay tool must refuse a sidecar carrying an
unknown generator id.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Philox

GENERATOR_ID = "philox4x64-10:boxmuller:v1"

# Stream-id domains.  The high 32 bits of a stream id select the domain so
# channel indices from different consumers can never collide.
DOMAIN_FIELD = 1
DOMAIN_NOISE = 2
DOMAIN_PROTOCOL = 3
DOMAIN_BASIS = 4
DOMAIN_SURROGATE = 5
DOMAIN_DERIVE = 6

_U64 = np.uint64
_INV_2_53 = float(2.0**-53)


def stream_id(domain: int, channel: int = 0) -> int:
    """Pack a (domain, channel) pair into a single 64-bit stream id."""
    if not 0 <= domain < 2**32:
        raise ValueError(f"domain out of range: {domain}")
    if not 0 <= channel < 2**32:
        raise ValueError(f"channel out of range: {channel}")
    return (domain << 32) | channel


def raw_uint64(seed: int, stream: int, n: int) -> np.ndarray:
    """Raw Philox4x64-10 output for the given key, as uint64.

    The key is ``[seed, stream]`` and the counter starts at zero, so the
    first ``n`` words of a stream never depend on how many were drawn by
    other streams.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return np.empty(0, dtype=_U64)
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream & 0xFFFFFFFFFFFFFFFF],
                   dtype=_U64)
    return Philox(key=key).random_raw(n)


def uniforms(seed: int, stream: int, n: int) -> np.ndarray:
    """n doubles uniform on (0, 1), exclusive of both endpoints."""
    raw = raw_uint64(seed, stream, n)
    # 53 mantissa bits; the +0.5 offset keeps 0 and 1 out of the range.
    return ((raw >> _U64(11)).astype(np.float64) + 0.5) * _INV_2_53


def normals(seed: int, stream: int, n: int) -> np.ndarray:
    """n standard normal doubles via Box-Muller on uniform pairs."""
    if n == 0:
        return np.empty(0, dtype=np.float64)
    pairs = (n + 1) // 2
    u = uniforms(seed, stream, 2 * pairs)
    # Consecutive uniform pairs feed each normal pair, so a prefix of the
    # stream never depends on how many normals were requested.
    u1, u2 = u[0::2], u[1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    ang = (2.0 * np.pi) * u2
    out = np.empty(2 * pairs, dtype=np.float64)
    out[0::2] = r * np.cos(ang)
    out[1::2] = r * np.sin(ang)
    return out[:n]


def derive_seed(master_seed: int, index: int, purpose: int) -> int:
    """One derived 64-bit seed, stable in (master_seed, index, purpose)."""
    s = stream_id(DOMAIN_DERIVE, purpose)
    # One Philox block keyed by the master seed; the sample index selects
    # the counter position so derived seeds never collide across samples.
    key = np.array([master_seed & 0xFFFFFFFFFFFFFFFF, s], dtype=_U64)
    bg = Philox(key=key)
    bg.advance(index * 4)
    return int(bg.random_raw(1)[0])
