"""Counter-based standard normal generation.

Every variate is a pure function of ``(seed, stream, index, domain)``: the
Philox4x32-10 block cipher is applied to a counter built from those values and
the output words are mapped to normals with the Box-Muller transform. Nothing
depends on how the work is batched or how many threads run it, which is what
makes ensembles bit-identical between sequential and parallel execution.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)

# domain tags keep independent uses of one seed from sharing counters
DOMAIN_INCREMENTS = 0
DOMAIN_BRIDGE = 1
DOMAIN_GAUSSIAN = 2
DOMAIN_PROBES = 3

THREADS_ENV = "BROWNIAN_LAB_THREADS"
_CHUNK_STREAMS = 1024


def philox4x32(counter, key, rounds=10):
    """Philox4x32 on arrays of counters.

    Parameters
    ----------
    counter : sequence of four uint32-valued arrays (broadcastable)
    key : pair of ints (k0, k1), each < 2**32

    Returns
    -------
    tuple of four uint64 arrays holding 32-bit output words
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) & _MASK32 for c in counter)
    k0, k1 = int(key[0]) & 0xFFFFFFFF, int(key[1]) & 0xFFFFFFFF
    for r in range(rounds):
        if r:
            k0 = (k0 + _W0) & 0xFFFFFFFF
            k1 = (k1 + _W1) & 0xFFFFFFFF
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0, lo0 = p0 >> _SHIFT32, p0 & _MASK32
        hi1, lo1 = p1 >> _SHIFT32, p1 & _MASK32
        c0, c1, c2, c3 = (
            hi1 ^ c1 ^ np.uint64(k0),
            lo1,
            hi0 ^ c3 ^ np.uint64(k1),
            lo0,
        )
    return c0, c1, c2, c3


def _seed_key(seed):
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed & 0xFFFFFFFF, seed >> 32


def _to_unit(hi, lo):
    # 53 random bits, offset by half an ulp so the result lies in (0, 1)
    bits = (hi >> np.uint64(5)) * np.uint64(1 << 26) + (lo >> np.uint64(6))
    return (bits.astype(np.float64) + 0.5) * 2.0**-53


def _normals_block(key, streams, n, domain):
    streams = np.asarray(streams, dtype=np.uint64)
    n_blocks = (n + 1) // 2
    blocks = np.arange(n_blocks, dtype=np.uint64)
    c0 = blocks[None, :]
    c1 = (streams & _MASK32)[:, None]
    c2 = (streams >> _SHIFT32)[:, None]
    c3 = np.uint64(domain)
    w0, w1, w2, w3 = philox4x32(
        np.broadcast_arrays(c0, c1, c2, c3), key
    )
    u1 = _to_unit(w0, w1)
    u2 = _to_unit(w2, w3)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    out = np.empty((streams.shape[0], 2 * n_blocks), dtype=np.float64)
    out[:, 0::2] = radius * np.cos(angle)
    out[:, 1::2] = radius * np.sin(angle)
    return out[:, :n]


def worker_count(threads=None):
    """Number of worker threads, honouring ``BROWNIAN_LAB_THREADS``."""
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def standard_normals(seed, streams, n, domain=DOMAIN_INCREMENTS, threads=None):
    """Standard normal array of shape ``(len(streams), n)``.

    Entry ``[i, k]`` depends only on ``(seed, streams[i], k, domain)``.
    """
    key = _seed_key(seed)
    streams = np.atleast_1d(np.asarray(streams, dtype=np.uint64))
    if n == 0 or streams.size == 0:
        return np.zeros((streams.size, n))
    chunks = [
        streams[i : i + _CHUNK_STREAMS]
        for i in range(0, streams.size, _CHUNK_STREAMS)
    ]
    workers = min(worker_count(threads), len(chunks))
    if workers == 1:
        parts = [_normals_block(key, c, n, domain) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _normals_block(key, c, n, domain), chunks))
    return np.concatenate(parts, axis=0)
