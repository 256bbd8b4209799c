"""Empirical characteristic functions, covariance estimates and independence tests.

All tests are fixed-threshold: a statistic, a target and a tolerance derived
from a variance bound. Reductions run over fixed-size chunks in a fixed order
so results are bit-stable for a given input.
"""

from __future__ import annotations

import numpy as np

from ._validation import check_samples, probe_array
from .exceptions import BadSplit, DimensionMismatch, EmptySample
from .gaussian import charfun
from .reports import TestReport

CHUNK = 1 << 16
MAX_PROBE_NORM = 10.0
ECF_SIGMAS = 5.0
INDEPENDENCE_SIGMAS = 10.0
COV_SIGMAS = 5.0


def default_probes(n, scales=(0.5, 1.0, 2.0)):
    """Axis unit vectors plus the scaled diagonal ``(1,...,1)/sqrt(n)``."""
    if n < 1:
        raise ValueError("dimension must be at least 1")
    diag = np.full(n, 1.0 / np.sqrt(n))
    return np.vstack([np.eye(n)] + [s * diag for s in scales])


def check_probes(probes, dim=None):
    p, _ = probe_array(probes, dim)
    if p.ndim != 2 or p.shape[0] == 0:
        raise ValueError("probe set must be a nonempty list of vectors")
    if dim is not None and p.shape[1] != dim:
        raise DimensionMismatch(f"probes have dimension {p.shape[1]}, samples have {dim}")
    if np.any(np.linalg.norm(p, axis=1) > MAX_PROBE_NORM):
        raise ValueError(f"probe norms must not exceed {MAX_PROBE_NORM}")
    return p


def _phase_means(phases_fn, count, k):
    # mean of exp(i * phase) over rows, summed chunk by chunk
    re = np.zeros(k)
    im = np.zeros(k)
    for lo in range(0, count, CHUNK):
        ph = phases_fn(lo, min(lo + CHUNK, count))
        re += np.cos(ph).sum(axis=0)
        im += np.sin(ph).sum(axis=0)
    return (re + 1j * im) / count


def ecf(samples, t):
    """``(1/count) sum_k exp(i <t, x_k>)`` at one probe or a stack of probes."""
    s = check_samples(samples)
    if s.shape[0] == 0:
        raise EmptySample("empirical characteristic function needs at least one sample")
    p, single = probe_array(t, s.shape[1])
    if p.shape[1] != s.shape[1]:
        raise DimensionMismatch(f"probe has dimension {p.shape[1]}, samples have {s.shape[1]}")
    out = _phase_means(lambda a, b: s[a:b] @ p.T, s.shape[0], p.shape[0])
    return complex(out[0]) if single else out


def ecf_gaussian_test(samples, g, probes=None, seed=None, name="ecf_gaussian"):
    """Max ECF deviation from ``charfun(g, .)`` against ``5/sqrt(count)``."""
    s = check_samples(samples, dim=g.dim)
    if s.shape[0] == 0:
        raise EmptySample("no samples")
    p = check_probes(default_probes(g.dim) if probes is None else probes, dim=g.dim)
    gap = float(np.max(np.abs(ecf(s, p) - charfun(g, p))))
    count = s.shape[0]
    return TestReport(name, gap, 0.0, ECF_SIGMAS / np.sqrt(count), count=count, seed=seed)


def empirical_cov(samples):
    """Unbiased sample covariance matrix (rows are draws)."""
    s = check_samples(samples)
    if s.shape[0] < 2:
        raise EmptySample("covariance needs at least two samples")
    centered = s - s.mean(axis=0)
    return centered.T @ centered / (s.shape[0] - 1)


def independence_ecf_test(X, Y, probes_x=None, probes_y=None, seed=None):
    """Product test: ``max |ecf_XY(s,t) - ecf_X(s) ecf_Y(t)|`` against ``10/sqrt(count)``."""
    x = check_samples(X)
    y = check_samples(Y)
    if x.shape[0] == 0:
        raise EmptySample("no samples")
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatch("X and Y must be paired draws")
    px = check_probes(default_probes(x.shape[1]) if probes_x is None else probes_x, x.shape[1])
    py = check_probes(default_probes(y.shape[1]) if probes_y is None else probes_y, y.shape[1])
    count = x.shape[0]
    ex = ecf(x, px)
    ey = ecf(y, py)
    kx, ky = px.shape[0], py.shape[0]

    def phases(a, b):
        ph = (x[a:b] @ px.T)[:, :, None] + (y[a:b] @ py.T)[:, None, :]
        return ph.reshape(b - a, kx * ky)

    joint = _phase_means(phases, count, kx * ky).reshape(kx, ky)
    gap = float(np.max(np.abs(joint - ex[:, None] * ey[None, :])))
    return TestReport(
        "independence_ecf", gap, 0.0, INDEPENDENCE_SIGMAS / np.sqrt(count), count=count, seed=seed
    )


def gaussian_cov_independence_test(samples, split, seed=None):
    """Cross-covariance test between index blocks ``S`` and ``T``.

    For a jointly Gaussian vector, zero cross-covariance is equivalent to
    independence of the blocks. Under independence the product ``U V`` of
    centered coordinates has variance ``Var U Var V``, so each entry is
    standardized by ``sqrt(Var U Var V / count)``. The reported estimate is the
    largest absolute standardized entry, compared with 5.
    """
    s = check_samples(samples)
    S, T = (sorted(int(i) for i in blk) for blk in split)
    n = s.shape[1]
    if not S or not T:
        raise BadSplit("both index blocks must be nonempty")
    if set(S) & set(T):
        raise BadSplit("index blocks overlap", witness=sorted(set(S) & set(T)))
    if min(S + T) < 0 or max(S + T) >= n:
        raise BadSplit(f"indices must lie in [0, {n})")
    count = s.shape[0]
    C = empirical_cov(s)
    cross = C[np.ix_(S, T)]
    var = np.diag(C)
    sd = np.sqrt(np.outer(var[S], var[T]) / count)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sd > 0, np.abs(cross) / sd, np.where(cross == 0, 0.0, np.inf))
    return TestReport(
        "gaussian_cov_independence",
        float(np.max(z)),
        0.0,
        COV_SIGMAS,
        count=count,
        seed=seed,
        note="max standardized cross-covariance; zero cross-covariance of a "
        "jointly Gaussian vector certifies independence",
    )
