"""Multivariate Gaussian measures on R^n.

A :class:`GaussianMeasure` is a mean vector plus a symmetric positive
semidefinite covariance. Sampling goes through a PSD factor ``S`` with
``S.T @ S == C`` applied to counter-based standard normals, so draw ``i`` is a
function of ``(seed, i)`` alone.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import factorial2

from . import _rng
from ._validation import PSD_RTOL, check_covariance, check_vector, probe_array
from .exceptions import BadPartition, DimensionMismatch, NonCentered, NotPSD

CROSS_TOL = 1e-12


@dataclass(frozen=True)
class GaussianMeasure:
    """``N(mean, cov)``; inputs are validated and stored as float arrays."""

    mean: np.ndarray
    cov: np.ndarray

    def __init__(self, mean, cov):
        c = check_covariance(cov)
        m = check_vector(mean, "mean", dim=c.shape[0])
        m.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "mean", m)
        object.__setattr__(self, "cov", c)

    @classmethod
    def centered(cls, cov):
        c = np.atleast_2d(np.asarray(cov, dtype=float))
        return cls(np.zeros(c.shape[0]), c)

    @classmethod
    def standard(cls, n):
        return cls(np.zeros(n), np.eye(n))

    @property
    def dim(self):
        return self.mean.shape[0]


def charfun(g, t):
    """``exp(i <t, m> - t^T C t / 2)``.

    ``t`` may be one vector of length ``n`` or an array of probes with shape
    ``(k, n)``; the result is a complex scalar or a length-``k`` array.
    """
    t2, single = probe_array(t, g.dim)
    if t2.shape[1] != g.dim:
        raise DimensionMismatch(f"probe has dimension {t2.shape[1]}, measure has {g.dim}")
    quad = np.einsum("ki,ij,kj->k", t2, g.cov, t2)
    out = np.exp(1j * (t2 @ g.mean) - 0.5 * quad)
    return complex(out[0]) if single else out


def psd_factor(cov):
    """Matrix ``S`` with ``S.T @ S`` equal to ``cov``.

    Symmetric eigendecomposition; eigenvalues inside the ``-1e-10`` tolerance
    band are clamped to zero so singular matrices factor cleanly.
    """
    c = check_covariance(cov)
    if c.size == 0:
        return c.copy()
    w, q = np.linalg.eigh(c)
    norm = float(np.max(np.abs(w)))
    if w[0] < -PSD_RTOL * (1.0 + norm):
        raise NotPSD(f"eigenvalue {w[0]:.3g} below tolerance", witness=float(w[0]))
    w = np.clip(w, 0.0, None)
    return np.sqrt(w)[:, None] * q.T


def affine_pushforward(g, A, b=None):
    """Image of ``g`` under ``x -> A x + b``: ``N(A m + b, A C A^T)``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[1] != g.dim:
        raise DimensionMismatch(f"map expects dimension {A.shape[1]}, measure has {g.dim}")
    b = np.zeros(A.shape[0]) if b is None else check_vector(b, "offset", dim=A.shape[0])
    cov = A @ g.cov @ A.T
    return GaussianMeasure(A @ g.mean + b, 0.5 * (cov + cov.T))


def sample(g, seed, count, start=0, threads=None):
    """``count`` draws of ``g`` as a ``(count, n)`` array.

    Draw ``i`` is ``m + S^T z_i`` where ``z_i`` depends only on
    ``(seed, start + i)``; splitting a run into pieces with matching
    ``start`` offsets reproduces it exactly.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    S = psd_factor(g.cov)
    z = _rng.standard_normals(
        seed,
        np.arange(start, start + count, dtype=np.uint64),
        g.dim,
        domain=_rng.DOMAIN_GAUSSIAN,
        threads=threads,
    )
    return g.mean + z @ S


def abs_central_moment(variance, order):
    """``E|N(0, variance)|^order`` for even ``order = 2n``: ``(2n-1)!! variance^n``."""
    if order < 2 or order % 2:
        raise ValueError("order must be an even integer >= 2")
    if variance < 0:
        raise ValueError("variance must be nonnegative")
    n = order // 2
    return float(factorial2(2 * n - 1, exact=True)) * float(variance) ** n


def gaussian_exp_sq_moment(g, kappa):
    """``E exp(kappa |X|^2)`` for centered ``g``; ``inf`` once it diverges.

    With eigenvalues ``l_i`` of the covariance the integral factorizes into
    ``prod (1 - 2 kappa l_i)^(-1/2)``, finite iff ``kappa < 1 / (2 max l_i)``.
    """
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    if np.any(g.mean != 0):
        raise NonCentered("only centered Gaussian measures are supported")
    lam = np.clip(np.linalg.eigvalsh(g.cov), 0.0, None)
    factors = 1.0 - 2.0 * kappa * lam
    if np.any(factors <= 0):
        return math.inf
    return float(np.prod(factors ** -0.5))


def blocks_independent(cov, blocks):
    """Whether every cross-block covariance entry vanishes (to ``1e-12``).

    For a jointly Gaussian vector this is equivalent to mutual independence
    of the blocks.
    """
    c = np.atleast_2d(np.asarray(cov, dtype=float))
    n = c.shape[0]
    flat = [int(i) for blk in blocks for i in blk]
    if sorted(flat) != list(range(n)):
        raise BadPartition("blocks must cover every index exactly once", witness=flat)
    label = np.empty(n, dtype=int)
    for k, blk in enumerate(blocks):
        label[list(blk)] = k
    cross = label[:, None] != label[None, :]
    return bool(np.all(np.abs(c[cross]) <= CROSS_TOL))


# ---------------------------------------------------------------------------
# CSV with a ``dim n`` header


def dumps_matrix(M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    buf = io.StringIO()
    buf.write(f"dim {M.shape[1]}\n")
    for row in M:
        buf.write(",".join(repr(float(v)) for v in row) + "\n")
    return buf.getvalue()


def loads_matrix(text):
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("dim"):
        raise ValueError("matrix CSV must start with 'dim n'")
    n = int(lines[0].split()[1])
    rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
    M = np.array(rows, dtype=float).reshape(len(rows), -1) if rows else np.zeros((0, n))
    if M.shape[1] != n:
        raise DimensionMismatch(f"rows have {M.shape[1]} entries, header says {n}")
    return M


def dumps_vector(v):
    v = np.asarray(v, dtype=float).reshape(-1)
    return f"dim {v.shape[0]}\n" + ",".join(repr(float(x)) for x in v) + "\n"


def loads_vector(text):
    return loads_matrix(text).reshape(-1)


def dumps_samples_ndjson(samples, start=0):
    """One ``{"i": idx, "x": [...]}`` record per line."""
    s = np.atleast_2d(np.asarray(samples, dtype=float))
    return "".join(
        json.dumps({"i": start + k, "x": [float(v) for v in row]}, allow_nan=False) + "\n"
        for k, row in enumerate(s)
    )
