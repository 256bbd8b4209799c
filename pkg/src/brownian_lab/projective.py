"""Finite-dimensional distributions of Brownian motion.

For a finite time set ``J`` the marginal is ``N(0, C_J)`` with
``(C_J)_ij = min(t_i, t_j)``. Rational times give exact ``Fraction`` matrices so
projectivity can be checked as an identity rather than up to a tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._validation import as_time_tuple, is_exact
from .exceptions import DimensionMismatch, NotASubset
from .gaussian import GaussianMeasure, charfun, sample
from .reports import TestReport
from .stats import ECF_SIGMAS, ecf

N_MC_PROBES = 10


def min_kernel_cov(times):
    """``[[min(t_i, t_j)]]``; an object array of Fractions for rational input."""
    t = as_time_tuple(times)
    dtype = object if isinstance(t[0], Fraction) else float
    n = len(t)
    C = np.empty((n, n), dtype=dtype)
    for i in range(n):
        for j in range(n):
            C[i, j] = min(t[i], t[j])
    return C


def gram_identity_check(times, coefficients):
    """``(a^T C a, integral of (sum_i a_i 1_[0,t_i])^2)``.

    The integrand is constant on each ``(t_{k-1}, t_k]`` where it equals the
    suffix sum ``sum_{i >= k} a_i``, so the integral is a finite sum. With
    rational inputs both numbers are exact Fractions.
    """
    t = as_time_tuple(times)
    a = list(coefficients.tolist() if isinstance(coefficients, np.ndarray) else coefficients)
    if len(a) != len(t):
        raise DimensionMismatch(f"{len(a)} coefficients for {len(t)} times")
    exact = isinstance(t[0], Fraction) and is_exact(a)
    if exact:
        a = [Fraction(v) for v in a]
    else:
        t = tuple(float(v) for v in t)
        a = [float(v) for v in a]
    zero = Fraction(0) if exact else 0.0
    n = len(t)
    quad = zero
    for i in range(n):
        for j in range(n):
            quad += a[i] * a[j] * min(t[i], t[j])
    integral = zero
    suffix = zero
    for k in range(n - 1, -1, -1):
        suffix += a[k]
        left = t[k - 1] if k else zero
        integral += (t[k] - left) * suffix * suffix
    return quad, integral


@dataclass(frozen=True)
class BrownianFDD:
    """Marginal law of ``(B_t)_{t in times}``."""

    times: tuple
    cov: np.ndarray

    def __init__(self, times):
        t = as_time_tuple(times)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "cov", min_kernel_cov(t))

    @property
    def exact(self):
        return isinstance(self.times[0], Fraction)

    @property
    def measure(self):
        return GaussianMeasure(np.zeros(len(self.times)), self.cov.astype(float))


def subset_indices(times, subset):
    index = {t: i for i, t in enumerate(times)}
    missing = [s for s in subset if s not in index]
    if missing:
        raise NotASubset(f"times {missing} are not in the parent set", witness=missing)
    return [index[s] for s in subset]


def project(fdd, subset):
    """Marginal on ``subset``: the parent submatrix, checked against a fresh kernel."""
    idx = subset_indices(fdd.times, as_time_tuple(subset))
    out = BrownianFDD([fdd.times[i] for i in idx])
    block = fdd.cov[np.ix_(idx, idx)]
    if not np.array_equal(block, out.cov):
        raise AssertionError("projected covariance differs from the min-kernel matrix")
    return out


def sample_fdd(times, seed, count, start=0, threads=None):
    """Draws of ``(B_t)_{t in times}`` straight from ``N(0, C_J)``, shape ``(count, |J|)``."""
    return sample(BrownianFDD(times).measure, seed, count, start=start, threads=threads)


def mc_probes(dim):
    """Ten fixed probes: axis and diagonal directions at scales 0.25..2.5."""
    dirs = np.vstack([np.eye(dim), np.full((1, dim), 1.0 / np.sqrt(dim))])
    scales = 0.25 * np.arange(1, N_MC_PROBES + 1)
    return np.array([scales[k] * dirs[k % len(dirs)] for k in range(N_MC_PROBES)])


def verify_projective_mc(times, subset, seed, count, target_cov=None, threads=None):
    """ECF of the projected ``N(0, C_J)`` draws against ``N(0, C_H)``.

    ``target_cov`` replaces ``C_H`` as the reference law, which is how a
    deliberately wrong target is exercised.
    """
    parent = BrownianFDD(times)
    idx = subset_indices(parent.times, as_time_tuple(subset))
    sub = [parent.times[i] for i in idx]
    draws = sample(parent.measure, seed, count, threads=threads)[:, idx]
    ref_cov = min_kernel_cov(sub).astype(float) if target_cov is None else target_cov
    ref = GaussianMeasure(np.zeros(len(idx)), ref_cov)
    probes = mc_probes(len(idx))
    gap = float(np.max(np.abs(ecf(draws, probes) - charfun(ref, probes))))
    return TestReport(
        "projective_ecf", gap, 0.0, ECF_SIGMAS / np.sqrt(count), count=count, seed=seed
    )


def parse_times(text):
    """Comma-separated times; decimal literals are read as exact rationals."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    return as_time_tuple([Fraction(p) for p in parts])


def format_times(times):
    return ",".join(str(t) for t in times)
