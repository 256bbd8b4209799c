"""Explicit Kolmogorov-Chentsov constants and their Monte Carlo check.

A process satisfies the Kolmogorov condition ``(p, q, M)`` when
``E|X_s - X_t|^p <= M |s - t|^q``. On an index set with covering profile
``(c, d)`` and ``q > d``, every ``beta < (q - d) / p`` then admits

    E sup_{s != t} |X_s - X_t|^p / |s - t|^(beta p) <= M L(c, d, p, q, beta, diam).

This module evaluates ``L`` as a truncated series with a certified tail and
estimates both sides of the inequality from a path ensemble.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_paths
from .exceptions import BadExponents, DegenerateGrid, DivergentSeries
from .reports import TestReport

SERIES_RTOL = 1e-9
MAX_TERMS = 1_000_000


def _check_exponents(p, q, d):
    if not p > 0:
        raise BadExponents(f"p must be positive, got {p}")
    if not q > d:
        raise BadExponents(f"need q > d, got q={q}, d={d}")


def rp_constant(p, q, d):
    """``max(1 / (2^(q-d) - 1), 1 / (2^((q-d)/p) - 1)^p)``.

    The two branches cover ``p <= 1`` (sub-additivity of ``x^p``) and
    ``p >= 1`` (Minkowski); at ``p = 1`` they coincide.
    """
    _check_exponents(p, q, d)
    e = q - d
    return max(1.0 / (2.0**e - 1.0), 1.0 / (2.0 ** (e / p) - 1.0) ** p)


def finite_set_bound(p, q, M, c, d, delta):
    """Bound on ``E sup_{d(s,t) <= delta} |X_s - X_t|^p`` over a finite set.

    ``2^(2p+4q+1) M c delta^(q-d) (4^d max(0, log2(c 4^d delta^-d))^q + R_p)``
    for a set with covering profile ``(c, d)``.
    """
    _check_exponents(p, q, d)
    if not delta > 0:
        raise ValueError("delta must be positive")
    if M < 0 or not c > 0:
        raise ValueError("need M >= 0 and c > 0")
    log_term = max(0.0, math.log2(c) + 2 * d - d * math.log2(delta))
    return (
        2.0 ** (2 * p + 4 * q + 1)
        * M
        * c
        * delta ** (q - d)
        * (4.0**d * log_term**q + rp_constant(p, q, d))
    )


@dataclass(frozen=True)
class LSeries:
    """Partial sum of the ``L`` series with a certified bound on the omitted tail."""

    value: float
    tail_bound: float
    terms: tuple
    subset_constant: float

    @property
    def upper(self):
        return self.value + self.tail_bound


def chentsov_constant_L(p, q, c, d, beta, diam, rtol=SERIES_RTOL, n_terms=None):
    """``L = sum_k 2^(k beta p) B(2 eta_k)`` with ``eta_k = 2^-k (diam + 1)``.

    ``B`` is :func:`finite_set_bound` with ``M = 1`` evaluated with the
    subset constant ``2^d c``, because the bound is applied to finite subsets
    of the index set. Term ``k`` has the form ``A rho^k g(k)`` with
    ``rho = 2^(beta p - (q - d))`` and ``g(k) = 4^d max(0, a + d k)^q + R_p``.
    Once ``a + d k > 0`` the ratio of consecutive terms is at most
    ``r_k = rho ((a + d(k+1)) / (a + d k))^q``, which decreases in ``k``, so
    the tail after ``K`` is at most ``term_K r_K / (1 - r_K)``. Summation stops
    when that bound falls below ``rtol`` times the partial sum. ``n_terms``
    forces a fixed number of terms instead (the tail bound is still
    reported).
    """
    _check_exponents(p, q, d)
    if not beta > 0:
        raise BadExponents(f"beta must be positive, got {beta}")
    critical = (q - d) / p
    if beta >= critical:
        raise DivergentSeries(
            f"beta={beta} is not below the critical exponent (q-d)/p={critical}",
            critical_exponent=critical,
        )
    if not c > 0 or diam < 0:
        raise ValueError("need c > 0 and diam >= 0")
    c_sub = 2.0**d * c
    rho = 2.0 ** (beta * p - (q - d))
    a = math.log2(c_sub) + d - d * math.log2(diam + 1)

    def ratio_bound(k):
        lo = a + d * k
        return rho * ((lo + d) / lo) ** q if lo > 0 else math.inf

    terms = []
    total = 0.0
    k = 0
    while True:
        t = 2.0 ** (k * beta * p) * finite_set_bound(p, q, 1.0, c_sub, d, 2.0 ** (1 - k) * (diam + 1))
        terms.append(t)
        total += t
        r = ratio_bound(k)
        tail = t * r / (1 - r) if r < 1 else math.inf
        if n_terms is not None:
            if k + 1 >= n_terms:
                break
        elif tail < rtol * total:
            break
        k += 1
        if k >= MAX_TERMS:
            raise RuntimeError("series truncation did not converge")
    return LSeries(total, tail, tuple(terms), c_sub)


def _ensemble_arrays(ensemble):
    times = np.asarray(ensemble.times, dtype=float)
    paths = check_paths(ensemble.paths, n_times=times.shape[0])
    if times.shape[0] < 2:
        raise DegenerateGrid("need at least two grid times")
    return times, paths


def kolmogorov_ratio_matrix(ensemble, p, q):
    """``mean |X_s - X_t|^p / |s - t|^q`` for every grid pair (0 on the diagonal)."""
    times, X = _ensemble_arrays(ensemble)
    n = times.shape[0]
    R = np.zeros((n, n))
    for h in range(1, n):
        sep = times[h:] - times[:-h]
        moment = np.mean(np.abs(X[:, h:] - X[:, :-h]) ** p, axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            # d_T = 0 pairs carry no information and are excluded
            vals = np.where(sep > 0, moment / sep**q, 0.0)
        idx = np.arange(n - h)
        R[idx, idx + h] = vals
        R[idx + h, idx] = vals
    return R


def kolmogorov_condition_estimate(ensemble, p, q):
    """``M_hat``: the largest pairwise ratio ``mean |X_s - X_t|^p / |s - t|^q``."""
    return float(kolmogorov_ratio_matrix(ensemble, p, q).max())


def expected_sup_ratio(ensemble, p, beta):
    """Monte Carlo ``E sup_{s != t} |X_s - X_t|^p / |s - t|^(beta p)`` (``0/0 = 0``)."""
    times, X = _ensemble_arrays(ensemble)
    n = times.shape[0]
    best = np.zeros(X.shape[0])
    for h in range(1, n):
        sep = times[h:] - times[:-h]
        num = np.abs(X[:, h:] - X[:, :-h]) ** p
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(sep > 0, num / sep ** (beta * p), 0.0)
        np.maximum(best, ratio.max(axis=1), out=best)
    return float(best.mean())


@dataclass(frozen=True)
class KCCheck:
    lhs: float
    M: float
    L: float
    count: int

    @property
    def rhs(self):
        return self.M * self.L

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def passed(self):
        return self.lhs <= self.rhs

    def to_report(self, seed=None):
        # one-sided bound 0 <= lhs <= M L written as |lhs - 0| <= M L
        return TestReport(
            "kc_inequality", self.lhs, 0.0, self.rhs, count=self.count, seed=seed,
            note=f"slack {self.slack:.6g}",
        )


def kc_inequality_check(ensemble, p, q, M, beta, c, d, diam=None):
    """Compare the Monte Carlo left side with ``M L``.

    ``diam`` defaults to the span of the ensemble's grid.
    """
    times, X = _ensemble_arrays(ensemble)
    if diam is None:
        diam = float(times[-1] - times[0])
    L = chentsov_constant_L(p, q, c, d, beta, diam).value
    return KCCheck(expected_sup_ratio(ensemble, p, beta), float(M), L, X.shape[0])
