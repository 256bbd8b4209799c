"""Cover hierarchies, chaining sequences and pair reduction.

Chaining moves a supremum over a fine cover ``C_N`` to a coarse cover ``C_m``
by following each point through nearest centers, paying a bounded price per
scale. Pair reduction replaces the quadratic set of close pairs with a linear
set ``K`` at the cost of a factor 2. Every ``K`` returned here carries a
structural certificate that is re-checked before it is handed out.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .exceptions import BadScaleWindow, CardinalityExceeded, ContractUnsatisfiable
from .metric_cover import (
    TRIANGLE_RTOL,
    Cover,
    FinitePseudoMetric,
    greedy_cover,
    minimal_cover,
)

ADVERSARY_CAP = 16


@dataclass(frozen=True)
class GeometricGrid:
    """Radii ``eps0 * 2^-n`` for ``n = 0..levels``."""

    eps0: float
    levels: int

    def __post_init__(self):
        if not self.eps0 > 0:
            raise ValueError("eps0 must be positive")
        if self.levels < 0:
            raise ValueError("levels must be nonnegative")

    def radius(self, n):
        return self.eps0 * 2.0**-n

    @property
    def radii(self):
        return tuple(self.radius(n) for n in range(self.levels + 1))


@dataclass(frozen=True)
class CoverHierarchy:
    space: FinitePseudoMetric
    grid: GeometricGrid
    covers: tuple

    @property
    def depth(self):
        return self.grid.levels


def build_hierarchy(space, eps0, levels, exact=True):
    """Covers ``C_0..C_N`` of the space at radii ``eps0 * 2^-n``.

    With ``exact`` every level is a minimal cover (at most 20 points);
    otherwise greedy covers are used.
    """
    grid = GeometricGrid(float(eps0), int(levels))
    make = minimal_cover if exact else greedy_cover
    covers = tuple(make(space, r) for r in grid.radii)
    return CoverHierarchy(space, grid, covers)


def nearest_center(space, cover, x):
    """Center of ``cover`` closest to ``x``; ties go to the smallest index."""
    centers = np.asarray(cover.centers)
    d = space.dist[x, centers]
    return int(centers[np.flatnonzero(d == d.min())[0]])


def chain(x, hierarchy):
    """``(xbar_0, ..., xbar_N)`` with ``xbar_N = x``.

    Each ``xbar_n`` is a center of ``C_n`` nearest to ``xbar_{n+1}``, so
    ``d(xbar_n, xbar_{n+1}) <= eps_n`` by the cover property.
    """
    N = hierarchy.depth
    seq = [int(x)]
    for n in range(N - 1, -1, -1):
        seq.append(nearest_center(hierarchy.space, hierarchy.covers[n], seq[-1]))
    return tuple(reversed(seq))


def _close_pairs_sup(space, points, values, radius, p):
    pts = np.asarray(points)
    close = space.dist[np.ix_(pts, pts)] <= radius
    diff = np.abs(values[pts][:, None] - values[pts][None, :]) ** p
    return float(diff[close].max()) if close.any() else 0.0


@dataclass(frozen=True)
class ScaleChange:
    lhs: float
    coarse_term: float
    chain_term: float
    p: float

    @property
    def rhs(self):
        return 2.0**self.p * self.coarse_term + 4.0**self.p * self.chain_term

    @property
    def holds(self):
        return self.lhs <= self.rhs


def scale_change_check(values, p, delta, hierarchy, m):
    """Both sides of the change of scale from ``C_N`` to ``C_m``.

    ``lhs = sup |f(s) - f(t)|^p`` over ``s, t in C_N`` with ``d <= delta``;
    the right side is ``2^p`` times the same supremum over ``C_m`` at distance
    ``eps0 * 2^(3-m)`` plus ``4^p sup_s |f(s) - f(sbar_m)|^p``. Requires
    ``eps_m <= delta <= 4 eps_m`` and ``m < N``.
    """
    grid = hierarchy.grid
    N = hierarchy.depth
    if not 0 <= m < N:
        raise BadScaleWindow(f"coarse level {m} must lie in [0, {N})")
    em = grid.radius(m)
    if not em <= delta <= 4 * em:
        raise BadScaleWindow(f"delta={delta} outside [{em}, {4 * em}]")
    f = np.asarray(values, dtype=float)
    if f.shape != (hierarchy.space.size,):
        raise ValueError("values must give one real per point")
    space = hierarchy.space
    fine = hierarchy.covers[N].centers
    coarse = hierarchy.covers[m].centers
    lhs = _close_pairs_sup(space, fine, f, delta, p)
    # distances come from a float matrix; the triangle slack keeps the
    # coarse radius consistent with the validated metric
    coarse_radius = grid.eps0 * 2.0 ** (3 - m) * (1 + TRIANGLE_RTOL)
    coarse_term = _close_pairs_sup(space, coarse, f, coarse_radius, p)
    chain_term = max(abs(f[s] - f[chain(s, hierarchy)[m]]) ** p for s in fine)
    return ScaleChange(lhs, coarse_term, float(chain_term), float(p))


def coarse_displacement(x, y, hierarchy, m):
    """``d(xbar_m, ybar_m)``, bounded by ``eps0 * 2^(3-m)`` when ``d(x, y) <= 4 eps_m``."""
    return float(hierarchy.space.dist[chain(x, hierarchy)[m], chain(y, hierarchy)[m]])


# ---------------------------------------------------------------------------
# pair reduction


@dataclass(frozen=True)
class PairReduction:
    pairs: tuple
    a: float
    n: int
    c: float


def pair_reduction(space, a, n, c, points=None):
    """A set ``K`` of ordered pairs with ``|K| <= a|J|`` and lengths ``<= c n``.

    Construction: take the smallest remaining point ``x``, grow balls
    ``B_k = {y remaining : d(x, y) <= k c}`` and stop at the first ``k < n``
    with ``|B_{k+1}| <= a |B_k|`` (one exists since ``|J| <= a^n``). Every
    ``y`` in ``B_{k+1}`` is joined to ``x`` and ``B_k`` is removed. The removed
    balls partition ``J``, which gives the size bound. If ``d(s, t) <= c`` and
    ``s`` leaves first, in ball ``B_k`` around ``x``, then ``t`` lies in
    ``B_{k+1}``; so both ``(s, x)`` and ``(t, x)`` are in ``K`` and
    ``|f(s) - f(t)| <= 2 max_K |f(u) - f(v)|`` for every ``f``.
    """
    J = list(range(space.size)) if points is None else sorted(set(int(i) for i in points))
    if a < 0 or n < 0 or c < 0:
        raise ValueError("a, n and c must be nonnegative")
    if len(J) > a**n:
        raise CardinalityExceeded(f"|J| = {len(J)} exceeds a^n = {a ** n}")
    pairs = []
    if len(J) > 1:
        remaining = list(J)
        while remaining:
            x = remaining[0]
            d = space.dist[x, remaining]
            sizes = [int(np.count_nonzero(d <= k * c)) for k in range(n + 1)]
            k = next(k for k in range(n) if sizes[k + 1] <= a * sizes[k])
            pairs.extend((y, x) for y, dy in zip(remaining, d) if dy <= (k + 1) * c)
            remaining = [y for y, dy in zip(remaining, d) if not dy <= k * c]
    result = PairReduction(tuple(pairs), a, n, c)
    report = verify_pair_reduction(space, result, points=J)
    if not report.passed:
        raise ContractUnsatisfiable(f"pair reduction failed its contract: {report}", witness=report)
    return result


@dataclass(frozen=True)
class PairReductionReport:
    size_ok: bool
    length_ok: bool
    certificate_ok: bool
    witness: tuple | None = None

    @property
    def passed(self):
        return self.size_ok and self.length_ok and self.certificate_ok


def verify_pair_reduction(space, reduction, points=None):
    """Check size, pair lengths and the common-neighbour certificate.

    The certificate asks, for every ``s != t`` with ``d(s, t) <= c``, for a
    ``u`` with ``(s, u)`` and ``(t, u)`` in ``K`` (either orientation).
    Diagonal pairs contribute 0 to the supremum and need no witness.
    """
    J = list(range(space.size)) if points is None else sorted(set(points))
    K = set(reduction.pairs)
    size_ok = len(K) <= reduction.a * len(J)
    length_ok = all(space.dist[s, t] <= reduction.c * reduction.n for s, t in K)
    nbrs = {j: set() for j in J}
    for s, t in K:
        nbrs[s].add(t)
        nbrs[t].add(s)
    witness = None
    for s, t in itertools.combinations(J, 2):
        if space.dist[s, t] <= reduction.c and not (nbrs[s] & nbrs[t]):
            witness = (s, t)
            break
    return PairReductionReport(size_ok, length_ok, witness is None, witness)


def adversarial_failures(space, reduction, points=None):
    """Number of ``+-1`` valuations violating the factor-2 supremum bound.

    Enumerates all ``2^|J|`` sign patterns (``|J| <= 16``).
    """
    J = list(range(space.size)) if points is None else sorted(set(points))
    if len(J) > ADVERSARY_CAP:
        raise ValueError(f"exhaustive adversary is capped at {ADVERSARY_CAP} points")
    pos = {j: i for i, j in enumerate(J)}
    signs = 1 - 2 * ((np.arange(2 ** len(J))[:, None] >> np.arange(len(J))) & 1)
    close = [(pos[s], pos[t]) for s, t in itertools.combinations(J, 2)
             if space.dist[s, t] <= reduction.c]
    if not close:
        return 0
    ci = np.array(close)
    lhs = np.abs(signs[:, ci[:, 0]] - signs[:, ci[:, 1]]).max(axis=1)
    if reduction.pairs:
        ki = np.array([(pos[s], pos[t]) for s, t in reduction.pairs])
        rhs = 2 * np.abs(signs[:, ki[:, 0]] - signs[:, ki[:, 1]]).max(axis=1)
    else:
        rhs = np.zeros(len(signs), dtype=int)
    return int(np.count_nonzero(lhs > rhs))


def covers_valid(hierarchy):
    return all(isinstance(cv, Cover) and cv.covers(hierarchy.space) for cv in hierarchy.covers)
