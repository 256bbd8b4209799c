"""Finite pseudo-metric spaces, internal covers and covering numbers.

Balls are closed: a center ``s`` covers ``t`` when ``d(s, t) <= eps``. Packing
sets are strictly separated: pairwise distances ``> eps``. With these
conventions ``P_{2 eps} <= N_eps <= P_eps`` holds on every space.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .exceptions import EmptyGrid, InvalidMetric, TooLargeForExact

EXACT_CAP = 20
TRIANGLE_RTOL = 1e-12
DEFAULT_GRID_LEVELS = 10


class FinitePseudoMetric:
    """Validated ``n x n`` distance matrix; ``inf`` entries are allowed.

    Distinct points may sit at distance 0. Construction fails with
    :class:`InvalidMetric` on a nonzero diagonal, asymmetry, negative entries
    or a triangle violation, naming the offending indices.
    """

    def __init__(self, dist, _check_triangle=True):
        D = np.array(dist, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] == 0:
            raise InvalidMetric(f"distance matrix must be square and nonempty, got {D.shape}")
        if np.any(np.isnan(D)):
            raise InvalidMetric("distance matrix has NaN entries")
        if np.any(D < 0):
            i, j = map(int, np.argwhere(D < 0)[0])
            raise InvalidMetric(f"negative distance at ({i}, {j})", witness=(i, j))
        if np.any(np.diag(D) != 0):
            i = int(np.flatnonzero(np.diag(D) != 0)[0])
            raise InvalidMetric(f"nonzero self-distance at {i}", witness=(i,))
        if not np.array_equal(D, D.T):
            i, j = map(int, np.argwhere(D != D.T)[0])
            raise InvalidMetric(f"asymmetric entries at ({i}, {j})", witness=(i, j))
        finite = D[np.isfinite(D)]
        slack = TRIANGLE_RTOL * (1.0 + (float(finite.max()) if finite.size else 0.0))
        for k in range(D.shape[0] if _check_triangle else 0):
            bad = D > D[:, k : k + 1] + D[k : k + 1, :] + slack
            if bad.any():
                i, j = map(int, np.argwhere(bad)[0])
                raise InvalidMetric(
                    f"triangle inequality fails for ({i}, {k}, {j})", witness=(i, k, j)
                )
        D.setflags(write=False)
        self.dist = D

    @classmethod
    def from_points(cls, points):
        """Euclidean distances between rows (1-D input is points on a line).

        A norm satisfies the triangle inequality, so that O(n^3) check is skipped.
        """
        x = np.asarray(points, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        diff = x[:, None, :] - x[None, :, :]
        D = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        return cls(0.5 * (D + D.T), _check_triangle=False)

    @property
    def size(self):
        return self.dist.shape[0]

    @property
    def diameter(self):
        return float(self.dist.max())

    def finite_diameter(self):
        finite = self.dist[np.isfinite(self.dist)]
        return float(finite.max())

    def restrict(self, indices):
        idx = list(indices)
        return FinitePseudoMetric(self.dist[np.ix_(idx, idx)])

    def within(self, eps):
        """Boolean matrix of closed-ball membership ``d <= eps``."""
        if not eps > 0:
            raise ValueError("radius must be positive")
        return self.dist <= eps


@dataclass(frozen=True)
class Cover:
    radius: float
    centers: tuple

    def covers(self, space):
        if not self.centers:
            return space.size == 0
        return bool(np.all(space.within(self.radius)[list(self.centers)].any(axis=0)))


def greedy_cover(space, eps):
    """Repeatedly take the center covering the most uncovered points.

    Ties go to the smallest index. Always a valid cover, since each point
    covers itself.
    """
    adj = space.within(eps).astype(np.int64)
    uncovered = np.ones(space.size, dtype=np.int64)
    centers = []
    while uncovered.any():
        gain = adj @ uncovered
        c = int(np.argmax(gain))
        centers.append(c)
        uncovered[adj[c] == 1] = 0
    return Cover(float(eps), tuple(sorted(centers)))


def _ball_masks(space, eps):
    adj = space.within(eps)
    return [sum(1 << j for j in np.flatnonzero(row)) for row in adj]


def _check_exact_size(space):
    if space.size > EXACT_CAP:
        raise TooLargeForExact(f"exact search is capped at {EXACT_CAP} points, got {space.size}")


def minimal_cover(space, eps):
    """A cover of minimum size, found by branch and bound.

    Branching picks the uncovered point with the fewest candidate centers and
    tries each of them; the greedy cover seeds the upper bound and
    ``ceil(uncovered / largest ball)`` prunes.
    """
    _check_exact_size(space)
    balls = _ball_masks(space, eps)
    n = space.size
    full = (1 << n) - 1
    coverers = [[c for c in range(n) if balls[c] >> p & 1] for p in range(n)]
    best = list(greedy_cover(space, eps).centers)
    max_ball = max(bin(b).count("1") for b in balls)

    def search(covered, chosen):
        nonlocal best
        if covered == full:
            if len(chosen) < len(best):
                best = list(chosen)
            return
        rest = n - bin(covered).count("1")
        if len(chosen) + -(-rest // max_ball) >= len(best):
            return
        free = [p for p in range(n) if not covered >> p & 1]
        p = min(free, key=lambda q: (len(coverers[q]), q))
        for c in sorted(coverers[p], key=lambda c: -bin(balls[c] & ~covered).count("1")):
            chosen.append(c)
            search(covered | balls[c], chosen)
            chosen.pop()

    search(0, [])
    return Cover(float(eps), tuple(sorted(best)))


def minimal_cover_number(space, eps):
    """Exact ``N_eps`` for at most 20 points."""
    return len(minimal_cover(space, eps).centers)


def packing_number(space, eps):
    """Largest subset with pairwise distances ``> eps`` (exact, at most 20 points)."""
    _check_exact_size(space)
    n = space.size
    close = space.dist <= eps
    nbr = [sum(1 << j for j in range(n) if j != i and close[i, j]) for i in range(n)]

    def mis(cand):
        if cand == 0:
            return 0
        # a vertex with no neighbours left is always taken
        best_v, best_deg = -1, -1
        c = cand
        while c:
            v = (c & -c).bit_length() - 1
            c &= c - 1
            deg = bin(nbr[v] & cand).count("1")
            if deg == 0:
                return 1 + mis(cand & ~(1 << v))
            if deg > best_deg:
                best_v, best_deg = v, deg
        v = best_v
        take = 1 + mis(cand & ~(1 << v) & ~nbr[v])
        skip = mis(cand & ~(1 << v))
        return max(take, skip)

    return mis((1 << n) - 1)


@dataclass(frozen=True)
class Sandwich:
    packing_2eps: int
    cover: int
    packing_eps: int

    @property
    def holds(self):
        return self.packing_2eps <= self.cover <= self.packing_eps


def sandwich(space, eps):
    """``(P_{2 eps}, N_eps, P_eps)`` with the ordering verdict."""
    return Sandwich(
        packing_number(space, 2 * eps), minimal_cover_number(space, eps), packing_number(space, eps)
    )


def greedy_separated(space, eps):
    """A maximal ``eps``-separated set scanned in index order (a lower bound on ``P_eps``)."""
    close = space.dist <= eps
    alive = np.ones(space.size, dtype=bool)
    chosen = []
    for i in range(space.size):
        if alive[i]:
            chosen.append(i)
            alive &= ~close[i]
    return chosen


def milp_cover_number(space, eps):
    """Exact ``N_eps`` as a 0/1 set-cover program (no size cap)."""
    A = space.within(eps).T.astype(float)
    n = space.size
    res = milp(
        c=np.ones(n),
        constraints=LinearConstraint(A, lb=np.ones(n), ub=np.inf),
        integrality=np.ones(n),
        bounds=Bounds(0, 1),
    )
    if not res.success:
        raise RuntimeError(f"set-cover program failed: {res.message}")
    return int(round(res.fun))


@dataclass(frozen=True)
class CoveringRow:
    eps: float
    lower: int
    upper: int
    bound: float
    method: str

    @property
    def exact(self):
        return self.lower == self.upper


@dataclass(frozen=True)
class CoveringVerdict:
    holds: bool
    worst_ratio: float
    rows: tuple


def default_grid(space, levels=DEFAULT_GRID_LEVELS):
    """``diam * 2^-k`` for ``k = 0..levels-1``; diameter over finite entries."""
    diam = space.finite_diameter()
    if diam == 0:
        return (1.0,)
    return tuple(diam * 2.0**-k for k in range(levels))


def covering_bounds(space, eps):
    """``(lower, upper, method)`` bracketing ``N_eps``."""
    if space.size <= EXACT_CAP:
        n = minimal_cover_number(space, eps)
        return n, n, "exact"
    upper = len(greedy_cover(space, eps).centers)
    lower = len(greedy_separated(space, 2 * eps))
    return lower, upper, "greedy"


def check_bounded_covering(space, c, d, eps_grid=None):
    """Whether ``N_eps <= c eps^-d`` on every grid radius.

    Large spaces are first bracketed by a greedy cover (upper) and a greedy
    ``2 eps``-separated set (lower); only an undecided radius is solved exactly
    with a 0/1 program. ``worst_ratio`` is the largest ``N eps^d / c`` using the
    exact count when known and the upper bracket otherwise.
    """
    if not c > 0 or d < 0:
        raise ValueError("profile needs c > 0 and d >= 0")
    grid = default_grid(space) if eps_grid is None else tuple(float(e) for e in eps_grid)
    if not grid:
        raise EmptyGrid("radius grid is empty")
    diam = space.finite_diameter()
    for e in grid:
        if not e > 0:
            raise ValueError(f"grid radius {e} is not positive")
        if diam > 0 and e > diam:
            raise ValueError(f"grid radius {e} exceeds the diameter {diam}")
    rows = []
    holds = True
    worst = -math.inf
    for e in grid:
        bound = c * e ** (-d)
        lower, upper, method = covering_bounds(space, e)
        if lower <= bound < upper:
            lower = upper = milp_cover_number(space, e)
            method = "milp"
        holds &= upper <= bound
        worst = max(worst, upper * e**d / c)
        rows.append(CoveringRow(e, lower, upper, bound, method))
    return CoveringVerdict(bool(holds), worst, tuple(rows))


def subset_profile(c, d):
    """Profile valid for every subset of a space with profile ``(c, d)``."""
    return 2.0**d * c, d


def subset_cover_check(space, subset, eps, superset=None):
    """``(N_eps(A), N_{eps/2}(B), holds)`` for ``A`` inside ``B`` (default: whole space)."""
    A = sorted(set(subset))
    B = list(range(space.size)) if superset is None else sorted(set(superset))
    if not set(A) <= set(B):
        raise ValueError("subset must lie inside the superset")
    na = minimal_cover_number(space.restrict(A), eps)
    nb = minimal_cover_number(space.restrict(B), eps / 2)
    return na, nb, na <= nb


# ---------------------------------------------------------------------------
# CSV


def loads_distance_csv(text):
    """Comma-separated distance rows; ``inf`` marks an infinite distance."""
    rows = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    return FinitePseudoMetric([[float(v) for v in ln.split(",")] for ln in rows])


def loads_points_csv(text):
    rows = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    return FinitePseudoMetric.from_points([[float(v) for v in ln.split(",")] for ln in rows])


def dumps_distance_csv(space):
    buf = io.StringIO()
    for row in space.dist:
        buf.write(",".join("inf" if math.isinf(v) else repr(float(v)) for v in row) + "\n")
    return buf.getvalue()
