"""Brownian path ensembles: sampling, bridge refinement, invariance transforms
and Hoelder sup-ratio statistics.

Path ``i`` of an ensemble is a pure function of ``(seed, i)``: increments come
from counter-based normals keyed by ``(seed, path, step)`` and bridge
midpoints from a separate key space, so any split of the work over threads or
chunks reproduces the same bits.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _rng
from ._validation import as_time_tuple
from .exceptions import GridMismatch, NotARefinement
from .projective import sample_fdd
from .reports import TestReport
from .stats import COV_SIGMAS, empirical_cov

DEFAULT_LEVEL = 10
DEFAULT_HORIZON = 1.0
DEFAULT_COUNT = 100_000
PROFILE_WINDOW = 1.0 / 64
PROFILE_PATHS = 100
_LEVEL_SHIFT = 40  # bridge streams: path index in the low bits, level above


@dataclass(frozen=True)
class DyadicGrid:
    """Times ``k * horizon / 2^level`` for ``k = 0..2^level``."""

    horizon: float = DEFAULT_HORIZON
    level: int = DEFAULT_LEVEL

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.level < 0:
            raise ValueError("level must be nonnegative")

    @property
    def size(self):
        return 2**self.level + 1

    @property
    def times(self):
        return self.horizon * (np.arange(self.size) / 2.0**self.level)


@dataclass
class PathEnsemble:
    """``count`` paths on a shared time grid, one row per path.

    ``level`` and ``horizon`` are set for dyadic grids; ``start`` is the
    index of the first path, so row ``j`` is path ``start + j``.
    """

    times: np.ndarray
    paths: np.ndarray
    seed: int | None = None
    start: int = 0
    level: int | None = None
    horizon: float | None = None
    history: tuple = field(default_factory=tuple)

    @property
    def count(self):
        return self.paths.shape[0]

    def column(self, t):
        idx = np.flatnonzero(self.times == t)
        if idx.size == 0:
            raise GridMismatch(f"time {t} is not on the grid")
        return int(idx[0])

    def restrict(self, times):
        idx = [self.column(t) for t in times]
        return PathEnsemble(np.asarray(times, dtype=float), self.paths[:, idx], self.seed, self.start)


def _grid_times(grid):
    if isinstance(grid, DyadicGrid):
        return grid.times
    return np.asarray([float(t) for t in as_time_tuple(grid)])


def sample_increments(grid, seed, count, start=0, threads=None):
    """Brownian paths on ``grid`` from independent ``N(0, dt)`` increments.

    ``grid`` is a :class:`DyadicGrid` or any increasing list of nonnegative
    times; the path starts at ``B_0 = 0`` and a grid that omits 0 simply does
    not report it.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    times = _grid_times(grid)
    with_zero = times[0] == 0
    steps = np.diff(times) if with_zero else np.diff(np.concatenate([[0.0], times]))
    z = _rng.standard_normals(
        seed,
        np.arange(start, start + count, dtype=np.uint64),
        steps.shape[0],
        domain=_rng.DOMAIN_INCREMENTS,
        threads=threads,
    )
    walk = np.cumsum(np.sqrt(steps) * z, axis=1)
    paths = np.concatenate([np.zeros((count, 1)), walk], axis=1) if with_zero else walk
    level = grid.level if isinstance(grid, DyadicGrid) else None
    horizon = grid.horizon if isinstance(grid, DyadicGrid) else None
    return PathEnsemble(times, paths, seed, start, level, horizon, ("increments",))


def refine_bridge(ensemble, target_level, seed, threads=None):
    """Insert Brownian-bridge midpoints down to ``target_level``.

    Between neighbours ``s < t`` the midpoint is drawn from
    ``N((X_s + X_t) / 2, (t - s) / 4)``. Existing values are copied, never
    recomputed, so the coarse grid is preserved bit for bit.
    """
    if ensemble.level is None:
        raise NotARefinement("bridge refinement needs a dyadic ensemble")
    if target_level <= ensemble.level:
        raise NotARefinement(
            f"target level {target_level} must exceed current level {ensemble.level}"
        )
    X = ensemble.paths
    times = ensemble.times
    ids = np.arange(ensemble.start, ensemble.start + ensemble.count, dtype=np.uint64)
    for lvl in range(ensemble.level + 1, target_level + 1):
        gaps = np.diff(times)
        z = _rng.standard_normals(
            seed,
            ids | np.uint64(lvl << _LEVEL_SHIFT),
            gaps.shape[0],
            domain=_rng.DOMAIN_BRIDGE,
            threads=threads,
        )
        mid = 0.5 * (X[:, :-1] + X[:, 1:]) + np.sqrt(gaps / 4.0) * z
        fine = np.empty((X.shape[0], 2 * X.shape[1] - 1))
        fine[:, 0::2] = X
        fine[:, 1::2] = mid
        X = fine
        times = ensemble.horizon * (np.arange(2**lvl + 1) / 2.0**lvl)
    return replace(
        ensemble,
        times=times,
        paths=X,
        level=target_level,
        history=ensemble.history + (f"bridge:{target_level}",),
    )


# ---------------------------------------------------------------------------
# invariance transforms


@dataclass(frozen=True)
class Scaling:
    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("scaling factor must be positive")


@dataclass(frozen=True)
class Shift:
    t0: float

    def __post_init__(self):
        if self.t0 < 0:
            raise ValueError("shift must be nonnegative")


@dataclass(frozen=True)
class Inversion:
    pass


@dataclass(frozen=True)
class DriftRatio:
    pass


def transform(ensemble, spec):
    """Apply one of the four path transforms that preserve (or expose) the law.

    - ``Scaling(c)``: ``B_{ct} / sqrt(c)`` at times ``t = s / c``.
    - ``Shift(t0)``: ``B_{t0 + t} - B_{t0}`` for grid times past ``t0``.
    - ``Inversion()``: ``t B_{1/t}`` at every ``t`` whose reciprocal is on the
      grid, plus 0 at ``t = 0``; the grid must be closed under ``t -> 1/t``.
    - ``DriftRatio()``: ``B_t / t`` for ``t > 0``.
    """
    t = ensemble.times
    X = ensemble.paths
    tag = type(spec).__name__.lower()
    if isinstance(spec, Scaling):
        times, paths = t / spec.c, X / math.sqrt(spec.c)
    elif isinstance(spec, Shift):
        i0 = ensemble.column(spec.t0)
        times, paths = t[i0:] - spec.t0, X[:, i0:] - X[:, i0 : i0 + 1]
    elif isinstance(spec, Inversion):
        pos = t[t > 0]
        recip = {float(v): k for k, v in enumerate(t)}
        missing = [float(v) for v in pos if float(1.0 / v) not in recip]
        if missing:
            raise GridMismatch(
                f"grid is not closed under t -> 1/t (e.g. 1/{missing[0]}); "
                "sample one with inversion_ensemble",
                witness=missing,
            )
        times = np.sort(pos)
        cols = [recip[float(1.0 / v)] for v in times]
        paths = times * X[:, cols]
        if t[0] == 0:
            times = np.concatenate([[0.0], times])
            paths = np.concatenate([np.zeros((X.shape[0], 1)), paths], axis=1)
    elif isinstance(spec, DriftRatio):
        keep = t > 0
        times, paths = t[keep], X[:, keep] / t[keep]
    else:
        raise TypeError(f"unknown transform {spec!r}")
    return PathEnsemble(
        np.asarray(times, dtype=float), paths, ensemble.seed, ensemble.start,
        history=ensemble.history + (tag,),
    )


def inversion_ensemble(times, seed, count, threads=None):
    """Ensemble on ``{1/t}`` sampled from the exact marginal, ready for :class:`Inversion`.

    The returned grid is ``times`` together with all reciprocals, so
    inverting it needs no interpolation.
    """
    t = [float(v) for v in as_time_tuple(times)]
    grid = sorted(set(t) | {1.0 / v for v in t if v > 0})
    paths = sample_fdd(grid, seed, count, threads=threads)
    if grid[0] == 0:
        paths[:, 0] = 0.0
    return PathEnsemble(np.asarray(grid), paths, seed, 0, history=("fdd",))


# ---------------------------------------------------------------------------
# Hoelder statistics


def holder_sup_ratio(times, values, beta, window=math.inf):
    """``sup |X_s - X_t| / |s - t|^beta`` over grid pairs with ``0 < |s - t| <= window``.

    ``values`` may hold one path or a ``(paths, times)`` array; the result is
    a float or one float per path. Pairs at separation 0 count as ``0/0 = 0``.
    Work is a loop over index lags, which stops once every separation at a
    lag exceeds ``window``.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    t = np.asarray(times, dtype=float)
    X = np.asarray(values, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    best = np.zeros(X.shape[0])
    for h in range(1, t.shape[0]):
        sep = t[h:] - t[:-h]
        ok = (sep > 0) & (sep <= window)
        if not ok.any():
            if sep.min() > window:
                break
            continue
        ratio = np.abs(X[:, h:][:, ok] - X[:, :-h][:, ok]) / sep[ok] ** beta
        np.maximum(best, ratio.max(axis=1), out=best)
    return float(best[0]) if single else best


@dataclass(frozen=True)
class HolderProfile:
    beta: float
    levels: tuple
    medians: tuple

    @property
    def increasing(self):
        return all(a < b for a, b in zip(self.medians, self.medians[1:]))

    @property
    def growth(self):
        # a level coarser than the window has no admissible pairs and median 0
        first, last = self.medians[0], self.medians[-1]
        if first == 0:
            return math.inf if last > 0 else math.nan
        return last / first


def holder_divergence_profile(beta, levels, paths=PROFILE_PATHS, seed=0, window=PROFILE_WINDOW,
                              horizon=DEFAULT_HORIZON, generator=None, threads=None):
    """Median sup-ratio per level, each level drawn from a fresh ensemble.

    ``generator(level)`` may supply the ensemble; by default level ``n`` uses
    ``paths`` increment-sampled paths with seed ``seed + n``. For
    ``beta > 1/2`` the medians grow like ``2^(n (beta - 1/2))``; below 1/2 they
    settle.
    """
    medians = []
    for lvl in levels:
        if generator is None:
            ens = sample_increments(DyadicGrid(horizon, lvl), seed + lvl, paths, threads=threads)
        else:
            ens = generator(lvl)
        ratios = holder_sup_ratio(ens.times, ens.paths, beta, window)
        medians.append(float(np.median(ratios)))
    return HolderProfile(float(beta), tuple(levels), tuple(medians))


# ---------------------------------------------------------------------------
# law-level checks


def covariance_kernel_reports(ensemble, seed=None):
    """One report per time pair: empirical ``Cov(B_s, B_t)`` against ``min(s, t)``.

    For jointly Gaussian ``(B_s, B_t)`` Isserlis gives
    ``Var(B_s B_t) = st + min(s, t)^2``, hence the per-entry tolerance
    ``5 sqrt((st + min^2) / count)``.
    """
    t = ensemble.times
    C = empirical_cov(ensemble.paths)
    n = ensemble.count
    out = []
    for i in range(t.shape[0]):
        for j in range(i, t.shape[0]):
            s, u = t[i], t[j]
            m = min(s, u)
            tol = COV_SIGMAS * math.sqrt((s * u + m * m) / n)
            out.append(TestReport(f"cov({s:g},{u:g})", C[i, j], m, tol, count=n, seed=seed))
    return out


def moment_ratio_matrix(ensemble, order=4):
    """``mean |B_t - B_s|^order / (t - s)^(order/2)`` for each pair ``s < t``."""
    t = ensemble.times
    X = ensemble.paths
    out = {}
    for i in range(t.shape[0]):
        for j in range(i + 1, t.shape[0]):
            d = X[:, j] - X[:, i]
            out[(float(t[i]), float(t[j]))] = float(np.mean(np.abs(d) ** order) / (t[j] - t[i]) ** (order / 2))
    return out


def markov_split(ensemble, t0):
    """Joint array of pre-``t0`` values and post-``t0`` increments, with its index split."""
    i0 = ensemble.column(t0)
    X = ensemble.paths
    pre = X[:, 1 : i0 + 1] if ensemble.times[0] == 0 else X[:, : i0 + 1]
    post = X[:, i0 + 1 :] - X[:, i0 : i0 + 1]
    joint = np.concatenate([pre, post], axis=1)
    return joint, (list(range(pre.shape[1])), list(range(pre.shape[1], joint.shape[1])))


# ---------------------------------------------------------------------------
# export


def _fmt(v):
    return repr(float(v))


def write_ndjson(ensemble, fh):
    tlist = [float(v) for v in ensemble.times]
    for k, row in enumerate(ensemble.paths):
        rec = {"path": ensemble.start + k, "t": tlist, "x": [float(v) for v in row]}
        fh.write(json.dumps(rec, allow_nan=False) + "\n")


def write_csv(ensemble, fh, header=True):
    if header:
        fh.write("path,t,x\n")
    ts = [_fmt(v) for v in ensemble.times]
    for k, row in enumerate(ensemble.paths):
        p = str(ensemble.start + k)
        fh.write("".join(f"{p},{tv},{_fmt(x)}\n" for tv, x in zip(ts, row)))


def dumps(ensemble, fmt="ndjson"):
    buf = io.StringIO()
    if fmt == "ndjson":
        write_ndjson(ensemble, buf)
    elif fmt == "csv":
        write_csv(ensemble, buf)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return buf.getvalue()


def read_csv(text):
    """Inverse of :func:`write_csv` (paths must share one grid)."""
    rows = [ln.split(",") for ln in text.strip().splitlines()[1:]]
    ids = sorted({int(r[0]) for r in rows})
    by_path = {i: [] for i in ids}
    for r in rows:
        by_path[int(r[0])].append((float(r[1]), float(r[2])))
    times = np.array([tv for tv, _ in by_path[ids[0]]])
    paths = np.array([[x for _, x in by_path[i]] for i in ids])
    return PathEnsemble(times, paths, start=ids[0])


def read_ndjson(text):
    recs = [json.loads(ln) for ln in text.splitlines() if ln.strip()]
    times = np.array(recs[0]["t"], dtype=float)
    paths = np.array([r["x"] for r in recs], dtype=float)
    return PathEnsemble(times, paths, start=recs[0]["path"])
