"""Input validation shared by the numerical modules and the estimators."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

import numpy as np
from sklearn.utils import check_array

from .exceptions import DimensionMismatch, NotPSD, NotSymmetric

SYMMETRY_RTOL = 1e-12
PSD_RTOL = 1e-10


def is_exact(values):
    return all(isinstance(v, Rational) for v in values)


def as_time_tuple(times):
    """Validate a finite strictly increasing list of nonnegative times.

    Rationals (ints, Fractions) are kept exact; anything else becomes float.
    """
    if isinstance(times, np.ndarray):
        times = times.tolist()
    times = list(times)
    if not times:
        raise ValueError("time set must be nonempty")
    if is_exact(times):
        out = tuple(Fraction(t) for t in times)
    else:
        out = tuple(float(t) for t in times)
        if not all(np.isfinite(out)):
            raise ValueError("times must be finite")
    if out[0] < 0:
        raise ValueError("times must be nonnegative")
    for a, b in zip(out, out[1:]):
        if not a < b:
            raise ValueError(
                f"times must be strictly increasing without duplicates, got {a} then {b}"
            )
    return out


def check_vector(x, name="vector", dim=None):
    x = np.asarray(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} has non-finite entries")
    if dim is not None and x.shape[0] != dim:
        raise DimensionMismatch(f"{name} has dimension {x.shape[0]}, expected {dim}")
    return x


def check_covariance(cov):
    """Return ``cov`` as a float array after symmetry and PSD checks."""
    c = np.atleast_2d(np.asarray(cov, dtype=float))
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise DimensionMismatch(f"covariance must be square, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("covariance has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(c))) if c.size else 1.0)
    asym = float(np.max(np.abs(c - c.T))) if c.size else 0.0
    if asym > SYMMETRY_RTOL * scale:
        raise NotSymmetric(f"covariance is not symmetric (max asymmetry {asym:.3g})")
    c = 0.5 * (c + c.T)
    if c.size:
        eig = np.linalg.eigvalsh(c)
        norm = float(np.max(np.abs(eig)))
        if eig[0] < -PSD_RTOL * (1.0 + norm):
            raise NotPSD(
                f"covariance has eigenvalue {eig[0]:.3g} below tolerance",
                witness=float(eig[0]),
            )
    return c


def check_paths(X, n_times=None):
    """2-D float array of paths, one row per path."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if n_times is not None and X.shape[1] != n_times:
        raise DimensionMismatch(f"paths have {X.shape[1]} columns, grid has {n_times} times")
    return X


def check_samples(samples, dim=None):
    """2-D float array of draws (count x dim); 1-D input is one coordinate."""
    s = np.asarray(samples, dtype=float)
    if s.ndim == 1:
        s = s[:, None]
    if s.ndim != 2:
        raise ValueError("samples must be 1-D or 2-D")
    if dim is not None and s.shape[1] != dim:
        raise DimensionMismatch(f"samples have dimension {s.shape[1]}, expected {dim}")
    return s


def probe_array(t, dim):
    # (probes, single): a 2-D input is always a stack; for dim 1 a flat
    # array of length > 1 is a stack of scalar probes
    t = np.asarray(t, dtype=float)
    if t.ndim == 2:
        return t, False
    if t.ndim == 0:
        return t.reshape(1, 1), True
    if dim == 1 and t.shape[0] != 1:
        return t[:, None], False
    return t[None, :], True
