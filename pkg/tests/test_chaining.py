import itertools
import math

import numpy as np
import pytest
from conftest import random_pseudo_metric
from hypothesis import given, settings
from hypothesis import strategies as st

from brownian_lab.exceptions import BadScaleWindow, CardinalityExceeded, TooLargeForExact
from brownian_lab.chaining import (
    GeometricGrid,
    PairReduction,
    adversarial_failures,
    build_hierarchy,
    chain,
    coarse_displacement,
    covers_valid,
    pair_reduction,
    scale_change_check,
    verify_pair_reduction,
)
from brownian_lab.metric_cover import FinitePseudoMetric, minimal_cover_number

GRID9 = FinitePseudoMetric.from_points(np.linspace(0, 1, 9))


def test_geometric_grid():
    g = GeometricGrid(1.0, 3)
    assert g.radii == (1.0, 0.5, 0.25, 0.125)
    with pytest.raises(ValueError):
        GeometricGrid(0.0, 1)


def test_hierarchy_nine_points():
    h = build_hierarchy(GRID9, 1.0, 3)
    assert covers_valid(h)
    assert len(h.covers[0].centers) == 1
    assert len(h.covers[3].centers) <= 5
    for n, r in enumerate(h.grid.radii):
        assert len(h.covers[n].centers) == minimal_cover_number(GRID9, r)


def test_hierarchy_singleton():
    h = build_hierarchy(FinitePseudoMetric([[0.0]]), 1.0, 4)
    assert all(c.centers == (0,) for c in h.covers)


def test_hierarchy_below_min_distance():
    h = build_hierarchy(GRID9, 0.1, 2)
    assert all(c.centers == tuple(range(9)) for c in h.covers)


def test_hierarchy_exact_cap():
    big = FinitePseudoMetric.from_points(np.arange(21.0))
    with pytest.raises(TooLargeForExact):
        build_hierarchy(big, 1.0, 2)
    assert covers_valid(build_hierarchy(big, 1.0, 2, exact=False))


def test_chain_steps_contract():
    h = build_hierarchy(GRID9, 1.0, 3)
    for x in range(9):
        seq = chain(x, h)
        assert len(seq) == 4 and seq[-1] == x
        for n in range(3):
            assert seq[n] in h.covers[n].centers
            assert GRID9.dist[seq[n], seq[n + 1]] <= h.grid.radius(n) + 1e-12


def test_chain_constant_for_universal_center():
    h = build_hierarchy(FinitePseudoMetric([[0.0]]), 1.0, 3)
    assert chain(0, h) == (0, 0, 0, 0)


def test_chain_zero_distance_tie_break():
    space = FinitePseudoMetric([[0, 0, 2], [0, 0, 2], [2, 2, 0]])
    h = build_hierarchy(space, 4.0, 2)
    assert chain(0, h) == chain(0, h)
    assert chain(1, h)[0] == h.covers[0].centers[0]


# ---------------------------------------------------------------------------
# change of scale


def brute_scale_change(space, h, f, p, delta, m):
    fine = h.covers[h.depth].centers
    coarse = h.covers[m].centers
    eps0 = h.grid.eps0
    lhs = max(
        [abs(f[s] - f[t]) ** p for s in fine for t in fine if space.dist[s, t] <= delta],
        default=0.0,
    )
    r = eps0 * 2.0 ** (3 - m)
    c_term = max(
        [abs(f[s] - f[t]) ** p for s in coarse for t in coarse if space.dist[s, t] <= r * (1 + 1e-12)],
        default=0.0,
    )
    ch_term = max(abs(f[s] - f[chain(s, h)[m]]) ** p for s in fine)
    return lhs, 2**p * c_term + 4**p * ch_term


def test_scale_change_constant():
    h = build_hierarchy(GRID9, 1.0, 3)
    r = scale_change_check(np.ones(9), 2.0, 0.5, h, 1)
    assert (r.lhs, r.rhs, r.holds) == (0.0, 0.0, True)


def test_scale_change_window():
    h = build_hierarchy(GRID9, 1.0, 3)
    with pytest.raises(BadScaleWindow):
        scale_change_check(np.zeros(9), 1.0, 3.0, h, 1)
    with pytest.raises(BadScaleWindow):
        scale_change_check(np.zeros(9), 1.0, 0.2, h, 3)


@settings(max_examples=300, deadline=None)
@given(
    st.integers(0, 2**32 - 1),
    st.integers(2, 12),
    st.integers(1, 4),
    st.floats(0.25, 3.0),
    st.floats(0.0, 1.0),
)
def test_scale_change_random(seed, n, N, p, frac):
    rng = np.random.default_rng(seed)
    space = random_pseudo_metric(rng, n, allow_inf=False)
    eps0 = max(space.finite_diameter(), 1.0)
    h = build_hierarchy(space, eps0, N)
    m = int(rng.integers(0, N))
    em = h.grid.radius(m)
    delta = em * (1 + 3 * frac)
    f = rng.normal(size=n) * 3
    r = scale_change_check(f, p, delta, h, m)
    lhs, rhs = brute_scale_change(space, h, f, p, delta, m)
    assert r.lhs == pytest.approx(lhs) and r.rhs == pytest.approx(rhs)
    assert r.holds


def test_coarse_displacement_bound():
    h = build_hierarchy(GRID9, 1.0, 3)
    for m in range(3):
        for x, y in itertools.combinations(range(9), 2):
            if GRID9.dist[x, y] <= 4 * h.grid.radius(m):
                assert coarse_displacement(x, y, h, m) <= 2.0 ** (3 - m) + 1e-12


# ---------------------------------------------------------------------------
# pair reduction


def test_pair_reduction_line():
    red = pair_reduction(GRID9, 2, 4, 0.125)
    assert len(red.pairs) <= 2 * 9
    assert verify_pair_reduction(GRID9, red).passed
    assert adversarial_failures(GRID9, red) == 0


def test_pair_reduction_trivial_sets():
    one = FinitePseudoMetric([[0.0]])
    assert pair_reduction(one, 2, 0, 1.0).pairs == ()


def test_pair_reduction_cardinality():
    with pytest.raises(CardinalityExceeded):
        pair_reduction(GRID9, 2, 3, 0.125)


def test_verifier_rejects_bad_k():
    bad = PairReduction(((0, 1),), 2, 4, 0.125)
    rep = verify_pair_reduction(GRID9, bad)
    assert not rep.certificate_ok and rep.witness is not None
    assert adversarial_failures(GRID9, bad) > 0


def test_pair_reduction_random_real_valuations():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(2, 13))
        space = random_pseudo_metric(rng, n)
        c = float(rng.choice([1.0, 2.0, 4.0]))
        red = pair_reduction(space, 2, math.ceil(math.log2(n)), c)
        for f in rng.normal(size=(20, n)):
            close = [abs(f[s] - f[t]) for s, t in itertools.combinations(range(n), 2)
                     if space.dist[s, t] <= c]
            over_k = [abs(f[s] - f[t]) for s, t in red.pairs]
            assert max(close, default=0.0) <= 2 * max(over_k, default=0.0) + 1e-12


def test_pair_reduction_on_subset():
    red = pair_reduction(GRID9, 2, 3, 0.25, points=[0, 2, 4, 6, 8])
    assert {x for pr in red.pairs for x in pr} <= {0, 2, 4, 6, 8}
