"""Finite-universe semirings, contents, outer measures and Carathéodory sets.

Subsets of the universe ``{0, ..., n-1}`` are ``int`` bitmasks (bit ``i`` set
means point ``i`` is in the set). Everything is decided by exhaustive
enumeration, which is why the universe is capped at 16 points.

Values are exact :class:`fractions.Fraction` by default. A content whose values
are floats switches to float mode, where comparisons use an absolute/relative
tolerance of ``1e-12``. ``math.inf`` is allowed in both modes.

On a finite universe a countable disjoint family has finitely many nonempty
members, so sigma-additivity is the same as additivity together with
``m(emptyset) = 0``; :func:`check_sigma_additive` checks exactly that.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from numbers import Rational

import numpy as np

from .exceptions import (
    NotAdditive,
    NotASemiring,
    NotOuterMeasure,
    NotProjective,
    UniverseTooLarge,
)

MAX_UNIVERSE = 16
FLOAT_TOL = 1e-12


# --------------------------------------------------------------------------
# sets as bitmasks


def mask_of(points):
    m = 0
    for p in points:
        m |= 1 << int(p)
    return m


def points_of(mask):
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def _lowbit_index(mask):
    return (mask & -mask).bit_length() - 1


def format_mask(mask, n):
    """0/1 string, most significant point first (``b_{n-1} ... b_0``)."""
    return format(mask, f"0{n}b") if n else ""


@dataclass(frozen=True)
class FiniteUniverse:
    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("universe must contain at least one point")
        if self.size > MAX_UNIVERSE:
            raise UniverseTooLarge(
                f"universe of size {self.size} exceeds the enumeration cap {MAX_UNIVERSE}"
            )

    @property
    def full(self):
        return (1 << self.size) - 1

    def subsets(self):
        return range(1 << self.size)


class SetFamily:
    """A finite family of distinct subsets of a finite universe."""

    def __init__(self, universe, members):
        if isinstance(universe, int):
            universe = FiniteUniverse(universe)
        self.universe = universe
        masks = []
        seen = set()
        for m in members:
            m = m if isinstance(m, int) else mask_of(m)
            if m < 0 or m & ~universe.full:
                raise ValueError(f"member {m:#b} is not a subset of the universe")
            if m in seen:
                raise ValueError(f"duplicate member {format_mask(m, universe.size)}")
            seen.add(m)
            masks.append(m)
        self.members = tuple(masks)
        self._index = frozenset(masks)
        self._by_bit = None
        self._partitions = {}

    def __contains__(self, mask):
        return mask in self._index

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __eq__(self, other):
        return (
            isinstance(other, SetFamily)
            and self.universe == other.universe
            and self._index == other._index
        )

    def __hash__(self):
        return hash((self.universe, self._index))

    def __repr__(self):
        n = self.universe.size
        body = ", ".join("{" + ",".join(map(str, points_of(m))) + "}" for m in sorted(self.members))
        return f"SetFamily(n={n}, [{body}])"

    def as_sets(self):
        return {frozenset(points_of(m)) for m in self.members}

    def candidates(self, bit):
        """Nonempty members containing ``bit``, ascending by mask value."""
        if self._by_bit is None:
            by_bit = [[] for _ in range(self.universe.size)]
            for m in sorted(self.members):
                for p in points_of(m):
                    by_bit[p].append(m)
            self._by_bit = by_bit
        return self._by_bit[bit]

    def partition(self, target):
        """Some partition of ``target`` into members, or ``None``.

        Depth-first exact cover: the member covering the lowest uncovered
        point is tried smallest mask first. The empty set is partitioned by
        the empty collection.
        """
        memo = self._partitions
        if target in memo:
            return memo[target]
        if target == 0:
            return ()
        result = None
        for h in self.candidates(_lowbit_index(target)):
            if h & ~target:
                continue
            rest = self.partition(target & ~h)
            if rest is not None:
                result = (h,) + rest
                break
        memo[target] = result
        return result


# --------------------------------------------------------------------------
# arithmetic helpers


def _coerce(value, exact):
    if isinstance(value, float) and math.isinf(value):
        if value < 0:
            raise ValueError("contents take values in [0, inf]")
        return math.inf
    if exact:
        return Fraction(value)
    return float(value)


def _close(a, b, exact):
    if math.isinf(a) or math.isinf(b):
        return a == b
    if exact:
        return a == b
    return abs(a - b) <= FLOAT_TOL * max(1.0, abs(a), abs(b))


def _residual(a, b):
    if math.isinf(a) and math.isinf(b):
        return 0
    return a - b


class Content:
    """Nonnegative set function on a family.

    Parameters
    ----------
    family : SetFamily
    values : mapping from member mask (or iterable of points) to value
    exact : bool or None
        ``None`` picks exact mode when every finite value is rational.
    """

    def __init__(self, family, values, exact=None):
        self.family = family
        raw = {}
        for k, v in dict(values).items():
            k = k if isinstance(k, int) else mask_of(k)
            raw[k] = v
        missing = [m for m in family if m not in raw]
        extra = [m for m in raw if m not in family]
        if missing or extra:
            raise ValueError("content must assign exactly one value to every member")
        if exact is None:
            exact = all(
                isinstance(v, Rational) or (isinstance(v, float) and math.isinf(v))
                for v in raw.values()
            )
        self.exact = bool(exact)
        self.values = {k: _coerce(v, self.exact) for k, v in raw.items()}
        if any(v < 0 for v in self.values.values()):
            raise ValueError("contents take values in [0, inf]")

    def __getitem__(self, mask):
        return self.values[mask]

    @property
    def zero(self):
        return Fraction(0) if self.exact else 0.0


# --------------------------------------------------------------------------
# semirings


@dataclass
class Verdict:
    holds: bool
    witness: object = None
    reason: str = ""

    def __bool__(self):
        return self.holds


def check_semiring(family):
    """Pi-system plus decomposable differences.

    On failure the witness is the offending pair ``(A, B)`` of masks and
    ``reason`` says which clause broke. The empty set is not required to be
    a member; ``A \\ A`` is decomposed by the empty collection.
    """
    members = family.members
    for a in members:
        for b in members:
            if (a & b) not in family:
                return Verdict(False, (a, b), "intersection is not a member")
    for a in members:
        for b in members:
            if family.partition(b & ~a) is None:
                return Verdict(
                    False, (a, b), "difference B \\ A is not a finite disjoint union of members"
                )
    return Verdict(True)


def is_ring(family):
    members = family.members
    return all(
        (a | b) in family and (b & ~a) in family for a in members for b in members
    )


def _require_semiring(family):
    v = check_semiring(family)
    if not v:
        raise NotASemiring(f"family is not a semiring: {v.reason}", witness=v.witness)


def disjoint_of_diff_union(family, a, others):
    """Pairwise disjoint members whose union is ``a`` minus the union of ``others``.

    Built the constructive way: start from ``[a]`` and remove the sets of
    ``others`` one at a time, re-decomposing each piece with the semiring
    clause.
    """
    _require_semiring(family)
    a = a if isinstance(a, int) else mask_of(a)
    others = [o if isinstance(o, int) else mask_of(o) for o in others]
    for s in [a, *others]:
        if s not in family:
            raise ValueError(f"{s:#b} is not a member of the family")
    pieces = [a] if a else []
    for i in others:
        nxt = []
        for k in pieces:
            parts = family.partition(k & ~i)
            nxt.extend(parts)
        pieces = nxt
    return tuple(p for p in pieces if p)


def disjoint_of_union(family, sets):
    """Collections ``K_1..K_m`` of disjoint members partitioning ``A_1 | ... | A_m``.

    ``K_j`` partitions ``A_j`` minus the earlier sets, so all parts across
    all collections are pairwise disjoint.
    """
    _require_semiring(family)
    sets = [s if isinstance(s, int) else mask_of(s) for s in sets]
    out = []
    for j, a in enumerate(sets):
        out.append(disjoint_of_diff_union(family, a, sets[:j]))
    return out


# --------------------------------------------------------------------------
# additivity


def _partition_sums(family, content, target, memo):
    """Distinct sums of ``content`` over partitions of ``target``, with a witness each."""
    if target in memo:
        return memo[target]
    if target == 0:
        memo[0] = [(content.zero, ())]
        return memo[0]
    found = []
    for h in family.candidates(_lowbit_index(target)):
        if h & ~target:
            continue
        for s, parts in _partition_sums(family, content, target & ~h, memo):
            total = content[h] + s
            if not any(_close(total, t, content.exact) for t, _ in found):
                found.append((total, (h,) + parts))
    memo[target] = found
    return found


def check_additive(content):
    """Additivity over every finite disjoint sub-collection with union in the family.

    The empty sub-collection is included, so a family containing the empty
    set forces ``m(emptyset) = 0``. The witness on failure is
    ``(union, parts, value, sum_of_parts)``.
    """
    family = content.family
    memo = {}
    for u in sorted(family.members):
        for total, parts in _partition_sums(family, content, u, memo):
            if not _close(total, content[u], content.exact):
                return Verdict(
                    False,
                    (u, parts, content[u], total),
                    "value of a disjoint union differs from the sum of its parts",
                )
    return Verdict(True)


def check_sigma_additive(content):
    """Additivity plus ``m(emptyset) = 0`` (the finite-universe reading)."""
    v = check_additive(content)
    if not v:
        return v
    if 0 in content.family and not _close(content[0], content.zero, content.exact):
        return Verdict(False, (0, (), content[0], content.zero), "m(emptyset) != 0")
    return Verdict(True)


def _require_additive(content, sigma=False):
    v = check_sigma_additive(content) if sigma else check_additive(content)
    if not v:
        raise NotAdditive(f"content is not additive: {v.reason}", witness=v.witness)


def generate_ring(family, content):
    """Ring of finite disjoint unions of members, with the summed content.

    Raises :class:`NotAdditive` when two decompositions of a ring element
    give different sums (the witness holds both decompositions).
    """
    _require_semiring(family)
    if content.family is not family and content.family != family:
        raise ValueError("content is defined on a different family")
    _require_additive(content)
    reachable = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for r in frontier:
            for h in family.members:
                if h & r == 0 and (r | h) not in reachable:
                    reachable.add(r | h)
                    nxt.append(r | h)
        frontier = nxt
    memo = {}
    values = {}
    for r in sorted(reachable):
        sums = _partition_sums(family, content, r, memo)
        if len(sums) > 1:
            (s1, p1), (s2, p2) = sums[0], sums[1]
            raise NotAdditive(
                "extension to the generated ring is not well defined",
                witness=(r, p1, s1, p2, s2),
            )
        values[r] = sums[0][0]
    ring = SetFamily(family.universe, sorted(reachable))
    return ring, Content(ring, values, exact=content.exact)


def continuity_at_empty(content):
    """Finite analogue of continuity at the empty set for a content on a ring.

    Every strictly decreasing chain of ring members ends at the empty set
    after at most ``n`` steps; the content must be monotone along every link
    and vanish there. Checking all nested member pairs covers every chain.
    """
    family = content.family
    if not is_ring(family):
        raise ValueError("continuity at the empty set is checked on rings")
    if 0 in family and not _close(content[0], content.zero, content.exact):
        return Verdict(False, (0,), "content does not vanish at the empty set")
    for a in family.members:
        for b in family.members:
            if b != a and b & ~a == 0 and content[b] > content[a] and not _close(
                content[b], content[a], content.exact
            ):
                return Verdict(False, (a, b), "content increases along a decreasing chain")
    return Verdict(True)


# --------------------------------------------------------------------------
# outer measures


class OuterMeasureTable:
    """Set function on all ``2**n`` subsets, indexed by mask."""

    def __init__(self, universe, values, exact=True, covers=None):
        if isinstance(universe, int):
            universe = FiniteUniverse(universe)
        self.universe = universe
        values = list(values)
        if len(values) != 1 << universe.size:
            raise ValueError("an outer measure table needs one value per subset")
        self.exact = exact
        self.values = [_coerce(v, exact) for v in values]
        self.covers = covers

    def __getitem__(self, mask):
        return self.values[mask if isinstance(mask, int) else mask_of(mask)]

    def cover_of(self, mask):
        """The optimal covering recorded when the table was induced, if any."""
        if self.covers is None:
            return None
        mask = mask if isinstance(mask, int) else mask_of(mask)
        out = []
        while mask:
            g = self.covers[mask]
            if g is None:
                return None
            out.append(g)
            mask &= ~g
        return tuple(out)


def induced_outer_measure(family, content):
    """``mu(A) = min`` over coverings of ``A`` by members of the summed content.

    Dynamic programming over subsets: a cheapest covering of ``S`` contains a
    member through the lowest point of ``S``; removing it leaves a covering of
    the rest. Subsets that no sub-family covers get ``inf``.
    """
    _require_semiring(family)
    _require_additive(content)
    n = family.universe.size
    size = 1 << n
    inf = math.inf
    cost = [inf] * size
    choice = [None] * size
    cost[0] = content.zero
    for s in range(1, size):
        best, arg = inf, None
        for g in family.candidates(_lowbit_index(s)):
            c = content[g] + cost[s & ~g]
            if c < best:
                best, arg = c, g
        cost[s], choice[s] = best, arg
    return OuterMeasureTable(family.universe, cost, exact=content.exact, covers=choice)


def check_outer_measure(outer):
    """``mu(emptyset) = 0``, monotone, and finitely sub-additive.

    Monotonicity is checked on single-point removals (which chain to all
    inclusions); sub-additivity on disjoint pairs, which together with
    monotonicity gives it for arbitrary pairs.
    """
    vals = outer.values
    n = outer.universe.size
    exact = outer.exact
    if not _close(vals[0], Fraction(0) if exact else 0.0, exact):
        return Verdict(False, (0,), "mu(emptyset) != 0")
    if any(v < 0 for v in vals):
        return Verdict(False, None, "negative value")
    for s in range(1, 1 << n):
        rest = s
        while rest:
            low = rest & -rest
            rest ^= low
            sub = s & ~low
            if vals[sub] > vals[s] and not _close(vals[sub], vals[s], exact):
                return Verdict(False, (sub, s), "not monotone")
    full = (1 << n) - 1
    for a in range(1, 1 << n):
        comp = full & ~a
        b = comp
        while b:
            if b > a:
                lhs = vals[a | b]
                rhs = vals[a] + vals[b]
                if lhs > rhs and not _close(lhs, rhs, exact):
                    return Verdict(False, (a, b), "not sub-additive")
            b = (b - 1) & comp
    return Verdict(True)


def caratheodory_sets(outer):
    """All ``A`` with ``mu(B) = mu(B & A) + mu(B - A)`` for every ``B``.

    The result is checked to be closed under complement and union, which on
    a finite universe makes it a sigma-algebra.
    """
    v = check_outer_measure(outer)
    if not v:
        raise NotOuterMeasure(f"not an outer measure: {v.reason}", witness=v.witness)
    vals = outer.values
    n = outer.universe.size
    full = (1 << n) - 1
    good = []
    for a in range(1 << n):
        ok = True
        for b in range(1 << n):
            if not _close(vals[b], vals[b & a] + vals[b & ~a], outer.exact):
                ok = False
                break
        if ok:
            good.append(a)
    fam = SetFamily(outer.universe, good)
    closed = all((full & ~a) in fam for a in good) and all(
        (a | b) in fam for a in good for b in good
    )
    if not closed:
        raise RuntimeError("Carathéodory sets failed the algebra check")
    return fam


def restricted_measure_is_additive(outer, family):
    """``mu`` restricted to ``family`` is additive on disjoint pairs and null at the empty set."""
    vals = outer.values
    if not _close(vals[0], Fraction(0) if outer.exact else 0.0, outer.exact):
        return False
    return all(
        _close(vals[a | b], vals[a] + vals[b], outer.exact)
        for a in family
        for b in family
        if a & b == 0
    )


def sigma_algebra(family):
    """The sigma-algebra generated by ``family``: all unions of its atoms."""
    n = family.universe.size
    signature = {}
    for p in range(n):
        key = tuple(bool(m >> p & 1) for m in family.members)
        signature.setdefault(key, 0)
        signature[key] |= 1 << p
    atoms = list(signature.values())
    out = []
    for choice in itertools.product((0, 1), repeat=len(atoms)):
        m = 0
        for take, atom in zip(choice, atoms):
            if take:
                m |= atom
        out.append(m)
    return SetFamily(family.universe, sorted(out))


@dataclass
class ExtensionReport:
    sigma_family: SetFamily
    caratheodory: SetFamily
    outer: OuterMeasureTable
    residuals: dict
    contained: bool
    exact: bool
    tolerance: float = field(default=0.0)

    @property
    def passed(self):
        if not self.contained:
            return False
        if self.exact:
            return all(r == 0 for r in self.residuals.values())
        return all(abs(r) <= self.tolerance for r in self.residuals.values())


def verify_extension(family, content):
    """Carathéodory extension check on a semiring with a sigma-additive content.

    Confirms that the generated sigma-algebra is made of Carathéodory sets of
    the induced outer measure and that the outer measure reproduces the
    content on every member (residuals are ``mu(A) - m(A)``).
    """
    _require_semiring(family)
    _require_additive(content, sigma=True)
    outer = induced_outer_measure(family, content)
    cara = caratheodory_sets(outer)
    sig = sigma_algebra(family)
    contained = all(a in cara for a in sig)
    residuals = {a: _residual(outer[a], content[a]) for a in family.members}
    return ExtensionReport(
        sigma_family=sig,
        caratheodory=cara,
        outer=outer,
        residuals=residuals,
        contained=contained,
        exact=content.exact,
        tolerance=0.0 if content.exact else FLOAT_TOL,
    )


# --------------------------------------------------------------------------
# projective families over a finite index set


def _marginal(array, axes_keep, ndim):
    drop = tuple(i for i in range(ndim) if i not in axes_keep)
    return array.sum(axis=drop) if drop else array


@dataclass
class ProjectiveReport:
    pairs_checked: int
    extension: np.ndarray
    unique: bool
    passed: bool = True


def verify_projective_finite(state_sizes, measures, exact=None):
    """Projectivity of a family ``P_J`` indexed by all subsets ``J`` of ``T``.

    Parameters
    ----------
    state_sizes : sequence of int
        ``len(state_sizes)`` is the size of the index set ``T``; entry ``i``
        is the number of states of coordinate ``i``.
    measures : mapping from sorted index tuples ``J`` to arrays of shape
        ``[state_sizes[j] for j in J]`` (object arrays of Fractions allowed).
        The empty tuple may map to the total mass.

    On a finite product the cylinders over ``J = T`` are the singletons, so any
    measure extending the family is pinned down pointwise by ``P_T``; the
    report's ``extension`` is that measure and ``unique`` records the
    pointwise enumeration.

    Raises
    ------
    NotProjective
        witness ``(H, J, point)`` where the pushforward of ``P_J`` to ``H``
        differs from ``P_H``.
    """
    k = len(state_sizes)
    T = tuple(range(k))
    arrays = {}
    for J, arr in measures.items():
        J = tuple(sorted(J))
        a = np.asarray(arr, dtype=object) if _is_exact_array(arr) else np.asarray(arr, dtype=float)
        shape = tuple(state_sizes[j] for j in J)
        if a.shape != shape:
            raise ValueError(f"measure for {J} has shape {a.shape}, expected {shape}")
        if np.any(a < 0):
            raise ValueError(f"measure for {J} has negative mass")
        arrays[J] = a
    for r in range(1, k + 1):
        for J in itertools.combinations(T, r):
            if J not in arrays:
                raise ValueError(f"missing measure for index set {J}")
    if exact is None:
        exact = all(a.dtype == object for a in arrays.values())
    checked = 0
    for J, PJ in arrays.items():
        for r in range(len(J)):
            for H in itertools.combinations(J, r):
                if H not in arrays:
                    continue
                keep = tuple(J.index(h) for h in H)
                pushed = np.asarray(_marginal(PJ, keep, len(J)), dtype=PJ.dtype)
                _compare(pushed, arrays[H], H, J, exact)
                checked += 1
    # every point of the finite product is a cylinder over T, so an extension
    # is fixed pointwise; build it by enumeration and confirm it reproduces
    # every member of the family
    PT = arrays[T]
    extension = np.empty(PT.shape, dtype=PT.dtype)
    for x in np.ndindex(PT.shape):
        extension[x] = PT[x]
    for J, PJ in arrays.items():
        keep = tuple(T.index(j) for j in J)
        pushed = np.asarray(_marginal(extension, keep, k), dtype=PT.dtype)
        _compare(pushed, PJ, J, T, exact)
    return ProjectiveReport(pairs_checked=checked, extension=extension, unique=True)


def _compare(pushed, target, H, J, exact):
    for point in np.ndindex(target.shape):
        if not _close(_num(pushed[point], exact), _num(target[point], exact), exact):
            raise NotProjective(
                f"pushforward of P_{J} onto {H} differs from P_{H} at {point}",
                witness=(H, J, point),
            )


def _is_exact_array(arr):
    flat = np.asarray(arr, dtype=object).reshape(-1)
    return all(isinstance(v, Rational) for v in flat)


def _num(v, exact):
    return Fraction(v) if exact else float(v)


# --------------------------------------------------------------------------
# text format


def parse_value(token):
    token = token.strip()
    if token.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    return Fraction(token)


def loads_family(text):
    """Parse the ``universe n`` / ``set <bits> <value>`` text format.

    Returns ``(family, content)``. Blank lines and ``#`` comments are skipped.
    """
    lines = [
        ln.split("#", 1)[0].strip()
        for ln in text.splitlines()
    ]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("universe"):
        raise ValueError("first line must be 'universe n'")
    n = int(lines[0].split()[1])
    universe = FiniteUniverse(n)
    masks, values = [], {}
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3 or parts[0] != "set":
            raise ValueError(f"malformed line: {ln!r}")
        bits = parts[1]
        if len(bits) != n or set(bits) - {"0", "1"}:
            raise ValueError(f"set {bits!r} is not a {n}-bit 0/1 string")
        m = int(bits, 2)
        masks.append(m)
        values[m] = parse_value(parts[2])
    family = SetFamily(universe, masks)
    return family, Content(family, values)


def dumps_family(content):
    family = content.family
    n = family.universe.size
    out = [f"universe {n}"]
    for m in family.members:
        out.append(f"set {format_mask(m, n)} {content[m]}")
    return "\n".join(out) + "\n"


def dyadic_example():
    """The 4-point dyadic-interval semiring with content ``|A| / 4``."""
    members = [(), (0,), (1,), (2,), (3,), (0, 1), (2, 3), (0, 1, 2, 3)]
    family = SetFamily(4, members)
    content = Content(family, {mask_of(m): Fraction(len(m), 4) for m in members})
    return family, content


def bundled_dyadic():
    """The bundled ``dyadic4.txt`` family, parsed (same data as :func:`dyadic_example`)."""
    text = resources.files("brownian_lab").joinpath("data/dyadic4.txt").read_text()
    return loads_family(text)
