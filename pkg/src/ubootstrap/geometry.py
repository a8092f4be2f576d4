"""Exact circle geometry for two-dimensional bootstrap update families.

A direction is a primitive integer vector, standing for the point of the unit
circle it spans.  Arcs and arc sets carry exact rational endpoints, and every
set operation, membership test, and ordering decision is integer arithmetic;
floating point appears only in display conversions and in witness margins.

The central objects:

* ``Direction``: primitive (x, y) with gcd 1, ordered counterclockwise from
  angle 0 at (1, 0).
* ``Arc``: a circular interval with closure flags, plus the distinguished
  values ``Arc.EMPTY`` and ``Arc.FULL``.
* ``ArcSet``: a normal-form finite union of arcs (sorted, disjoint,
  non-mergeable; isolated points kept as degenerate closed arcs).
* ``UpdateRule`` / ``UpdateFamily``: finite rules of finite nonzero offsets.

On top of these sit the update-family operations: the destabilized arc of a
rule, the stable set, the forbidden direction set, the supercritical /
critical / subcritical classification, the symmetry witness, and the witness
triple used by the cover machinery.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from functools import cmp_to_key
from math import gcd
from typing import Iterable, Optional, Sequence

TAU = 2.0 * math.pi


class NotSubcritical(ValueError):
    """Raised when an operation requires a subcritical family."""


class NoValidTriple(ValueError):
    """Raised when no witness triple of strongly stable directions exists."""


class InvalidOverride(ValueError):
    """Raised when a supplied witness angle fails validation."""


# ---------------------------------------------------------------------------
# Directions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Direction:
    """A primitive integer vector (x, y) != (0, 0) with gcd(|x|, |y|) == 1.

    Construction reduces the given vector to primitive form, so
    ``Direction(4, -6) == Direction(2, -3)``.
    """

    x: int
    y: int

    def __post_init__(self):
        x, y = self.x, self.y
        if x == 0 and y == 0:
            raise ValueError("zero vector has no direction")
        g = gcd(abs(x), abs(y))
        if g != 1:
            object.__setattr__(self, "x", x // g)
            object.__setattr__(self, "y", y // g)

    def __neg__(self) -> "Direction":
        return Direction(-self.x, -self.y)

    def perp_ccw(self) -> "Direction":
        """The direction rotated a quarter turn counterclockwise."""
        return Direction(-self.y, self.x)

    def perp_cw(self) -> "Direction":
        """The direction rotated a quarter turn clockwise."""
        return Direction(self.y, -self.x)

    def cross(self, other: "Direction") -> int:
        return self.x * other.y - self.y * other.x

    def dot(self, other: "Direction") -> int:
        return self.x * other.x + self.y * other.y

    def half(self) -> int:
        """0 when the angle lies in [0, pi), 1 when in [pi, 2*pi)."""
        return 0 if (self.y > 0 or (self.y == 0 and self.x > 0)) else 1

    def angle(self) -> float:
        """Angle in [0, 2*pi). Display only; never used for decisions."""
        return math.atan2(self.y, self.x) % TAU

    def degrees(self) -> float:
        return math.degrees(self.angle())

    def __str__(self) -> str:
        return f"{self.x},{self.y}"


def circular_cmp(a: Direction, b: Direction) -> int:
    """Three-way comparison of angles in [0, 2*pi), exact."""
    if a == b:
        return 0
    ha, hb = a.half(), b.half()
    if ha != hb:
        return -1 if ha < hb else 1
    c = a.cross(b)
    # same open half-plane of angles: cross sign decides
    return -1 if c > 0 else 1


_CIRC_KEY = cmp_to_key(circular_cmp)


def _rel_class(a: Direction, d: Direction) -> int:
    """Octant class of the ccw angle from a to d: 0 same, 4 antipodal."""
    c = a.cross(d)
    t = a.dot(d)
    if c == 0:
        return 0 if t > 0 else 4
    if c > 0:
        return 1 if t > 0 else (2 if t == 0 else 3)
    return 5 if t < 0 else (6 if t == 0 else 7)


def ccw_angle_lt(a: Direction, d1: Direction, d2: Direction) -> bool:
    """True iff the ccw angle from a to d1 is strictly less than to d2."""
    c1 = _rel_class(a, d1)
    c2 = _rel_class(a, d2)
    if c1 != c2:
        return c1 < c2
    if c1 in (0, 2, 4, 6):
        return False
    return d1.cross(d2) > 0


def strictly_between(a: Direction, d: Direction, b: Direction) -> bool:
    """True iff walking ccw from a, d appears strictly before b (a != b)."""
    if d == a or d == b:
        return False
    return ccw_angle_lt(a, d, b)


def sample_between(a: Direction, b: Direction) -> Direction:
    """An exact direction strictly inside the open ccw arc from a to b.

    When a == b the arc is the full circle minus a point and the antipode is
    returned.
    """
    if a == b:
        return -a
    c = a.cross(b)
    if c > 0:
        return Direction(a.x + b.x, a.y + b.y)
    if c < 0:
        return Direction(-(a.x + b.x), -(a.y + b.y))
    # antipodal endpoints: gap is exactly pi
    return a.perp_ccw()


# ---------------------------------------------------------------------------
# Arcs
# ---------------------------------------------------------------------------


class Arc:
    """A circular interval with rational endpoints and closure flags.

    ``Arc.span(a, b, sc, ec)`` is the ccw interval from a to b.  With a == b
    the allowed forms are the single point (both closed) and the full circle
    minus a point (both open).  ``Arc.EMPTY`` and ``Arc.FULL`` are the
    distinguished empty and full-circle values.
    """

    __slots__ = ("start", "end", "start_closed", "end_closed", "_kind")

    EMPTY: "Arc"
    FULL: "Arc"

    def __init__(self, start, end, start_closed, end_closed, _kind="span"):
        if _kind == "span":
            if start == end and start_closed != end_closed:
                raise ValueError("degenerate arc must be a point or a punctured circle")
        self.start = start
        self.end = end
        self.start_closed = start_closed
        self.end_closed = end_closed
        self._kind = _kind

    @classmethod
    def span(cls, start: Direction, end: Direction,
             start_closed: bool = True, end_closed: bool = True) -> "Arc":
        return cls(start, end, bool(start_closed), bool(end_closed))

    @classmethod
    def point(cls, d: Direction) -> "Arc":
        return cls(d, d, True, True)

    @property
    def is_empty(self) -> bool:
        return self._kind == "empty"

    @property
    def is_full(self) -> bool:
        return self._kind == "full"

    @property
    def is_point(self) -> bool:
        return self._kind == "span" and self.start == self.end and self.start_closed

    @property
    def is_punctured_circle(self) -> bool:
        return self._kind == "span" and self.start == self.end and not self.start_closed

    def contains(self, d: Direction) -> bool:
        if self._kind == "empty":
            return False
        if self._kind == "full":
            return True
        if self.start == self.end:
            return (d == self.start) if self.start_closed else (d != self.start)
        if d == self.start:
            return self.start_closed
        if d == self.end:
            return self.end_closed
        return strictly_between(self.start, d, self.end)

    def measure(self) -> float:
        """Angular length in radians. Display only."""
        if self._kind == "empty":
            return 0.0
        if self._kind == "full":
            return TAU
        if self.start == self.end:
            return 0.0 if self.start_closed else TAU
        return (self.end.angle() - self.start.angle()) % TAU

    def spans_at_least_pi(self) -> bool:
        """Exact test: angular extent >= pi (degenerate points excluded)."""
        if self._kind == "empty":
            return False
        if self._kind == "full":
            return True
        if self.start == self.end:
            return not self.start_closed
        if self.end == -self.start:
            return True
        return not strictly_between(self.start, self.end, -self.start)

    def antipodal(self) -> "Arc":
        if self._kind != "span":
            return self
        return Arc(-self.start, -self.end, self.start_closed, self.end_closed)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Arc):
            return NotImplemented
        if self._kind != other._kind:
            return False
        if self._kind != "span":
            return True
        return (self.start == other.start and self.end == other.end
                and self.start_closed == other.start_closed
                and self.end_closed == other.end_closed)

    def __hash__(self):
        if self._kind != "span":
            return hash(self._kind)
        return hash((self.start, self.end, self.start_closed, self.end_closed))

    def __str__(self) -> str:
        if self._kind == "empty":
            return "(empty)"
        if self._kind == "full":
            return "(full circle)"
        lb = "[" if self.start_closed else "("
        rb = "]" if self.end_closed else ")"
        return f"{lb}{self.start} .. {self.end}{rb}"

    def __repr__(self) -> str:
        return f"Arc{self}"


Arc.EMPTY = Arc(None, None, False, False, _kind="empty")
Arc.FULL = Arc(None, None, False, False, _kind="full")


# ---------------------------------------------------------------------------
# Arc sets
# ---------------------------------------------------------------------------


class _RawArcs:
    """Membership view over an unnormalized arc collection (union semantics)."""

    def __init__(self, arcs: Sequence[Arc]):
        self.arcs = [a for a in arcs if not a.is_empty]

    def contains(self, d: Direction) -> bool:
        return any(a.contains(d) for a in self.arcs)


class ArcSet:
    """A finite union of arcs in normal form.

    Normal form: either ``()`` (empty), ``(Arc.FULL,)``, or a tuple of span
    arcs sorted by start direction, pairwise disjoint and non-mergeable.
    Degenerate point arcs are kept; ``interior()`` drops them.
    """

    __slots__ = ("arcs",)

    def __init__(self, arcs: tuple = ()):
        self.arcs = tuple(arcs)

    # -- construction -------------------------------------------------------

    @classmethod
    def empty(cls) -> "ArcSet":
        return cls(())

    @classmethod
    def full(cls) -> "ArcSet":
        return cls((Arc.FULL,))

    @classmethod
    def of(cls, *arcs: Arc) -> "ArcSet":
        """Normalize an arbitrary collection of arcs into an ArcSet."""
        if any(a.is_full for a in arcs):
            return cls.full()
        return _combine([_RawArcs(arcs)], lambda v: v[0])

    # -- predicates ----------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return not self.arcs

    @property
    def is_full(self) -> bool:
        return len(self.arcs) == 1 and self.arcs[0].is_full

    def contains(self, d: Direction) -> bool:
        return any(a.contains(d) for a in self.arcs)

    # -- set algebra ---------------------------------------------------------

    def union(self, other: "ArcSet") -> "ArcSet":
        return _combine([self, other], any)

    def intersection(self, other: "ArcSet") -> "ArcSet":
        return _combine([self, other], all)

    def complement(self) -> "ArcSet":
        return _combine([self], lambda v: not v[0])

    def difference(self, other: "ArcSet") -> "ArcSet":
        return _combine([self, other], lambda v: v[0] and not v[1])

    def issubset(self, other: "ArcSet") -> bool:
        return self.difference(other).is_empty

    def interior(self) -> "ArcSet":
        """Topological interior: endpoints opened, isolated points dropped."""
        if self.is_full:
            return self
        opened = []
        for a in self.arcs:
            if a.is_point:
                continue
            opened.append(Arc.span(a.start, a.end, False, False))
        return ArcSet.of(*opened)

    def antipodal_image(self) -> "ArcSet":
        """The set of -u over u in the set."""
        if self.is_empty or self.is_full:
            return self
        return ArcSet(tuple(sorted((a.antipodal() for a in self.arcs),
                                   key=lambda a: _CIRC_KEY(a.start))))

    def measure(self) -> float:
        """Total angular measure in radians. Display only."""
        return sum(a.measure() for a in self.arcs)

    # -- plumbing ------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, ArcSet):
            return NotImplemented
        return self.arcs == other.arcs

    def __hash__(self):
        return hash(self.arcs)

    def __iter__(self):
        return iter(self.arcs)

    def __len__(self):
        return len(self.arcs)

    def __str__(self) -> str:
        if self.is_empty:
            return "(empty)"
        if self.is_full:
            return "(full circle)"
        return " u ".join(str(a) for a in self.arcs)

    def __repr__(self) -> str:
        return f"ArcSet<{self}>"


def _combine(operands: Sequence, op) -> ArcSet:
    """Evaluate a pointwise boolean combination of arc containers.

    Collects every endpoint appearing in any operand, evaluates ``op`` on the
    membership vector at each endpoint and at an exact sample direction inside
    each gap between consecutive endpoints, then reassembles the included
    pieces into normal form.  Exactness rests on sample_between returning a
    direction strictly inside each gap.
    """
    points: list[Direction] = []
    seen = set()
    for o in operands:
        for a in o.arcs:
            if a.is_empty or a.is_full:
                continue
            for d in (a.start, a.end):
                if d not in seen:
                    seen.add(d)
                    points.append(d)
    if not points:
        ref = Direction(1, 0)
        return ArcSet.full() if op([o.contains(ref) for o in operands]) else ArcSet.empty()

    points.sort(key=_CIRC_KEY)
    n = len(points)
    # pieces[2k] = point k, pieces[2k+1] = open gap (point k, point k+1)
    pieces: list[bool] = []
    for i in range(n):
        p = points[i]
        pieces.append(op([o.contains(p) for o in operands]))
        s = sample_between(p, points[(i + 1) % n])
        pieces.append(op([o.contains(s) for o in operands]))

    m = 2 * n
    if all(pieces):
        return ArcSet.full()
    if not any(pieces):
        return ArcSet.empty()

    arcs = []
    starts = [i for i in range(m) if pieces[i] and not pieces[(i - 1) % m]]
    for i0 in starts:
        j = i0
        while pieces[(j + 1) % m]:
            j = (j + 1) % m
        if i0 % 2 == 0:
            start, sc = points[i0 // 2], True
        else:
            start, sc = points[i0 // 2], False
        if j % 2 == 0:
            end, ec = points[j // 2], True
        else:
            end, ec = points[(j // 2 + 1) % n], False
        arcs.append(Arc.span(start, end, sc, ec))
    arcs.sort(key=lambda a: _CIRC_KEY(a.start))
    return ArcSet(tuple(arcs))


def open_semicircle(center: Direction) -> ArcSet:
    """The open half-circle of directions u with <center, u> > 0."""
    return ArcSet.of(Arc.span(center.perp_cw(), center.perp_ccw(), False, False))


def fits_in_closed_semicircle(s: ArcSet) -> bool:
    """True iff some closed semicircle contains the whole set.

    Equivalently, some open semicircle is disjoint from the set: the exact
    complement must contain an arc of angular extent at least pi.  A closed
    set touching both endpoints of an open semicircle still fits.
    """
    if s.is_empty:
        return True
    if s.is_full:
        return False
    return any(a.spans_at_least_pi() for a in s.complement().arcs)


# ---------------------------------------------------------------------------
# Update rules and families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UpdateRule:
    """A finite nonempty set of integer offsets, none of them the origin."""

    sites: frozenset

    def __init__(self, sites: Iterable[tuple]):
        sites = frozenset((int(x), int(y)) for x, y in sites)
        if not sites:
            raise ValueError("rule must contain at least one site")
        if (0, 0) in sites:
            raise ValueError("rule must not contain the origin")
        object.__setattr__(self, "sites", sites)

    def sorted_sites(self) -> list:
        return sorted(self.sites)

    def __iter__(self):
        return iter(self.sorted_sites())

    def __len__(self):
        return len(self.sites)

    def __str__(self) -> str:
        return " ".join(f"{x},{y}" for x, y in self.sorted_sites())


@dataclass(frozen=True)
class UpdateFamily:
    """A finite nonempty collection of update rules."""

    rules: tuple
    name: Optional[str] = None

    def __init__(self, rules: Iterable, name: Optional[str] = None):
        canon = []
        seen = set()
        for r in rules:
            if not isinstance(r, UpdateRule):
                r = UpdateRule(r)
            if r.sites not in seen:
                seen.add(r.sites)
                canon.append(r)
        if not canon:
            raise ValueError("family must contain at least one rule")
        canon.sort(key=lambda r: (len(r.sites), r.sorted_sites()))
        object.__setattr__(self, "rules", tuple(canon))
        object.__setattr__(self, "name", name)

    def __iter__(self):
        return iter(self.rules)

    def __len__(self):
        return len(self.rules)

    def __str__(self) -> str:
        label = self.name or "family"
        return f"{label}({len(self.rules)} rules)"


class Classification(Enum):
    SUPERCRITICAL = "supercritical"
    CRITICAL = "critical"
    SUBCRITICAL = "subcritical"

    def __str__(self) -> str:
        return self.value


# ---------------------------------------------------------------------------
# Family geometry
# ---------------------------------------------------------------------------


def destabilized_arc(rule: UpdateRule) -> Arc:
    """The open arc of directions u with <x, u> < 0 for every site x of the rule.

    Each site constrains u to an open semicircle; the rule's arc is the exact
    intersection, always a single open arc or empty.
    """
    if not isinstance(rule, UpdateRule):
        rule = UpdateRule(rule)
    acc = ArcSet.full()
    for (x, y) in rule:
        site = Direction(x, y)
        acc = acc.intersection(open_semicircle(-site))
        if acc.is_empty:
            return Arc.EMPTY
    if acc.is_empty:
        return Arc.EMPTY
    assert len(acc.arcs) == 1, "intersection of open semicircles is one arc"
    return acc.arcs[0]


def stable_set(family: UpdateFamily) -> ArcSet:
    """The exact set of stable directions: the circle minus every rule's
    destabilized arc."""
    destab = ArcSet.empty()
    for rule in family:
        arc = destabilized_arc(rule)
        if not arc.is_empty:
            destab = destab.union(ArcSet.of(arc))
    return destab.complement()


def _hull(points: list) -> list:
    """Andrew monotone chain over integer points; returns hull ccw."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    def half_chain(seq):
        chain = []
        for p in seq:
            while len(chain) >= 2:
                ax, ay = chain[-2]
                bx, by = chain[-1]
                if (bx - ax) * (p[1] - ay) - (by - ay) * (p[0] - ax) <= 0:
                    chain.pop()
                else:
                    break
            chain.append(p)
        return chain
    lower = half_chain(pts)
    upper = half_chain(reversed(pts))
    return lower[:-1] + upper[:-1]


def forbidden_set(family: UpdateFamily) -> frozenset:
    """Directions perpendicular to a convex-hull edge of some rule.

    Every hull edge (the single supporting segment for collinear rules)
    contributes both of its primitive perpendicular directions.  Rules whose
    hull is a single point contribute nothing.
    """
    out = set()
    for rule in family:
        hull = _hull(rule.sorted_sites())
        if len(hull) == 1:
            continue
        if len(hull) == 2:
            edges = [(hull[0], hull[1])]
        else:
            edges = list(zip(hull, hull[1:] + hull[:1]))
        for (ax, ay), (bx, by) in edges:
            e = Direction(bx - ax, by - ay)
            out.add(e.perp_ccw())
            out.add(e.perp_cw())
    return frozenset(out)


def classify(family: UpdateFamily) -> Classification:
    """Supercritical, critical, or subcritical, by exact semicircle tests.

    Supercritical iff some open semicircle misses the stable set; else
    critical iff some open semicircle misses its interior; else subcritical.
    """
    s = stable_set(family)
    if fits_in_closed_semicircle(s):
        return Classification.SUPERCRITICAL
    if fits_in_closed_semicircle(s.interior()):
        return Classification.CRITICAL
    return Classification.SUBCRITICAL


def is_symmetric(family: UpdateFamily) -> Optional[Direction]:
    """A direction u with both u and -u strongly stable, or None.

    Returned directions are exact and strictly inside the interior of the
    stable set together with their antipodes.
    """
    inner = stable_set(family).interior()
    both = inner.intersection(inner.antipodal_image())
    if both.is_empty:
        return None
    if both.is_full:
        return Direction(1, 0)
    arc = both.arcs[0]
    return sample_between(arc.start, arc.end)


def interaction_range_squared(family: UpdateFamily) -> int:
    """Largest squared distance between two sites of one rule (exact)."""
    best = 0
    for rule in family:
        sites = rule.sorted_sites()
        for (ax, ay), (bx, by) in itertools.combinations(sites, 2):
            d2 = (ax - bx) ** 2 + (ay - by) ** 2
            if d2 > best:
                best = d2
    return best


def interaction_range(family: UpdateFamily) -> float:
    """Largest distance between two sites of one rule."""
    return math.sqrt(interaction_range_squared(family))


# ---------------------------------------------------------------------------
# Witness triples
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WitnessTriple:
    """Three strongly stable, non-forbidden directions spanning the origin.

    ``thetas`` are the three angles in radians, sorted ascending in [0, 2*pi);
    they drive all downstream floating-point constants.  ``directions`` holds
    the exact primitive vectors when the triple came from the rational search
    and is None when irrational override angles were supplied.  ``margin`` is
    the angular slack (radians): the largest eps such that the
    eps-neighborhood of each angle stays inside its stable arc.
    """

    thetas: tuple
    margin: float
    directions: Optional[tuple] = None

    def sorted_thetas(self) -> tuple:
        return self.thetas


def _strongly_stable_arcs(family: UpdateFamily) -> ArcSet:
    """Interior of the stable set minus the forbidden directions."""
    inner = stable_set(family).interior()
    points = ArcSet.of(*(Arc.point(d) for d in forbidden_set(family)))
    return inner.difference(points)


def _arc_candidates(arc: Arc) -> list:
    """Mediant candidates strictly inside an open arc, midmost first."""
    m = sample_between(arc.start, arc.end)
    out = [m]
    for d in (sample_between(arc.start, m), sample_between(m, arc.end)):
        if d not in out:
            out.append(d)
    return out


def _origin_strictly_inside(a: Direction, b: Direction, c: Direction) -> bool:
    """Exact test: the origin is strictly inside triangle(a, b, c)."""
    s1 = a.cross(b)
    s2 = b.cross(c)
    s3 = c.cross(a)
    return (s1 > 0 and s2 > 0 and s3 > 0) or (s1 < 0 and s2 < 0 and s3 < 0)


def _angular_gap(t1: float, t2: float) -> float:
    d = abs(t1 - t2) % TAU
    return min(d, TAU - d)


def _slack_in_arcs(theta: float, arcs: ArcSet) -> Optional[float]:
    """Angular distance from theta to the boundary of its containing arc.

    Returns None when theta lies in no arc.  Float comparison with 1e-12
    slack; arcs are open spans or the full circle.
    """
    tol = 1e-12
    for a in arcs.arcs:
        if a.is_full:
            return math.pi
        if a.is_punctured_circle:
            gap = _angular_gap(theta, a.start.angle())
            if gap > tol:
                return gap
            return None
        lo = a.start.angle()
        width = (a.end.angle() - lo) % TAU
        off = (theta - lo) % TAU
        if tol < off < width - tol:
            return min(off, width - off)
    return None


def witness_triple(family: UpdateFamily,
                   overrides: Optional[Sequence[float]] = None) -> WitnessTriple:
    """Find (or validate) three strongly stable directions whose triangle
    strictly contains the origin.

    The search path takes midmost mediant candidates from each strongly
    stable arc (after removing forbidden directions) and scans all triples in
    decreasing order of minimum pairwise angular gap; its margin accounts for
    both arc boundaries and forbidden directions.  The override path accepts
    three floating-point angles, validates them inside the interior of the
    stable set away from forbidden directions (tolerance 1e-12), and measures
    the margin to the stable-arc boundaries.
    """
    if classify(family) is not Classification.SUBCRITICAL:
        raise NotSubcritical(f"{family} is not subcritical")

    strong = _strongly_stable_arcs(family)

    if overrides is not None:
        if len(overrides) != 3:
            raise InvalidOverride("exactly three angles required")
        tol = 1e-12
        thetas = sorted(float(t) % TAU for t in overrides)
        inner = stable_set(family).interior()
        forb = [d.angle() for d in forbidden_set(family)]
        margins = []
        for t in thetas:
            slack = _slack_in_arcs(t, inner)
            if slack is None:
                raise InvalidOverride(
                    f"angle {t:.12g} is not strictly inside a stable arc")
            if any(_angular_gap(t, f) <= tol for f in forb):
                raise InvalidOverride(
                    f"angle {t:.12g} coincides with a forbidden direction")
            margins.append(slack)
        u = [(math.cos(t), math.sin(t)) for t in thetas]
        crosses = [u[i][0] * u[(i + 1) % 3][1] - u[i][1] * u[(i + 1) % 3][0]
                   for i in range(3)]
        if not (all(c > tol for c in crosses) or all(c < -tol for c in crosses)):
            raise InvalidOverride("origin is not strictly inside the triangle")
        return WitnessTriple(tuple(thetas), min(margins), None)

    pool = []
    if strong.is_full:
        pool = [Direction(1, 0), Direction(-1, 2), Direction(-1, -2)]
    else:
        for arc in strong.arcs:
            if arc.is_point:
                continue
            pool.extend(_arc_candidates(arc))
    seen = set()
    pool = [d for d in pool if not (d in seen or seen.add(d))]

    best = None
    best_gap = -1.0
    for a, b, c in itertools.combinations(pool, 3):
        if not _origin_strictly_inside(a, b, c):
            continue
        ta, tb, tc = a.angle(), b.angle(), c.angle()
        gap = min(_angular_gap(ta, tb), _angular_gap(tb, tc), _angular_gap(tc, ta))
        if gap > best_gap:
            best_gap = gap
            best = (a, b, c)
    if best is None:
        raise NoValidTriple(f"no witness triple found for {family}")

    triple = sorted(best, key=lambda d: d.angle())
    thetas = tuple(d.angle() for d in triple)
    if strong.is_full:
        margin = math.pi / 4
    else:
        margin = min(_slack_in_arcs(t, strong) or 0.0 for t in thetas)
    return WitnessTriple(thetas, margin, tuple(triple))
