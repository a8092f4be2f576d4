"""Multiscale tilings, barriers, triangular covers, and the certificate.

This module turns the blocking construction behind the subcritical lower
bound into executable, desk-scale pieces:

* nested square tilings with recursive good/bad labels and clean sites,
* barriers (healthy tubes around near-perpendicular polylines) and the
  triangular covers they bound, with closedness checked by simulation,
* the constant pipeline that yields a numerical lower-bound certificate
  for the critical probability of a subcritical family.

The true constants of the argument are astronomically large, so every
construction here is parametric: outputs are validated definitionally
(slopes, tube radii, containment, laminarity) rather than guaranteed
probabilistically, and failures such as NoCleanSite or WaypointNotFound
are legitimate outcomes at toy parameters, not bugs.

Angles and slope thresholds are compared in double precision with a fixed
slack of 1e-9.  All set membership (tubes, interiors, covers) is exact
integer arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ubootstrap.dynamics import FreeHealthy, GridConfig, _offsets, closure
from ubootstrap.geometry import (
    Direction,
    NotSubcritical,
    UpdateFamily,
    WitnessTriple,
    forbidden_set,
    interaction_range,
    interaction_range_squared,
    witness_triple,
)
from ubootstrap.montecarlo import uniform_field

TAU = 2.0 * math.pi

_SLACK = 1e-9


class ParameterOrderViolation(ValueError):
    """Renormalization exponents must satisfy 1 < 1+gamma < beta < alpha < 2."""


class RegionNotAligned(ValueError):
    """Region dimensions must be multiples of the coarsest tile size."""


class NoCleanSite(RuntimeError):
    """No site of the square is far enough from every lower-level bad square."""


class WaypointNotFound(RuntimeError):
    """No admissible detour waypoint exists at these parameters."""


class SlopeViolation(ValueError):
    """A segment direction falls outside its slope tolerance."""


class EpsilonTooLarge(ValueError):
    """The requested angular tolerance exceeds what the witness gaps allow."""


class NestingViolation(RuntimeError):
    """Two covers overlap without one containing the other."""


# ---------------------------------------------------------------------------
# Site masks
# ---------------------------------------------------------------------------


class SiteMask:
    """An immutable set of lattice sites stored as a bit grid.

    The grid is kept in canonical form: trimmed to the tight bounding box of
    the member sites, with the empty mask represented by a 0x0 grid at the
    origin.  Equality, containment, and intersection all work on aligned
    windows, so masks with millions of sites stay cheap.
    """

    __slots__ = ("x0", "y0", "grid", "count")

    def __init__(self, x0: int, y0: int, grid: np.ndarray):
        grid = np.asarray(grid, dtype=bool)
        if grid.ndim != 2:
            raise ValueError("mask grid must be 2d")
        rows = grid.any(axis=1)
        if not rows.any():
            self.x0, self.y0 = 0, 0
            self.grid = np.zeros((0, 0), dtype=bool)
            self.count = 0
            return
        cols = grid.any(axis=0)
        r0 = int(np.argmax(rows))
        r1 = int(len(rows) - np.argmax(rows[::-1]))
        c0 = int(np.argmax(cols))
        c1 = int(len(cols) - np.argmax(cols[::-1]))
        self.grid = np.ascontiguousarray(grid[r0:r1, c0:c1])
        self.grid.setflags(write=False)
        self.x0 = int(x0) + c0
        self.y0 = int(y0) + r0
        self.count = int(self.grid.sum())

    @classmethod
    def empty(cls) -> "SiteMask":
        return cls(0, 0, np.zeros((0, 0), dtype=bool))

    @classmethod
    def from_sites(cls, sites: Iterable[Tuple[int, int]]) -> "SiteMask":
        pts = [(int(x), int(y)) for x, y in sites]
        if not pts:
            return cls.empty()
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        x0, y0 = min(xs), min(ys)
        grid = np.zeros((max(ys) - y0 + 1, max(xs) - x0 + 1), dtype=bool)
        for x, y in pts:
            grid[y - y0, x - x0] = True
        return cls(x0, y0, grid)

    @property
    def is_empty(self) -> bool:
        return self.count == 0

    def bbox(self) -> Tuple[int, int, int, int]:
        """Inclusive (x0, y0, x1, y1); the empty mask reports a point at 0."""
        if self.is_empty:
            return (0, 0, 0, 0)
        h, w = self.grid.shape
        return (self.x0, self.y0, self.x0 + w - 1, self.y0 + h - 1)

    def __contains__(self, site) -> bool:
        x, y = int(site[0]), int(site[1])
        r, c = y - self.y0, x - self.x0
        if r < 0 or c < 0 or r >= self.grid.shape[0] or c >= self.grid.shape[1]:
            return False
        return bool(self.grid[r, c])

    def __len__(self) -> int:
        return self.count

    def __iter__(self):
        ys, xs = np.nonzero(self.grid)
        for r, c in zip(ys, xs):
            yield (self.x0 + int(c), self.y0 + int(r))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SiteMask):
            return NotImplemented
        return (self.x0 == other.x0 and self.y0 == other.y0
                and self.grid.shape == other.grid.shape
                and bool(np.array_equal(self.grid, other.grid)))

    def __hash__(self):
        raise TypeError("SiteMask is not hashable")

    def clip(self, x0: int, y0: int, width: int, height: int) -> np.ndarray:
        """Boolean membership window of the given shape (row y, column x)."""
        out = np.zeros((height, width), dtype=bool)
        if self.is_empty:
            return out
        h, w = self.grid.shape
        sr0 = max(0, y0 - self.y0)
        sc0 = max(0, x0 - self.x0)
        sr1 = min(h, y0 + height - self.y0)
        sc1 = min(w, x0 + width - self.x0)
        if sr0 >= sr1 or sc0 >= sc1:
            return out
        dr0 = sr0 + self.y0 - y0
        dc0 = sc0 + self.x0 - x0
        out[dr0:dr0 + (sr1 - sr0), dc0:dc0 + (sc1 - sc0)] = \
            self.grid[sr0:sr1, sc0:sc1]
        return out

    def intersects(self, other: "SiteMask") -> bool:
        if self.is_empty or other.is_empty:
            return False
        ax0, ay0, ax1, ay1 = self.bbox()
        bx0, by0, bx1, by1 = other.bbox()
        x0, y0 = max(ax0, bx0), max(ay0, by0)
        x1, y1 = min(ax1, bx1), min(ay1, by1)
        if x0 > x1 or y0 > y1:
            return False
        w, h = x1 - x0 + 1, y1 - y0 + 1
        return bool((self.clip(x0, y0, w, h) & other.clip(x0, y0, w, h)).any())

    def isdisjoint(self, other: "SiteMask") -> bool:
        return not self.intersects(other)

    def issubset(self, other: "SiteMask") -> bool:
        if self.is_empty:
            return True
        x0, y0, x1, y1 = self.bbox()
        w, h = x1 - x0 + 1, y1 - y0 + 1
        return bool((self.grid & ~other.clip(x0, y0, w, h)).sum() == 0)

    def union(self, other: "SiteMask") -> "SiteMask":
        if self.is_empty:
            return other
        if other.is_empty:
            return self
        ax0, ay0, ax1, ay1 = self.bbox()
        bx0, by0, bx1, by1 = other.bbox()
        x0, y0 = min(ax0, bx0), min(ay0, by0)
        x1, y1 = max(ax1, bx1), max(ay1, by1)
        w, h = x1 - x0 + 1, y1 - y0 + 1
        return SiteMask(x0, y0, self.clip(x0, y0, w, h) | other.clip(x0, y0, w, h))

    def __repr__(self) -> str:
        if self.is_empty:
            return "SiteMask(empty)"
        x0, y0, x1, y1 = self.bbox()
        return f"SiteMask({self.count} sites in [{x0},{x1}]x[{y0},{y1}])"


# ---------------------------------------------------------------------------
# Exact distance helpers
# ---------------------------------------------------------------------------


def _box_gap(a: Sequence[int], b: Sequence[int]) -> float:
    """Euclidean gap between two inclusive site boxes (0 when they touch)."""
    dx = max(0, a[0] - b[2], b[0] - a[2])
    dy = max(0, a[1] - b[3], b[1] - a[3])
    return math.hypot(dx, dy)


def _point_box_gap(p: Tuple[float, float], box: Sequence[int]) -> float:
    dx = max(0.0, box[0] - p[0], p[0] - box[2])
    dy = max(0.0, box[1] - p[1], p[1] - box[3])
    return math.hypot(dx, dy)


def _point_seg_dist(p, a, b) -> float:
    px, py = float(p[0]), float(p[1])
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    vx, vy = bx - ax, by - ay
    L2 = vx * vx + vy * vy
    if L2 == 0.0:
        return math.hypot(px - ax, py - ay)
    t = max(0.0, min(1.0, ((px - ax) * vx + (py - ay) * vy) / L2))
    return math.hypot(px - ax - t * vx, py - ay - t * vy)


def _seg_box_gap(a, b, box) -> float:
    """Distance between segment a-b and an inclusive site box."""
    corners = [(box[0], box[1]), (box[2], box[1]),
               (box[2], box[3]), (box[0], box[3])]
    # segment endpoint inside the box, or box corner on the segment side
    for p in (a, b):
        if box[0] <= p[0] <= box[2] and box[1] <= p[1] <= box[3]:
            return 0.0
    best = min(_point_seg_dist(c, a, b) for c in corners)
    edges = list(zip(corners, corners[1:] + corners[:1]))
    for c1, c2 in edges:
        best = min(best, _seg_seg_dist(a, b, c1, c2))
    return best


def _seg_seg_dist(a, b, c, d) -> float:
    if _segments_cross(a, b, c, d):
        return 0.0
    return min(_point_seg_dist(a, c, d), _point_seg_dist(b, c, d),
               _point_seg_dist(c, a, b), _point_seg_dist(d, a, b))


def _segments_cross(a, b, c, d) -> bool:
    def orient(p, q, r):
        v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
        return (v > 0) - (v < 0)

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 != o2 and o3 != o4:
        return True
    return False


def _slope_dev(dx: float, dy: float, theta: float) -> float:
    """|((direction angle - theta) mod 2pi) - pi/2| for the vector (dx, dy)."""
    ang = math.atan2(dy, dx)
    return abs((ang - theta) % TAU - math.pi / 2)


# ---------------------------------------------------------------------------
# Renormalization parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RenormParams:
    """Exponents and base scale of the multiscale construction.

    ``alpha`` drives tile growth, ``beta`` the interaction reach g_i,
    ``gamma`` the slope-tolerance decay, ``delta1`` the base tile side, and
    ``epsilon`` the angular budget shared by every slope tolerance.  The
    sparseness exponent delta is derived, not stored.
    """

    alpha: float
    beta: float
    gamma: float
    delta1: int
    epsilon: float

    def __post_init__(self):
        if not (0 < self.gamma and 1 + self.gamma < self.beta
                and self.beta < self.alpha < 2):
            raise ParameterOrderViolation(
                "need 1 < 1+gamma < beta < alpha < 2, got "
                f"alpha={self.alpha} beta={self.beta} gamma={self.gamma}")
        if int(self.delta1) != self.delta1 or self.delta1 < 1:
            raise ValueError("delta1 must be a positive integer")
        object.__setattr__(self, "delta1", int(self.delta1))
        if not (0 < self.epsilon <= math.pi):
            raise ValueError("epsilon must lie in (0, pi]")

    @property
    def delta(self) -> float:
        return (2 * self.alpha + 2 * self.beta - 3) / (2 - self.alpha)

    def ladder(self, max_level: int) -> Tuple[int, ...]:
        """Tile sides Delta_1..Delta_max; each entry is the least multiple of
        its predecessor at or above predecessor**alpha."""
        if max_level < 1:
            raise ValueError("max_level must be at least 1")
        out = [self.delta1]
        for _ in range(max_level - 1):
            d = out[-1]
            k = math.ceil(d ** self.alpha / d - 1e-9)
            out.append(d * max(k, 1))
        return tuple(out)

    def delta_at(self, level: int) -> int:
        return self.ladder(level)[-1]

    def q_at(self, level: int) -> float:
        return float(self.delta_at(level)) ** (-self.delta)

    def g_at(self, level: int) -> float:
        return float(self.delta_at(level)) ** self.beta

    def sigma_at(self, level: int) -> float:
        d = float(self.delta_at(level))
        return self.epsilon / 2 + self.epsilon * d ** (-self.gamma)


# ---------------------------------------------------------------------------
# Tiling hierarchy
# ---------------------------------------------------------------------------


@dataclass
class TilingLevel:
    """One tiling scale: tile side, per-level constants, and the label grid.

    ``bad[b, a]`` labels the square whose lower-left site is
    origin + (a*delta, b*delta).
    """

    index: int
    delta: int
    q: float
    g: float
    sigma: float
    bad: np.ndarray
    bad_indices: np.ndarray = field(repr=False, default=None)
    bad_boxes: np.ndarray = field(repr=False, default=None)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.bad.shape

    @property
    def bad_count(self) -> int:
        return int(self.bad.sum())


@dataclass
class TilingHierarchy:
    """Nested tilings of a finite region with good/bad labels per level.

    Also acts as the registry of constructed covers; registration enforces
    the laminar (disjoint-or-nested) discipline.
    """

    config: GridConfig
    params: RenormParams
    levels: List[TilingLevel]
    covers: List["TriangularCover"] = field(default_factory=list)

    @property
    def max_level(self) -> int:
        return len(self.levels)

    def level(self, i: int) -> TilingLevel:
        if not 1 <= i <= self.max_level:
            raise ValueError(f"level {i} outside 1..{self.max_level}")
        return self.levels[i - 1]

    def square_box(self, i: int, a: int, b: int) -> Tuple[int, int, int, int]:
        """Inclusive site box of square (a, b) at level i, lattice coords."""
        d = self.level(i).delta
        x0, y0 = self.config.origin
        return (x0 + a * d, y0 + b * d, x0 + (a + 1) * d - 1, y0 + (b + 1) * d - 1)

    def square_of_site(self, i: int, site) -> Optional[Tuple[int, int]]:
        d = self.level(i).delta
        x0, y0 = self.config.origin
        a, b = (site[0] - x0) // d, (site[1] - y0) // d
        ny, nx = self.level(i).shape
        if 0 <= a < nx and 0 <= b < ny:
            return (int(a), int(b))
        return None

    def is_bad(self, i: int, a: int, b: int) -> bool:
        """Out-of-region squares count as good (healthy beyond the window)."""
        lev = self.level(i)
        ny, nx = lev.shape
        if 0 <= a < nx and 0 <= b < ny:
            return bool(lev.bad[b, a])
        return False

    def clean_at(self, level: int, site) -> bool:
        """Distance at least g_j/3 from every (j)-bad square, for all j < level."""
        p = (float(site[0]), float(site[1]))
        for j in range(1, level):
            lev = self.level(j)
            if lev.bad_boxes is None or len(lev.bad_boxes) == 0:
                continue
            need = lev.g / 3.0
            boxes = lev.bad_boxes
            dx = np.maximum(0.0, np.maximum(boxes[:, 0] - p[0], p[0] - boxes[:, 2]))
            dy = np.maximum(0.0, np.maximum(boxes[:, 1] - p[1], p[1] - boxes[:, 3]))
            if (np.hypot(dx, dy) < need - _SLACK).any():
                return False
        return True

    def register(self, cover: "TriangularCover") -> None:
        for other in self.covers:
            if not _laminar_pair(cover, other):
                raise NestingViolation(
                    f"cover at level {cover.level} overlaps a registered "
                    f"level-{other.level} cover without nesting")
        self.covers.append(cover)

    def audit_text(self) -> str:
        lines = []
        h, w = self.config.infected.shape
        lines.append(f"region: {w}x{h}, infected sites: "
                     f"{int(self.config.infected.sum())}")
        for lev in self.levels:
            ny, nx = lev.shape
            lines.append(
                f"level {lev.index}: delta={lev.delta} tiles={nx}x{ny} "
                f"bad={lev.bad_count} (q={lev.q:.3g} g={lev.g:.4g} "
                f"sigma={lev.sigma:.4g})")
        return "\n".join(lines)


def _level_boxes(bad: np.ndarray, delta: int, origin) -> Tuple[np.ndarray, np.ndarray]:
    idx = np.argwhere(bad)  # rows of (b, a)
    if len(idx) == 0:
        return idx, np.zeros((0, 4), dtype=np.int64)
    a = idx[:, 1].astype(np.int64)
    b = idx[:, 0].astype(np.int64)
    x0, y0 = origin
    boxes = np.stack([x0 + a * delta, y0 + b * delta,
                      x0 + (a + 1) * delta - 1, y0 + (b + 1) * delta - 1], axis=1)
    return idx, boxes


def build_hierarchy(config: GridConfig, params: RenormParams,
                    max_level: int) -> TilingHierarchy:
    """Label every square of every tiling level over the region.

    A level-1 square is bad iff it contains an infected site.  A square at
    level i+1 is bad iff two distinct non-adjacent (i)-bad squares exist,
    each within distance g_i of it and of each other (squares touching only
    at a corner count as adjacent).  The pair search is brute force within
    radius g_i.
    """
    ladder = params.ladder(max_level)
    h, w = config.infected.shape
    if w % ladder[-1] or h % ladder[-1]:
        raise RegionNotAligned(
            f"region {w}x{h} is not a multiple of Delta_{max_level} = {ladder[-1]}")

    levels: List[TilingLevel] = []
    d1 = ladder[0]
    bad1 = config.infected.reshape(h // d1, d1, w // d1, d1).any(axis=(1, 3))
    idx, boxes = _level_boxes(bad1, d1, config.origin)
    levels.append(TilingLevel(1, d1, params.q_at(1), params.g_at(1),
                              params.sigma_at(1), bad1, idx, boxes))

    for i in range(2, max_level + 1):
        prev = levels[-1]
        d = ladder[i - 1]
        ny, nx = h // d, w // d
        bad = np.zeros((ny, nx), dtype=bool)
        pidx, pboxes = prev.bad_indices, prev.bad_boxes
        if len(pidx) >= 2:
            g = prev.g
            px0 = pboxes[:, 0].astype(float)
            py0 = pboxes[:, 1].astype(float)
            px1 = pboxes[:, 2].astype(float)
            py1 = pboxes[:, 3].astype(float)
            ox, oy = config.origin
            for b in range(ny):
                sy0, sy1 = oy + b * d, oy + (b + 1) * d - 1
                gy = np.maximum(0.0, np.maximum(py0 - sy1, sy0 - py1))
                for a in range(nx):
                    sx0, sx1 = ox + a * d, ox + (a + 1) * d - 1
                    gx = np.maximum(0.0, np.maximum(px0 - sx1, sx0 - px1))
                    near = np.hypot(gx, gy) <= g + _SLACK
                    k = int(near.sum())
                    if k < 2:
                        continue
                    sel = np.nonzero(near)[0]
                    ia = pidx[sel, 1]
                    ib = pidx[sel, 0]
                    cheb = np.maximum(np.abs(ia[:, None] - ia[None, :]),
                                      np.abs(ib[:, None] - ib[None, :]))
                    ddx = np.maximum(0.0, np.maximum(
                        px0[sel][:, None] - px1[sel][None, :],
                        px0[sel][None, :] - px1[sel][:, None]))
                    ddy = np.maximum(0.0, np.maximum(
                        py0[sel][:, None] - py1[sel][None, :],
                        py0[sel][None, :] - py1[sel][:, None]))
                    pairdist = np.hypot(ddx, ddy)
                    if ((cheb >= 2) & (pairdist <= g + _SLACK)).any():
                        bad[b, a] = True
        idx, boxes = _level_boxes(bad, d, config.origin)
        levels.append(TilingLevel(i, d, params.q_at(i), params.g_at(i),
                                  params.sigma_at(i), bad, idx, boxes))

    return TilingHierarchy(config, params, levels)


# ---------------------------------------------------------------------------
# Bad-square statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BadFractionReport:
    p: float
    samples: int
    delta1: int
    delta2: int
    level1_fraction: float
    level1_sigma: float
    level1_closed_form: float
    level1_bound: float
    level1_within_bound: bool
    level2_fraction: float
    q2: float


def bad_fraction_check(family: UpdateFamily, params: RenormParams, p: float,
                       samples: int, seed: int) -> BadFractionReport:
    """Monte Carlo estimate of the bad-square probabilities at levels 1 and 2.

    Asserts that the observed level-1 fraction respects the union bound
    delta1**2 * p within three standard errors, and reports the level-2
    fraction against its target q_2 for information.  Level-2 labels are
    read off the central square of a window padded by g_1 so region edges
    cannot bias them.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if samples < 1:
        raise ValueError("samples must be positive")
    if params.delta1 > 64:
        raise ValueError("bad_fraction_check is for toy scales (delta1 <= 64)")
    if params.delta1 < interaction_range(family):
        raise ValueError("delta1 must be at least the family range")

    d1, d2 = params.ladder(2)
    pad = math.ceil(params.g_at(1) / d2) * d2
    side = d2 + 2 * pad
    central = pad // d2

    n1 = bad1 = 0
    n2 = bad2 = 0
    for t in range(samples):
        grid = uniform_field(seed, t, side) < p
        cfg = GridConfig(grid, FreeHealthy())
        h = build_hierarchy(cfg, params, 2)
        n1 += h.level(1).bad.size
        bad1 += h.level(1).bad_count
        n2 += 1
        bad2 += int(h.level(2).bad[central, central])

    f1 = bad1 / n1
    sig1 = math.sqrt(max(f1 * (1 - f1), 1e-12) / n1)
    bound = d1 ** 2 * p
    closed = 1.0 - (1.0 - p) ** (d1 ** 2)
    return BadFractionReport(
        p=p, samples=samples, delta1=d1, delta2=d2,
        level1_fraction=f1, level1_sigma=sig1, level1_closed_form=closed,
        level1_bound=bound, level1_within_bound=f1 <= bound + 3 * sig1,
        level2_fraction=bad2 / n2, q2=params.q_at(2))


# ---------------------------------------------------------------------------
# Clean sites
# ---------------------------------------------------------------------------


def _square_scan_order(box: Tuple[int, int, int, int]):
    """Sites of an inclusive box, center first, ring by ring, then lex."""
    cx = (box[0] + box[2]) // 2
    cy = (box[1] + box[3]) // 2
    sites = [(x, y) for y in range(box[1], box[3] + 1)
             for x in range(box[0], box[2] + 1)]
    sites.sort(key=lambda s: (max(abs(s[0] - cx), abs(s[1] - cy)), s[1], s[0]))
    return sites


def find_clean_site(h: TilingHierarchy, level: int,
                    square: Tuple[int, int]) -> Tuple[int, int]:
    """A site of the given good square far from all lower-level bad squares.

    Level 1 has no condition, so the center is returned.  Otherwise sites in
    the ring at distance between 2g/5 and 3g/5 from the nearest bad square of
    the level below are tried first, then the rest of the square center-out.
    Exhaustion raises NoCleanSite, an expected outcome at toy parameters.
    """
    a, b = square
    lev = h.level(level)
    ny, nx = lev.shape
    if 0 <= a < nx and 0 <= b < ny and lev.bad[b, a]:
        raise ValueError(f"square {square} at level {level} is bad")
    box = h.square_box(level, a, b)
    if level == 1:
        return ((box[0] + box[2]) // 2, (box[1] + box[3]) // 2)

    order = _square_scan_order(box)
    below = h.level(level - 1)
    if below.bad_boxes is not None and len(below.bad_boxes):
        center = ((box[0] + box[2]) / 2.0, (box[1] + box[3]) / 2.0)
        gaps = [_point_box_gap(center, bb) for bb in below.bad_boxes]
        nearest = below.bad_boxes[int(np.argmin(gaps))]
        g = below.g
        ring = [s for s in order
                if 2 * g / 5 <= _point_box_gap((s[0], s[1]), nearest) <= 3 * g / 5]
        seen = set(ring)
        order = ring + [s for s in order if s not in seen]

    for site in order:
        if h.clean_at(level, site):
            return site
    raise NoCleanSite(
        f"no ({level})-clean site in square {square}; expected at toy scales")


# ---------------------------------------------------------------------------
# Barriers
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class Barrier:
    """A healthy tube of radius range(family) around an anchor polyline.

    ``theta`` is the witness direction the side protects against; every
    anchor segment runs close to perpendicular to it.  ``segment_sigmas``
    records the slope tolerance each flattened segment was built against
    (sub-segments of a detour carry the tolerance of their own depth), and
    ``chord_sigma`` the tolerance for the straight line between the two
    endpoints.
    """

    level: int
    side: int
    theta: float
    anchor: Tuple[Tuple[int, int], ...]
    segment_sigmas: Tuple[float, ...]
    chord_sigma: float
    tube: SiteMask

    @property
    def endpoints(self) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        return self.anchor[0], self.anchor[-1]


def _tube_mask(anchor: Sequence[Tuple[int, int]], r2: int) -> SiteMask:
    """All sites at squared distance <= r2 from some anchor segment (exact)."""
    rad = math.isqrt(r2)
    if rad * rad < r2:
        rad += 1
    xs = [p[0] for p in anchor]
    ys = [p[1] for p in anchor]
    gx0, gy0 = min(xs) - rad, min(ys) - rad
    gw = max(xs) + rad - gx0 + 1
    gh = max(ys) + rad - gy0 + 1
    grid = np.zeros((gh, gw), dtype=bool)
    for (ax, ay), (bx, by) in zip(anchor, anchor[1:]):
        wx0, wy0 = min(ax, bx) - rad, min(ay, by) - rad
        wx1, wy1 = max(ax, bx) + rad, max(ay, by) + rad
        X, Y = np.meshgrid(np.arange(wx0, wx1 + 1, dtype=np.int64),
                           np.arange(wy0, wy1 + 1, dtype=np.int64))
        px, py = X - ax, Y - ay
        vx, vy = bx - ax, by - ay
        L2 = vx * vx + vy * vy
        if L2 == 0:
            mask = px * px + py * py <= r2
        else:
            d = px * vx + py * vy
            cross = px * vy - py * vx
            qx, qy = X - bx, Y - by
            mask = np.where(
                d <= 0, px * px + py * py <= r2,
                np.where(d >= L2, qx * qx + qy * qy <= r2,
                         cross * cross <= r2 * L2))
        grid[wy0 - gy0:wy1 - gy0 + 1, wx0 - gx0:wx1 - gx0 + 1] |= mask
    return SiteMask(gx0, gy0, grid)


def validate_barrier(family: UpdateFamily, barrier: Barrier) -> None:
    """Recompute every barrier invariant from the anchor alone.

    Raises SlopeViolation or ValueError on any mismatch.  Deliberately
    independent of the construction path.
    """
    anchor = barrier.anchor
    if len(anchor) < 2:
        raise ValueError("anchor needs at least two points")
    if barrier.level == 1 and len(anchor) != 2:
        raise ValueError("a level-1 anchor is a single segment")
    if len(barrier.segment_sigmas) != len(anchor) - 1:
        raise ValueError("one slope tolerance per segment required")
    (x0, y0), (x1, y1) = anchor[0], anchor[-1]
    dev = _slope_dev(x1 - x0, y1 - y0, barrier.theta)
    if dev > barrier.chord_sigma + _SLACK:
        raise SlopeViolation(
            f"chord deviation {dev:.6f} exceeds tolerance "
            f"{barrier.chord_sigma:.6f}")
    for (a, b), sig in zip(zip(anchor, anchor[1:]), barrier.segment_sigmas):
        if a == b:
            raise ValueError("degenerate anchor segment")
        dev = _slope_dev(b[0] - a[0], b[1] - a[1], barrier.theta)
        if dev > sig + _SLACK:
            raise SlopeViolation(
                f"segment {a}-{b} deviation {dev:.6f} exceeds {sig:.6f}")
    if barrier.tube != _tube_mask(anchor, interaction_range_squared(family)):
        raise ValueError("tube does not match the anchor polyline")


def _king_components(indices: np.ndarray) -> List[List[Tuple[int, int]]]:
    """Connected components under edge-or-corner adjacency of (b, a) indices."""
    cells = {(int(r[1]), int(r[0])) for r in indices}  # as (a, b)
    comps = []
    while cells:
        seed = min(cells)
        stack, comp = [seed], []
        cells.discard(seed)
        while stack:
            a, b = stack.pop()
            comp.append((a, b))
            for da in (-1, 0, 1):
                for db in (-1, 0, 1):
                    n = (a + da, b + db)
                    if n in cells:
                        cells.discard(n)
                        stack.append(n)
        comps.append(sorted(comp))
    return comps


def _component_box(h: TilingHierarchy, level: int,
                   comp: Sequence[Tuple[int, int]]) -> Tuple[int, int, int, int]:
    boxes = [h.square_box(level, a, b) for a, b in comp]
    return (min(b[0] for b in boxes), min(b[1] for b in boxes),
            max(b[2] for b in boxes), max(b[3] for b in boxes))


def build_barrier(family: UpdateFamily, witness: WitnessTriple,
                  params: RenormParams, h: TilingHierarchy, level: int,
                  t: int, x: Tuple[int, int], y: Tuple[int, int], *,
                  skip_goodness_check: bool = False,
                  detour_scale: float = 1.0,
                  ignore_squares: frozenset = frozenset(),
                  check_covers: bool = True) -> Barrier:
    """Construct a side-t barrier from x to y at the given level.

    Level 1 is a straight tube.  At higher levels the straight path is
    deflected around clusters of bad squares of the level below: for each
    blocking cluster a waypoint is chosen in one of the two strips obtained
    by displacing the chord sideways by 8*s*Delta (s = detour_scale), at
    chord distance in [8*s*Delta, 10*s*Delta], abreast of the cluster to
    within Delta, and the legs between consecutive waypoints recurse one
    level down.  Among admissible waypoints the one closest to the straight
    chord wins, ties broken by lexicographic coordinate.

    ``skip_goodness_check`` is the toy-mode override: it drops the
    precondition that squares of this level near the chord are good and
    that the endpoints are clean, and builds the chord straight with no
    detours (the caller is accepting whatever the tube runs through).
    ``ignore_squares`` exempts the cluster a cover is being built around
    from pre-checks and detour triggers.
    """
    if t not in (1, 2, 3):
        raise ValueError("side t must be 1, 2, or 3")
    if tuple(x) == tuple(y):
        raise ValueError("barrier endpoints must differ")
    if detour_scale <= 0:
        raise ValueError("detour_scale must be positive")
    x = (int(x[0]), int(x[1]))
    y = (int(y[0]), int(y[1]))
    theta = witness.thetas[t - 1]
    sigma = params.sigma_at(level)
    r2 = interaction_range_squared(family)

    dev = _slope_dev(y[0] - x[0], y[1] - x[1], theta)
    if dev > sigma + _SLACK:
        raise SlopeViolation(
            f"chord {x}-{y} deviates {dev:.6f} from perpendicular to side {t}; "
            f"tolerance at level {level} is {sigma:.6f}")

    if level == 1 or skip_goodness_check:
        return Barrier(level, t, theta, (x, y), (sigma,), sigma,
                       _tube_mask((x, y), r2))

    delta = h.level(level).delta if level <= h.max_level else params.delta_at(level)
    dm = params.delta_at(level - 1)
    scale = detour_scale * dm

    if level <= h.max_level:
        lev = h.level(level)
        for row in lev.bad_indices:
            a, b = int(row[1]), int(row[0])
            if (a, b) in ignore_squares:
                continue
            if _seg_box_gap(x, y, h.square_box(level, a, b)) <= delta + _SLACK:
                raise ValueError(
                    f"({level})-bad square {(a, b)} within Delta of the "
                    "chord; pass skip_goodness_check to override")
        for end in (x, y):
            if not h.clean_at(level, end):
                raise ValueError(
                    f"endpoint {end} is not ({level})-clean; pass "
                    "skip_goodness_check to override")

    # blocking clusters of the level below
    waypoints: List[Tuple[int, int]] = [x]
    below = h.level(level - 1) if level - 1 <= h.max_level else None
    if below is not None and len(below.bad_indices):
        comps = _king_components(below.bad_indices)
        blockers = []
        for comp in comps:
            if ignore_squares and all(
                    _parent_index(h, level - 1, level, a, b) in ignore_squares
                    for a, b in comp):
                continue
            cbox = _component_box(h, level - 1, comp)
            if _seg_box_gap(x, y, cbox) <= 2 * scale + _SLACK:
                blockers.append(cbox)
        blockers = _merge_blockers(blockers, x, y, 2 * scale)
        ux, uy = y[0] - x[0], y[1] - x[1]
        L = math.hypot(ux, uy)
        ux, uy = ux / L, uy / L
        blockers.sort(key=lambda bb: ((bb[0] + bb[2]) / 2 - x[0]) * ux
                      + ((bb[1] + bb[3]) / 2 - x[1]) * uy)
        for cbox in blockers:
            wp = _detour_waypoint(h, params, level, x, y, cbox, scale)
            waypoints.append(wp)
    waypoints.append(y)

    anchor: List[Tuple[int, int]] = [x]
    sigmas: List[float] = []
    for a, b in zip(waypoints, waypoints[1:]):
        if a == b:
            continue
        leg = build_barrier(family, witness, params, h, level - 1, t, a, b,
                            detour_scale=detour_scale,
                            check_covers=False)
        anchor.extend(leg.anchor[1:])
        sigmas.extend(leg.segment_sigmas)

    tube = _tube_mask(anchor, r2)
    barrier = Barrier(level, t, theta, tuple(anchor), tuple(sigmas), sigma, tube)
    if check_covers:
        for cover in h.covers:
            if cover.level < level and tube.intersects(cover.footprint):
                raise WaypointNotFound(
                    f"barrier tube intersects a registered level-{cover.level} "
                    "cover; no avoiding path was found")
    validate_barrier(family, barrier)
    return barrier


def _parent_index(h: TilingHierarchy, child_level: int, parent_level: int,
                  a: int, b: int) -> Tuple[int, int]:
    ratio = h.level(parent_level).delta // h.level(child_level).delta
    return (a // ratio, b // ratio)


def _merge_blockers(boxes: List[Tuple[int, int, int, int]], x, y,
                    reach: float) -> List[Tuple[int, int, int, int]]:
    """Union boxes whose gap is within the detour reach, until stable."""
    boxes = list(boxes)
    merged = True
    while merged and len(boxes) > 1:
        merged = False
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                if _box_gap(boxes[i], boxes[j]) <= reach:
                    bi, bj = boxes[i], boxes[j]
                    boxes[i] = (min(bi[0], bj[0]), min(bi[1], bj[1]),
                                max(bi[2], bj[2]), max(bi[3], bj[3]))
                    del boxes[j]
                    merged = True
                    break
            if merged:
                break
    return boxes


def _detour_waypoint(h: TilingHierarchy, params: RenormParams, level: int,
                     x, y, cbox, scale: float) -> Tuple[int, int]:
    """Clean waypoint in the displaced strip that the cluster avoids."""
    dm = params.delta_at(level - 1)
    ux, uy = y[0] - x[0], y[1] - x[1]
    L = math.hypot(ux, uy)
    ux, uy = ux / L, uy / L
    nx_, ny_ = -uy, ux  # +90 degrees
    ccx, ccy = (cbox[0] + cbox[2]) / 2.0, (cbox[1] + cbox[3]) / 2.0
    cproj = (ccx - x[0]) * ux + (ccy - x[1]) * uy

    # pick the displaced strip farther from the cluster
    sides = []
    for sgn in (1.0, -1.0):
        x1 = (x[0] + 8 * scale * sgn * nx_, x[1] + 8 * scale * sgn * ny_)
        y1 = (y[0] + 8 * scale * sgn * nx_, y[1] + 8 * scale * sgn * ny_)
        sides.append((sgn, _seg_box_gap(x1, y1, cbox)))
    sides.sort(key=lambda s: -s[1])
    sgn, clearance = sides[0]
    if clearance <= dm:
        raise WaypointNotFound(
            f"cluster {cbox} blocks both displaced strips at this scale")

    lo, hi = 8 * scale, 10 * scale
    lev = h.level(level - 1)
    ny, nx = lev.shape
    ox, oy = h.config.origin
    candidates = []
    amin = math.floor((min(x[0], y[0]) - hi - dm - ox) / dm)
    amax = math.ceil((max(x[0], y[0]) + hi + dm - ox) / dm)
    bmin = math.floor((min(x[1], y[1]) - hi - dm - oy) / dm)
    bmax = math.ceil((max(x[1], y[1]) + hi + dm - oy) / dm)
    for b in range(bmin, bmax + 1):
        for a in range(amin, amax + 1):
            cx = ox + a * dm + (dm - 1) / 2.0
            cy = oy + b * dm + (dm - 1) / 2.0
            off = (cx - x[0]) * nx_ + (cy - x[1]) * ny_
            if sgn * off <= 0:
                continue
            proj = (cx - x[0]) * ux + (cy - x[1]) * uy
            if abs(proj - cproj) > 1.5 * dm or not (0 <= proj <= L):
                continue
            d = _point_seg_dist((cx, cy), x, y)
            if not (lo - dm <= d <= hi + dm):
                continue
            candidates.append((d, a, b))
    candidates.sort()

    for _, a, b in candidates:
        in_region = 0 <= a < nx and 0 <= b < ny
        if in_region and lev.bad[b, a]:
            continue
        box = (ox + a * dm, oy + b * dm, ox + (a + 1) * dm - 1,
               oy + (b + 1) * dm - 1)
        if in_region:
            try:
                site = find_clean_site(h, level - 1, (a, b))
            except NoCleanSite:
                continue
        else:
            site = ((box[0] + box[2]) // 2, (box[1] + box[3]) // 2)
        d = _point_seg_dist(site, x, y)
        proj = (site[0] - x[0]) * ux + (site[1] - x[1]) * uy
        if lo <= d <= hi and abs(proj - cproj) <= dm + _SLACK:
            return site
    raise WaypointNotFound(
        f"no clean waypoint abreast of cluster {cbox} in the displaced strip")


# ---------------------------------------------------------------------------
# Cover layout
# ---------------------------------------------------------------------------


def _sorted_gaps(thetas: Sequence[float]) -> Tuple[float, float, float]:
    t1, t2, t3 = sorted(float(t) % TAU for t in thetas)
    gaps = sorted((t2 - t1, t3 - t2, TAU - (t3 - t1)), reverse=True)
    return gaps[0], gaps[1], gaps[2]


def _layout_constants(thetas: Sequence[float], epsilon: float):
    """(eps0, r_eps, r, ell0, c) for the given witness angles and epsilon."""
    dmax, dmid, dmin = _sorted_gaps(thetas)
    eps0 = math.atan(0.25 / (math.tan(dmax / 2) + math.tan(dmid / 2)))
    r_eps = 3.0 / (math.tan(epsilon / 2)
                   * (math.tan(dmid / 2) + math.tan(dmin / 2)))
    r = max(6.0, r_eps)
    ell0 = math.ceil(2 * r * (math.tan(dmax / 2) + math.tan(dmid / 2))
                     + r / 2 + 1 - _SLACK)
    return eps0, r_eps, r, ell0, 2 * ell0 + 1


@dataclass(frozen=True)
class CoverLayout:
    """Corner-square positions and scale constants for a triangular cover.

    ``y_squares`` holds the lower-left lattice corners of the three corner
    squares, relative to the lower-left corner of the middle square; entry t
    sits between sides t+1 and t+2 (cyclically), so side t of the triangle
    joins square t-1 to square t.
    """

    delta: int
    epsilon: float
    y_squares: Tuple[Tuple[int, int], Tuple[int, int], Tuple[int, int]]
    r: float
    r_eps: float
    ell0: int
    c: int


def cover_layout(delta: int, witness: WitnessTriple,
                 epsilon: float) -> CoverLayout:
    """Corner squares of the two circumscribed triangles at distance ratios
    r and r+3 around a middle square of side delta.

    Any choice of endpoint sites inside the returned squares keeps every
    side within epsilon/2 of perpendicular to its witness direction; this
    is validated numerically over all corner pairs before returning.
    """
    if delta < 1 or int(delta) != delta:
        raise ValueError("delta must be a positive integer")
    delta = int(delta)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    thetas = witness.thetas
    eps0, r_eps, r, ell0, c = _layout_constants(thetas, epsilon)
    if epsilon > eps0 + _SLACK:
        raise EpsilonTooLarge(
            f"epsilon {epsilon:.6g} exceeds the layout limit {eps0:.6g}")

    v = (delta / 2.0, delta / 2.0)  # center of the middle square at ll (0,0)
    u = [(math.cos(t), math.sin(t)) for t in thetas]
    s_mid = (r + 1.5) * delta

    def corner_center(i: int, j: int):
        det = u[i][0] * u[j][1] - u[i][1] * u[j][0]
        px = (s_mid * u[j][1] - s_mid * u[i][1]) / det
        py = (s_mid * u[i][0] - s_mid * u[j][0]) / det
        return (v[0] + px, v[1] + py)

    def square_fits(ll, i, j) -> bool:
        for cx in (ll[0], ll[0] + delta - 1):
            for cy in (ll[1], ll[1] + delta - 1):
                for k in (i, j):
                    s = (cx - v[0]) * u[k][0] + (cy - v[1]) * u[k][1]
                    if not (r * delta - _SLACK <= s <= (r + 3) * delta + _SLACK):
                        return False
        return True

    squares = []
    for t in range(3):
        i, j = t, (t + 1) % 3
        cx, cy = corner_center(i, j)
        a0 = round(cx / delta - 0.5)
        b0 = round(cy / delta - 0.5)
        found = None
        for da, db in sorted(
                ((da, db) for da in range(-2, 3) for db in range(-2, 3)),
                key=lambda s: (abs(s[0]) + abs(s[1]), s)):
            ll = ((a0 + da) * delta, (b0 + db) * delta)
            if square_fits(ll, i, j):
                found = ll
                break
        if found is None:
            raise EpsilonTooLarge(
                f"no aligned square fits the corner region between sides "
                f"{i + 1} and {j + 1}")
        squares.append(found)

    # slope guarantee: every site pair across consecutive corner squares
    for t in range(3):
        a_sq = squares[(t - 1) % 3]
        b_sq = squares[t]
        for pa in _square_corners(a_sq, delta):
            for pb in _square_corners(b_sq, delta):
                dev = _slope_dev(pb[0] - pa[0], pb[1] - pa[1], thetas[t])
                if dev >= epsilon / 2 + _SLACK:
                    raise EpsilonTooLarge(
                        f"corner squares fail the side-{t + 1} slope "
                        f"guarantee: deviation {dev:.6g} >= {epsilon / 2:.6g}")

    return CoverLayout(delta, epsilon, tuple(squares), r, r_eps, ell0, c)


def _square_corners(ll: Tuple[int, int], delta: int):
    x, y = ll
    return ((x, y), (x + delta - 1, y), (x, y + delta - 1),
            (x + delta - 1, y + delta - 1))


# ---------------------------------------------------------------------------
# Compact integer triangles
# ---------------------------------------------------------------------------

_TRIANGLE_CACHE: Dict[tuple, Tuple[Tuple[int, int], ...]] = {}


def _primitive_candidates(theta: float, budget: float, limit: int,
                          forbidden) -> List[Tuple[int, int]]:
    target = theta % TAU
    out = []
    for dx in range(-limit, limit + 1):
        for dy in range(-limit, limit + 1):
            if dx == 0 and dy == 0 or math.gcd(dx, dy) != 1:
                continue
            diff = abs((math.atan2(dy, dx) - target + math.pi) % TAU - math.pi)
            if diff > budget:
                continue
            d = Direction(dx, dy)
            if d.perp_cw() in forbidden or d.perp_ccw() in forbidden:
                continue
            out.append((dx, dy))
    return out


def _base_triangle(thetas: Sequence[float], budget: float, forbidden):
    """Smallest well-shaped closing triple of integer side vectors.

    Each w_t is an integer multiple of a primitive direction within
    ``budget`` of perpendicular to thetas[t-1], the three sum to zero, and
    the traversal is counterclockwise.  Shape quality is the scale-free
    ratio perimeter**2 / area; the winner can be scaled by any integer to
    reach any required inradius without touching the slopes.
    """
    key = (tuple(round(t, 12) for t in thetas), round(budget, 12),
           tuple(sorted((d.x, d.y) for d in forbidden)))
    cached = _TRIANGLE_CACHE.get(key)
    if cached is not None:
        return cached
    if budget <= 0:
        raise SlopeViolation("slope budget is not positive")
    targets = [(t + math.pi / 2) % TAU for t in thetas]
    best = None
    for limit in (6, 9, 12, 16):
        prim = [_primitive_candidates(t, budget, limit, forbidden)
                for t in targets]
        if not all(prim):
            continue
        w1s = [(k * p[0], k * p[1]) for p in prim[0] for k in range(1, 25)]
        w2s = [(k * p[0], k * p[1]) for p in prim[1] for k in range(1, 25)]
        t3 = targets[2]
        for w1 in w1s:
            for w2 in w2s:
                w3 = (-w1[0] - w2[0], -w1[1] - w2[1])
                if w3 == (0, 0):
                    continue
                diff = abs((math.atan2(w3[1], w3[0]) - t3 + math.pi)
                           % TAU - math.pi)
                if diff > budget:
                    continue
                g = math.gcd(w3[0], w3[1])
                d3 = Direction(w3[0] // g, w3[1] // g)
                if d3.perp_cw() in forbidden or d3.perp_ccw() in forbidden:
                    continue
                area2 = w1[0] * w2[1] - w1[1] * w2[0]
                if area2 <= 0:
                    continue
                per = math.hypot(*w1) + math.hypot(*w2) + math.hypot(*w3)
                cand = (per * per / area2, per, w1, w2)
                if best is None or cand < best:
                    best = cand
        if best is not None:
            break
    if best is None:
        raise SlopeViolation(
            "no integer triangle closes within the slope budget")
    _, _, w1, w2 = best
    _TRIANGLE_CACHE[key] = (w1, w2)
    return (w1, w2)


def _integer_triangle(thetas: Sequence[float], budget: float, rho_min: float,
                      forbidden, center: Tuple[float, float]):
    """Integer-vertex triangle, side t near perpendicular to thetas[t-1],
    inradius at least rho_min, incenter within one site of ``center``."""
    w1, w2 = _base_triangle(thetas, budget, forbidden)
    w3 = (-w1[0] - w2[0], -w1[1] - w2[1])
    per = math.hypot(*w1) + math.hypot(*w2) + math.hypot(*w3)
    area2 = w1[0] * w2[1] - w1[1] * w2[0]
    rho_base = area2 / per
    k = max(1, math.ceil(rho_min / rho_base - _SLACK))
    w1 = (k * w1[0], k * w1[1])
    w2 = (k * w2[0], k * w2[1])
    v = [(0, 0), w1, (w1[0] + w2[0], w1[1] + w2[1])]
    la = math.hypot(*w2)
    lb = k * math.hypot(*w3)
    lc = math.hypot(*w1)
    s = la + lb + lc
    ix = (la * v[0][0] + lb * v[1][0] + lc * v[2][0]) / s
    iy = (la * v[0][1] + lb * v[1][1] + lc * v[2][1]) / s
    ox, oy = round(center[0] - ix), round(center[1] - iy)
    return [(vx + ox, vy + oy) for vx, vy in v]


# ---------------------------------------------------------------------------
# Triangular covers
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class TriangularCover:
    """Three barriers bounding a simply connected region around a site set.

    ``interior`` is the enclosed region minus the barrier tubes; the
    covered set lives strictly inside it.  ``tight`` records containment in
    the (c*delta)-sided square centered at a minimal square around the
    covered set.
    """

    level: int
    barriers: Tuple[Barrier, Barrier, Barrier]
    interior: SiteMask
    tube: SiteMask
    footprint: SiteMask
    tight: bool
    covered: frozenset
    delta: int

    @property
    def anchor_cycle(self) -> Tuple[Tuple[int, int], ...]:
        pts: List[Tuple[int, int]] = []
        for b in self.barriers:
            pts.extend(b.anchor[:-1])
        return tuple(pts)

    def __repr__(self) -> str:
        return (f"TriangularCover(level={self.level}, interior={len(self.interior)}, "
                f"tube={len(self.tube)}, tight={self.tight})")


def _laminar_pair(a: TriangularCover, b: TriangularCover) -> bool:
    if not a.footprint.intersects(b.footprint):
        return True
    return a.footprint.issubset(b.interior) or b.footprint.issubset(a.interior)


def _polygon_interior(points: Sequence[Tuple[int, int]],
                      tube: SiteMask) -> SiteMask:
    """Sites strictly inside the closed polygon, minus the tube.

    Even-odd scanline with float crossings; every site within 1e-6 of the
    boundary lies inside the tube (radius at least 1), so the float slack
    cannot misclassify any surviving site.
    """
    points = list(points)
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    grid = np.zeros((y_hi - y_lo + 1, x_hi - x_lo + 1), dtype=bool)
    edges = list(zip(points, points[1:] + points[:1]))
    for y in range(y_lo, y_hi + 1):
        crossings = []
        for (x1, y1), (x2, y2) in edges:
            if y1 == y2:
                continue
            if (y1 <= y < y2) or (y2 <= y < y1):
                tpar = (y - y1) / (y2 - y1)
                crossings.append(x1 + tpar * (x2 - x1))
        crossings.sort()
        for xl, xr in zip(crossings[::2], crossings[1::2]):
            c0 = math.ceil(xl + 1e-9)
            c1 = math.floor(xr - 1e-9)
            if c1 >= c0:
                grid[y - y_lo, c0 - x_lo:c1 - x_lo + 1] = True
    h, w = grid.shape
    grid &= ~tube.clip(x_lo, y_lo, w, h)
    return SiteMask(x_lo, y_lo, grid)


def _sites_bbox(sites) -> Tuple[int, int, int, int]:
    xs = [s[0] for s in sites]
    ys = [s[1] for s in sites]
    return (min(xs), min(ys), max(xs), max(ys))


def build_cover(family: UpdateFamily, witness: WitnessTriple,
                params: RenormParams, h: TilingHierarchy, level: int,
                K: Iterable[Tuple[int, int]], *,
                layout: str = "compact", detour_scale: float = 1.0,
                skip_goodness_check: bool = False,
                register: bool = True) -> TriangularCover:
    """Enclose K in a triangular cover of the given level.

    The compact layout picks the smallest exact integer triangle whose
    inradius clears K by the family range plus a margin of two sites; the
    faithful layout places anchor endpoints in the corner squares returned
    by cover_layout.  Registered covers that would overlap are swallowed by
    growing the triangle until the arrangement is laminar; an overlap that
    cannot be resolved raises NestingViolation.
    """
    if layout not in ("compact", "faithful"):
        raise ValueError("layout must be 'compact' or 'faithful'")
    r2 = interaction_range_squared(family)
    if r2 < 1:
        raise ValueError("family range is zero; covers are undefined")
    r = math.sqrt(r2)
    if params.delta1 < r:
        raise ValueError("delta1 must be at least the family range")
    K = frozenset((int(s[0]), int(s[1])) for s in K)
    kbox = _sites_bbox(K) if K else (0, 0, 0, 0)

    sigma = params.sigma_at(level)
    budget = 0.9 * min(sigma, witness.margin)
    forb = forbidden_set(family)
    eps0, _, _, _, c_const = _layout_constants(witness.thetas, params.epsilon)
    grid = h.config.infected
    gh, gw = grid.shape
    gx, gy = h.config.origin

    growth_cap = max(1536, 12 * max(gw, gh))
    extra: List[Tuple[int, int, int, int]] = []
    for _ in range(12):
        box = kbox
        for eb in extra:
            box = (min(box[0], eb[0]), min(box[1], eb[1]),
                   max(box[2], eb[2]), max(box[3], eb[3]))
        if max(box[2] - box[0], box[3] - box[1]) > growth_cap:
            raise NestingViolation(
                "cover growth exceeded the region scale cap while absorbing "
                "overlaps")
        cx = (box[0] + box[2]) / 2.0
        cy = (box[1] + box[3]) / 2.0
        half_diag = math.hypot(box[2] - box[0] + 1, box[3] - box[1] + 1) / 2.0
        rho_min = half_diag + r + 2
        delta_c = max(box[2] - box[0] + 1, box[3] - box[1] + 1,
                      math.ceil(r), 1)
        ignore = frozenset()
        if level <= h.max_level:
            d = h.level(level).delta
            ignore = frozenset(
                (a, b)
                for a in range((box[0] - gx) // d, (box[2] - gx) // d + 1)
                for b in range((box[1] - gy) // d, (box[3] - gy) // d + 1))

        if layout == "compact":
            verts = _integer_triangle(witness.thetas, budget, rho_min, forb,
                                      (cx, cy))
        else:
            lay = cover_layout(delta_c, witness, params.epsilon)
            verts = _faithful_vertices(lay, h, level, (cx, cy),
                                       skip_goodness_check)

        barriers = tuple(
            build_barrier(family, witness, params, h, level, t,
                          verts[t - 1], verts[t % 3],
                          skip_goodness_check=skip_goodness_check,
                          detour_scale=detour_scale,
                          ignore_squares=ignore, check_covers=False)
            for t in (1, 2, 3))
        poly: List[Tuple[int, int]] = []
        for bar in barriers:
            poly.extend(bar.anchor[:-1])
        tube = barriers[0].tube.union(barriers[1].tube).union(barriers[2].tube)
        interior = _polygon_interior(poly, tube)
        missing = [s for s in K if s not in interior]
        if missing:
            raise RuntimeError(
                f"covered set escapes the interior at {missing[:3]}")
        footprint = interior.union(tube)

        # infected sites caught in the tube would poison the wall: absorb
        # them into the covered set and rebuild one size up
        stray = tube.clip(gx, gy, gw, gh) & grid
        if stray.any():
            ys_, xs_ = np.nonzero(stray)
            K = K | {(gx + int(sx), gy + int(sy))
                     for sx, sy in zip(xs_, ys_)}
            kbox = _sites_bbox(K)
            continue

        conflict = None
        for other in h.covers:
            if _laminar_pair_parts(footprint, interior, other):
                continue
            conflict = other
            break
        if conflict is None:
            break
        if conflict.level > level:
            raise NestingViolation(
                f"new level-{level} cover overlaps a registered "
                f"level-{conflict.level} cover without nesting")
        extra.append(conflict.footprint.bbox())
    else:
        raise NestingViolation(
            "cover construction did not stabilize into a laminar "
            "arrangement after 12 attempts")

    mside = c_const * delta_c
    mll = (round((kbox[0] + kbox[2] + 1) / 2 - delta_c / 2),
           round((kbox[1] + kbox[3] + 1) / 2 - delta_c / 2))
    mcx, mcy = mll[0] + delta_c / 2, mll[1] + delta_c / 2
    fb = footprint.bbox()
    tight = (fb[0] >= mcx - mside / 2 - _SLACK
             and fb[1] >= mcy - mside / 2 - _SLACK
             and fb[2] <= mcx + mside / 2 + _SLACK
             and fb[3] <= mcy + mside / 2 + _SLACK)

    cover = TriangularCover(level, barriers, interior, tube, footprint,
                            tight, K, delta_c)
    if register:
        h.register(cover)
    return cover


def _laminar_pair_parts(footprint: SiteMask, interior: SiteMask,
                        other: TriangularCover) -> bool:
    if not footprint.intersects(other.footprint):
        return True
    return (footprint.issubset(other.interior)
            or other.footprint.issubset(interior))


def _faithful_vertices(lay: CoverLayout, h: TilingHierarchy, level: int,
                       center: Tuple[float, float],
                       skip_goodness_check: bool) -> List[Tuple[int, int]]:
    """Anchor endpoints inside the layout's corner squares.

    Returns the vertex list in side order: side t joins verts[t-1] to
    verts[t % 3].  Endpoints are clean sites when the hierarchy covers the
    square and the toy override is off, else square centers.
    """
    d = lay.delta
    mll = (round(center[0] - d / 2.0), round(center[1] - d / 2.0))
    sites = []
    for t in range(3):
        ll = (mll[0] + lay.y_squares[t][0], mll[1] + lay.y_squares[t][1])
        box = (ll[0], ll[1], ll[0] + d - 1, ll[1] + d - 1)
        site = None
        if not skip_goodness_check and level <= h.max_level:
            for cand in _square_scan_order(box):
                if h.clean_at(level, cand):
                    site = cand
                    break
            if site is None:
                raise NoCleanSite(
                    f"no clean endpoint in corner square at {ll}")
        else:
            site = ((box[0] + box[2]) // 2, (box[1] + box[3]) // 2)
        sites.append(site)
    # corner square t sits between sides t+1 and t+2; side 1 starts at the
    # square shared with side 3
    return [sites[2], sites[0], sites[1]]


def verify_closed(family: UpdateFamily, cover: TriangularCover) -> bool:
    """Run the dynamics from the full interior; closed means nothing spreads.

    Seeds every interior site on a free-boundary window padded beyond the
    family reach and returns True iff the closure adds no site, neither in
    the barrier tubes nor outside.
    """
    if cover.interior.is_empty:
        return True
    pad = _offsets(family) + 2
    x0, y0, x1, y1 = cover.footprint.bbox()
    x0, y0, x1, y1 = x0 - pad, y0 - pad, x1 + pad, y1 + pad
    w, hgt = x1 - x0 + 1, y1 - y0 + 1
    seed = cover.interior.clip(x0, y0, w, hgt)
    cfg = GridConfig(seed, FreeHealthy(), origin=(x0, y0))
    closed = closure(family, cfg)
    return bool(np.array_equal(closed.infected, seed))


# ---------------------------------------------------------------------------
# Certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    """Machine-checked constants certifying a positive critical probability.

    ``p_bound`` evaluates delta1**(-delta-2) at ``delta1``, the smallest
    power of ten at or above ``delta1_min``; ``final_check`` confirms both
    closing inequalities at that p.
    """

    theta1: float
    theta2: float
    theta3: float
    epsilon0: float
    epsilon_triple: float
    epsilon: float
    r_eps: float
    r: float
    ell0: int
    c: int
    delta: float
    delta1_min: float
    delta1: float
    p_bound: float
    final_check: bool
    conditions: Tuple[float, float, float, float, float]
    note: str


def certify(family: UpdateFamily, alpha: float, beta: float, gamma: float,
            overrides: Optional[Sequence[float]] = None) -> Certificate:
    """Run the full constant pipeline for a subcritical family.

    Finds or validates a witness triple, combines its margin with the
    layout limit eps0 into the working tolerance, derives the cover scale
    constants, takes the base tile side as the worst of the five growth
    conditions, and evaluates the resulting lower bound p together with its
    two closing inequalities.
    """
    if not (0 < gamma and 1 + gamma < beta < alpha < 2):
        raise ParameterOrderViolation(
            f"need 1 < 1+gamma < beta < alpha < 2, got alpha={alpha} "
            f"beta={beta} gamma={gamma}")
    w = witness_triple(family, overrides=overrides)
    delta = (2 * alpha + 2 * beta - 3) / (2 - alpha)

    eps0, _, _, _, _ = _layout_constants(w.thetas, 1.0)
    eps = min(eps0, w.margin)
    _, r_eps, r, ell0, c = _layout_constants(w.thetas, eps)

    rng = interaction_range(family)
    conditions = (
        max(2.0 ** (delta + 5), rng),
        (12.0 * c) ** (1.0 / (alpha - 1)),
        max(30.0, 3.0 * c) ** (1.0 / (beta - 1)),
        3.0 ** (1.0 / (alpha - beta)),
        (68.0 * c / eps) ** (1.0 / (beta - 1 - gamma)),
    )
    delta1_min = max(conditions)
    delta1 = 10.0 ** math.ceil(math.log10(delta1_min) - 1e-12)
    p = delta1 ** (-delta - 2)
    lhs = 5.0 * c * c * (p ** (1.0 / 3.0) + 2.0 * p ** (alpha / 3.0))
    p_max = 2.0 ** (-3.0 / (alpha * math.log(alpha)))
    return Certificate(
        theta1=w.thetas[0], theta2=w.thetas[1], theta3=w.thetas[2],
        epsilon0=eps0, epsilon_triple=w.margin, epsilon=eps,
        r_eps=r_eps, r=r, ell0=ell0, c=c, delta=delta,
        delta1_min=delta1_min, delta1=delta1, p_bound=p,
        final_check=(lhs < 1.0 and p < p_max), conditions=conditions,
        note=("p_bound evaluates delta1**(-delta-2) at the smallest power "
              "of ten at or above delta1_min"))


def certificate_text(cert: Certificate) -> str:
    lines = [
        f"theta1 = {cert.theta1:.12g}",
        f"theta2 = {cert.theta2:.12g}",
        f"theta3 = {cert.theta3:.12g}",
        f"epsilon0 = {cert.epsilon0:.12g}",
        f"epsilon_triple = {cert.epsilon_triple:.12g}",
        f"epsilon = {cert.epsilon:.12g}",
        f"r_eps = {cert.r_eps:.12g}",
        f"r = {cert.r:.12g}",
        f"ell0 = {cert.ell0}",
        f"c = {cert.c}",
        f"delta = {cert.delta:.12g}",
        "conditions = " + ", ".join(f"{v:.6g}" for v in cert.conditions),
        f"delta1_min = {cert.delta1_min:.6g}",
        f"delta1 = {cert.delta1:.6g}",
        f"p_bound = {cert.p_bound:.6g}",
        f"final_check = {'pass' if cert.final_check else 'fail'}",
        f"note: {cert.note}",
    ]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Cover demo
# ---------------------------------------------------------------------------


@dataclass
class DemoReport:
    """Outcome of the end-to-end cover construction over a sampled region."""

    hierarchy: TilingHierarchy
    covers: List[TriangularCover]
    verified: List[bool]
    failures: List[str]
    deferred: Dict[int, int]
    laminar: bool
    closure_contained: bool
    uncovered_sites: int

    @property
    def succeeded(self) -> bool:
        return not self.failures

    @property
    def all_verified(self) -> bool:
        return all(self.verified)

    def text(self) -> str:
        lines = [self.hierarchy.audit_text()]
        total_bad = sum(lev.bad_count for lev in self.hierarchy.levels)
        if total_bad == 0:
            lines.append("no covers needed")
            return "\n".join(lines)
        for cover, ok in zip(self.covers, self.verified):
            x0, y0, x1, y1 = cover.footprint.bbox()
            lines.append(
                f"cover level {cover.level}: anchor {len(cover.anchor_cycle)} "
                f"points, interior {len(cover.interior)} sites, footprint "
                f"[{x0},{x1}]x[{y0},{y1}], closed={'yes' if ok else 'NO'}")
        for k, n in sorted(self.deferred.items()):
            lines.append(f"level {k}: {n} cluster(s) deferred to level {k + 1}")
        if self.failures:
            for msg in self.failures:
                lines.append(f"failure: {msg}")
        else:
            lines.append("all clusters covered")
        lines.append(f"laminar: {'yes' if self.laminar else 'NO'}")
        lines.append(
            f"closure containment: {'yes' if self.closure_contained else 'NO'}"
            f" ({self.uncovered_sites} uncovered infected sites)")
        return "\n".join(lines)


def cover_demo(family: UpdateFamily, config: GridConfig,
               params: RenormParams, max_level: int, *,
               witness: Optional[WitnessTriple] = None,
               detour_scale: float = 1.0) -> DemoReport:
    """Build covers for every bad cluster of the region, bottom up.

    At each level below the top, clusters of pairwise adjacent bad squares
    that touch a good square of the next level get a cover; other clusters
    are deferred to the next level, whose squares there are necessarily
    bad.  Top-level clusters are covered unconditionally under the toy
    override (straight sides, no goodness precondition), since there is no
    further level to defer to.  Clusters whose covers would collide are
    merged first.  Construction failures are reported, never masked.  The
    report ends with the two executable conclusions: laminarity of the
    registered covers and containment of the closure in the union of cover
    interiors.
    """
    if witness is None:
        witness = witness_triple(family)
    cfg = GridConfig(config.infected.copy(), FreeHealthy(), config.origin)
    h = build_hierarchy(cfg, params, max_level)

    covers: List[TriangularCover] = []
    failures: List[str] = []
    deferred: Dict[int, int] = {}
    r = interaction_range(family)
    forb = forbidden_set(family)

    def base_rho(level: int) -> float:
        budget = 0.9 * min(params.sigma_at(level), witness.margin)
        try:
            w1, w2 = _base_triangle(witness.thetas, budget, forb)
        except SlopeViolation:
            return 0.0
        w3 = (-w1[0] - w2[0], -w1[1] - w2[1])
        per = math.hypot(*w1) + math.hypot(*w2) + math.hypot(*w3)
        return (w1[0] * w2[1] - w1[1] * w2[0]) / per

    def merge_reach(box, rho_base: float) -> float:
        # triangle vertices sit near twice the inradius from the cluster
        half_diag = math.hypot(box[2] - box[0] + 1, box[3] - box[1] + 1) / 2
        return 2.2 * max(half_diag + r + 2, rho_base) - half_diag + 4

    for k in range(1, max_level + 1):
        lev = h.level(k)
        if not len(lev.bad_indices):
            continue
        clusters: List[Tuple[Tuple[int, int, int, int], set]] = []
        for comp in _king_components(lev.bad_indices):
            if k < max_level:
                amin = min(a for a, _ in comp)
                amax = max(a for a, _ in comp)
                bmin = min(b for _, b in comp)
                bmax = max(b for _, b in comp)
                if amax - amin > 1 or bmax - bmin > 1:
                    deferred[k] = deferred.get(k, 0) + 1
                    continue
                parents = {_parent_index(h, k, k + 1, a, b) for a, b in comp}
                if not any(not h.is_bad(k + 1, a, b) for a, b in parents):
                    deferred[k] = deferred.get(k, 0) + 1
                    continue
            sites = {(x, y)
                     for a, b in comp
                     for x in range(h.square_box(k, a, b)[0],
                                    h.square_box(k, a, b)[2] + 1)
                     for y in range(h.square_box(k, a, b)[1],
                                    h.square_box(k, a, b)[3] + 1)}
            clusters.append((_component_box(h, k, comp), sites))
        # clusters whose covers could touch are built as one: their walls
        # would otherwise run through each other's sites
        rho_base = base_rho(k)
        merged = True
        while merged and len(clusters) > 1:
            merged = False
            for i in range(len(clusters)):
                for j in range(i + 1, len(clusters)):
                    if _box_gap(clusters[i][0], clusters[j][0]) <= (
                            merge_reach(clusters[i][0], rho_base)
                            + merge_reach(clusters[j][0], rho_base)):
                        bi, bj = clusters[i][0], clusters[j][0]
                        clusters[i] = (
                            (min(bi[0], bj[0]), min(bi[1], bj[1]),
                             max(bi[2], bj[2]), max(bi[3], bj[3])),
                            clusters[i][1] | clusters[j][1])
                        del clusters[j]
                        merged = True
                        break
                if merged:
                    break
        clusters.sort(key=lambda cl: (-(cl[0][2] - cl[0][0])
                                      * (cl[0][3] - cl[0][1]), cl[0]))
        for cbox, sites in clusters:
            try:
                covers.append(build_cover(
                    family, witness, params, h, k, sites,
                    layout="compact", detour_scale=detour_scale,
                    skip_goodness_check=(k == max_level)))
            except (WaypointNotFound, NoCleanSite, SlopeViolation,
                    NestingViolation, EpsilonTooLarge, ValueError,
                    RuntimeError) as exc:
                failures.append(
                    f"level {k} cluster [{cbox[0]},{cbox[2]}]x"
                    f"[{cbox[1]},{cbox[3]}]: {type(exc).__name__}: {exc}")

    verified = [verify_closed(family, c) for c in covers]
    laminar = all(_laminar_pair(covers[i], covers[j])
                  for i in range(len(covers))
                  for j in range(i + 1, len(covers)))
    closed = closure(family, cfg)
    uncovered = 0
    for site in closed.infected_sites():
        if not any(site in c.interior for c in covers):
            uncovered += 1
    return DemoReport(h, covers, verified, failures, deferred, laminar,
                      uncovered == 0, uncovered)
