"""Deterministic bootstrap dynamics on finite regions.

A ``GridConfig`` stores the infected set of a height x width window of the
lattice as a boolean array.  Array cell ``[r, c]`` is lattice site
``(origin[0] + c, origin[1] + r)``; rows index the y coordinate upward.

Three boundary conventions:

* ``Torus``: rule offsets wrap modulo (width, height).
* ``FreeHealthy``: everything outside the window is permanently healthy, so
  rule translates reaching outside never fire.
* ``HalfPlane(d)``: outside sites x with <x, d> < 0 are permanently infected
  and all other outside sites permanently healthy; used by the stability
  probe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple, Union

import numpy as np

from ubootstrap import _kernels
from ubootstrap.geometry import (
    Direction,
    UpdateFamily,
    interaction_range,
)


class WindowTooSmall(ValueError):
    """Probe window below the safe minimum for the family's range."""


class UnknownFamily(ValueError):
    """Name not in the builtin catalog."""


@dataclass(frozen=True)
class Torus:
    pass


@dataclass(frozen=True)
class FreeHealthy:
    pass


@dataclass(frozen=True)
class HalfPlane:
    direction: Direction


Boundary = Union[Torus, FreeHealthy, HalfPlane]


@dataclass(eq=False)
class GridConfig:
    """A finite window of the lattice with its infected set and boundary."""

    infected: np.ndarray
    boundary: Boundary = field(default_factory=Torus)
    origin: Tuple[int, int] = (0, 0)

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.infected, dtype=bool))
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("infected must be a non-empty 2d boolean array")
        self.infected = arr
        self.origin = (int(self.origin[0]), int(self.origin[1]))

    @property
    def height(self) -> int:
        return self.infected.shape[0]

    @property
    def width(self) -> int:
        return self.infected.shape[1]

    @classmethod
    def empty(cls, width: int, height: Optional[int] = None,
              boundary: Boundary = Torus(), origin: Tuple[int, int] = (0, 0)):
        if height is None:
            height = width
        return cls(np.zeros((height, width), dtype=bool), boundary, origin)

    @classmethod
    def from_sites(cls, sites, width: int, height: Optional[int] = None,
                   boundary: Boundary = Torus(),
                   origin: Tuple[int, int] = (0, 0)):
        cfg = cls.empty(width, height, boundary, origin)
        for (x, y) in sites:
            cfg.infected[y - origin[1], x - origin[0]] = True
        return cfg

    def copy(self) -> "GridConfig":
        return GridConfig(self.infected.copy(), self.boundary, self.origin)

    def site_infected(self, x: int, y: int) -> bool:
        return bool(self.infected[y - self.origin[1], x - self.origin[0]])

    def infected_sites(self) -> List[Tuple[int, int]]:
        ys, xs = np.nonzero(self.infected)
        return [(int(x) + self.origin[0], int(y) + self.origin[1])
                for y, x in zip(ys, xs)]

    def density(self) -> float:
        return float(self.infected.mean())

    def coordinate_grids(self):
        """Lattice x and y coordinate arrays matching the infected array."""
        x0, y0 = self.origin
        xs = np.arange(x0, x0 + self.width)
        ys = np.arange(y0, y0 + self.height)
        return np.meshgrid(xs, ys)


@dataclass
class StepReport:
    newly_infected: int
    frontier: List[Tuple[int, int]]


def _offsets(family: UpdateFamily) -> int:
    m = 0
    for rule in family:
        for (dx, dy) in rule:
            m = max(m, abs(dx), abs(dy))
    return m


_ENCODED = {}


def _encode(family: UpdateFamily):
    enc = _ENCODED.get(family)
    if enc is None:
        starts = [0]
        dx, dy = [], []
        for rule in family:
            for (sx, sy) in rule:
                dx.append(sx)
                dy.append(sy)
            starts.append(len(dx))
        cands = sorted({(-sx, -sy) for rule in family for (sx, sy) in rule})
        enc = (
            np.asarray(starts, dtype=np.int64),
            np.asarray(dx, dtype=np.int64),
            np.asarray(dy, dtype=np.int64),
            np.asarray([c[0] for c in cands], dtype=np.int64),
            np.asarray([c[1] for c in cands], dtype=np.int64),
        )
        _ENCODED[family] = enc
    return enc


def _padded_state(config: GridConfig, margin: int) -> np.ndarray:
    """uint8 window with a static exterior ring per the boundary convention."""
    h, w = config.infected.shape
    grid = np.full((h + 2 * margin, w + 2 * margin), 2, dtype=np.uint8)
    grid[margin:margin + h, margin:margin + w] = config.infected
    if isinstance(config.boundary, HalfPlane):
        d = config.boundary.direction
        x0, y0 = config.origin
        xs = np.arange(x0 - margin, x0 + w + margin)
        ys = np.arange(y0 - margin, y0 + h + margin)
        xg, yg = np.meshgrid(xs, ys)
        exterior_infected = (xg * d.x + yg * d.y) < 0
        ring = np.ones_like(exterior_infected)
        ring[margin:margin + h, margin:margin + w] = False
        grid[ring & exterior_infected] = 1
        grid[ring & ~exterior_infected] = 2
    return grid


def step(family: UpdateFamily, config: GridConfig):
    """One synchronous update: every satisfiable healthy cell infects."""
    state = config.infected
    h, w = state.shape
    if isinstance(config.boundary, Torus):
        def shifted(dx, dy):
            return np.roll(np.roll(state, -dy, axis=0), -dx, axis=1)
    else:
        m = max(_offsets(family), 1)
        padded = _padded_state(config, m) == 1

        def shifted(dx, dy):
            return padded[m + dy:m + dy + h, m + dx:m + dx + w]

    fires = np.zeros_like(state)
    for rule in family:
        ok = None
        for (dx, dy) in rule:
            s = shifted(dx, dy)
            ok = s.copy() if ok is None else (ok & s)
        fires |= ok
    newly = fires & ~state
    out = GridConfig(state | newly, config.boundary, config.origin)
    ys, xs = np.nonzero(newly)
    x0, y0 = config.origin
    frontier = [(int(x) + x0, int(y) + y0) for y, x in zip(ys, xs)]
    return out, StepReport(len(frontier), frontier)


def closure(family: UpdateFamily, config: GridConfig) -> GridConfig:
    """Least fixpoint of the update containing the configuration.

    Worklist kernel: when a cell flips, only the cells whose rule translates
    involve it are re-tested.  Bit-identical to iterating step to a fixpoint.
    """
    starts, dx, dy, cdx, cdy = _encode(family)
    if isinstance(config.boundary, Torus):
        grid = config.infected.astype(np.uint8)
        _kernels.closure_torus(grid, starts, dx, dy, cdx, cdy)
        return GridConfig(grid == 1, config.boundary, config.origin)
    m = max(_offsets(family), 1)
    grid = _padded_state(config, m)
    _kernels.closure_padded(grid, m, starts, dx, dy, cdx, cdy)
    h, w = config.infected.shape
    inner = grid[m:m + h, m:m + w] == 1
    return GridConfig(inner, config.boundary, config.origin)


def percolates(family: UpdateFamily, config: GridConfig) -> bool:
    """True iff the closure infects every cell of the window."""
    return bool(closure(family, config).infected.all())


class Stability(Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"

    def __str__(self) -> str:
        return self.value


def half_plane_probe(family: UpdateFamily, d: Direction,
                     half_width: Optional[int] = None) -> Stability:
    """Dynamical stability test of a direction.

    Seeds the box [-h, h]^2 with the infected half-plane {x : <x, d> < 0}
    under the HalfPlane boundary and runs closure.  Unstable iff any site
    with <x, d> >= 0 inside the inner box [-h/2, h/2]^2 gets infected; the
    inner window suppresses finite-window corner artifacts.
    """
    required = 8 * math.ceil(interaction_range(family))
    if half_width is None:
        half_width = max(required, 8)
    if half_width < required:
        raise WindowTooSmall(
            f"half_width {half_width} < required {required}")
    hw = int(half_width)
    side = 2 * hw + 1
    cfg = GridConfig.empty(side, side, HalfPlane(d), origin=(-hw, -hw))
    xg, yg = cfg.coordinate_grids()
    dot = xg * d.x + yg * d.y
    cfg.infected[dot < 0] = True
    closed = closure(family, cfg)
    inner = (np.abs(xg) <= hw // 2) & (np.abs(yg) <= hw // 2)
    leaked = closed.infected & (dot >= 0) & inner
    return Stability.UNSTABLE if leaked.any() else Stability.STABLE


_NEIGHBOURS = ((1, 0), (0, 1), (-1, 0), (0, -1))


def _neighbour_family(r: int) -> UpdateFamily:
    import itertools

    return UpdateFamily(
        [list(c) for c in itertools.combinations(_NEIGHBOURS, r)],
        name=f"neighbour-{r}",
    )


def builtin_family(name: str) -> UpdateFamily:
    """The named family from the catalog.

    Catalog: "dtbp" (directed triangular bootstrap as a Z^2 family), "osp"
    (oriented site percolation), "schonmann", and "neighbour-r" for
    r in 1..4 (threshold rules over the four nearest neighbours).
    """
    key = name.strip().lower()
    if key == "dtbp":
        return UpdateFamily(
            [
                [(1, 0), (0, 1)],
                [(-1, -1), (0, 1)],
                [(-1, -1), (1, 0)],
            ],
            name="dtbp",
        )
    if key == "osp":
        return UpdateFamily([[(1, 0), (0, 1)]], name="osp")
    if key == "schonmann":
        return UpdateFamily(
            [[(1, 0), (0, 1)], [(-1, 0), (0, -1)]],
            name="schonmann",
        )
    if key.startswith("neighbour-"):
        try:
            r = int(key.split("-", 1)[1])
        except ValueError:
            raise UnknownFamily(f"unknown builtin family: {name!r}")
        if 1 <= r <= 4:
            return _neighbour_family(r)
    raise UnknownFamily(
        f"unknown builtin family: {name!r} "
        "(known: dtbp, osp, schonmann, neighbour-1..neighbour-4)")
