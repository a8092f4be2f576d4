"""Shared brute-force oracles and generators for the test suite.

The oracles here deliberately avoid the library's exact arc machinery: they
enumerate primitive integer directions in a box and test definitions site by
site, so that agreement with the library is meaningful.
"""

import math
import random
from math import gcd

import numpy as np
from numba import njit

from ubootstrap.geometry import Direction, UpdateFamily, UpdateRule


def primitive_directions(box: int):
    """All primitive integer vectors with |x|, |y| <= box."""
    out = []
    for x in range(-box, box + 1):
        for y in range(-box, box + 1):
            if (x, y) == (0, 0):
                continue
            if gcd(abs(x), abs(y)) == 1:
                out.append(Direction(x, y))
    return out


def rule_destabilizes(rule, d: Direction) -> bool:
    """Definition check: <x, d> < 0 for every site x of the rule."""
    return all(x * d.x + y * d.y < 0 for (x, y) in rule)


def family_stabilizes(family, d: Direction) -> bool:
    return not any(rule_destabilizes(r, d) for r in family)


def random_family(rng: random.Random, max_rules: int = 3, max_sites: int = 4,
                  box: int = 2) -> UpdateFamily:
    """A random small update family; offsets drawn from a box minus origin."""
    cells = [(x, y) for x in range(-box, box + 1) for y in range(-box, box + 1)
             if (x, y) != (0, 0)]
    rules = []
    for _ in range(rng.randint(1, max_rules)):
        k = rng.randint(1, max_sites)
        rules.append(UpdateRule(rng.sample(cells, k)))
    return UpdateFamily(rules)


DTBP = UpdateFamily(
    [
        [(1, 0), (0, 1)],
        [(-1, -1), (0, 1)],
        [(-1, -1), (1, 0)],
    ],
    name="dtbp",
)

OSP = UpdateFamily([[(1, 0), (0, 1)]], name="osp")

SCHONMANN = UpdateFamily(
    [
        [(1, 0), (0, 1)],
        [(-1, 0), (0, -1)],
    ],
    name="schonmann",
)


def neighbourhood_family(r: int) -> UpdateFamily:
    """Threshold-r family over the four nearest neighbours."""
    import itertools

    nbrs = [(1, 0), (0, 1), (-1, 0), (0, -1)]
    return UpdateFamily(
        [list(c) for c in itertools.combinations(nbrs, r)],
        name=f"neighbour-{r}",
    )


@njit(cache=True)
def oriented_path_survives(open_grid):
    """Oriented site percolation on a cylinder: does any oriented open path
    starting in row 0 reach the last row?

    open_grid is uint8 (rows, cols), 1 = open; columns wrap.  A site in
    row r > 0 is reachable iff open and its south or west neighbour is
    reachable; west chains within a row resolve in two wrap-around passes.
    Serves as the independent oracle for the oriented-percolation threshold;
    shares no logic with the closure kernels.
    """
    rows, cols = open_grid.shape
    prev = open_grid[0].copy()
    alive = False
    for c in range(cols):
        if prev[c] == 1:
            alive = True
    if not alive:
        return False
    for r in range(1, rows):
        cur = np.zeros(cols, np.uint8)
        for c in range(cols):
            if open_grid[r, c] == 1 and prev[c] == 1:
                cur[c] = 1
        for _ in range(2):
            changed = False
            for c in range(cols):
                if cur[c] == 0 and open_grid[r, c] == 1 and cur[(c - 1) % cols] == 1:
                    cur[c] = 1
                    changed = True
            if not changed:
                break
        alive = False
        for c in range(cols):
            prev[c] = cur[c]
            if cur[c] == 1:
                alive = True
        if not alive:
            return False
    return True


def osp_survival_fraction(q: float, size: int, trials: int, seed: int) -> float:
    """Fraction of trials where an oriented open path crosses a size-row
    cylinder at open-probability q."""
    hits = 0
    for t in range(trials):
        gen = np.random.Generator(
            np.random.Philox(key=[seed & (2**64 - 1), (10**6 + t) & (2**64 - 1)]))
        grid = (gen.random((size, size)) < q).astype(np.uint8)
        if oriented_path_survives(grid):
            hits += 1
    return hits / trials


def osp_threshold_estimate(size: int = 512, trials: int = 200,
                           tol: float = 1 / 256, seed: int = 99) -> float:
    """Bisect the open probability where crossing probability passes 1/2."""
    lo, hi = 0.0, 1.0
    while hi - lo >= tol:
        mid = (lo + hi) / 2
        if osp_survival_fraction(mid, size, trials, seed) >= 0.5:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


def closure_by_iteration(family, infected: np.ndarray, wrap: bool) -> np.ndarray:
    """Reference closure: apply the synchronous step until a fixed point.

    Works directly from the definition with python loops over rule sites and
    numpy shifts; no shared code with the library kernels.
    """
    state = infected.astype(bool).copy()
    h, w = state.shape
    while True:
        newly = np.zeros_like(state)
        first = True
        for rule in family:
            ok = np.ones_like(state)
            for (dx, dy) in rule:
                # site (x + dx, y + dy) infected; rows index y, cols index x
                if wrap:
                    shifted = np.roll(np.roll(state, -dy, axis=0), -dx, axis=1)
                else:
                    shifted = np.zeros_like(state)
                    ys = slice(max(0, dy), h + min(0, dy))
                    yd = slice(max(0, -dy), h + min(0, -dy))
                    xs = slice(max(0, dx), w + min(0, dx))
                    xd = slice(max(0, -dx), w + min(0, -dx))
                    shifted[yd, xd] = state[ys, xs]
                ok &= shifted
            if first:
                newly = ok
                first = False
            else:
                newly |= ok
        nxt = state | newly
        if np.array_equal(nxt, state):
            return state
        state = nxt
