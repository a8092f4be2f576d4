"""Compiled closure kernels.

Grids are uint8: 0 = healthy (infectable), 1 = infected, 2 = permanently
healthy exterior padding (never infectable, fails every rule test).  Update
families arrive flattened: rule k owns sites [rule_start[k], rule_start[k+1])
of (site_dx, site_dy); (cand_dx, cand_dy) lists the negated sites of all
rules, i.e. the cells whose rule tests can newly pass when one cell flips.

The kernels run a worklist to the least fixpoint.  The fixpoint is
order-independent because the update is monotone, so the result is
bit-identical to synchronous iteration.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def closure_torus(grid, rule_start, site_dx, site_dy, cand_dx, cand_dy):
    h, w = grid.shape
    nrules = rule_start.size - 1
    stack_r = np.empty(h * w, np.int64)
    stack_c = np.empty(h * w, np.int64)
    top = 0
    for r in range(h):
        for c in range(w):
            if grid[r, c] == 0:
                for k in range(nrules):
                    ok = True
                    for j in range(rule_start[k], rule_start[k + 1]):
                        if grid[(r + site_dy[j]) % h, (c + site_dx[j]) % w] != 1:
                            ok = False
                            break
                    if ok:
                        grid[r, c] = 1
                        stack_r[top] = r
                        stack_c[top] = c
                        top += 1
                        break
    while top > 0:
        top -= 1
        r = stack_r[top]
        c = stack_c[top]
        for t in range(cand_dx.size):
            vr = (r + cand_dy[t]) % h
            vc = (c + cand_dx[t]) % w
            if grid[vr, vc] == 0:
                for k in range(nrules):
                    ok = True
                    for j in range(rule_start[k], rule_start[k + 1]):
                        if grid[(vr + site_dy[j]) % h, (vc + site_dx[j]) % w] != 1:
                            ok = False
                            break
                    if ok:
                        grid[vr, vc] = 1
                        stack_r[top] = vr
                        stack_c[top] = vc
                        top += 1
                        break
    return grid


@njit(cache=True)
def closure_padded(grid, margin, rule_start, site_dx, site_dy, cand_dx, cand_dy):
    """Closure on the interior of a padded grid; the pad ring is static."""
    h, w = grid.shape
    nrules = rule_start.size - 1
    stack_r = np.empty((h - 2 * margin) * (w - 2 * margin), np.int64)
    stack_c = np.empty((h - 2 * margin) * (w - 2 * margin), np.int64)
    top = 0
    for r in range(margin, h - margin):
        for c in range(margin, w - margin):
            if grid[r, c] == 0:
                for k in range(nrules):
                    ok = True
                    for j in range(rule_start[k], rule_start[k + 1]):
                        if grid[r + site_dy[j], c + site_dx[j]] != 1:
                            ok = False
                            break
                    if ok:
                        grid[r, c] = 1
                        stack_r[top] = r
                        stack_c[top] = c
                        top += 1
                        break
    while top > 0:
        top -= 1
        r = stack_r[top]
        c = stack_c[top]
        for t in range(cand_dx.size):
            vr = r + cand_dy[t]
            vc = c + cand_dx[t]
            if margin <= vr < h - margin and margin <= vc < w - margin:
                if grid[vr, vc] == 0:
                    for k in range(nrules):
                        ok = True
                        for j in range(rule_start[k], rule_start[k + 1]):
                            if grid[vr + site_dy[j], vc + site_dx[j]] != 1:
                                ok = False
                                break
                        if ok:
                            grid[vr, vc] = 1
                            stack_r[top] = vr
                            stack_c[top] = vc
                            top += 1
                            break
    return grid


