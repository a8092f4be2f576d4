"""Reproducible Monte Carlo experiments on torus configurations.

Randomness contract: the uniform field of a trial depends only on
(seed, trial_index) through a counter-based generator, never on execution
order.  Thresholding one field at different p gives the standard monotone
coupling, and the same field drives coupled runs across families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ubootstrap.dynamics import GridConfig, closure
from ubootstrap.geometry import (
    UpdateFamily,
    interaction_range,
    is_symmetric,
    stable_set,
    _slack_in_arcs,
)


class NotSymmetric(ValueError):
    """Raised when a symmetric-model bound is requested for an asymmetric
    family."""


_MASK64 = 2**64 - 1
_WILSON_Z = 1.959963984540054


@dataclass(frozen=True)
class TrialPlan:
    """A reproducible batch of independent torus trials."""

    family: UpdateFamily
    size: int
    p: float
    trials: int
    seed: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("size must be positive")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be positive")


@dataclass(frozen=True)
class TrialOutcome:
    percolated: bool
    origin_infected: bool
    closure_density: float


@dataclass(frozen=True)
class EstimateResult:
    p_hat: float
    ci_low: float
    ci_high: float
    probes: List[Tuple[float, int, int]]

    def __post_init__(self):
        if not self.ci_low <= self.p_hat <= self.ci_high:
            raise ValueError("estimate outside its interval")
        if any(s > n for (_, n, s) in self.probes):
            raise ValueError("successes exceed trials")


def uniform_field(seed: int, trial_index: int, size: int) -> np.ndarray:
    """The trial's uniform(0,1) field, row-major over torus cells."""
    bitgen = np.random.Philox(key=[seed & _MASK64, trial_index & _MASK64])
    gen = np.random.Generator(bitgen)
    return gen.random(size * size).reshape(size, size)


def _trial(family: UpdateFamily, size: int, p: float, seed: int,
           trial_index: int) -> TrialOutcome:
    infected = uniform_field(seed, trial_index, size) < p
    closed = closure(family, GridConfig(infected))
    return TrialOutcome(
        percolated=bool(closed.infected.all()),
        origin_infected=bool(closed.infected[0, 0]),
        closure_density=float(closed.infected.mean()),
    )


def sample(plan: TrialPlan, trial_index: int) -> TrialOutcome:
    """Run one trial of the plan: draw the field, threshold at p, close."""
    if not 0 <= trial_index < plan.trials:
        raise ValueError(f"trial_index {trial_index} outside plan")
    return _trial(plan.family, plan.size, plan.p, plan.seed, trial_index)


def wilson_interval(successes: int, trials: int) -> Tuple[float, float]:
    """95% score interval for a binomial fraction."""
    if trials < 1:
        raise ValueError("trials must be positive")
    z = _WILSON_Z
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials
                         + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def estimate_theta(plan: TrialPlan) -> EstimateResult:
    """Percolation fraction at fixed p with its 95% interval."""
    successes = 0
    for t in range(plan.trials):
        if sample(plan, t).percolated:
            successes += 1
    lo, hi = wilson_interval(successes, plan.trials)
    frac = successes / plan.trials
    return EstimateResult(frac, min(lo, frac), max(hi, frac),
                          [(plan.p, plan.trials, successes)])


def estimate_pc(family: UpdateFamily, size: int, trials_per_probe: int = 200,
                tol: float = 0.01, seed: int = 0) -> EstimateResult:
    """Bisection estimate of the probability where half the trials percolate.

    Probes the midpoint of the bracket with a fresh batch of trials, keeps
    the half where the percolation fraction crosses 1/2, and stops when the
    bracket is narrower than tol.  The interval reported is the final
    bracket; it reflects bisection resolution, not sampling error, which is
    visible per probe in the probes list.
    """
    if tol < 1.0 / size:
        raise ValueError(f"tol {tol} finer than lattice resolution 1/{size}")
    if trials_per_probe < 50:
        raise ValueError("trials_per_probe must be at least 50")
    lo, hi = 0.0, 1.0
    probes: List[Tuple[float, int, int]] = []
    k = 0
    while hi - lo >= tol:
        mid = (lo + hi) / 2
        successes = 0
        for t in range(trials_per_probe):
            out = _trial(family, size, mid, seed, k * trials_per_probe + t)
            if out.percolated:
                successes += 1
        probes.append((mid, trials_per_probe, successes))
        if successes / trials_per_probe >= 0.5:
            hi = mid
        else:
            lo = mid
        k += 1
    return EstimateResult((lo + hi) / 2, lo, hi, probes)


def result_csv(result: EstimateResult) -> str:
    """CSV rendering: one row per probe, per-probe 95% intervals, then the
    point estimate as a trailing comment line."""
    lines = ["p,trials,successes,fraction,ci_low,ci_high"]
    for (p, n, s) in result.probes:
        lo, hi = wilson_interval(s, n)
        lines.append(f"{p:.10g},{n},{s},{s / n:.10g},{lo:.10g},{hi:.10g}")
    lines.append(f"# p_hat={result.p_hat:.10g}")
    return "\n".join(lines) + "\n"


def _symmetric_rhombus(family: UpdateFamily):
    """Rhombus geometry for the symmetric lower bound.

    Sides perpendicular to the directions at theta(u') +- eps/2, where u' is
    the symmetry witness and eps is half its angular slack; side length is
    the smallest integer giving inradius >= the family range.  Returns
    (theta, eps, side, cells).
    """
    witness = is_symmetric(family)
    if witness is None:
        raise NotSymmetric(f"{family} has no symmetric stable direction")
    inner = stable_set(family).interior()
    symmetric_part = inner.intersection(inner.antipodal_image())
    theta = witness.angle()
    slack = _slack_in_arcs(theta, symmetric_part)
    if slack is None:
        raise NotSymmetric("witness direction lost its slack")
    eps = slack / 2
    r = interaction_range(family)
    side = max(1, math.ceil(2 * r / math.sin(eps)))
    h = side * math.sin(eps) / 2
    phi1, phi2 = theta + eps / 2, theta - eps / 2
    coords = np.arange(-side, side + 1)
    xg, yg = np.meshgrid(coords, coords)
    tol = 1e-9
    inside = (
        (np.abs(xg * math.cos(phi1) + yg * math.sin(phi1)) <= h + tol)
        & (np.abs(xg * math.cos(phi2) + yg * math.sin(phi2)) <= h + tol)
    )
    return theta, eps, side, int(inside.sum())


def symmetric_lower_bound(family: UpdateFamily,
                          osp_threshold: float = 0.7055) -> float:
    """A positive lower bound on the critical probability of a symmetric
    family.

    A rhombus whose inradius exceeds the family range stays healthy with
    probability (1-p)^cells; when that beats the oriented-site-percolation
    threshold, healthy rhombi percolate and block full infection.  Returns
    the largest such p, i.e. 1 - osp_threshold**(1/cells).
    """
    if not 0.0 < osp_threshold < 1.0:
        raise ValueError("osp_threshold must lie strictly inside (0, 1)")
    _, _, _, cells = _symmetric_rhombus(family)
    return 1.0 - osp_threshold ** (1.0 / cells)
