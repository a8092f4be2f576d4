"""Acceptance gate: one test per shipped guarantee.

Each criterion gets exactly one test so the -v report reads as a
checklist.  Oracles come from tests/helpers.py and are independent of
the library internals they judge.
"""

import math
import random
import time

import numpy as np

from ubootstrap.covers import RenormParams, build_cover, build_hierarchy, \
    certify, cover_demo, verify_closed
from ubootstrap.dynamics import (FreeHealthy, GridConfig, Stability, Torus,
                                 builtin_family, closure, half_plane_probe)
from ubootstrap.geometry import (Arc, Classification, Direction, UpdateFamily,
                                 WitnessTriple, classify, forbidden_set,
                                 is_symmetric, stable_set, witness_triple)
from ubootstrap.montecarlo import TrialPlan, estimate_pc, sample, uniform_field

from helpers import (DTBP, OSP, SCHONMANN, closure_by_iteration,
                     neighbourhood_family, osp_threshold_estimate,
                     primitive_directions, random_family)

PAPER_THETAS = (7 * math.pi / 24, 23 * math.pi / 24, 39 * math.pi / 24)

BUILTIN_NAMES = ("dtbp", "osp", "schonmann", "neighbour-1", "neighbour-2",
                 "neighbour-3", "neighbour-4")


def test_criterion_01_stable_set_exact_and_fast():
    """The flagship family has exactly three closed stable arcs, < 1 ms."""
    expected = (
        Arc.span(Direction(1, 0), Direction(0, 1), True, True),
        Arc.span(Direction(-1, 1), Direction(-1, 0), True, True),
        Arc.span(Direction(0, -1), Direction(1, -1), True, True),
    )
    assert stable_set(DTBP).arcs == expected
    best = math.inf
    for _ in range(10):
        t0 = time.perf_counter()
        stable_set(DTBP)
        best = min(best, time.perf_counter() - t0)
    assert best < 1e-3, f"stable_set took {best * 1e3:.3f} ms"


def test_criterion_02_forbidden_set_exact():
    """Six primitive forbidden directions, nothing else."""
    assert forbidden_set(DTBP) == frozenset({
        Direction(1, 1), Direction(-1, -1),
        Direction(-1, 2), Direction(1, -2),
        Direction(-2, 1), Direction(2, -1),
    })


def test_criterion_03_classification_labels():
    """Known families get the right trichotomy labels."""
    assert classify(DTBP) is Classification.SUBCRITICAL
    assert classify(UpdateFamily([[(1, 0)]])) is Classification.SUPERCRITICAL
    assert classify(neighbourhood_family(2)) is Classification.CRITICAL
    assert classify(SCHONMANN) is Classification.SUBCRITICAL
    assert is_symmetric(SCHONMANN) is not None


def test_criterion_04_geometry_dynamics_agreement():
    """Half-plane probes agree with the exact stable set everywhere."""
    t0 = time.perf_counter()
    probes = primitive_directions(6)
    for name in BUILTIN_NAMES:
        family = builtin_family(name)
        arcs = stable_set(family)
        for d in probes:
            probed = half_plane_probe(family, d) is Stability.STABLE
            assert probed == arcs.contains(d), (name, d)
    assert time.perf_counter() - t0 < 60.0


def test_criterion_05_closure_matches_naive_iteration():
    """Worklist closure is bit-exact against definition-level iteration."""
    t0 = time.perf_counter()
    rng = random.Random(2024)
    checked = 0
    for _ in range(20):
        family = random_family(rng)
        for _ in range(50):
            p = rng.uniform(0.05, 0.6)
            field = np.random.Generator(
                np.random.Philox(key=[rng.getrandbits(63), 0])
            ).random((20, 20)) < p
            wrap = checked % 2 == 0
            boundary = Torus() if wrap else FreeHealthy()
            got = closure(family, GridConfig(field.copy(), boundary)).infected
            want = closure_by_iteration(family, field, wrap)
            assert np.array_equal(got, want), family
            checked += 1
    assert checked == 1000
    assert time.perf_counter() - t0 < 60.0


def test_criterion_06_certificate_constants():
    """Lower-bound constants land in their frozen windows."""
    cert = certify(DTBP, 1.5, 1.45, 0.01, overrides=PAPER_THETAS)
    assert 0.02293 * math.pi < cert.epsilon0 < 0.0230 * math.pi
    assert 23.9 < cert.r_eps < 24.04
    assert cert.c == 361
    assert abs(cert.delta - 5.8) < 1e-12
    assert 1e12 <= cert.delta1_min <= 10 ** 13.5
    assert 1e-102 <= cert.p_bound <= 1e-100
    assert cert.final_check is True


def test_criterion_07_dtbp_critical_estimate():
    """The critical-probability estimate sits in the expected window."""
    result = estimate_pc(DTBP, 512, trials_per_probe=200, tol=0.01, seed=0)
    assert 0.10 <= result.p_hat <= 0.14, result
    assert result.p_hat <= 0.3118


def test_criterion_08_osp_threshold_consistency():
    """The estimate matches an independent oriented-path simulation."""
    oracle = osp_threshold_estimate(size=512, trials=200, tol=1 / 256,
                                    seed=99)
    result = estimate_pc(OSP, 512, trials_per_probe=200, tol=1 / 256, seed=0)
    assert abs(result.p_hat - (1.0 - oracle)) <= 0.01, (result.p_hat, oracle)


def test_criterion_09_occupation_vanishes_below_threshold():
    """Origin occupation decreases with p and is tiny at p = 0.02."""
    ps = (0.10, 0.08, 0.06, 0.04, 0.02)
    trials = 48
    means, sigmas = [], []
    for p in ps:
        plan = TrialPlan(DTBP, 512, p, trials, seed=11)
        dens = [sample(plan, t).closure_density for t in range(trials)]
        means.append(float(np.mean(dens)))
        sigmas.append(float(np.std(dens)) / math.sqrt(trials))
    for i in range(len(ps) - 1):
        slack = 2.0 * math.hypot(sigmas[i], sigmas[i + 1])
        assert means[i + 1] <= means[i] + slack, (ps[i], means)
    assert means[-1] < 0.05, means


def test_criterion_10_covers_close_and_fakes_fail():
    """100 covers from valid witness triples all hold; a fake one leaks."""
    t0 = time.perf_counter()
    triples = [
        witness_triple(DTBP, overrides=PAPER_THETAS),
        witness_triple(DTBP),
        witness_triple(DTBP, overrides=(math.pi / 3,
                                        math.radians(160), math.radians(300))),
        witness_triple(DTBP, overrides=(math.radians(40),
                                        math.radians(150), math.radians(280))),
    ]
    cert = certify(DTBP, 1.5, 1.45, 0.01, overrides=PAPER_THETAS)
    params = RenormParams(1.5, 1.45, 0.01, 4, cert.epsilon)
    rng = random.Random(5)
    built = 0
    for witness in triples:
        for _ in range(25):
            cx, cy = rng.randint(20, 76), rng.randint(20, 76)
            K = {(cx, cy)}
            while len(K) < rng.randint(1, 6):
                K.add((cx + rng.randint(-3, 3), cy + rng.randint(-3, 3)))
            h = build_hierarchy(GridConfig.empty(96, boundary=FreeHealthy()),
                                params, 2)
            cover = build_cover(DTBP, witness, params, h, 1, sorted(K))
            assert verify_closed(DTBP, cover), (witness.thetas, K)
            built += 1
    assert built == 100
    fake = WitnessTriple(thetas=(math.pi / 6, 5 * math.pi / 6,
                                 5 * math.pi / 4), margin=0.09)
    h = build_hierarchy(GridConfig.empty(96, boundary=FreeHealthy()),
                        params, 2)
    bad = build_cover(DTBP, fake, params, h, 1, [(48, 48)])
    assert not verify_closed(DTBP, bad)
    assert time.perf_counter() - t0 < 60.0


def test_criterion_11_demo_laminar_and_contained():
    """Succeeding demo runs give laminar covers containing the closure."""
    cert = certify(DTBP, 1.5, 1.45, 0.01)
    params = RenormParams(1.5, 1.45, 0.01, 4, cert.epsilon)
    configs = ([(0.002, 2, s) for s in range(15)]
               + [(0.01, 2, s) for s in range(15)]
               + [(0.002, 1, s) for s in range(10)]
               + [(0.005, 1, s) for s in range(10)])
    assert len(configs) == 50
    succeeded = 0
    for p, max_level, seed in configs:
        field = uniform_field(seed, 0, 96) < p
        rep = cover_demo(DTBP, GridConfig(field, FreeHealthy()), params,
                         max_level)
        if not rep.succeeded:
            continue
        succeeded += 1
        assert rep.all_verified, (p, max_level, seed)
        assert rep.laminar, (p, max_level, seed)
        assert rep.closure_contained, (p, max_level, seed)
    # toy-scale failures are legitimate, but the bulk must go through
    assert succeeded >= 25, succeeded


def test_criterion_12_property_suite():
    """Idempotence, monotonicity, equivariance, and coupling invariants."""
    rng = random.Random(77)
    for _ in range(15):
        family = random_family(rng)
        field = np.random.Generator(
            np.random.Philox(key=[rng.getrandbits(63), 1])
        ).random((20, 20)) < rng.uniform(0.1, 0.5)
        cfg = GridConfig(field.copy(), Torus())
        closed = closure(family, cfg)
        # idempotence
        again = closure(family, closed)
        assert np.array_equal(again.infected, closed.infected)
        # monotone in the seed
        sub = field & (np.random.Generator(
            np.random.Philox(key=[rng.getrandbits(63), 2])
        ).random((20, 20)) < 0.7)
        closed_sub = closure(family, GridConfig(sub, Torus()))
        assert not (closed_sub.infected & ~closed.infected).any()
        # torus equivariance
        dx, dy = rng.randint(0, 19), rng.randint(0, 19)
        rolled = np.roll(np.roll(field, dy, axis=0), dx, axis=1)
        closed_rolled = closure(family, GridConfig(rolled, Torus()))
        assert np.array_equal(
            closed_rolled.infected,
            np.roll(np.roll(closed.infected, dy, axis=0), dx, axis=1))
    # per-trial coupling: the one-rule family is dominated by the full one
    for trial in range(30):
        plan_osp = TrialPlan(OSP, 64, 0.25, 30, seed=5)
        plan_dtbp = TrialPlan(DTBP, 64, 0.25, 30, seed=5)
        a = sample(plan_osp, trial)
        b = sample(plan_dtbp, trial)
        assert a.percolated <= b.percolated
        assert a.closure_density <= b.closure_density
    # stochastic monotonicity: same uniforms, higher threshold, larger field
    for trial in range(20):
        field = uniform_field(3, trial, 64)
        low = closure(DTBP, GridConfig(field < 0.08, Torus()))
        high = closure(DTBP, GridConfig(field < 0.12, Torus()))
        assert not (low.infected & ~high.infected).any()
