"""Exact circle geometry against brute-force oracles and known families."""

import math
import random

import pytest

from ubootstrap.geometry import (
    Arc,
    ArcSet,
    Classification,
    Direction,
    InvalidOverride,
    NotSubcritical,
    UpdateFamily,
    UpdateRule,
    _CIRC_KEY,
    classify,
    destabilized_arc,
    forbidden_set,
    interaction_range,
    interaction_range_squared,
    is_symmetric,
    sample_between,
    stable_set,
    strictly_between,
    witness_triple,
)

from helpers import (
    DTBP,
    OSP,
    SCHONMANN,
    family_stabilizes,
    neighbourhood_family,
    primitive_directions,
    random_family,
    rule_destabilizes,
)

TAU = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Directions and circular order
# ---------------------------------------------------------------------------


def test_direction_normalizes_to_primitive():
    assert Direction(4, -6) == Direction(2, -3)
    assert Direction(0, 7) == Direction(0, 1)
    assert Direction(-10, 0) == Direction(-1, 0)
    assert Direction(3, 5) == Direction(3, 5)


def test_zero_direction_rejected():
    with pytest.raises(ValueError):
        Direction(0, 0)


def test_perp_rotations():
    d = Direction(2, 1)
    assert d.perp_ccw() == Direction(-1, 2)
    assert d.perp_cw() == Direction(1, -2)
    assert -d == Direction(-2, -1)


def test_circular_order_matches_float_angles():
    dirs = primitive_directions(7)
    by_exact = sorted(dirs, key=_CIRC_KEY)
    by_float = sorted(dirs, key=lambda d: d.angle())
    assert by_exact == by_float


def test_strictly_between_matches_float_angles():
    rng = random.Random(11)
    dirs = primitive_directions(5)
    for _ in range(3000):
        a, d, b = rng.choice(dirs), rng.choice(dirs), rng.choice(dirs)
        if a == b:
            continue
        got = strictly_between(a, d, b)
        if d == a or d == b:
            assert not got
            continue
        want = ((d.angle() - a.angle()) % TAU) < ((b.angle() - a.angle()) % TAU)
        assert got == want, (a, d, b)


def test_sample_between_lands_strictly_inside():
    rng = random.Random(12)
    dirs = primitive_directions(5)
    for _ in range(2000):
        a, b = rng.choice(dirs), rng.choice(dirs)
        s = sample_between(a, b)
        if a == b:
            assert s == -a
        else:
            assert strictly_between(a, s, b), (a, b, s)


# ---------------------------------------------------------------------------
# Arcs
# ---------------------------------------------------------------------------


def _float_arc_contains(arc: Arc, d: Direction) -> bool:
    if d == arc.start:
        return arc.start_closed
    if d == arc.end:
        return arc.end_closed
    width = (arc.end.angle() - arc.start.angle()) % TAU
    off = (d.angle() - arc.start.angle()) % TAU
    return 0 < off < width


def test_arc_contains_matches_float_oracle():
    rng = random.Random(13)
    dirs = primitive_directions(4)
    probes = primitive_directions(5)
    for _ in range(400):
        a, b = rng.choice(dirs), rng.choice(dirs)
        if a == b:
            continue
        arc = Arc.span(a, b, rng.random() < 0.5, rng.random() < 0.5)
        for d in probes:
            assert arc.contains(d) == _float_arc_contains(arc, d)


def test_degenerate_arcs():
    d = Direction(2, 3)
    pt = Arc.point(d)
    assert pt.contains(d)
    assert not pt.contains(Direction(1, 0))
    punctured = Arc.span(d, d, False, False)
    assert not punctured.contains(d)
    assert punctured.contains(Direction(1, 0))
    with pytest.raises(ValueError):
        Arc.span(d, d, True, False)


def test_spans_at_least_pi():
    e, n, w = Direction(1, 0), Direction(0, 1), Direction(-1, 0)
    assert Arc.span(e, w, False, False).spans_at_least_pi()
    assert not Arc.span(e, n, True, True).spans_at_least_pi()
    assert Arc.span(e, Direction(-1, -1), True, True).spans_at_least_pi()
    assert Arc.FULL.spans_at_least_pi()
    assert not Arc.EMPTY.spans_at_least_pi()
    assert not Arc.point(e).spans_at_least_pi()
    assert Arc.span(e, e, False, False).spans_at_least_pi()


def test_arc_display():
    a = Arc.span(Direction(1, 0), Direction(0, 1), True, False)
    assert str(a) == "[1,0 .. 0,1)"
    assert str(Arc.EMPTY) == "(empty)"


# ---------------------------------------------------------------------------
# Arc sets
# ---------------------------------------------------------------------------


def _random_arcset(rng, dirs, max_arcs=3) -> ArcSet:
    arcs = []
    for _ in range(rng.randint(0, max_arcs)):
        kind = rng.random()
        a, b = rng.choice(dirs), rng.choice(dirs)
        if kind < 0.15:
            arcs.append(Arc.point(a))
        elif a != b:
            arcs.append(Arc.span(a, b, rng.random() < 0.5, rng.random() < 0.5))
    return ArcSet.of(*arcs)


def test_arcset_algebra_matches_pointwise_membership():
    rng = random.Random(14)
    dirs = primitive_directions(3)
    probes = primitive_directions(4)
    for _ in range(250):
        s = _random_arcset(rng, dirs)
        t = _random_arcset(rng, dirs)
        u = s.union(t)
        i = s.intersection(t)
        c = s.complement()
        d = s.difference(t)
        for x in probes:
            sx, tx = s.contains(x), t.contains(x)
            assert u.contains(x) == (sx or tx)
            assert i.contains(x) == (sx and tx)
            assert c.contains(x) == (not sx)
            assert d.contains(x) == (sx and not tx)


def test_arcset_normal_form_is_canonical():
    rng = random.Random(15)
    dirs = primitive_directions(3)
    for _ in range(200):
        s = _random_arcset(rng, dirs)
        assert ArcSet.of(*s.arcs) == s
        assert s.union(s) == s
        assert s.intersection(s) == s
        assert s.complement().complement() == s
        assert s.difference(s).is_empty
        assert s.union(s.complement()).is_full
        assert s.intersection(s.complement()).is_empty


def test_arcset_merges_touching_arcs():
    e, n, w = Direction(1, 0), Direction(0, 1), Direction(-1, 0)
    s = ArcSet.of(Arc.span(e, n, True, True), Arc.span(n, w, True, True))
    assert s == ArcSet.of(Arc.span(e, w, True, True))
    # open arcs meeting at an excluded point stay separate
    t = ArcSet.of(Arc.span(e, n, True, False), Arc.span(n, w, False, True))
    assert len(t.arcs) == 2
    # the missing point fills the gap
    assert t.union(ArcSet.of(Arc.point(n))) == s


def test_interior_opens_endpoints_and_drops_points():
    e, n = Direction(1, 0), Direction(0, 1)
    s = ArcSet.of(Arc.span(e, n, True, True), Arc.point(Direction(-1, 0)))
    inner = s.interior()
    assert inner == ArcSet.of(Arc.span(e, n, False, False))
    assert ArcSet.full().interior().is_full
    assert ArcSet.empty().interior().is_empty


def test_antipodal_image():
    rng = random.Random(16)
    dirs = primitive_directions(3)
    probes = primitive_directions(4)
    for _ in range(100):
        s = _random_arcset(rng, dirs)
        anti = s.antipodal_image()
        assert anti.antipodal_image() == s
        for x in probes:
            assert anti.contains(x) == s.contains(-x)


def test_measure():
    e, w = Direction(1, 0), Direction(-1, 0)
    assert ArcSet.full().measure() == pytest.approx(TAU)
    assert ArcSet.empty().measure() == 0.0
    assert ArcSet.of(Arc.span(e, w, True, True)).measure() == pytest.approx(math.pi)
    assert ArcSet.of(Arc.point(e)).measure() == 0.0


# ---------------------------------------------------------------------------
# Destabilized arcs and stable sets
# ---------------------------------------------------------------------------


def test_destabilized_arc_two_site_rule():
    arc = destabilized_arc(UpdateRule([(1, 0), (0, 1)]))
    assert arc == Arc.span(Direction(-1, 0), Direction(0, -1), False, False)


def test_destabilized_arc_antipodal_sites_empty():
    assert destabilized_arc(UpdateRule([(1, 0), (-1, 0)])).is_empty


def test_destabilized_arc_single_site_semicircle():
    arc = destabilized_arc(UpdateRule([(3, 4)]))
    assert arc == Arc.span(Direction(-4, 3), Direction(4, -3), False, False)


def test_destabilized_arc_brute_force():
    probes = primitive_directions(20)
    for rule in [
        UpdateRule([(1, 0), (0, 1)]),
        UpdateRule([(-1, -1), (0, 1)]),
        UpdateRule([(2, 1), (1, -2), (-1, 3)]),
        UpdateRule([(1, 1)]),
    ]:
        arc = destabilized_arc(rule)
        for d in probes:
            assert arc.contains(d) == rule_destabilizes(rule, d), (rule, d)


def test_destabilized_arc_brute_force_random():
    rng = random.Random(17)
    probes = primitive_directions(8)
    for _ in range(60):
        fam = random_family(rng, max_rules=1, max_sites=5)
        rule = fam.rules[0]
        arc = destabilized_arc(rule)
        for d in probes:
            assert arc.contains(d) == rule_destabilizes(rule, d), (rule, d)


def test_stable_set_dtbp_exact():
    s = stable_set(DTBP)
    assert s.arcs == (
        Arc.span(Direction(1, 0), Direction(0, 1), True, True),
        Arc.span(Direction(-1, 1), Direction(-1, 0), True, True),
        Arc.span(Direction(0, -1), Direction(1, -1), True, True),
    )


def test_stable_set_two_neighbour_is_four_points():
    s = stable_set(neighbourhood_family(2))
    assert s.arcs == (
        Arc.point(Direction(1, 0)),
        Arc.point(Direction(0, 1)),
        Arc.point(Direction(-1, 0)),
        Arc.point(Direction(0, -1)),
    )


def test_stable_set_single_site_rule_is_closed_semicircle():
    s = stable_set(UpdateFamily([[(1, 0)]]))
    assert s == ArcSet.of(Arc.span(Direction(0, -1), Direction(0, 1), True, True))


def test_stable_set_brute_force_random():
    rng = random.Random(18)
    probes = primitive_directions(30)
    for _ in range(25):
        fam = random_family(rng)
        s = stable_set(fam)
        for d in probes:
            assert s.contains(d) == family_stabilizes(fam, d), (fam, d)


# ---------------------------------------------------------------------------
# Forbidden directions
# ---------------------------------------------------------------------------


def test_forbidden_set_dtbp():
    assert forbidden_set(DTBP) == frozenset(
        {
            Direction(1, 1),
            Direction(-1, -1),
            Direction(-2, 1),
            Direction(2, -1),
            Direction(-1, 2),
            Direction(1, -2),
        }
    )


def test_forbidden_set_point_rule_empty():
    assert forbidden_set(UpdateFamily([[(5, 0)]])) == frozenset()


def test_forbidden_set_collinear_rule():
    assert forbidden_set(UpdateFamily([[(1, 0), (2, 0)]])) == frozenset(
        {Direction(0, 1), Direction(0, -1)}
    )


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


def test_classify_known_families():
    assert classify(DTBP) is Classification.SUBCRITICAL
    assert classify(UpdateFamily([[(1, 0)]])) is Classification.SUPERCRITICAL
    assert classify(neighbourhood_family(2)) is Classification.CRITICAL
    assert classify(OSP) is Classification.SUBCRITICAL
    assert classify(SCHONMANN) is Classification.SUBCRITICAL


def test_classify_edge_cases():
    # stable set empty
    assert classify(neighbourhood_family(1)) is Classification.SUPERCRITICAL
    assert stable_set(neighbourhood_family(1)).is_empty
    # stable set full circle
    fam = UpdateFamily([[(1, 0), (-1, 0)]])
    assert stable_set(fam).is_full
    assert classify(fam) is Classification.SUBCRITICAL
    # measure exactly pi, closed: a single closed semicircle fits
    assert classify(UpdateFamily([[(0, 1)]])) is Classification.SUPERCRITICAL


def _rotate_family(fam: UpdateFamily) -> UpdateFamily:
    return UpdateFamily(
        [UpdateRule([(-y, x) for (x, y) in r]) for r in fam]
    )


def test_rotation_equivariance():
    rng = random.Random(19)
    probes = primitive_directions(5)
    for _ in range(40):
        fam = random_family(rng)
        rot = _rotate_family(fam)
        s, sr = stable_set(fam), stable_set(rot)
        for d in probes:
            assert sr.contains(d.perp_ccw()) == s.contains(d)
        assert classify(rot) is classify(fam)


_SEVERITY = {
    Classification.SUPERCRITICAL: 0,
    Classification.CRITICAL: 1,
    Classification.SUBCRITICAL: 2,
}


def test_adding_a_rule_shrinks_stable_set():
    rng = random.Random(20)
    for _ in range(40):
        fam = random_family(rng)
        extra = random_family(rng, max_rules=1)
        bigger = UpdateFamily(list(fam.rules) + list(extra.rules))
        assert stable_set(bigger).issubset(stable_set(fam))
        assert _SEVERITY[classify(bigger)] <= _SEVERITY[classify(fam)]


# ---------------------------------------------------------------------------
# Symmetry and range
# ---------------------------------------------------------------------------


def test_is_symmetric_schonmann():
    u = is_symmetric(SCHONMANN)
    assert u is not None
    inner = stable_set(SCHONMANN).interior()
    assert inner.contains(u) and inner.contains(-u)


def test_is_symmetric_negative_cases():
    assert is_symmetric(DTBP) is None
    assert is_symmetric(UpdateFamily([[(1, 0)]])) is None


def test_interaction_range():
    assert interaction_range(DTBP) == pytest.approx(math.sqrt(5))
    assert interaction_range_squared(DTBP) == 5
    assert interaction_range(UpdateFamily([[(3, 4)]])) == 0.0
    assert interaction_range(neighbourhood_family(2)) == pytest.approx(2.0)


# ---------------------------------------------------------------------------
# Witness triples
# ---------------------------------------------------------------------------

PAPER_THETAS = (7 * math.pi / 24, 23 * math.pi / 24, 39 * math.pi / 24)


def test_witness_triple_dtbp_overrides():
    w = witness_triple(DTBP, overrides=PAPER_THETAS)
    assert w.directions is None
    assert w.thetas == pytest.approx(PAPER_THETAS, abs=1e-15)
    gaps = [
        (w.thetas[1] - w.thetas[0]) % TAU,
        (w.thetas[2] - w.thetas[1]) % TAU,
        (w.thetas[0] - w.thetas[2]) % TAU,
    ]
    assert gaps == pytest.approx([TAU / 3] * 3, abs=1e-12)
    assert w.margin == pytest.approx(math.pi / 24, abs=1e-12)


def test_witness_triple_dtbp_rational_search():
    w = witness_triple(DTBP)
    assert w.directions is not None and len(w.directions) == 3
    inner = stable_set(DTBP).interior()
    forb = forbidden_set(DTBP)
    for d in w.directions:
        assert inner.contains(d)
        assert d not in forb
    a, b, c = w.directions
    s1, s2, s3 = a.cross(b), b.cross(c), c.cross(a)
    assert (s1 > 0 and s2 > 0 and s3 > 0) or (s1 < 0 and s2 < 0 and s3 < 0)
    assert w.margin > 0


def test_witness_triple_requires_subcritical():
    with pytest.raises(NotSubcritical):
        witness_triple(neighbourhood_family(2))


def test_witness_triple_override_rejects_forbidden_direction():
    with pytest.raises(InvalidOverride):
        witness_triple(DTBP, overrides=(math.pi / 4, 23 * math.pi / 24,
                                        39 * math.pi / 24))


def test_witness_triple_override_rejects_unstable_angle():
    with pytest.raises(InvalidOverride):
        witness_triple(DTBP, overrides=(2 * math.pi / 3, 23 * math.pi / 24,
                                        39 * math.pi / 24))


def test_witness_triple_override_rejects_non_spanning_triangle():
    with pytest.raises(InvalidOverride):
        witness_triple(DTBP, overrides=(math.pi / 6, math.pi / 3,
                                        160 * math.pi / 180))


def test_witness_triple_override_requires_three_angles():
    with pytest.raises(InvalidOverride):
        witness_triple(DTBP, overrides=(1.0, 2.0))
