import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rigor3bp.hset import (
    Edge,
    FuzzyHSet,
    HSet,
    Location,
    fuzzy_strip_test,
    is_r_symmetric,
    locate,
    parse_hset,
    r_action,
)
from rigor3bp.interval import Interval, stack
from rigor3bp.model import Branch

UNIT = HSet(stack([Interval(0.0), Interval(0.0)]), [1.0, 0.0], [0.0, 1.0], Branch.PLUS, "unit")
SKEW = HSet(stack([Interval(0.5), Interval(-0.2)]), [2.0, 1.0], [-0.5, 1.0], Branch.MINUS, "skew")


def _pt(x, xd):
    return Interval(np.array([x, xd]))


@pytest.mark.parametrize("q, flags", [
    ((0.0, 0.0), Location.IN_STRIP | Location.IN_SUPPORT_INTERIOR),
    ((-2.0, 0.0), Location.IN_LEFT | Location.IN_STRIP),
    ((2.0, 0.5), Location.IN_RIGHT | Location.IN_STRIP),
    ((0.0, 3.0), Location.IN_TOP_BOTTOM),
    ((1.0, 0.0), Location.IN_STRIP),  # on the edge: not interior, not right
    ((0.0, -1.0), Location.STRADDLES),
])
def test_classify_examples(q, flags):
    assert UNIT.classify(_pt(*q)) == flags


def test_classify_box_straddling_the_edge():
    box = Interval(np.array([0.9, 0.0]), np.array([1.1, 0.1]))
    assert UNIT.classify(box) == Location.IN_STRIP
    assert not Location.IN_STRIP.outside_support
    assert Location.IN_LEFT.outside_support


def test_locate_batch():
    t = Interval(np.array([[-3.0, 0.0], [0.0, 0.0]]))
    assert list(locate(t)) == [int(Location.IN_LEFT | Location.IN_STRIP),
                               int(Location.IN_STRIP | Location.IN_SUPPORT_INTERIOR)]


@settings(max_examples=200, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_local_round_trip(t1, t2):
    q = SKEW.from_local(Interval(t1), Interval(t2))
    t = SKEW.to_local(q)
    assert t[0].contains(t1) and t[1].contains(t2)
    assert np.all(t.width() < 1e-13)


def test_construction_errors():
    with pytest.raises(ValueError):
        HSet(stack([Interval(0.0), Interval(0.0)]), [1.0, 1.0], [2.0, 2.0])
    with pytest.raises(ValueError):
        HSet(stack([Interval(0.0), Interval(0.0)]), [np.inf, 0.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        HSet(Interval(np.zeros(3)), [1.0, 0.0], [0.0, 1.0])


def test_edges_cover_the_boundary():
    for e in Edge:
        segs = SKEW.edge_segments(e, 4)
        assert segs.n_batch == 4
        h = segs.hull()
        t = SKEW.to_local(h)
        if e.is_vertical:
            want = -1.0 if e is Edge.LE else 1.0
            assert np.all(t.lo[:, 0] <= want) and np.all(want <= t.hi[:, 0])
        else:
            want = 1.0 if e is Edge.TE else -1.0
            assert np.all(t.lo[:, 1] <= want) and np.all(want <= t.hi[:, 1])
    # the corner pieces reach the corners
    le = SKEW.edge_segments(Edge.LE, 3).hull()
    corner = SKEW.from_local(Interval(-1.0), Interval(-1.0))
    assert le[0].contains(np.asarray(corner.mid()))
    with pytest.raises(ValueError):
        SKEW.edge_segments("le", 0)


def test_support_covers_sampled_points():
    sup = SKEW.support(3, 2).hull()
    rng = np.random.default_rng(2)
    for t1, t2 in rng.uniform(-1, 1, size=(200, 2)):
        q = np.asarray(SKEW.from_local(Interval(t1), Interval(t2)).mid())
        assert np.any(np.all((sup.lo <= q) & (q <= sup.hi), axis=1))
    assert SKEW.hull().contains(np.array([0.5, -0.2]))


def test_text_round_trip():
    for n in (UNIT, SKEW):
        m = parse_hset(n.to_text())
        assert np.array_equal(m.u, n.u) and np.array_equal(m.s, n.s) and m.branch == n.branch
        assert np.array_equal(m.c.lo, n.c.lo) and np.array_equal(m.c.hi, n.c.hi)
    f = FuzzyHSet(stack([Interval(0.9, 0.91), Interval(0.0)]), [1.0, 2.0], [1.0, -2.0], Branch.PLUS)
    g = parse_hset(f.to_text(), fuzzy=True)
    assert g.is_fuzzy and float(g.W[0].hi) == 0.91
    with pytest.raises(ValueError):
        parse_hset("t((0,0),(1,0))@+")


def test_reflection_and_symmetry():
    n = HSet(stack([Interval(0.9), Interval(0.0)]), [1.0, 2.0], [1.0, -2.0], Branch.PLUS, "N")
    assert is_r_symmetric(n)
    rn = r_action(n)
    assert rn.name == "R(N)" and np.array_equal(rn.u, [1.0, 2.0]) and np.array_equal(rn.s, [1.0, -2.0])
    assert not is_r_symmetric(SKEW)
    # R maps the support onto itself for a symmetric set
    q = n.from_local(Interval(0.3), Interval(-0.7))
    rq = stack([q[0], -q[1]])
    t = n.to_local(rq)
    assert t[0].contains(-0.7) and t[1].contains(0.3)


def test_fuzzy_member_and_strip():
    W = stack([Interval(0.0, 0.01), Interval(0.0)])
    f = FuzzyHSet(W, [1.0, 0.0], [0.0, 1.0], Branch.PLUS, "F")
    m = f.member()
    assert not m.is_fuzzy and m.c[0].contains(0.005)
    assert fuzzy_strip_test(f, _pt(0.5, 0.5))
    assert not fuzzy_strip_test(f, _pt(0.5, 1.5))
    # a degenerate W behaves like the crisp set
    g = FuzzyHSet(stack([Interval(0.0), Interval(0.0)]), [1.0, 0.0], [0.0, 1.0], Branch.PLUS)
    for q in ((0.2, 0.3), (2.0, 0.0), (0.0, 2.0)):
        assert g.classify(_pt(*q)) == UNIT.classify(_pt(*q))
