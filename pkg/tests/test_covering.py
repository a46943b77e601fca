from fractions import Fraction

import numpy as np
import pytest

from rigor3bp.covering import (
    CheckParams,
    FunctionMap,
    LinearMap,
    Orientation,
    Stage,
    Status,
    check_covering_backward,
    check_covering_direct,
    check_covering_fuzzy,
    check_hyperbolicity,
    check_unique_fixed_point,
    monotonicity_from_derivative,
)
from rigor3bp.data import proof_data
from rigor3bp.hset import FuzzyHSet, HSet, r_action
from rigor3bp.interval import Interval, stack
from rigor3bp.model import Branch

UNIT = HSet(stack([Interval(0.0), Interval(0.0)]), [1.0, 0.0], [0.0, 1.0], Branch.PLUS, "N")
DIRECT = CheckParams(Stage(1, 5, 0.1), Stage(2, 5, 0.1))
BACKWARD = CheckParams(Stage(1, 5, 0.1), Stage(2, 5, -0.1), mono=Stage(3, 5, 0.1), center=Stage(1, 5, 0.1))

# name, M, b, direct holds, direct b status, backward failures, orientation
TABLE = [
    ("expand", [[3, 0], [0, 1 / 3]], (0, 0), True, "Pass", [], "b+"),
    ("flip", [[-3, 0], [0, 1 / 3]], (0, 0), True, "Pass", [], "b-"),
    ("shift", [[3, 0], [0, 1 / 3]], (0.5, 0), True, "Pass", [], "b+"),
    ("far shift", [[3, 0], [0, 1 / 3]], (2.5, 0), False, "Fail", ["b", "a2"], "unknown"),
    ("lifted", [[3, 0], [0, 1 / 3]], (0, 0.8), False, "Pass", ["a3"], "b+"),
    ("weak", [[0.5, 0], [0, 1 / 3]], (0, 0), False, "Fail", ["b"], "unknown"),
    ("no contraction", [[3, 0], [0, 3]], (0, 0), False, "Pass", ["a3"], "b+"),
    ("swap", [[0, 3], [3, 0]], (0, 0), False, "Fail", ["b", "a1", "a3"], "unknown"),
    ("shear", [[3, 0.5], [0, 1 / 3]], (0, 0), True, "Pass", [], "b+"),
    ("s reversed", [[3, 0], [0, -1 / 3]], (0, 0), True, "Pass", [], "b+"),
    ("touching", [[1, 0], [0, 1 / 3]], (0, 0), False, "Fail", ["b"], "unknown"),
    ("barely", [[3, 0], [0, 0.999]], (0, 0), True, "Pass", [], "b+"),
]


@pytest.mark.parametrize("name, M, b, direct, direct_b, back_fail, orient", TABLE, ids=[t[0] for t in TABLE])
def test_linear_toy_table(name, M, b, direct, direct_b, back_fail, orient):
    f = LinearMap(M, b)
    vd = check_covering_direct(f, UNIT, UNIT, DIRECT)
    assert vd.holds is direct
    assert vd.conditions["b"].value == direct_b
    vb = check_covering_backward(f, UNIT, UNIT, BACKWARD)
    assert sorted(vb.failed_conditions()) == sorted(back_fail)
    assert vb.holds is (not back_fail)
    assert vb.orientation.value == orient


def _cubic(box):
    t1 = box[..., 0]
    return stack([t1.pow_int(3) * 4.0 - t1 * 2.0, box[..., 1] * (1 / 3)], -1)


def _cubic_d(box):
    t1 = box[..., 0]
    n = box.shape[0]
    zero = Interval(np.zeros(n))
    row0 = stack([t1.sqr() * 12.0 - 2.0, zero], -1)
    row1 = stack([zero, zero + (1 / 3)], -1)
    return stack([row0, row1], -2)


def _cubic_inv(box):
    # only the second coordinate matters for the preimage test
    n = box.shape[0]
    return stack([Interval(-np.full(n, 10.0), np.full(n, 10.0)), box[..., 1] * 3.0], -1)


def test_cubic_is_covered_but_not_monotone():
    # g1(t) = 4t^3 - 2t maps the edges to -2 and 2 but turns back inside
    f = FunctionMap(_cubic, _cubic_d, _cubic_inv)
    assert check_covering_direct(f, UNIT, UNIT, DIRECT).holds
    vb = check_covering_backward(f, UNIT, UNIT, BACKWARD)
    assert vb.failed_conditions() == ["a1"]
    assert vb.orientation is Orientation.B_PLUS


def test_dp_bound_decides_monotonicity():
    f = LinearMap([[3, 0], [0, 1 / 3]])
    bound = Interval(np.array([[2.0, -0.1], [-0.1, 0.2]]), np.array([[4.0, 0.1], [0.1, 0.4]]))
    v = check_covering_backward(f, UNIT, UNIT, BACKWARD, dp_bound=bound)
    assert v.holds and v.conditions["a1"] is Status.PASS
    g = monotonicity_from_derivative(bound, UNIT.u, UNIT)
    assert float(g.lo[0]) >= 2.0 - 1e-12
    bad = Interval(np.array([[-1.0, 0.0], [0.0, 0.2]]), np.array([[4.0, 0.0], [0.0, 0.4]]))
    assert check_covering_backward(f, UNIT, UNIT, BACKWARD, dp_bound=bad).conditions["a1"] is Status.FAIL


def test_wrong_step_signs_are_rejected():
    f = LinearMap(np.eye(2))
    with pytest.raises(ValueError):
        check_covering_backward(f, UNIT, UNIT, DIRECT)
    with pytest.raises(ValueError):
        check_covering_fuzzy(f, UNIT, UNIT, DIRECT)
    with pytest.raises(ValueError):
        check_covering_fuzzy(f, UNIT, UNIT, BACKWARD, mode="sideways")
    with pytest.raises(ValueError):
        CheckParams(Stage(1, 5, 0.1), Stage(1, 5, 0.1), anchor=(1.0, 0.0))
    with pytest.raises(ValueError):
        Stage(0, 5, 0.1)


def test_degenerate_fuzzy_set_collapses_to_crisp():
    crisp = HSet(stack([Interval(0.2), Interval(0.0)]), [1.0, 0.0], [0.0, 1.0], Branch.PLUS, "N")
    fuzzy = FuzzyHSet(stack([Interval(0.2), Interval(0.0)]), [1.0, 0.0], [0.0, 1.0], Branch.PLUS, "F")
    for M, b in ((np.diag([3.0, 1 / 3]), (-0.4, 0)), (np.diag([3.0, 3.0]), (-0.4, 0))):
        f = LinearMap(M, b)
        vc = check_covering_backward(f, crisp, crisp, BACKWARD)
        vf = check_covering_fuzzy(f, fuzzy, fuzzy, BACKWARD)
        assert [s for s in vc.conditions.values()] == [s for s in vf.conditions.values()]
        assert list(vf.conditions) == ["bf", "af1", "af2", "af3"]
        vd = check_covering_fuzzy(f, fuzzy, fuzzy, DIRECT, mode="direct")
        assert vd.holds == check_covering_direct(f, crisp, crisp, DIRECT).holds
        assert vd.method == "fuzzy-direct"


def test_fuzzy_with_wide_center_and_fixed_point():
    # f(q) = diag(3, 1/3) (q - p) + p has the fixed point p for every p in W
    W = stack([Interval(-0.01, 0.01), Interval(0.0)])
    n = FuzzyHSet(W, [1.0, 0.0], [0.0, 1.0], Branch.PLUS, "H")
    f = LinearMap(np.diag([3.0, 1 / 3]))
    v = check_covering_fuzzy(f, n, n, BACKWARD, fixed_point=stack([Interval(0.0), Interval(0.0)]))
    assert v.holds
    assert any(d.condition == "a2" and d.edge == "fixed-point" for d in v.diagnostics)
    # a crisp target must contain the fixed point box in its interior
    far = HSet(stack([Interval(0.0), Interval(0.0)]), [1.0, 0.0], [0.0, 1.0], Branch.PLUS, "N")
    v2 = check_covering_fuzzy(f, n, far, BACKWARD, fixed_point=stack([Interval(2.0), Interval(0.0)]))
    assert v2.conditions["af2"] is Status.FAIL


def test_symmetry_transports_covering():
    # if f covers N1 => N2 then R f^-1 R covers R(N2) => R(N1)
    M = np.array([[3.0, 0.5], [0.2, 0.4]])
    f = LinearMap(M)
    assert check_covering_backward(f, UNIT, UNIT, BACKWARD).holds
    R = np.diag([1.0, -1.0])
    g = LinearMap(R @ np.linalg.inv(M) @ R)
    ru = r_action(UNIT)
    assert check_covering_backward(g, ru, ru, BACKWARD).holds
    assert check_covering_direct(g, ru, ru, DIRECT).holds


def _frac_window(m):
    # independent oracle: the ratio window in exact rational arithmetic
    l1 = min(abs(Fraction(m.lo[0, 0])), abs(Fraction(m.hi[0, 0])))
    l2 = max(abs(Fraction(m.lo[1, 1])), abs(Fraction(m.hi[1, 1])))
    e1 = max(abs(Fraction(m.lo[0, 1])), abs(Fraction(m.hi[0, 1])))
    e2 = max(abs(Fraction(m.lo[1, 0])), abs(Fraction(m.hi[1, 0])))
    return e1 / (l1 - 1), (1 - l2) / e2


@pytest.mark.parametrize("i", [1, 2])
def test_hyperbolicity_of_paper_derivatives(i):
    m = proof_data().dp_paper(i, "local")
    h = check_hyperbolicity(m)
    assert h.hyperbolic
    lo, hi = _frac_window(m)
    assert Fraction(h.ratio_window[0]) >= lo and Fraction(h.ratio_window[1]) <= hi
    assert float(lo) == pytest.approx(h.ratio_window[0], rel=1e-12)
    assert float(hi) == pytest.approx(h.ratio_window[1], rel=1e-12)
    assert h.admits(1e-2) and not h.admits(10.0)


def test_hyperbolicity_examples():
    assert check_hyperbolicity(Interval(np.diag([2.0, 0.5]))).hyperbolic
    assert not check_hyperbolicity(Interval(np.diag([0.9, 0.5]))).hyperbolic
    assert not check_hyperbolicity(Interval(np.diag([2.0, 1.5]))).hyperbolic
    # large cross terms break the cone condition
    assert not check_hyperbolicity(Interval(np.array([[2.0, 1.0], [1.0, 0.5]]))).hyperbolic


def test_unique_fixed_point():
    d = proof_data()
    assert check_unique_fixed_point(d.dp_paper(1))
    assert check_unique_fixed_point(d.dp_paper(2))
    assert not check_unique_fixed_point(Interval(np.eye(2)))
    assert check_unique_fixed_point(Interval(np.diag([2.0, 0.5])))
