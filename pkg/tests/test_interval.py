from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rigor3bp.errors import (
    DivByZeroInterval,
    DomainError,
    EmptyIntersection,
    SingularIntervalMatrix,
)
from rigor3bp.interval import (
    Interval,
    dec,
    det2,
    fadd,
    fmatmul,
    fmatvec,
    fmul,
    fsub,
    fsum,
    hull,
    inv2,
    mat_mat,
    mat_vec,
    point_inverse,
    transpose,
)


def test_add_exact_endpoints():
    r = Interval(1, 2) + Interval(3, 4)
    assert (float(r.lo), float(r.hi)) == (4.0, 6.0)


def test_mul_sign_cases():
    r = Interval(-1, 2) * Interval(3, 4)
    assert (float(r.lo), float(r.hi)) == (-4.0, 8.0)


def test_div_one_third_is_tight():
    r = Interval(1.0) / Interval(3.0)
    mpmath.mp.prec = 200
    third = mpmath.mpf(1) / 3
    assert mpmath.mpf(float(r.lo)) < third < mpmath.mpf(float(r.hi))
    assert np.nextafter(np.nextafter(float(r.lo), 1), 1) >= float(r.hi)


def test_div_by_zero_interval():
    with pytest.raises(DivByZeroInterval):
        Interval(1.0) / Interval(-1, 1)


def test_construction_rejects_reversed():
    with pytest.raises(ValueError):
        Interval(2.0, 1.0)
    with pytest.raises(ValueError):
        Interval(np.nan, 1.0)


def test_sqrt_and_domain():
    r = Interval(4, 9).sqrt()
    assert (float(r.lo), float(r.hi)) == (2.0, 3.0)
    with pytest.raises(DomainError):
        Interval(-1, 4).sqrt()


def test_abs_sup_inf_on_dp_entries():
    assert float(dec(["1391.271"]).lo[0]) == pytest.approx(1391.271)
    lam = Interval(dec("1391.271").lo, dec("1392.239").hi)
    assert float(lam.abs_inf()) == float(dec("1391.271").lo)
    eps = Interval(dec("-0.494").lo, dec("0.472").hi)
    assert float(eps.abs_sup()) == float(dec("0.494").hi)
    assert float(Interval(-1, 2).abs_inf()) == 0.0


def test_set_operations():
    assert Interval(0, 1).subset(Interval(-1, 2))
    assert not Interval(0, 1).subset_int(Interval(0, 2))
    with pytest.raises(EmptyIntersection):
        Interval(0, 1).intersect(Interval(2, 3))
    h = hull(Interval(0, 1), Interval(3, 4))
    assert (float(h.lo), float(h.hi)) == (0.0, 4.0)
    assert Interval(0, 1).is_disjoint(Interval(2, 3))
    assert float(Interval(1, 3).mid()) == 2.0
    w = float(Interval(1, 3).width())
    assert 2.0 <= w <= np.nextafter(2.0, 3.0)


def test_dec_encloses_exact_decimal():
    for text in ("0.9208034913207400196", "1.081929486841799903", "6e-14", "0.0009537", "3.03", "7/6e-6"):
        x = dec(text)
        exact = Fraction(7, 6) * Fraction(1, 10 ** 6) if "/" in text else Fraction(text)
        assert Fraction(float(x.lo)) <= exact <= Fraction(float(x.hi))
        assert float(x.hi) <= np.nextafter(float(x.lo), np.inf)


def test_det2_of_paper_dp_minus_identity_is_negative():
    A = Interval([[695.659, 270.3511], [1789.9112, 695.61982]], [[696.1085, 270.4973], [1791.46231, 696.12441]])
    d = det2(A - np.eye(2))
    assert float(d.hi) < 0


def test_det2_identity_and_inv2():
    assert float(det2(Interval(np.eye(2))).lo) == 1.0 == float(det2(Interval(np.eye(2))).hi)
    inv = inv2(Interval(np.diag([2.0, 4.0])))
    assert inv[0, 0].contains(0.5) and inv[1, 1].contains(0.25)
    prod = mat_mat(inv, Interval(np.diag([2.0, 4.0])))
    assert prod.contains(np.eye(2))
    with pytest.raises(SingularIntervalMatrix):
        inv2(Interval([[1.0, 1.0], [1.0, 1.0]]))


def test_point_inverse_encloses_true_inverse():
    M = np.array([[1.0, -1.0], [2.5733011, 2.5733011]])
    inv = point_inverse(M)
    exact = [[Fraction(x) for x in row] for row in M]
    det = exact[0][0] * exact[1][1] - exact[0][1] * exact[1][0]
    true = [[exact[1][1] / det, -exact[0][1] / det], [-exact[1][0] / det, exact[0][0] / det]]
    for i in range(2):
        for j in range(2):
            assert Fraction(float(inv.lo[i, j])) <= true[i][j] <= Fraction(float(inv.hi[i, j]))


def test_mat_vec_point_agrees_with_float():
    rng = np.random.default_rng(1)
    M = rng.normal(size=(2, 2))
    v = rng.normal(size=2)
    r = mat_vec(Interval(M), Interval(v))
    f = M @ v
    assert np.all(r.lo <= f) and np.all(f <= r.hi)
    # one rounding per product and per sum, measured on |M| |v|
    scale = np.abs(M) @ np.abs(v)
    assert np.all(r.hi - r.lo <= 4 * np.spacing(scale))
    t = transpose(Interval(M))
    assert np.array_equal(t.lo, M.T)


# ------------------------------------------------------------ randomized

def _random_intervals(rng, n, scale):
    a = rng.normal(size=n) * scale
    b = a + np.abs(rng.normal(size=n)) * scale * rng.random(n)
    return Interval(a, b)


def _exact(op, x, y):
    x, y = Fraction(x), Fraction(y)
    return {"add": x + y, "sub": x - y, "mul": x * y, "div": x / y}[op]


@pytest.mark.parametrize("op", ["add", "sub", "mul", "div"])
def test_containment_randomized(op):
    # 4 x 25000 = 10^5 cases, checked exactly in rational arithmetic
    rng = np.random.default_rng(["add", "sub", "mul", "div"].index(op))
    n = 25000
    scale = 10.0 ** rng.integers(-8, 8, size=n)
    a = _random_intervals(rng, n, scale)
    b = _random_intervals(rng, n, scale[::-1])
    if op == "div":
        b = Interval(np.where(b.lo > 0, b.lo, 0.5) + 0.25, np.where(b.lo > 0, b.hi, 1.0) + 0.25)
    fn = {"add": lambda p, q: p + q, "sub": lambda p, q: p - q, "mul": lambda p, q: p * q,
          "div": lambda p, q: p / q}[op]
    tight = fn(a, b)
    fast = {"add": fadd, "sub": fsub, "mul": fmul, "div": None}[op]
    loose = fast(a, b) if fast else None
    ta = a.lo + (a.hi - a.lo) * rng.random(n)
    tb = b.lo + (b.hi - b.lo) * rng.random(n)
    ta = np.clip(ta, a.lo, a.hi)
    tb = np.clip(tb, b.lo, b.hi)
    bad = 0
    for i in range(n):
        e = _exact(op, ta[i], tb[i])
        if not (Fraction(float(tight.lo[i])) <= e <= Fraction(float(tight.hi[i]))):
            bad += 1
        if loose is not None and not (Fraction(float(loose.lo[i])) <= e <= Fraction(float(loose.hi[i]))):
            bad += 1
    assert bad == 0


def test_fsum_and_fmatmul_contain_exact():
    rng = np.random.default_rng(7)
    A = rng.normal(size=(50, 3, 3))
    B = rng.normal(size=(50, 3, 3))
    P = fmatmul(Interval(A), Interval(B))
    exact = np.einsum("nij,njk->nik", A, B)
    assert np.all(P.lo <= exact) and np.all(exact <= P.hi)
    for n in range(5):
        for i in range(3):
            for k in range(3):
                e = sum(Fraction(A[n, i, j]) * Fraction(B[n, j, k]) for j in range(3))
                assert Fraction(float(P.lo[n, i, k])) <= e <= Fraction(float(P.hi[n, i, k]))
    s = fsum(Interval(A), axis=-1)
    for n in range(5):
        e = sum(Fraction(x) for x in A[n, 0])
        assert Fraction(float(s.lo[n, 0])) <= e <= Fraction(float(s.hi[n, 0]))
    v = fmatvec(Interval(A), Interval(B[:, 0]))
    assert v.shape == (50, 3)


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@st.composite
def nested(draw):
    a, b = sorted([draw(finite), draw(finite)])
    c = draw(st.floats(a, b))
    d = draw(st.floats(c, b))
    return Interval(a, b), Interval(c, d)


@settings(max_examples=300, deadline=None)
@given(nested(), nested())
def test_isotonicity(xa, yb):
    big_x, small_x = xa
    big_y, small_y = yb
    for fn in (lambda p, q: p + q, lambda p, q: p - q, lambda p, q: p * q, fadd, fsub, fmul):
        assert fn(small_x, small_y).subset(fn(big_x, big_y))
    assert small_x.sqr().subset(big_x.sqr())
    if big_y.lo > 0 or big_y.hi < 0:
        assert (small_x / small_y).subset(big_x / big_y)


@settings(max_examples=200, deadline=None)
@given(finite, finite, finite, finite, finite, finite)
def test_hull_commutative_associative(a, b, c, d, e, f):
    x = Interval(min(a, b), max(a, b))
    y = Interval(min(c, d), max(c, d))
    z = Interval(min(e, f), max(e, f))
    h1 = hull(x, y)
    h2 = hull(y, x)
    assert (h1.lo, h1.hi) == (h2.lo, h2.hi)
    l = hull(hull(x, y), z)
    r = hull(x, hull(y, z))
    assert (l.lo, l.hi) == (r.lo, r.hi)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1e8), st.integers(1, 7))
def test_sqrt_and_pow_contain_exact(x, n):
    r = Interval(x).sqrt()
    assert Fraction(float(r.lo)) ** 2 <= Fraction(x) <= Fraction(float(r.hi)) ** 2
    y = Interval(x / 1e6 + 0.5)
    p = y.pow_int(n)
    e = Fraction(x / 1e6 + 0.5) ** n
    assert Fraction(float(p.lo)) <= e <= Fraction(float(p.hi))
