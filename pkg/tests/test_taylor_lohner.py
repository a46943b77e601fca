import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rigor3bp.errors import SingularityError, ValidationFailed
from rigor3bp.interval import Interval
from rigor3bp.lohner import (
    C1Doubleton,
    Doubleton,
    StepParams,
    lohner_c0_step,
    lohner_c1_step,
    rough_enclosure,
)
from rigor3bp.model import SystemParams, field_np, field_program, jacobi, jacobian_np
from rigor3bp.taylor import (
    ProgramBuilder,
    exp_program,
    horner,
    oscillator_program,
    saddle_program,
    square_program,
    taylor_coeffs,
)

MU = 0.0009537


def _rk4(f, z, t, n=400):
    h = t / n
    for _ in range(n):
        k1 = f(z)
        k2 = f(z + 0.5 * h * k1)
        k3 = f(z + 0.5 * h * k2)
        k4 = f(z + h * k3)
        z = z + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return z


def _osc(z):
    return np.stack([z[..., 1], -z[..., 0]], axis=-1)


def _sad(z):
    return np.stack([z[..., 0], -z[..., 1]], axis=-1)


def _pcr(z):
    return field_np(z, MU)


def _contains(iv, pts, slack=0.0):
    return np.all((iv.lo - slack <= pts) & (pts <= iv.hi + slack))


def _run(prog, box, order, step, n_steps):
    s = Doubleton.from_box(box)
    sp = StepParams(order, step)
    for _ in range(n_steps):
        s = lohner_c0_step(prog, s, sp)
    return s


# ------------------------------------------------------------ Taylor coefficients

def test_exp_coefficients_are_inverse_factorials():
    ts = taylor_coeffs(exp_program(), Interval(np.array([[1.0]])), order=8)
    fact = np.cumprod([1.0] + list(range(1, 9)))
    assert _contains(ts.values[0, :, 0], 1.0 / fact)
    assert np.all(ts.values[0, :, 0].width() < 1e-15)


def test_square_coefficients_are_powers():
    # u' = u^2, u(0) = a  =>  u(t) = a / (1 - a t), coefficients a^(k+1)
    a = 0.5
    ts = taylor_coeffs(square_program(), Interval(np.array([[a]])), order=10)
    assert _contains(ts.values[0, :, 0], a ** np.arange(1, 12))


def test_horner_evaluates_polynomial():
    ts = taylor_coeffs(exp_program(), Interval(np.array([[1.0]])), order=20)
    val = horner(ts.values, 0.5)
    assert val[0, 0].contains(np.exp(0.5))


def test_program_builder_pow():
    b = ProgramBuilder(1)
    (u,) = b.state
    prog = b.build([u.pow(-1.5)])
    # u' = u^(-3/2): second coefficient is -3/4 u^(-4)
    ts = taylor_coeffs(prog, Interval(np.array([[2.0]])), order=2)
    assert ts.values[0, 1, 0].contains(2.0 ** -1.5)
    assert ts.values[0, 2, 0].contains(-0.75 * 2.0 ** -4)


def test_pcr3bp_coefficients_match_finite_differences():
    rng = np.random.default_rng(3)
    prog = field_program(SystemParams())
    for _ in range(20):
        z = np.array([rng.uniform(0.2, 0.8), rng.uniform(-0.4, 0.4), rng.normal(), rng.normal()])
        ts = taylor_coeffs(prog, Interval(z.reshape(1, 4)), order=3)
        f = field_np(z, MU)
        g = jacobian_np(z, MU) @ f
        eps = 1e-6

        def jf(w):
            return jacobian_np(w, MU) @ field_np(w, MU)

        g2 = (jf(z + eps * f) - jf(z - eps * f)) / (2 * eps)
        for k, ref in ((1, f), (2, g / 2), (3, g2 / 6)):
            mid = ts.values[0, k].mid()
            assert np.allclose(mid, ref, rtol=1e-5, atol=1e-7), (k, mid, ref)


def test_singular_box_raises_when_strict():
    prog = field_program(SystemParams())
    box = Interval(np.array([[-MU - 1e-3, -1e-3, 0, 0]]), np.array([[-MU + 1e-3, 1e-3, 0, 0]]))
    with np.errstate(all="ignore"):
        with pytest.raises(SingularityError):
            taylor_coeffs(prog, box, order=2)
        ts = taylor_coeffs(prog, box, order=2, strict=False)
    assert not np.all(np.isfinite(ts.values.hi))


# ------------------------------------------------------------ rough enclosures

def test_rough_enclosure_contains_oscillator_flow():
    W = rough_enclosure(oscillator_program(), Interval(np.array([1.0, 0.0])), 0.01)
    for t in np.linspace(0, 0.01, 11):
        assert _contains(W, np.array([np.cos(t), -np.sin(t)]))


def test_rough_enclosure_zero_step_is_identity():
    x = Interval(np.array([1.0, 2.0]))
    W = rough_enclosure(oscillator_program(), x, 0.0)
    assert np.array_equal(W.lo, x.lo) and np.array_equal(W.hi, x.hi)


def test_rough_enclosure_fails_near_primary():
    prog = field_program(SystemParams())
    x = Interval(np.array([1 - MU + 1e-3, 0.0, 0.0, 3.0]))
    with np.errstate(all="ignore"), pytest.raises(ValidationFailed):
        rough_enclosure(prog, x, 1.0)


def test_step_params_validation():
    with pytest.raises(ValueError):
        StepParams(1, 0.1)
    with pytest.raises(ValueError):
        StepParams(5, 0.0)


# ------------------------------------------------------------ C0 Lohner steps

@pytest.mark.parametrize("name", ["oscillator", "saddle", "pcr3bp"])
def test_c0_contains_sampled_trajectories(name):
    prog, f, c, r, step, n = {
        "oscillator": (oscillator_program(), _osc, np.array([1.0, 0.0]), 1e-3, 0.1, 10),
        "saddle": (saddle_program(), _sad, np.array([0.5, 0.5]), 1e-3, 0.1, 10),
        "pcr3bp": (field_program(SystemParams()), _pcr, np.array([0.5, 0.0, 0.0, 0.914]), 1e-6, 0.02, 10),
    }[name]
    box = Interval(c - r, c + r)
    s = _run(prog, box, 10, step, n)
    hull = s.hull()[0]
    rng = np.random.default_rng(0)
    pts = c + rng.uniform(-r, r, size=(100, c.size))
    pts[:4] = c + r * np.array([np.resize([s1, s2], c.size) for s1 in (-1, 1) for s2 in (-1, 1)])
    ends = _rk4(f, pts, step * n, n=2000)
    # corners of a linear flow land on the hull itself, leave room for the RK4 error
    assert _contains(hull, ends, slack=1e-11)


def test_saddle_center_is_accurate():
    s = _run(saddle_program(), Interval(np.array([0.5, 0.5])), 12, 0.1, 10)
    h = s.hull()[0]
    exact = np.array([0.5 * np.e, 0.5 / np.e])
    assert _contains(h, exact)
    assert np.all(h.width() < 1e-12)


def test_backward_then_forward_returns():
    prog = field_program(SystemParams())
    c = np.array([0.5, 0.0, 0.0, 0.914])
    s = _run(prog, Interval(c), 10, -0.05, 10)
    s = _run(prog, s.hull()[0], 10, 0.05, 10)
    assert _contains(s.hull()[0], c)


def test_jacobi_constant_is_kept_over_many_steps():
    p = SystemParams()
    prog = field_program(p)
    c = np.array([0.5, 0.0, 0.0, 0.914])
    c0 = jacobi(p, Interval(c))
    s = Doubleton.from_box(Interval(c))
    sp = StepParams(12, 0.02)
    for _ in range(50):
        s = lohner_c0_step(prog, s, sp)
        assert float(jacobi(p, s.hull()[0]).intersect(c0).width()) >= 0


def test_width_decays_with_step_at_order_rate():
    prog = oscillator_program()
    order = 4
    widths = []
    for h in (0.5, 0.25, 0.125):
        s = lohner_c0_step(prog, Doubleton.from_box(Interval(np.array([1.0, 0.0]))), StepParams(order, h))
        widths.append(float(np.max(s.hull()[0].width())))
    assert widths[0] / widths[1] >= 2 ** order
    assert widths[1] / widths[2] >= 2 ** order


def test_point_and_box_enclosures_overlap():
    prog = oscillator_program()
    box = Interval(np.array([0.9, -0.1]), np.array([1.1, 0.1]))
    sb = _run(prog, box, 8, 0.1, 5).hull()[0]
    sp = _run(prog, Interval(np.array([1.0, 0.0])), 8, 0.1, 5).hull()[0]
    assert sp.subset(sb)


# ------------------------------------------------------------ C1 Lohner steps

def _c1_run(prog, box, order, step, n):
    s = C1Doubleton.identity(Doubleton.from_box(box))
    for _ in range(n):
        s = lohner_c1_step(prog, s, StepParams(order, step))
    return s


def test_c1_identity_at_start():
    s = C1Doubleton.identity(Doubleton.from_box(Interval(np.array([1.0, 0.0]))))
    assert _contains(s.deriv()[0], np.eye(2))


def test_c1_linear_flow_derivative_is_rotation():
    s = _c1_run(oscillator_program(), Interval(np.array([1.0, 0.0])), 10, 0.1, 10)
    t = 1.0
    rot = np.array([[np.cos(t), np.sin(t)], [-np.sin(t), np.cos(t)]])
    assert _contains(s.deriv()[0], rot)


def test_c1_pcr3bp_derivative_contains_finite_differences():
    prog = field_program(SystemParams())
    c = np.array([0.5, 0.0, 0.0, 0.914])
    s = _c1_run(prog, Interval(c), 10, 0.02, 10)
    D = s.deriv()[0]
    eps = 1e-6
    fd = np.empty((4, 4))
    for j in range(4):
        e = np.zeros(4)
        e[j] = eps
        fd[:, j] = (_rk4(_pcr, c + e, 0.2) - _rk4(_pcr, c - e, 0.2)) / (2 * eps)
    lo, hi = D.lo - 1e-6, D.hi + 1e-6
    assert np.all((lo <= fd) & (fd <= hi))
    assert np.all(D.width() < 1e-10)


@settings(max_examples=25, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), st.floats(0.01, 0.3))
def test_oscillator_step_contains_exact_solution(x, v, h):
    s = lohner_c0_step(oscillator_program(), Doubleton.from_box(Interval(np.array([x, v]))), StepParams(8, h))
    exact = np.array([x * np.cos(h) + v * np.sin(h), -x * np.sin(h) + v * np.cos(h)])
    assert _contains(s.hull()[0], exact)
