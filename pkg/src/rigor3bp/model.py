"""The planar circular restricted three body problem in rotating coordinates.

States are ``(x, y, xdot, ydot)``; the equations of motion are

    xddot - 2 ydot = Omega_x,    yddot + 2 xdot = Omega_y,

with the amended potential

    Omega = (x^2 + y^2)/2 + (1-mu)/r1 + mu/r2 + mu(1-mu)/2,

where ``r1`` and ``r2`` are the distances to the Sun at ``(-mu, 0)`` and to
Jupiter at ``(1-mu, 0)``.  The Jacobi integral is
``C = -(xdot^2 + ydot^2) + 2 Omega``.

All functions take :class:`~rigor3bp.interval.Interval` arguments whose last
axis holds the state components, so batches work transparently.  Partial
derivatives of Omega are written out by hand; the Taylor integrator uses the
automatic differentiation program from :func:`field_program` instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import AmbiguousDiscriminant, NegativeDiscriminant, SingularityError
from .interval import Interval, _coerce, dec, stack
from .taylor import Program, ProgramBuilder

__all__ = [
    "Branch", "SystemParams", "SectionPoint", "VarState", "State4", "state4",
    "omega", "omega_grad", "omega_hess", "vector_field", "jacobian",
    "variational_field", "jacobi", "discriminant", "lift", "lift_derivative",
    "sym_r", "field_program", "field_np", "jacobian_np",
]

MU_TEXT = "0.0009537"
C_TEXT = "3.03"


class Branch(IntEnum):
    """Sign of ydot on the section y = 0."""

    PLUS = 1
    MINUS = -1

    @property
    def label(self):
        return "+" if self is Branch.PLUS else "-"

    @classmethod
    def parse(cls, text):
        t = str(text).strip().lower()
        if t in ("+", "plus", "p", "1", "+1"):
            return cls.PLUS
        if t in ("-", "minus", "m", "-1"):
            return cls.MINUS
        raise ValueError(f"unknown branch {text!r}")


@dataclass(frozen=True)
class SystemParams:
    """Mass ratio and Jacobi constant, both as enclosures of decimal values."""

    mu: Interval = field(default_factory=lambda: dec(MU_TEXT))
    jacobi_c: Interval = field(default_factory=lambda: dec(C_TEXT))

    def __post_init__(self):
        mu = _coerce(self.mu)
        c = _coerce(self.jacobi_c)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "jacobi_c", c)
        if not (float(mu.lo) > 0 and float(mu.hi) < 1):
            raise ValueError("mass ratio must lie in (0, 1)")

    @classmethod
    def from_text(cls, mu=MU_TEXT, c=C_TEXT):
        return cls(dec(mu), dec(c))

    @property
    def mu_f(self):
        return float(self.mu.mid())

    @property
    def c_f(self):
        return float(self.jacobi_c.mid())


# A State4 is an Interval whose last axis has length 4: (x, y, xdot, ydot).
State4 = Interval


def state4(x, y, xdot, ydot) -> Interval:
    return stack([_coerce(x), _coerce(y), _coerce(xdot), _coerce(ydot)], axis=-1)


@dataclass(frozen=True)
class SectionPoint:
    """A point (or box) ``(x, xdot)`` on the section y = 0 with its branch."""

    x: Interval
    xdot: Interval
    branch: Branch = Branch.PLUS

    def __post_init__(self):
        object.__setattr__(self, "x", _coerce(self.x))
        object.__setattr__(self, "xdot", _coerce(self.xdot))
        object.__setattr__(self, "branch", Branch(self.branch))

    def as_vector(self) -> Interval:
        return stack([self.x, self.xdot], axis=-1)


@dataclass(frozen=True)
class VarState:
    """A state together with a flow derivative enclosure."""

    base: Interval
    deriv: Interval


# ------------------------------------------------------------------ potential

def _distances(p: SystemParams, x, y):
    x = _coerce(x)
    y = _coerce(y)
    d1 = x + p.mu
    d2 = x - (1 - p.mu)
    y2 = y.sqr()
    s1 = d1.sqr() + y2
    s2 = d2.sqr() + y2
    if (s1.lo <= 0).any() or (s2.lo <= 0).any():
        raise SingularityError("box touches a primary")
    return x, y, d1, d2, y2, s1, s2


def omega(p: SystemParams, x, y) -> Interval:
    """Amended potential over a box."""
    x, y, d1, d2, y2, s1, s2 = _distances(p, x, y)
    one_m = 1 - p.mu
    return (x.sqr() + y2) * 0.5 + one_m / s1.sqrt() + p.mu / s2.sqrt() + p.mu * one_m * 0.5


def _inv_cubes(s1, s2):
    r1 = s1.sqrt()
    r2 = s2.sqrt()
    g1 = 1.0 / (s1 * r1)
    g2 = 1.0 / (s2 * r2)
    return g1, g2


def omega_grad(p: SystemParams, x, y):
    """(Omega_x, Omega_y) over a box."""
    x, y, d1, d2, y2, s1, s2 = _distances(p, x, y)
    one_m = 1 - p.mu
    g1, g2 = _inv_cubes(s1, s2)
    ox = x - one_m * d1 * g1 - p.mu * d2 * g2
    oy = y * (1 - one_m * g1 - p.mu * g2)
    return ox, oy


def omega_hess(p: SystemParams, x, y):
    """(Omega_xx, Omega_xy, Omega_yy) over a box."""
    x, y, d1, d2, y2, s1, s2 = _distances(p, x, y)
    one_m = 1 - p.mu
    g1, g2 = _inv_cubes(s1, s2)
    h1 = g1 / s1
    h2 = g2 / s2
    oxx = 1 - one_m * (g1 - 3 * d1.sqr() * h1) - p.mu * (g2 - 3 * d2.sqr() * h2)
    oyy = 1 - one_m * (g1 - 3 * y2 * h1) - p.mu * (g2 - 3 * y2 * h2)
    oxy = 3 * y * (one_m * d1 * h1 + p.mu * d2 * h2)
    return oxx, oxy, oyy


def vector_field(p: SystemParams, s) -> Interval:
    """Enclosure of (xdot, ydot, Omega_x + 2 ydot, Omega_y - 2 xdot)."""
    s = _coerce(s)
    x, y, xd, yd = s[..., 0], s[..., 1], s[..., 2], s[..., 3]
    ox, oy = omega_grad(p, x, y)
    return stack([xd, yd, ox + 2 * yd, oy - 2 * xd], axis=-1)


def jacobian(p: SystemParams, s) -> Interval:
    """Enclosure of the 4x4 Jacobian of :func:`vector_field`."""
    s = _coerce(s)
    oxx, oxy, oyy = omega_hess(p, s[..., 0], s[..., 1])
    zero = Interval(np.zeros(oxx.shape), check=False)
    one = zero + 1.0
    two = zero + 2.0
    rows = [
        stack([zero, zero, one, zero], -1),
        stack([zero, zero, zero, one], -1),
        stack([oxx, oxy, zero, two], -1),
        stack([oxy, oyy, -two, zero], -1),
    ]
    return stack(rows, -2)


def variational_field(p: SystemParams, v: VarState):
    """Right-hand side of the variational system: (f(x), Df(x) D)."""
    return vector_field(p, v.base), jacobian(p, v.base) @ _coerce(v.deriv)


def jacobi(p: SystemParams, s) -> Interval:
    s = _coerce(s)
    om = omega(p, s[..., 0], s[..., 1])
    return om * 2 - (s[..., 2].sqr() + s[..., 3].sqr())


# ---------------------------------------------------------------- the section

def discriminant(p: SystemParams, x, xdot) -> Interval:
    """2 Omega(x, 0) - xdot^2 - C, whose square root is |ydot| on the section."""
    x = _coerce(x)
    zero = Interval(np.zeros(x.shape), check=False)
    return omega(p, x, zero) * 2 - _coerce(xdot).sqr() - p.jacobi_c


def _branch_sqrt(disc, branch):
    if (disc.hi < 0).any():
        raise NegativeDiscriminant("point is outside the Hill region at this energy")
    if (disc.lo <= 0).any():
        raise AmbiguousDiscriminant("discriminant enclosure reaches zero")
    r = disc.sqrt()
    return r if Branch(branch) == Branch.PLUS else -r


def lift(p: SystemParams, q: SectionPoint) -> Interval:
    """Lift a section point to the state ``(x, 0, xdot, +-sqrt(...))``."""
    yd = _branch_sqrt(discriminant(p, q.x, q.xdot), q.branch)
    zero = Interval(np.zeros(q.x.shape), check=False)
    return stack([q.x, zero, q.xdot, yd], axis=-1)


def lift_derivative(p: SystemParams, x, xdot, branch) -> Interval:
    """4x2 derivative of the lift, the last row being (Omega_x/ydot, -xdot/ydot)."""
    x = _coerce(x)
    xdot = _coerce(xdot)
    yd = _branch_sqrt(discriminant(p, x, xdot), branch)
    zero = Interval(np.zeros(x.shape), check=False)
    ox, _ = omega_grad(p, x, zero)
    one = zero + 1.0
    rows = [
        stack([one, zero], -1),
        stack([zero, zero], -1),
        stack([zero, one], -1),
        stack([ox / yd, -xdot / yd], -1),
    ]
    return stack(rows, -2)


def sym_r(obj):
    """The reversing symmetry R(x, y, xdot, ydot) = (x, -y, -xdot, ydot).

    On a :class:`SectionPoint` this is ``(x, xdot) -> (x, -xdot)`` with the
    branch kept.
    """
    if isinstance(obj, SectionPoint):
        return SectionPoint(obj.x, -obj.xdot, obj.branch)
    s = _coerce(obj)
    return stack([s[..., 0], -s[..., 1], -s[..., 2], s[..., 3]], axis=-1)


# ----------------------------------------------------- integrator interfaces

def field_program(p: SystemParams) -> Program:
    """The vector field as a program for the Taylor series evaluator."""
    b = ProgramBuilder(4)
    x, y, xd, yd = b.state
    one_m = 1 - p.mu
    d1 = x + p.mu
    d2 = x - one_m
    y2 = y.sqr()
    g1 = (d1.sqr() + y2).pow(-1.5)
    g2 = (d2.sqr() + y2).pow(-1.5)
    ox = x - (d1 * g1) * one_m - (d2 * g2) * p.mu
    oy = y - (y * (g1 * one_m + g2 * p.mu))
    return b.build([xd, yd, ox + 2.0 * yd, oy - 2.0 * xd])


def field_np(z, mu):
    """Floating point vector field for plain numerical integration."""
    z = np.asarray(z, dtype=float)
    x, y, xd, yd = z[..., 0], z[..., 1], z[..., 2], z[..., 3]
    d1 = x + mu
    d2 = x - 1 + mu
    r1 = np.sqrt(d1 * d1 + y * y)
    r2 = np.sqrt(d2 * d2 + y * y)
    g1 = (1 - mu) / r1 ** 3
    g2 = mu / r2 ** 3
    ox = x - g1 * d1 - g2 * d2
    oy = y - g1 * y - g2 * y
    return np.stack([xd, yd, ox + 2 * yd, oy - 2 * xd], axis=-1)


def jacobian_np(z, mu):
    z = np.asarray(z, dtype=float)
    x, y = z[0], z[1]
    d1 = x + mu
    d2 = x - 1 + mu
    s1 = d1 * d1 + y * y
    s2 = d2 * d2 + y * y
    g1 = s1 ** -1.5
    g2 = s2 ** -1.5
    h1 = g1 / s1
    h2 = g2 / s2
    oxx = 1 - (1 - mu) * (g1 - 3 * d1 * d1 * h1) - mu * (g2 - 3 * d2 * d2 * h2)
    oyy = 1 - (1 - mu) * (g1 - 3 * y * y * h1) - mu * (g2 - 3 * y * y * h2)
    oxy = 3 * y * ((1 - mu) * d1 * h1 + mu * d2 * h2)
    return np.array([[0, 0, 1, 0], [0, 0, 0, 1], [oxx, oxy, 0, 2], [oxy, oyy, -2, 0]], dtype=float)
