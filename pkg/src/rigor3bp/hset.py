"""Parallelogram h-sets on a section plane.

An h-set ``t(c, u, s)`` is the parallelogram ``c + [-1,1] u + [-1,1] s`` in
the ``(x, xdot)`` plane together with a designated unstable direction ``u``
(the left and right edges are exit edges) and stable direction ``s`` (the top
and bottom edges are entry edges).  In local coordinates
``(t1, t2) = A^-1 (q - c)`` with ``A = [u s]`` the support is the unit
square, the left side is ``t1 <= -1`` and the right side is ``t1 >= 1``.

The center is an interval pair.  For an ordinary h-set this only absorbs the
rounding of a decimal constant; for a :class:`FuzzyHSet` it is the box ``W``
of admissible centers and every test below is done over all of ``W`` at
once, which is the conservative reading of the fuzzy definitions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum, IntFlag

import numpy as np

from .interval import Interval, _coerce, fadd, fmatvec, point_inverse, stack
from .model import Branch
from .poincare import AffineImage, PlanarSet

__all__ = ["HSet", "FuzzyHSet", "Edge", "Location", "locate", "r_action", "is_r_symmetric",
           "fuzzy_strip_test", "parse_hset"]

_EPS = 2.0 ** -52


class Edge(Enum):
    LE = "le"
    RE = "re"
    TE = "te"
    BE = "be"

    @classmethod
    def parse(cls, text):
        return cls(str(text).strip().lower())

    @property
    def is_vertical(self):
        return self in (Edge.LE, Edge.RE)


class Location(IntFlag):
    """Where an enclosure certainly lies relative to an h-set.

    Several flags may hold at once (a point far to the right but at mid
    height is both ``IN_RIGHT`` and ``IN_STRIP``).  ``STRADDLES`` (no flag)
    is the inconclusive answer.
    """

    STRADDLES = 0
    IN_LEFT = 1
    IN_RIGHT = 2
    IN_SUPPORT_INTERIOR = 4
    IN_STRIP = 8
    IN_TOP_BOTTOM = 16

    @property
    def outside_support(self):
        return bool(self & (Location.IN_LEFT | Location.IN_RIGHT | Location.IN_TOP_BOTTOM))


def locate(t: Interval) -> np.ndarray:
    """Location flags (as an int array) for local coordinates ``t[..., 0:2]``.

    All comparisons are strict so that ties fall to ``STRADDLES``.
    """
    t1lo, t1hi = t.lo[..., 0], t.hi[..., 0]
    t2lo, t2hi = t.lo[..., 1], t.hi[..., 1]
    out = np.zeros(t1lo.shape, dtype=int)
    out |= np.where(t1hi < -1, int(Location.IN_LEFT), 0)
    out |= np.where(t1lo > 1, int(Location.IN_RIGHT), 0)
    strip = (t2lo > -1) & (t2hi < 1)
    out |= np.where(strip, int(Location.IN_STRIP), 0)
    out |= np.where(strip & (t1lo > -1) & (t1hi < 1), int(Location.IN_SUPPORT_INTERIOR), 0)
    out |= np.where((t2hi < -1) | (t2lo > 1), int(Location.IN_TOP_BOTTOM), 0)
    return out


def _fmt(v: float) -> str:
    return repr(float(v))


def _fmt_iv(lo, hi) -> str:
    return _fmt(lo) if lo == hi else f"[{_fmt(lo)},{_fmt(hi)}]"


@dataclass(frozen=True, eq=False)
class HSet:
    """The h-set ``t(c, u, s)`` on the section of the given branch."""

    c: Interval
    u: np.ndarray
    s: np.ndarray
    branch: Branch = Branch.PLUS
    name: str = ""

    def __post_init__(self):
        c = _coerce(self.c)
        if c.shape != (2,):
            raise ValueError("center must be an interval pair")
        u = np.asarray(self.u, dtype=float).reshape(2)
        s = np.asarray(self.s, dtype=float).reshape(2)
        if not np.all(np.isfinite(u)) or not np.all(np.isfinite(s)):
            raise ValueError("u and s must be finite")
        if u[0] * s[1] - u[1] * s[0] == 0:
            raise ValueError("u and s are linearly dependent")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "branch", Branch(self.branch))
        object.__setattr__(self, "_A_inv", point_inverse(self.A))

    # -------------------------------------------------------------- geometry
    @property
    def A(self) -> np.ndarray:
        """The frame matrix with columns ``u`` and ``s``."""
        return np.column_stack([self.u, self.s])

    @property
    def A_inv(self) -> Interval:
        return self._A_inv

    @property
    def is_fuzzy(self):
        return False

    def with_center(self, c):
        return HSet(c, self.u, self.s, self.branch, self.name)

    def to_local(self, q, center=None) -> Interval:
        """Enclosure of ``A^-1 (q - c)`` for an Interval or an AffineImage ``q``."""
        c = self.c if center is None else _coerce(center)
        if isinstance(q, AffineImage):
            return q.local(self.A_inv, c)
        q = _coerce(q)
        shape = q.shape
        flat = q.reshape(-1, 2)
        d = fadd(flat, -c)
        M = Interval(np.broadcast_to(self.A_inv.lo, (flat.shape[0], 2, 2)),
                     np.broadcast_to(self.A_inv.hi, (flat.shape[0], 2, 2)), check=False)
        return fmatvec(M, d).reshape(*shape)

    def from_local(self, t1, t2) -> Interval:
        """Enclosure of ``c + t1 u + t2 s``."""
        t1 = _coerce(t1)
        t2 = _coerce(t2)
        x = self.c[0] + t1 * self.u[0] + t2 * self.s[0]
        xd = self.c[1] + t1 * self.u[1] + t2 * self.s[1]
        return stack([x, xd], -1)

    def classify(self, q, center=None):
        """Location flags of ``q``; a single flag for one pair, else an array."""
        flags = locate(self.to_local(q, center))
        if np.ndim(flags) == 0:
            return Location(int(flags))
        return flags

    # --------------------------------------------------------------- pieces
    def _segments(self, origin: Interval, direction: np.ndarray, grid: int, lo=-1.0, hi=1.0) -> PlanarSet:
        """``grid`` equal pieces of ``origin + [lo, hi] * direction``."""
        if grid < 1:
            raise ValueError("grid must be at least 1")
        k = np.arange(grid)
        a = Interval(float(lo)) + (Interval(2.0 * k + 1) * (float(hi) - float(lo))) / (2.0 * grid)
        half = (float(hi) - float(lo)) / (2.0 * grid)
        gen = direction * half
        # the generator is rounded; its error goes into the center
        err = np.abs(gen) * _EPS + np.abs(direction) * abs(half) * _EPS
        cx = origin[0] + a * direction[0] + Interval(-err[0], err[0])
        cxd = origin[1] + a * direction[1] + Interval(-err[1], err[1])
        center = stack([cx, cxd], -1)
        return PlanarSet(center, np.broadcast_to(gen.reshape(1, 2, 1), (grid, 2, 1)).copy(), self.branch)

    def edge_segments(self, edge, grid: int) -> PlanarSet:
        """The edge cut into ``grid`` equal pieces (thickened by the center box)."""
        e = Edge.parse(edge.value if isinstance(edge, Edge) else edge)
        if e is Edge.LE:
            return self._segments(self.c - self.u, self.s, grid)
        if e is Edge.RE:
            return self._segments(self.c + self.u, self.s, grid)
        if e is Edge.TE:
            return self._segments(self.c + self.s, self.u, grid)
        return self._segments(self.c - self.s, self.u, grid)

    def boundary_segments(self, grids) -> dict:
        """Map edge -> PlanarSet for ``grids`` given as a dict edge -> grid."""
        return {Edge.parse(e.value if isinstance(e, Edge) else e): self.edge_segments(e, g)
                for e, g in grids.items()}

    def horizontal_segments(self, grid: int, center=None) -> PlanarSet:
        """The segment ``c + [-1,1] u`` (the curve gamma) in ``grid`` pieces."""
        c = self.c if center is None else _coerce(center)
        return self._segments(c, self.u, grid)

    def point(self, t1=0.0, t2=0.0, center=None) -> PlanarSet:
        """The single point ``c + t1 u + t2 s`` as a degenerate planar set."""
        n = self if center is None else self.with_center(center)
        q = n.from_local(t1, t2)
        return PlanarSet(q.reshape(1, 2), np.zeros((1, 2, 0)), self.branch)

    def support(self, n_u=1, n_s=1) -> PlanarSet:
        """The support covered by ``n_u x n_s`` parallelogram cells."""
        out = []
        for j in range(n_s):
            b = Interval(-1.0) + Interval(2.0 * j + 1) / n_s
            row = self._segments(self.from_local(0.0, b), self.u, n_u)
            # thicken each piece in the s direction
            gs = self.s / n_s
            err = np.abs(gs) * _EPS * 2
            center = fadd(row.center, Interval(-err, err))
            gens = np.concatenate([row.gens, np.broadcast_to(gs.reshape(1, 2, 1), (n_u, 2, 1))], -1)
            out.append(PlanarSet(center, gens, self.branch))
        return PlanarSet.concat(out)

    def hull(self) -> Interval:
        return self.support().hull()[0]

    # ---------------------------------------------------------- text format
    def to_text(self) -> str:
        c = self.c
        return (f"t(({_fmt_iv(c.lo[0], c.hi[0])},{_fmt_iv(c.lo[1], c.hi[1])}),"
                f"({_fmt(self.u[0])},{_fmt(self.u[1])}),({_fmt(self.s[0])},{_fmt(self.s[1])}))"
                f"@{self.branch.label}")

    def __str__(self):
        return (self.name + "=" if self.name else "") + self.to_text()

    def __repr__(self):
        return f"{type(self).__name__}({self.to_text()!r})"


class FuzzyHSet(HSet):
    """The family ``{t(w, u, s) : w in W}`` handled as one h-set with center ``W``."""

    @property
    def W(self) -> Interval:
        return self.c

    @property
    def is_fuzzy(self):
        return True

    def with_center(self, c):
        return FuzzyHSet(c, self.u, self.s, self.branch, self.name)

    def member(self, w=None) -> HSet:
        """A crisp member ``t(w, u, s)``; by default the midpoint of ``W``."""
        if w is None:
            w = self.W.mid()
        return HSet(w, self.u, self.s, self.branch, self.name)


_NUM = r"\s*([^,()\[\]]+|\[[^\]]+\])\s*"
_PAIR = r"\(" + _NUM + "," + _NUM + r"\)"
_TEXT = re.compile(r"^\s*t\(\s*" + _PAIR + r"\s*,\s*" + _PAIR + r"\s*,\s*" + _PAIR + r"\s*\)\s*@\s*([+-])\s*$")


def _parse_num(text):
    text = text.strip()
    if text.startswith("["):
        lo, hi = text[1:-1].split(",")
        return Interval(float(lo), float(hi))
    return Interval(float(text))


def parse_hset(text: str, fuzzy=False) -> HSet:
    """Inverse of :meth:`HSet.to_text`."""
    m = _TEXT.match(text)
    if not m:
        raise ValueError(f"not an h-set: {text!r}")
    g = m.groups()
    c = stack([_parse_num(g[0]), _parse_num(g[1])])
    u = [float(g[2]), float(g[3])]
    s = [float(g[4]), float(g[5])]
    cls = FuzzyHSet if fuzzy else HSet
    return cls(c, u, s, Branch.parse(g[6]))


def r_action(n: HSet) -> HSet:
    """``R(t(c, u, s)) = t(R(c), R(s), R(u))``; the branch is unchanged."""
    rc = stack([n.c[0], -n.c[1]])

    def r(v):
        return np.array([v[0], -v[1]]) + 0.0

    name = f"R({n.name})" if n.name else ""
    return type(n)(rc, r(n.s), r(n.u), n.branch, name)


def is_r_symmetric(n: HSet) -> bool:
    """True when ``R(c) = c`` and ``R(u) = +-s`` (which makes ``R(|N|) = |N|``)."""
    if not n.c[1].contains_zero():
        return False
    ru = np.array([n.u[0], -n.u[1]])
    return bool(np.array_equal(ru, n.s) or np.array_equal(ru, -n.s))


def fuzzy_strip_test(n2: HSet, q) -> bool:
    """True when ``q`` lies in the strip of every member of ``n2``."""
    flags = n2.classify(q)
    return bool(np.all(np.asarray(flags) & int(Location.IN_STRIP)))

