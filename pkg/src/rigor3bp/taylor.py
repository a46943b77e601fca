"""Taylor coefficients of ODE solutions by automatic differentiation.

A right-hand side is recorded once as a small straight-line program over
power series (``add``, ``mul``, ``sqr``, ``pow`` ...).  The evaluator then
runs the standard recurrences order by order, in interval arithmetic and
batched over many initial conditions at once.

Optionally every series coefficient carries first order partial derivatives
with respect to the initial condition (a "jet": value plus ``n`` partials).
Seeding the partials with a matrix ``V`` yields the coefficients of the
solution of the variational equation started from ``V``, which is what the
C1 Lohner step needs.

Example, the linear equation ``u' = u``::

    b = ProgramBuilder(1)
    (u,) = b.state
    prog = b.build([u])
    ts = taylor_coeffs(prog, Interval(np.array([[1.0]])), order=5)
    ts.values[0, :, 0]     # encloses 1/k!
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import SingularityError
from .interval import Interval, _coerce, _dn, _up, fadd, fmul, fsum

__all__ = ["Program", "ProgramBuilder", "TaylorSeries", "taylor_coeffs", "horner",
           "exp_program", "square_program", "oscillator_program", "saddle_program"]


class _Node:
    __slots__ = ("builder", "idx")

    def __init__(self, builder, idx):
        self.builder = builder
        self.idx = idx

    def _bin(self, kind, other):
        b = self.builder
        if isinstance(other, _Node):
            return b._emit(kind, (self.idx, other.idx))
        c = _coerce(other)
        if kind == "add":
            return b._emit("shift", (self.idx,), c)
        if kind == "sub":
            return b._emit("shift", (self.idx,), -c)
        if kind == "mul":
            return b._emit("scale", (self.idx,), c)
        raise TypeError(kind)

    def __add__(self, other):
        return self._bin("add", other)

    __radd__ = __add__

    def __sub__(self, other):
        return self._bin("sub", other)

    def __rsub__(self, other):
        return (-self)._bin("add", other)

    def __mul__(self, other):
        return self._bin("mul", other)

    __rmul__ = __mul__

    def __neg__(self):
        return self.builder._emit("scale", (self.idx,), _coerce(-1.0))

    def sqr(self):
        return self.builder._emit("sqr", (self.idx,))

    def pow(self, alpha):
        """Real power; ``alpha`` must be an integer or half-integer."""
        alpha = Fraction(alpha).limit_denominator(2)
        return self.builder._emit("pow", (self.idx,), alpha)


@dataclass(frozen=True)
class Program:
    """Straight-line program for a vector field on R^n."""

    n_state: int
    ops: tuple  # (kind, args, param); node i + n_state is the i-th op
    rhs: tuple  # node index of each component of the field

    @property
    def n_nodes(self):
        return self.n_state + len(self.ops)


class ProgramBuilder:
    """Records a vector field as a :class:`Program` via operator overloading."""

    def __init__(self, n_state):
        self.n_state = n_state
        self.ops = []
        self.state = [_Node(self, i) for i in range(n_state)]

    def _emit(self, kind, args, param=None):
        self.ops.append((kind, tuple(args), param))
        return _Node(self, self.n_state + len(self.ops) - 1)

    def build(self, rhs):
        idx = []
        for r in rhs:
            if not isinstance(r, _Node):
                r = self._emit("const", (), _coerce(r))
            idx.append(r.idx)
        return Program(self.n_state, tuple(self.ops), tuple(idx))


@dataclass
class TaylorSeries:
    """Taylor coefficients of a batch of solutions.

    ``coeffs`` has shape ``(B, order+1, n, m)``; ``[..., 0]`` are the values
    of the coefficients and ``[..., 1:]`` (when ``m > 1``) the coefficients of
    the variational solution started from the seeding matrix.
    """

    coeffs: Interval

    @property
    def order(self):
        return self.coeffs.shape[1] - 1

    @property
    def values(self):
        return self.coeffs[..., 0]

    @property
    def partials(self):
        return self.coeffs[..., 1:]


# ------------------------------------------------------------------ jet algebra
# A jet array is an Interval with last axis of size m: value then partials.

def _jmul(a, b):
    if a.shape[-1] == 1:
        return fmul(a, b)
    v = fmul(a[..., :1], b[..., :1])
    p = fadd(fmul(a[..., :1], b[..., 1:]), fmul(a[..., 1:], b[..., :1]))
    return Interval(np.concatenate([v.lo, p.lo], -1), np.concatenate([v.hi, p.hi], -1), check=False)


def _scale(a, c):
    """Multiply a jet array by an interval/point scalar (broadcast)."""
    return fmul(a, c)


def _isqrt(a):
    if (a.lo < 0).any():
        raise SingularityError("sqrt of a negative enclosure")
    return Interval(_dn(np.sqrt(a.lo)), _up(np.sqrt(a.hi)), check=False)


def _irecip(a):
    lo, hi = a.lo, a.hi
    return Interval(_dn(1.0 / hi), _up(1.0 / lo), check=False)


def _ipow_value(a, alpha: Fraction):
    """Enclosure of a**alpha for a positive interval ``a``."""
    if (a.lo <= 0).any():
        raise SingularityError("power of an enclosure touching zero")
    p, q = alpha.numerator, alpha.denominator
    base = _isqrt(a) if q == 2 else a
    n = abs(p)
    out = Interval(np.ones(a.shape), np.ones(a.shape), check=False)
    for _ in range(n):
        out = fmul(out, base)
    if p < 0:
        out = _irecip(out)
    return out


def _sqr_conv(c, k):
    """Coefficient k of the square of the series with coefficients c[:, :k+1]."""
    half = (k + 1) // 2  # pairs j < k - j
    parts = []
    if half:
        a = c[:, :half]
        b = Interval(c.lo[:, k:k - half:-1], c.hi[:, k:k - half:-1], check=False)
        s = fsum(_jmul(a, b), axis=1)
        parts.append(fmul(s, 2.0))
    if k % 2 == 0:
        mid = c[:, k // 2]
        if mid.shape[-1] == 1:
            lo = mid.lo * mid.lo
            hi = mid.hi * mid.hi
            straddle = (mid.lo <= 0) & (mid.hi >= 0)
            sq = Interval(np.where(straddle, 0.0, _dn(np.minimum(lo, hi))), _up(np.maximum(lo, hi)), check=False)
        else:
            sq = _jmul(mid, mid)
        parts.append(sq)
    out = parts[0]
    for p in parts[1:]:
        out = fadd(out, p)
    return out


def _mul_conv(a, b, k):
    bb = Interval(b.lo[:, k::-1] if k else b.lo[:, :1], b.hi[:, k::-1] if k else b.hi[:, :1], check=False)
    return fsum(_jmul(a[:, :k + 1], bb), axis=1)


def taylor_coeffs(prog: Program, x, order: int, seed=None, strict=True) -> TaylorSeries:
    """Taylor coefficients up to ``order`` of the solutions through ``x``.

    Parameters
    ----------
    prog : Program
        The vector field.
    x : Interval, shape (B, n)
        Initial conditions (boxes are allowed).
    order : int
        Highest coefficient computed.
    seed : array_like or Interval, shape (B, n, d) or (n, d), optional
        Initial value of the variational matrix.  When given, coefficients
        carry ``d`` partials each.
    strict : bool
        If true a box touching a singularity raises :class:`SingularityError`;
        otherwise the affected trajectories get non-finite coefficients and
        the caller is expected to mask them out.
    """
    x = _coerce(x)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    B, n = x.shape
    if n != prog.n_state:
        raise ValueError("state dimension mismatch")
    d = 0
    if seed is not None:
        seed = _coerce(seed)
        if seed.ndim == 2:
            seed = Interval(np.broadcast_to(seed.lo, (B,) + seed.shape).copy(),
                            np.broadcast_to(seed.hi, (B,) + seed.shape).copy(), check=False)
        d = seed.shape[-1]
    m = 1 + d
    K = order + 1
    N = prog.n_nodes
    lo = [np.zeros((B, K, m)) for _ in range(N)]
    hi = [np.zeros((B, K, m)) for _ in range(N)]
    for i in range(n):
        lo[i][:, 0, 0] = x.lo[:, i]
        hi[i][:, 0, 0] = x.hi[:, i]
        if d:
            lo[i][:, 0, 1:] = seed.lo[:, i, :]
            hi[i][:, 0, 1:] = seed.hi[:, i, :]

    def series(j):
        return Interval(lo[j], hi[j], check=False)

    aux = {}  # per-node data computed at order 0 (e.g. 1/a_0 for powers)
    for k in range(K):
        if k > 0:
            # state coefficient k from field coefficient k-1
            for i, r in enumerate(prog.rhs):
                c = Interval(lo[r][:, k - 1], hi[r][:, k - 1], check=False)
                if k > 1:
                    c = fmul(c, 1.0 / k) if k in (2, 4, 8, 16) else _div_int(c, k)
                lo[i][:, k] = c.lo
                hi[i][:, k] = c.hi
        if k == K - 1:
            break
        for t, (kind, args, param) in enumerate(prog.ops):
            j = n + t
            if kind == "const":
                if k == 0:
                    lo[j][:, 0, 0] = param.lo
                    hi[j][:, 0, 0] = param.hi
                continue
            if kind == "add":
                a, b = args
                v = fadd(Interval(lo[a][:, k], hi[a][:, k], check=False),
                         Interval(lo[b][:, k], hi[b][:, k], check=False))
            elif kind == "sub":
                a, b = args
                v = fadd(Interval(lo[a][:, k], hi[a][:, k], check=False),
                         Interval(-hi[b][:, k], -lo[b][:, k], check=False))
            elif kind == "shift":
                (a,) = args
                v = Interval(lo[a][:, k], hi[a][:, k], check=False)
                if k == 0:
                    sv = fadd(v[..., 0], param)
                    v = v.copy()
                    v.lo[..., 0] = sv.lo
                    v.hi[..., 0] = sv.hi
            elif kind == "scale":
                (a,) = args
                v = fmul(Interval(lo[a][:, k], hi[a][:, k], check=False), param)
            elif kind == "mul":
                a, b = args
                v = _mul_conv(series(a), series(b), k)
            elif kind == "sqr":
                (a,) = args
                v = _sqr_conv(series(a), k)
            elif kind == "pow":
                (a,) = args
                v = _pow_step(series(a), series(j), k, param, aux, j, strict)
            else:  # pragma: no cover - builder only emits known kinds
                raise ValueError(kind)
            lo[j][:, k] = v.lo
            hi[j][:, k] = v.hi
    coeffs = Interval(np.stack([lo[i] for i in range(n)], axis=2),
                      np.stack([hi[i] for i in range(n)], axis=2), check=False)
    return TaylorSeries(coeffs)


def _div_int(c, k):
    return Interval(_dn(c.lo / k), _up(c.hi / k), check=False)


def _pow_step(a, c, k, alpha, aux, key, strict=True):
    """Coefficient k of c = a**alpha (jets supported)."""
    if k == 0:
        a0 = a[:, 0]
        base = a0[..., 0]
        bad = base.lo <= 0
        if bad.any():
            if strict:
                raise SingularityError("power of an enclosure touching zero")
            base = Interval(np.where(bad, 1.0, base.lo), np.where(bad, 1.0, base.hi), check=False)
        v0 = _ipow_value(base, alpha)
        inv0 = _irecip(base)
        if bad.any():
            v0 = Interval(np.where(bad, -np.inf, v0.lo), np.where(bad, np.inf, v0.hi), check=False)
            inv0 = Interval(np.where(bad, -np.inf, inv0.lo), np.where(bad, np.inf, inv0.hi), check=False)
        aux[key] = inv0
        if a0.shape[-1] == 1:
            return Interval(v0.lo[..., None], v0.hi[..., None], check=False)
        # d(a^alpha) = alpha a^alpha / a * da
        fac = fmul(fmul(v0, inv0), float(alpha))
        p = fmul(a0[..., 1:], Interval(fac.lo[..., None], fac.hi[..., None], check=False))
        return Interval(np.concatenate([v0.lo[..., None], p.lo], -1),
                        np.concatenate([v0.hi[..., None], p.hi], -1), check=False)
    # c_k = 1/(k a_0) sum_{j<k} (alpha (k-j) - j) a_{k-j} c_j
    j = np.arange(k)
    w = float(alpha) * (k - j) - j  # exact (half-integers)
    aa = Interval(a.lo[:, k:0:-1], a.hi[:, k:0:-1], check=False)
    cc = c[:, :k]
    prod = _jmul(aa, cc)
    prod = fmul(prod, w[None, :, None])
    s = _div_int(fsum(prod, axis=1), k)
    inv0 = aux[key]
    if s.shape[-1] == 1:
        return fmul(s, Interval(inv0.lo[..., None], inv0.hi[..., None], check=False))
    # jet division s / a_0 = s * (1/a_0) with d(1/a_0) = -da_0 / a_0^2
    a0 = a[:, 0]
    sq = fmul(inv0, inv0)
    inv_p = fmul(fmul(a0[..., 1:], -1.0), Interval(sq.lo[..., None], sq.hi[..., None], check=False))
    inv_jet = Interval(np.concatenate([inv0.lo[..., None], inv_p.lo], -1),
                       np.concatenate([inv0.hi[..., None], inv_p.hi], -1), check=False)
    return _jmul(s, inv_jet)


def horner(coeffs: Interval, h) -> Interval:
    """Evaluate ``sum_k coeffs[:, k] h**k`` for a batch of (interval) times.

    ``coeffs`` has shape ``(B, K, ...)``; ``h`` is a scalar, an array of
    shape (B,) or an Interval of shape (B,).
    """
    h = _coerce(h)
    K = coeffs.shape[1]
    extra = coeffs.ndim - 2
    if h.ndim == 1:
        h = Interval(h.lo.reshape((-1,) + (1,) * extra), h.hi.reshape((-1,) + (1,) * extra), check=False)
    out = coeffs[:, K - 1]
    for k in range(K - 2, -1, -1):
        out = fadd(fmul(out, h), coeffs[:, k])
    return out


# ------------------------------------------------------------- test programs

def exp_program():
    """u' = u."""
    b = ProgramBuilder(1)
    (u,) = b.state
    return b.build([u * 1.0])


def square_program():
    """u' = u**2 (blows up at t = 1/u0)."""
    b = ProgramBuilder(1)
    (u,) = b.state
    return b.build([u.sqr()])


def oscillator_program():
    """x' = v, v' = -x."""
    b = ProgramBuilder(2)
    x, v = b.state
    return b.build([v * 1.0, -x])


def saddle_program():
    """Linear saddle x' = x, y' = -y."""
    b = ProgramBuilder(2)
    x, y = b.state
    return b.build([x * 1.0, -y])
