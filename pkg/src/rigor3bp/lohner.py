"""Rigorous time stepping with the Lohner algorithm over doubletons.

A doubleton is the set ``{x0 + C r0 + B r : r0 in [r0], r in [r]}`` with a
point center ``x0``, point matrices ``C`` and ``B`` and interval boxes
``r0`` and ``r``.  ``C r0`` carries the (linearly transported) shape of the
initial set, while the accumulated errors sit in ``B r`` with ``B`` kept
orthogonal by a QR factorisation each step.  This controls the wrapping
effect.

Everything is batched: the leading axis of every array indexes independent
trajectories, and each trajectory may use its own (signed) time step.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import ValidationFailed
from .interval import (
    Interval,
    _coerce,
    _dn,
    _up,
    fadd,
    fmatmul,
    fmatvec,
    fmul,
    fsub,
    point_inverse,
)
from .taylor import Program, horner, taylor_coeffs

__all__ = ["StepParams", "Doubleton", "C1Doubleton", "rough_enclosure", "rough_variational",
           "lohner_c0_step", "lohner_c1_step", "c0_step_batch", "c1_step_batch", "field_and_jacobian"]


# infinite enclosures are masked out explicitly; numpy need not warn about them
def _quiet(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kw):
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            return fn(*args, **kw)
    return wrapper


@dataclass(frozen=True)
class StepParams:
    """Order of the Taylor method and the (signed) time step."""

    order: int
    step: float
    rough_inflate: float = 1e-2
    max_retries: int = 20

    def __post_init__(self):
        if self.order < 2:
            raise ValueError("order must be at least 2")
        if float(self.step) == 0.0:
            raise ValueError("step must be nonzero")


@dataclass
class Doubleton:
    """Batch of doubletons ``x0 + C r0 + B r`` (leading axis = batch)."""

    x0: np.ndarray  # (N, n)
    C: np.ndarray  # (N, n, k)
    r0: Interval  # (N, k)
    B: np.ndarray  # (N, n, n)
    r: Interval  # (N, n)

    @classmethod
    def from_box(cls, box):
        """Doubleton of a box: center at the midpoint, radius in ``C r0``."""
        box = _coerce(box)
        if box.ndim == 1:
            box = box.reshape(1, -1)
        N, n = box.shape
        x0 = box.mid()
        C = np.zeros((N, n, n))
        idx = np.arange(n)
        C[:, idx, idx] = box.rad()
        r0 = Interval(-np.ones((N, n)), np.ones((N, n)), check=False)
        eye = np.broadcast_to(np.eye(n), (N, n, n)).copy()
        r = Interval(np.zeros((N, n)), check=False)
        return cls(x0, C, r0, eye, r)

    @property
    def n_batch(self):
        return self.x0.shape[0]

    def hull(self) -> Interval:
        return fadd(fadd(self.x0, fmatvec(self.C, self.r0)), fmatvec(self.B, self.r))

    def take(self, idx):
        return Doubleton(self.x0[idx], self.C[idx], self.r0[idx], self.B[idx], self.r[idx])

    def put(self, idx, other):
        self.x0[idx] = other.x0
        self.C[idx] = other.C
        self.r0[idx] = other.r0
        self.B[idx] = other.B
        self.r[idx] = other.r

    def copy(self):
        return Doubleton(self.x0.copy(), self.C.copy(), self.r0.copy(), self.B.copy(), self.r.copy())


@dataclass
class C1Doubleton:
    """A doubleton together with a derivative enclosure ``D0 + B0 R``."""

    base: Doubleton
    D0: np.ndarray  # (N, n, n)
    B0: np.ndarray  # (N, n, n)
    R: Interval  # (N, n, n)

    @classmethod
    def identity(cls, base: Doubleton):
        N, n = base.x0.shape
        eye = np.broadcast_to(np.eye(n), (N, n, n)).copy()
        return cls(base, eye, eye.copy(), Interval(np.zeros((N, n, n)), check=False))

    def deriv(self) -> Interval:
        return fadd(self.D0, fmatmul(self.B0, self.R))

    def take(self, idx):
        return C1Doubleton(self.base.take(idx), self.D0[idx], self.B0[idx], self.R[idx])

    def put(self, idx, other):
        self.base.put(idx, other.base)
        self.D0[idx] = other.D0
        self.B0[idx] = other.B0
        self.R[idx] = other.R

    def copy(self):
        return C1Doubleton(self.base.copy(), self.D0.copy(), self.B0.copy(), self.R.copy())


# ------------------------------------------------------------ rough enclosures

def _time_box(h):
    h = np.asarray(h, dtype=float)
    return Interval(np.minimum(h, 0.0), np.maximum(h, 0.0), check=False)


def _bcast(iv, nd):
    """Reshape a (N,) interval so it broadcasts against (N, ...) arrays."""
    shape = (-1,) + (1,) * nd
    return Interval(iv.lo.reshape(shape), iv.hi.reshape(shape), check=False)


def field_and_jacobian(prog: Program, box, jac=False):
    """Enclosures of f(box) and optionally Df(box), by one AD pass."""
    ts = taylor_coeffs(prog, box, 1, seed=np.eye(prog.n_state) if jac else None, strict=False)
    f = ts.coeffs[:, 1, :, 0]
    if jac:
        return f, ts.coeffs[:, 1, :, 1:]
    return f


def _finite(iv, axes):
    return np.all(np.isfinite(iv.lo) & np.isfinite(iv.hi), axis=axes)


def _inside(a, b, axes):
    return np.all((b.lo < a.lo) & (a.hi < b.hi), axis=axes)


def _grow(W, V, inflate):
    """Enlarge a failed candidate W after the test image V left it.

    The growth is proportional to how far V got out, so the iteration
    behaves like a damped fixed point iteration, plus a small relative
    inflation of the width.
    """
    excess = np.maximum(np.maximum(W.lo - V.lo, V.hi - W.hi), 0.0)
    axes = tuple(range(1, excess.ndim))
    big = np.max(excess, axis=axes, keepdims=True)
    H = W.hull(V)
    w = H.width()
    pad = inflate * w + 2.0 * excess + 0.1 * big
    return Interval(_dn(H.lo - pad), _up(H.hi + pad), check=False)


@_quiet
def rough_batch(prog: Program, X: Interval, h, inflate=1e-2, max_retries=20, max_halvings=8):
    """Batched rough enclosure of the flow over the time interval [0, h].

    Returns ``(W, h_used, ok)``: for every trajectory with ``ok`` true and
    every ``t`` between 0 and ``h_used`` the solutions through ``X`` at time
    ``t`` lie in ``W``.  ``h_used`` differs from ``h`` only where the step
    had to be halved.
    """
    h = np.array(h, dtype=float).reshape(-1).copy()
    N, n = X.shape
    if h.size == 1 and N > 1:
        h = np.full(N, h[0])
    W_lo = np.array(X.lo)
    W_hi = np.array(X.hi)
    ok = np.zeros(N, dtype=bool)
    todo = np.arange(N)
    for _ in range(max_halvings + 1):
        if todo.size == 0:
            break
        Xs = X[todo]
        T = _bcast(_time_box(h[todo]), 1)
        f0 = field_and_jacobian(prog, Xs)
        Z = fadd(Xs, fmul(T, f0))
        W = Z.hull(Xs)
        w = W.width()
        W = Interval(_dn(W.lo - inflate * w - 1e-14 * np.abs(W.lo) - 1e-300),
                     _up(W.hi + inflate * w + 1e-14 * np.abs(W.hi) + 1e-300), check=False)
        good = np.zeros(todo.size, dtype=bool)
        res_lo = np.array(W.lo)
        res_hi = np.array(W.hi)
        cur = np.arange(todo.size)
        for _ in range(max_retries):
            if cur.size == 0:
                break
            Wc = W[cur]
            V = fadd(Xs[cur], fmul(T[cur], field_and_jacobian(prog, Wc)))
            fin = _finite(V, 1)
            ins = fin & _inside(V, Wc, 1)
            res_lo[cur[ins]] = V.lo[ins]
            res_hi[cur[ins]] = V.hi[ins]
            good[cur[ins]] = True
            # enlarge the failures
            rest = fin & ~ins
            if not rest.any():
                cur = np.empty(0, dtype=int)
                break
            Wr = _grow(Wc[rest], V[rest], inflate)
            W.lo[cur[rest]] = Wr.lo
            W.hi[cur[rest]] = Wr.hi
            cur = cur[rest]
        W_lo[todo[good]] = res_lo[good]
        W_hi[todo[good]] = res_hi[good]
        ok[todo[good]] = True
        todo = todo[~good]
        h[todo] *= 0.5
    return Interval(W_lo, W_hi, check=False), h, ok


def rough_enclosure(prog: Program, x, step, inflate=1e-2, max_retries=20):
    """Enclosure W of the solutions through ``x`` for times between 0 and ``step``.

    Raises :class:`ValidationFailed` when no enclosure for the full step can
    be validated.
    """
    x = _coerce(x)
    single = x.ndim == 1
    X = x.reshape(1, -1) if single else x
    if np.all(np.asarray(step) == 0):
        return x
    W, h, ok = rough_batch(prog, X, step, inflate, max_retries, max_halvings=0)
    if not ok.all():
        raise ValidationFailed("rough enclosure could not be validated")
    return W[0] if single else W


@_quiet
def rough_variational(jacW: Interval, h, inflate=1e-2, max_retries=20):
    """Enclosure of solutions of V' = A(t) V, V(0) = I, A(t) in ``jacW``, on [0, h].

    Returns ``(WV, ok)``.
    """
    N, n, _ = jacW.shape
    T = _bcast(_time_box(h), 2)
    eye = np.broadcast_to(np.eye(n), (N, n, n))
    TA = fmul(T, jacW)
    V = fadd(eye, fmatmul(TA, Interval(eye, eye, check=False)))
    w = V.width()
    W = Interval(_dn(V.lo - inflate * w - 1e-15), _up(V.hi + inflate * w + 1e-15), check=False)
    ok = np.zeros(N, dtype=bool)
    res_lo = np.array(W.lo)
    res_hi = np.array(W.hi)
    cur = np.arange(N)
    for _ in range(max_retries):
        if cur.size == 0:
            break
        Wc = W[cur]
        V = fadd(eye[cur], fmatmul(TA[cur], Wc))
        fin = _finite(V, (1, 2))
        ins = fin & _inside(V, Wc, (1, 2))
        res_lo[cur[ins]] = V.lo[ins]
        res_hi[cur[ins]] = V.hi[ins]
        ok[cur[ins]] = True
        rest = fin & ~ins
        Wr = _grow(Wc[rest], V[rest], inflate)
        W.lo[cur[rest]] = Wr.lo
        W.hi[cur[rest]] = Wr.hi
        cur = cur[rest]
    return Interval(res_lo, res_hi, check=False), ok


# --------------------------------------------------------------- Lohner steps

def _hpow(h, k):
    """Interval enclosure of h**k for a point array h."""
    out = Interval.point(np.ones_like(h))
    for _ in range(k):
        out = fmul(out, h)
    return out


def _orthonormal_frame(A, weights):
    """Q of a QR factorisation of ``A`` with columns sorted by weighted size."""
    size = np.linalg.norm(A, axis=-2) * weights
    perm = np.argsort(-size, axis=-1)
    Ap = np.take_along_axis(A, perm[:, None, :], axis=-1)
    Q, Rm = np.linalg.qr(Ap)
    # fall back to the identity where A is (numerically) rank deficient
    diag = np.abs(np.diagonal(Rm, axis1=-2, axis2=-1))
    bad = ~np.all(diag > 1e-300, axis=-1) | ~np.all(np.isfinite(Q), axis=(-2, -1))
    if bad.any():
        Q[bad] = np.eye(A.shape[-1])
    return Q


def _lohner_update(J, x0, C, r0, B, r, y):
    """Shared doubleton update given the Jacobian enclosure J and y = Phi(x0)+rem."""
    x0n = y.mid()
    JC = fmatmul(J, C)
    Cn = JC.mid()
    JB = fmatmul(J, B)
    Q = _orthonormal_frame(JB.mid(), r.rad())
    Qi = point_inverse(Q)
    err = fadd(fmatvec(fsub(JC, Cn), r0), fsub(y, x0n))
    rn = fadd(fmatvec(fmatmul(Qi, JB), r), fmatvec(Qi, err))
    return x0n, Cn, Q, rn


@_quiet
def c0_step_batch(prog: Program, S: Doubleton, h, order, W=None, inflate=1e-2, max_retries=20):
    """One C0 Lohner step for a batch.

    Returns ``(S_new, h_used, ok, W, series0)`` where ``series0`` are the
    Taylor coefficients (values) at the centers, useful for event location.
    """
    N, n = S.x0.shape
    X = S.hull()
    h = np.array(h, dtype=float).reshape(-1)
    if h.size == 1 and N > 1:
        h = np.full(N, h[0])
    if W is None:
        W, h, ok = rough_batch(prog, X, h, inflate, max_retries)
    else:
        ok = np.ones(N, dtype=bool)
    inputs = Interval(np.concatenate([S.x0, X.lo, W.lo]), np.concatenate([S.x0, X.hi, W.hi]), check=False)
    ts = taylor_coeffs(prog, inputs, order + 1, seed=np.eye(n), strict=False)
    cf = ts.coeffs
    series0 = cf[:N, :order + 1, :, 0]
    phi0 = horner(series0, h)
    J = horner(cf[N:2 * N, :order + 1, :, 1:], h)
    rem = fmul(cf[2 * N:, order + 1, :, 0], _bcast(_hpow(h, order + 1), 1))
    y = fadd(phi0, rem)
    x0n, Cn, Q, rn = _lohner_update(J, S.x0, S.C, S.r0, S.B, S.r, y)
    ok &= _finite(rn, 1) & _finite(y, 1) & np.all(np.isfinite(Cn), axis=(1, 2))
    return Doubleton(x0n, Cn, S.r0, Q, rn), h, ok, W, series0


@_quiet
def c1_step_batch(prog: Program, S: C1Doubleton, h, order, W=None, WV=None, inflate=1e-2, max_retries=20):
    """One C1 Lohner step for a batch.

    Returns ``(S_new, h_used, ok, W, WV, series0)``.
    """
    base = S.base
    N, n = base.x0.shape
    X = base.hull()
    h = np.array(h, dtype=float).reshape(-1)
    if h.size == 1 and N > 1:
        h = np.full(N, h[0])
    ok = np.ones(N, dtype=bool)
    if W is None:
        W, h, ok = rough_batch(prog, X, h, inflate, max_retries)
    if WV is None:
        _, jacW = field_and_jacobian(prog, W, jac=True)
        WV, okv = rough_variational(jacW, h, inflate, max_retries)
        ok &= okv
    eye = np.broadcast_to(np.eye(n), (2 * N, n, n))
    seed_full = Interval(np.concatenate([eye, WV.lo]), np.concatenate([eye, WV.hi]), check=False)
    inputs = Interval(np.concatenate([base.x0, X.lo, W.lo]), np.concatenate([base.x0, X.hi, W.hi]), check=False)
    ts = taylor_coeffs(prog, inputs, order + 1, seed=seed_full, strict=False)
    cf = ts.coeffs
    series0 = cf[:N, :order + 1, :, 0]
    phi0 = horner(series0, h)
    J = horner(cf[N:2 * N, :order + 1, :, 1:], h)
    hp = _hpow(h, order + 1)
    rem = fmul(cf[2 * N:, order + 1, :, 0], _bcast(hp, 1))
    remV = fmul(cf[2 * N:, order + 1, :, 1:], _bcast(hp, 2))
    y = fadd(phi0, rem)
    x0n, Cn, Q, rn = _lohner_update(J, base.x0, base.C, base.r0, base.B, base.r, y)
    J1 = fadd(J, remV)
    JD0 = fmatmul(J1, S.D0)
    D0n = JD0.mid()
    JB0 = fmatmul(J1, S.B0)
    Q0 = _orthonormal_frame(JB0.mid(), np.max(S.R.rad(), axis=-1))
    Q0i = point_inverse(Q0)
    Rn = fadd(fmatmul(fmatmul(Q0i, JB0), S.R), fmatmul(Q0i, fsub(JD0, D0n)))
    ok &= _finite(rn, 1) & _finite(Rn, (1, 2)) & np.all(np.isfinite(D0n), axis=(1, 2))
    return C1Doubleton(Doubleton(x0n, Cn, base.r0, Q, rn), D0n, Q0, Rn), h, ok, W, WV, series0


def lohner_c0_step(prog: Program, s: Doubleton, sp: StepParams) -> Doubleton:
    """Single (possibly batched) C0 Lohner step with fixed step ``sp.step``."""
    out, h, ok, _, _ = c0_step_batch(prog, s, sp.step, sp.order, inflate=sp.rough_inflate,
                                     max_retries=sp.max_retries)
    if not ok.all() or not np.all(h == sp.step):
        raise ValidationFailed("Lohner step failed (rough enclosure or remainder)")
    return out


def lohner_c1_step(prog: Program, s: C1Doubleton, sp: StepParams) -> C1Doubleton:
    out, h, ok, _, _, _ = c1_step_batch(prog, s, sp.step, sp.order, inflate=sp.rough_inflate,
                                        max_retries=sp.max_retries)
    if not ok.all() or not np.all(h == sp.step):
        raise ValidationFailed("Lohner step failed (rough enclosure or remainder)")
    return out
