"""Vectorised interval arithmetic with outward rounding.

An :class:`Interval` holds two float64 arrays ``lo`` and ``hi`` of the same
shape, so a single object can represent a scalar interval, an interval vector,
an interval matrix or a whole batch of them.  Every operation returns an
enclosure of the exact real result.

Two flavours of rounding are used:

* The Python operators (``+``, ``*``, ``sqrt`` ...) are *tight*: when the
  floating point result of an endpoint computation is exact the endpoint is
  kept, otherwise it is moved one ulp outward.  Exactness is detected with
  error-free transformations (TwoSum, Dekker's TwoProduct), so
  ``[1,2] + [3,4]`` is exactly ``[4,6]``.
* The module level ``f*`` kernels (``fmul``, ``fadd``, ``fsum``, ``fmatmul``)
  always widen by one ulp.  They are cheaper and are what the integrator uses.

Numbers given as decimal strings are converted to the smallest machine
interval containing them (see :func:`dec`).
"""

from __future__ import annotations

from decimal import Decimal
from fractions import Fraction

import numpy as np

from .errors import (
    DivByZeroInterval,
    DomainError,
    EmptyIntersection,
    SingularIntervalMatrix,
)

__all__ = [
    "Interval",
    "dec",
    "iv",
    "hull",
    "intersect",
    "fadd",
    "fsub",
    "fmul",
    "fdiv",
    "fsqr",
    "fsum",
    "fmatmul",
    "fmatvec",
    "mat_vec",
    "mat_mat",
    "det2",
    "inv2",
    "transpose",
    "point_inverse",
    "stack",
]

_INF = np.inf
_U = 2.0 ** -53
_SPLIT = 134217729.0  # 2**27 + 1
_BIG = 2.0 ** 995  # above this Dekker splitting may overflow


def _dn(x):
    return np.nextafter(x, -_INF)


def _up(x):
    return np.nextafter(x, _INF)


def _two_sum_err(a, b, s):
    """Exact error ``(a + b) - s`` of the rounded sum ``s``."""
    bb = s - a
    return (a - (s - bb)) + (b - bb)


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod_err(a, b, p):
    """Exact error ``a*b - p`` of the rounded product ``p`` (Dekker)."""
    ah, al = _split(a)
    bh, bl = _split(b)
    return al * bl - (((p - ah * bh) - al * bh) - ah * bl)


def _prod_bounds(a, b):
    """Tight lower and upper bounds of the exact product ``a*b``."""
    with np.errstate(all="ignore"):
        p = a * b
        e = _two_prod_err(a, b, p)
    # fall back to plain widening where Dekker is not reliable
    unsafe = ~np.isfinite(e) | (np.abs(p) > _BIG) | ((p != 0) & (np.abs(p) < 2.0 ** -960))
    lo = np.where(unsafe | (e < 0), _dn(p), p)
    hi = np.where(unsafe | (e > 0), _up(p), p)
    return lo, hi


def _as_float_array(x):
    return np.asarray(x, dtype=np.float64)


class Interval:
    """Array of closed real intervals ``[lo, hi]``.

    >>> Interval(1, 2) + Interval(3, 4)
    Interval([4.0, 6.0])
    """

    __slots__ = ("lo", "hi")
    __array_ufunc__ = None  # make numpy defer to our reflected operators

    def __init__(self, lo, hi=None, *, check=True):
        if isinstance(lo, Interval):
            self.lo, self.hi = lo.lo, lo.hi
            return
        lo = _as_float_array(lo)
        hi = lo if hi is None else _as_float_array(hi)
        if lo.shape != hi.shape:
            lo, hi = np.broadcast_arrays(lo, hi)
            lo, hi = lo.copy(), hi.copy()
        if check:
            if np.isnan(lo).any() or np.isnan(hi).any():
                raise ValueError("interval endpoints must not be NaN")
            if (lo > hi).any():
                raise ValueError("interval with lo > hi")
        self.lo = lo
        self.hi = hi

    # ------------------------------------------------------------------ basics
    @classmethod
    def point(cls, x):
        x = _as_float_array(x)
        return cls(x, x.copy(), check=False)

    @classmethod
    def from_mid_rad(cls, mid, rad):
        mid = _as_float_array(mid)
        rad = _as_float_array(rad)
        return cls(_dn(mid - rad), _up(mid + rad), check=False)

    @classmethod
    def symmetric(cls, r):
        """The interval ``[-r, r]``."""
        r = _as_float_array(r)
        return cls(-r, r.copy(), check=False)

    @classmethod
    def empty_like_shape(cls, shape):
        z = np.zeros(shape)
        return cls(z, z.copy(), check=False)

    @property
    def shape(self):
        return self.lo.shape

    @property
    def ndim(self):
        return self.lo.ndim

    @property
    def size(self):
        return self.lo.size

    def __len__(self):
        return len(self.lo)

    def __getitem__(self, idx):
        return Interval(self.lo[idx], self.hi[idx], check=False)

    def __setitem__(self, idx, value):
        value = _coerce(value)
        self.lo[idx] = value.lo
        self.hi[idx] = value.hi

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def copy(self):
        return Interval(self.lo.copy(), self.hi.copy(), check=False)

    def reshape(self, *shape):
        return Interval(self.lo.reshape(*shape), self.hi.reshape(*shape), check=False)

    def swapaxes(self, a, b):
        return Interval(np.swapaxes(self.lo, a, b), np.swapaxes(self.hi, a, b), check=False)

    @property
    def T(self):
        return Interval(self.lo.T, self.hi.T, check=False)

    def __repr__(self):
        if self.ndim == 0:
            return f"Interval([{float(self.lo)!r}, {float(self.hi)!r}])"
        return f"Interval(lo={self.lo!r}, hi={self.hi!r})"

    def __str__(self):
        if self.ndim == 0:
            return f"[{float(self.lo):.17g}, {float(self.hi):.17g}]"
        flat = [f"[{a:.17g}, {b:.17g}]" for a, b in zip(self.lo.ravel(), self.hi.ravel())]
        return "(" + ", ".join(flat) + ")"

    # -------------------------------------------------------------- arithmetic
    def __neg__(self):
        return Interval(-self.hi, -self.lo, check=False)

    def __pos__(self):
        return self

    def __add__(self, other):
        other = _coerce(other)
        with np.errstate(all="ignore"):
            slo = self.lo + other.lo
            shi = self.hi + other.hi
            elo = _two_sum_err(self.lo, other.lo, slo)
            ehi = _two_sum_err(self.hi, other.hi, shi)
        lo = np.where((elo < 0) | np.isnan(elo) & np.isfinite(slo), _dn(slo), slo)
        hi = np.where((ehi > 0) | np.isnan(ehi) & np.isfinite(shi), _up(shi), shi)
        return Interval(lo, hi, check=False)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        a, b, c, d = self.lo, self.hi, other.lo, other.hi
        l1, h1 = _prod_bounds(a, c)
        l2, h2 = _prod_bounds(a, d)
        l3, h3 = _prod_bounds(b, c)
        l4, h4 = _prod_bounds(b, d)
        lo = np.minimum(np.minimum(l1, l2), np.minimum(l3, l4))
        hi = np.maximum(np.maximum(h1, h2), np.maximum(h3, h4))
        return Interval(lo, hi, check=False)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if ((other.lo <= 0) & (other.hi >= 0)).any():
            raise DivByZeroInterval("divisor interval contains zero")
        cands_lo = []
        cands_hi = []
        for num in (self.lo, self.hi):
            for den in (other.lo, other.hi):
                with np.errstate(all="ignore"):
                    q = num / den
                    p = q * den
                    e = _two_prod_err(q, den, p)
                    r = (num - p) - e
                unsafe = ~np.isfinite(r) | (np.abs(num) > _BIG) | (np.abs(den) > _BIG) | (
                    (q != 0) & (np.abs(q) < 2.0 ** -960)) | ((num != 0) & (np.abs(num) < 2.0 ** -960))
                direction = np.sign(r) * np.sign(den)
                cands_lo.append(np.where(unsafe | (direction < 0), _dn(q), q))
                cands_hi.append(np.where(unsafe | (direction > 0), _up(q), q))
        lo = np.minimum(np.minimum(cands_lo[0], cands_lo[1]), np.minimum(cands_lo[2], cands_lo[3]))
        hi = np.maximum(np.maximum(cands_hi[0], cands_hi[1]), np.maximum(cands_hi[2], cands_hi[3]))
        return Interval(lo, hi, check=False)

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, n):
        return self.pow_int(n)

    def __matmul__(self, other):
        return fmatmul(self, _coerce(other))

    def __rmatmul__(self, other):
        return fmatmul(_coerce(other), self)

    # ---------------------------------------------------- elementary functions
    def sqr(self):
        """Square; unlike ``x*x`` the result never has a negative part."""
        alo, ahi = _prod_bounds(self.lo, self.lo)
        blo, bhi = _prod_bounds(self.hi, self.hi)
        straddle = (self.lo <= 0) & (self.hi >= 0)
        lo = np.where(straddle, 0.0, np.minimum(alo, blo))
        hi = np.maximum(ahi, bhi)
        return Interval(lo, hi, check=False)

    def sqrt(self):
        if (self.lo < 0).any():
            raise DomainError("sqrt of an interval with negative part")
        lo = _sqrt_bound(self.lo, lower=True)
        hi = _sqrt_bound(self.hi, lower=False)
        return Interval(lo, hi, check=False)

    def pow_int(self, n):
        n = int(n)
        if n == 0:
            return Interval(np.ones(self.shape), np.ones(self.shape), check=False)
        if n < 0:
            return 1.0 / self.pow_int(-n)
        if n % 2 == 0:
            base = self.sqr()
            out = base
            for _ in range(n // 2 - 1):
                out = out * base
            return out
        out = self
        for _ in range(n - 1):
            out = out * self
        if n > 1:
            # odd powers are monotone; tighten with endpoint powers
            lo, hi = self.lo, self.hi
            with np.errstate(all="ignore"):
                plo = Interval.point(lo)
                phi = Interval.point(hi)
                for _ in range(n - 1):
                    plo = plo * lo
                    phi = phi * hi
            out = Interval(np.maximum(out.lo, plo.lo), np.minimum(out.hi, phi.hi), check=False)
        return out

    def abs(self):
        lo = np.where((self.lo <= 0) & (self.hi >= 0), 0.0, np.minimum(np.abs(self.lo), np.abs(self.hi)))
        hi = np.maximum(np.abs(self.lo), np.abs(self.hi))
        return Interval(lo, hi, check=False)

    def abs_sup(self):
        """max |x| over the interval (the magnitude)."""
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def abs_inf(self):
        """min |x| over the interval (the mignitude); 0 if it contains 0."""
        return np.where((self.lo <= 0) & (self.hi >= 0), 0.0, np.minimum(np.abs(self.lo), np.abs(self.hi)))

    # -------------------------------------------------------- set operations
    def hull(self, other):
        other = _coerce(other)
        return Interval(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi), check=False)

    def intersect(self, other):
        other = _coerce(other)
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        if (lo > hi).any():
            raise EmptyIntersection("intervals are disjoint")
        return Interval(lo, hi, check=False)

    def subset(self, other):
        """True when every component lies in the matching component of ``other``."""
        other = _coerce(other)
        return bool(np.all((other.lo <= self.lo) & (self.hi <= other.hi)))

    def subset_int(self, other):
        """Strict version of :meth:`subset` (interior inclusion)."""
        other = _coerce(other)
        return bool(np.all((other.lo < self.lo) & (self.hi < other.hi)))

    def contains(self, x):
        x = _as_float_array(x)
        return bool(np.all((self.lo <= x) & (x <= self.hi)))

    def contains_zero(self):
        return (self.lo <= 0) & (self.hi >= 0)

    def is_disjoint(self, other):
        """True when at least one component pair is disjoint (so the boxes are)."""
        other = _coerce(other)
        return bool(np.any((self.hi < other.lo) | (other.hi < self.lo)))

    def mid(self):
        with np.errstate(over="ignore"):
            m = 0.5 * self.lo + 0.5 * self.hi
        return m

    def rad(self):
        """Upper bound of the radius about :meth:`mid`."""
        m = self.mid()
        return np.maximum(_up(m - self.lo), _up(self.hi - m))

    def width(self):
        """Upper bound of ``hi - lo``."""
        return _up(self.hi - self.lo)

    diameter = width

    def split_mid(self):
        """Return ``(mid, rad)`` with ``self`` contained in ``mid + [-rad, rad]``."""
        return self.mid(), self.rad()

    def inflate(self, abs_eps=0.0, rel=0.0):
        w = self.width() * rel + abs_eps
        return Interval(_dn(self.lo - w), _up(self.hi + w), check=False)

    def sum(self, axis=None):
        return fsum(self, axis)

    def tolist(self):
        return [(float(a), float(b)) for a, b in zip(self.lo.ravel(), self.hi.ravel())]


def _sqrt_bound(x, lower):
    s = np.sqrt(x)
    with np.errstate(all="ignore"):
        p = s * s
        e = _two_prod_err(s, s, p)
        r = (x - p) - e  # sign of x - s^2
    unsafe = ~np.isfinite(r) | (x > _BIG) | ((x != 0) & (x < 2.0 ** -900))
    if lower:
        return np.where(unsafe | (r < 0), _dn(s), s)
    return np.where(unsafe | (r > 0), _up(s), s)


def _coerce(x):
    if isinstance(x, Interval):
        return x
    if isinstance(x, (str, Decimal, Fraction)):
        return dec(x)
    x = _as_float_array(x)
    return Interval(x, x, check=False)


def iv(lo, hi=None):
    """Shorthand constructor; ``iv(a)`` is the degenerate interval ``[a, a]``."""
    return Interval(lo, hi)


def _fraction_enclosure(q: Fraction):
    f = float(q)
    fq = Fraction(f)
    if fq == q:
        return f, f
    if fq < q:
        return f, float(np.nextafter(f, _INF))
    return float(np.nextafter(f, -_INF)), f


def _parse_exact(text) -> Fraction:
    if isinstance(text, Fraction):
        return text
    if isinstance(text, Decimal):
        return Fraction(text)
    if isinstance(text, (int,)):
        return Fraction(text)
    if isinstance(text, float):
        return Fraction(text)
    s = str(text).strip().replace(" ", "")
    # simple rational products such as "7/6e-6" or "33/4e-8"
    if "/" in s:
        num, den = s.split("/", 1)
        # a trailing exponent on the denominator scales the whole quotient
        mant, _, exp = den.partition("e")
        q = _parse_exact(num) / Fraction(Decimal(mant))
        if exp:
            q *= Fraction(Decimal("1e" + exp))
        return q
    return Fraction(Decimal(s))


def dec(value) -> Interval:
    """Smallest machine interval containing an exactly given number.

    ``value`` may be a decimal string (``"0.9208034913207400196"``), a simple
    quotient (``"7/6e-6"`` meaning 7/6 * 1e-6), a Fraction or Decimal, or a
    sequence of those (giving a vector).
    """
    if isinstance(value, (list, tuple, np.ndarray)):
        parts = [dec(v) for v in value]
        return Interval(np.array([float(p.lo) for p in parts]), np.array([float(p.hi) for p in parts]))
    lo, hi = _fraction_enclosure(_parse_exact(value))
    return Interval(lo, hi)


def stack(items, axis=0) -> Interval:
    items = [_coerce(i) for i in items]
    return Interval(np.stack([i.lo for i in items], axis), np.stack([i.hi for i in items], axis), check=False)


def hull(a, b):
    return _coerce(a).hull(b)


def intersect(a, b):
    return _coerce(a).intersect(b)


# ------------------------------------------------------------------ fast kernel
# These always round outward by one ulp; they accept Interval or ndarray.

def _lohi(x):
    if isinstance(x, Interval):
        return x.lo, x.hi
    x = _as_float_array(x)
    return x, x


def fadd(a, b):
    alo, ahi = _lohi(a)
    blo, bhi = _lohi(b)
    return Interval(_dn(alo + blo), _up(ahi + bhi), check=False)


def fsub(a, b):
    alo, ahi = _lohi(a)
    blo, bhi = _lohi(b)
    return Interval(_dn(alo - bhi), _up(ahi - blo), check=False)


def fmul(a, b):
    """Interval product; a point operand (ndarray) takes a cheaper path."""
    if not isinstance(a, Interval) and not isinstance(b, Interval):
        p = np.multiply(a, b)
        return Interval(_dn(p), _up(p), check=False)
    if not isinstance(a, Interval):
        a, b = b, a
    if not isinstance(b, Interval):
        b = _as_float_array(b)
        p1 = a.lo * b
        p2 = a.hi * b
        return Interval(_dn(np.minimum(p1, p2)), _up(np.maximum(p1, p2)), check=False)
    alo, ahi, blo, bhi = a.lo, a.hi, b.lo, b.hi
    p1 = alo * blo
    p2 = alo * bhi
    p3 = ahi * blo
    p4 = ahi * bhi
    lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
    hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
    return Interval(_dn(lo), _up(hi), check=False)


def fsqr(a):
    p1 = a.lo * a.lo
    p2 = a.hi * a.hi
    lo = np.where((a.lo <= 0) & (a.hi >= 0), 0.0, _dn(np.minimum(p1, p2)))
    return Interval(lo, _up(np.maximum(p1, p2)), check=False)


def fdiv(a, b):
    alo, ahi = _lohi(a)
    blo, bhi = _lohi(b)
    if ((blo <= 0) & (bhi >= 0)).any():
        raise DivByZeroInterval("divisor interval contains zero")
    q1 = alo / blo
    q2 = alo / bhi
    q3 = ahi / blo
    q4 = ahi / bhi
    lo = np.minimum(np.minimum(q1, q2), np.minimum(q3, q4))
    hi = np.maximum(np.maximum(q1, q2), np.maximum(q3, q4))
    return Interval(_dn(lo), _up(hi), check=False)


def _sum_bound(x, axis):
    """Rigorous enclosure of the sum of float array ``x`` along ``axis``."""
    n = x.shape[axis] if axis is not None else x.size
    s = np.sum(x, axis=axis)
    if n <= 1:
        return s, s
    a = np.sum(np.abs(x), axis=axis)
    # |fl(sum) - sum| <= gamma_{n-1} * sum|x|, with slack for rounding of a
    c = (n + 2) * _U * 1.0001
    err = _up(c * a)
    return _dn(s - err), _up(s + err)


def fsum(x, axis=None):
    """Rigorous interval sum along ``axis`` (all axes if None)."""
    x = _coerce(x)
    lo, _ = _sum_bound(x.lo, axis)
    _, hi = _sum_bound(x.hi, axis)
    return Interval(lo, hi, check=False)


def fmatmul(a, b):
    """Interval matrix product with batch broadcasting, like ``np.matmul``.

    Either operand may be an ndarray (treated as a point matrix).  1-D
    operands follow the ``np.matmul`` conventions.
    """
    a_iv = isinstance(a, Interval)
    b_iv = isinstance(b, Interval)
    a_shape = a.shape if a_iv else np.shape(a)
    b_shape = b.shape if b_iv else np.shape(b)
    squeeze_a = len(a_shape) == 1
    squeeze_b = len(b_shape) == 1

    def expand(x, is_iv, left):
        if is_iv:
            lo, hi = x.lo, x.hi
        else:
            lo = hi = _as_float_array(x)
        if lo.ndim == 1:
            lo = lo[None, :] if left else lo[:, None]
            hi = hi[None, :] if left else hi[:, None]
        return lo, hi

    alo, ahi = expand(a, a_iv, True)
    blo, bhi = expand(b, b_iv, False)
    # (..., n, k, 1) * (..., 1, k, m)
    A = Interval(alo[..., :, :, None], ahi[..., :, :, None], check=False) if a_iv else alo[..., :, :, None]
    B = Interval(blo[..., None, :, :], bhi[..., None, :, :], check=False) if b_iv else blo[..., None, :, :]
    prod = fmul(A, B)
    out = fsum(prod, axis=-2)
    if squeeze_a:
        out = out[..., 0, :]
    if squeeze_b:
        out = out[..., 0]
    return out


def fmatvec(m, v):
    """Batched matrix-vector product: ``m`` (..., n, k) times ``v`` (..., k)."""
    if isinstance(v, Interval):
        V = Interval(v.lo[..., None, :], v.hi[..., None, :], check=False)
    else:
        V = _as_float_array(v)[..., None, :]
    if isinstance(m, Interval):
        return fsum(fmul(m, V), axis=-1)
    return fsum(fmul(_as_float_array(m), V), axis=-1)


def mat_vec(m, v):
    """Matrix-vector product with the tight operators (for small matrices)."""
    m = _coerce(m)
    v = _coerce(v)
    out = m[..., :, 0] * v[..., None, 0]
    for k in range(1, m.shape[-1]):
        out = out + m[..., :, k] * v[..., None, k]
    return out


def mat_mat(a, b):
    """Matrix product with the tight operators (for small matrices)."""
    a = _coerce(a)
    b = _coerce(b)
    out = a[..., :, 0, None] * b[..., None, 0, :]
    for k in range(1, a.shape[-1]):
        out = out + a[..., :, k, None] * b[..., None, k, :]
    return out


def transpose(m):
    m = _coerce(m)
    return m.swapaxes(-1, -2)


def det2(m):
    """Determinant enclosure of (a batch of) 2x2 interval matrices."""
    m = _coerce(m)
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def inv2(m):
    """Inverse enclosure of (a batch of) 2x2 interval matrices.

    Raises :class:`SingularIntervalMatrix` if the determinant enclosure
    contains zero.
    """
    m = _coerce(m)
    d = det2(m)
    if d.contains_zero().any():
        raise SingularIntervalMatrix("determinant enclosure contains zero")
    a, b, c, e = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    rows = [stack([e / d, -b / d], -1), stack([-c / d, a / d], -1)]
    return stack(rows, -2)


def point_inverse(q):
    """Rigorous enclosure of the inverse of a point matrix close to orthogonal.

    Works for any well conditioned square ``q`` (batched over leading axes):
    with an approximate inverse ``R`` and ``E = R q - I`` bounded in the
    infinity norm by ``e < 1``, the exact inverse lies in
    ``R + [-d, d] * colsum|R|`` with ``d = e / (1 - e)``.
    """
    q = _as_float_array(q)
    n = q.shape[-1]
    r = np.linalg.inv(q)
    e_mat = fsub(fmatmul(r, q), np.eye(n))
    e = np.max(np.sum(e_mat.abs_sup(), axis=-1), axis=-1)
    e = _up(e * (1 + 4 * n * _U))
    if np.any(e >= 1):
        raise SingularIntervalMatrix("approximate inverse not contracting")
    d = _up(e / _dn(1.0 - e))
    col = _up(np.sum(np.abs(r), axis=-2) * (1 + 4 * n * _U))
    spread = _up(d[..., None] * col)[..., None, :]
    spread = np.broadcast_to(spread, r.shape)
    return Interval(_dn(r - spread), _up(r + spread), check=False)


