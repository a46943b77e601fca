"""Rigorous Poincare maps between the sections {y = 0, +-ydot > 0}.

Sets on a section are described in the plane ``(x, xdot)`` as parallelogram
patches ``center + G r`` (:class:`PlanarSet`).  They are lifted to phase
space, carried by the Lohner integrator until the required number of
section crossings, and projected back onto the section along the flow.
The result is kept as an affine set (:class:`AffineImage`) so that later
changes of coordinates do not suffer from wrapping.

The crossing is handled in two stages.  The integrator stops at the center
trajectory's (approximate) crossing time.  There the remaining small time
shift ``tau`` with ``y(phi(tau, z)) = 0`` is bounded by a rough enclosure
``W2`` of the flow over ``[-delta, delta]``; by the mean value theorem

    P(z) in z - y(z) * f(W2) / f_y(W2),

which is split into a linear projection of the doubleton and a small error
term.  The same enclosure gives the return time and, for C1 runs, the
derivative of the Poincare map.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    AmbiguousDiscriminant,
    DomainFailure,
    NegativeDiscriminant,
    NonTransversal,
)
from .interval import (
    Interval,
    _coerce,
    _dn,
    _up,
    fadd,
    fdiv,
    fmatmul,
    fmatvec,
    fmul,
    fsub,
    stack,
)
from .lohner import (
    C1Doubleton,
    Doubleton,
    StepParams,
    c0_step_batch,
    c1_step_batch,
    field_and_jacobian,
    rough_batch,
    rough_variational,
)
from .model import (
    Branch,
    SectionPoint,
    SystemParams,
    discriminant,
    field_program,
    lift_derivative,
)

__all__ = ["MapKind", "PlanarSet", "AffineImage", "PoincareBatch", "PoincareEnclosure",
           "poincare_batch", "poincare_c0", "poincare_c1", "poincare_inverse", "lift_planar",
           "MapCache"]

SECTION_ROWS = (0, 2)  # (x, xdot) inside (x, y, xdot, ydot)


# infinite enclosures are masked out explicitly; numpy need not warn about them
def _quiet(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kw):
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            return fn(*args, **kw)
    return wrapper


@dataclass(frozen=True)
class MapKind:
    """Which Poincare map: ``tag`` in {"half+", "half-", "full+", "full-"}.

    Half maps go from one section to the other (one crossing), full maps
    return to the section they start on (two crossings).  ``inverse``
    integrates backward in time from the forward map's target section.
    """

    tag: str
    inverse: bool = False

    _ALIASES = {
        "half+": "half+", "halfplus": "half+", "p1/2,+": "half+", "p1/2+": "half+",
        "half-": "half-", "halfminus": "half-", "p1/2,-": "half-", "p1/2-": "half-",
        "full+": "full+", "fullplus": "full+", "p+": "full+",
        "full-": "full-", "fullminus": "full-", "p-": "full-",
    }

    def __post_init__(self):
        t = self._ALIASES.get(str(self.tag).replace(" ", "").lower())
        if t is None:
            raise ValueError(f"unknown map kind {self.tag!r}")
        object.__setattr__(self, "tag", t)

    @property
    def is_half(self):
        return self.tag.startswith("half")

    @property
    def crossings(self):
        return 1 if self.is_half else 2

    @property
    def forward_source(self) -> Branch:
        return Branch.PLUS if self.tag.endswith("+") else Branch.MINUS

    @property
    def forward_target(self) -> Branch:
        s = self.forward_source
        return Branch(-s) if self.is_half else s

    @property
    def source(self) -> Branch:
        return self.forward_target if self.inverse else self.forward_source

    @property
    def target(self) -> Branch:
        return self.forward_source if self.inverse else self.forward_target

    @property
    def direction(self) -> int:
        return -1 if self.inverse else 1

    def inverted(self):
        return MapKind(self.tag, not self.inverse)

    def mirrored(self):
        """The kind related to this one by the reversing symmetry."""
        if self.is_half:
            flip = {"half+": "half-", "half-": "half+"}[self.tag]
            return MapKind(flip, not self.inverse)
        return MapKind(self.tag, not self.inverse)

    def __str__(self):
        name = {"half+": "P1/2,+", "half-": "P1/2,-", "full+": "P+", "full-": "P-"}[self.tag]
        return name + ("^-1" if self.inverse else "")


@dataclass
class PlanarSet:
    """Batch of planar patches ``center + gens @ r``, ``r in [-1, 1]^k``.

    ``center`` is an Interval of shape (N, 2) (its width is part of the set),
    ``gens`` a point array of shape (N, 2, k).
    """

    center: Interval
    gens: np.ndarray
    branch: Branch

    def __post_init__(self):
        self.center = _coerce(self.center)
        if self.center.ndim == 1:
            self.center = self.center.reshape(1, 2)
        self.gens = np.asarray(self.gens, dtype=float)
        if self.gens.ndim == 2:
            self.gens = self.gens[None]
        if self.gens.shape[0] != self.center.shape[0]:
            self.gens = np.broadcast_to(self.gens, (self.center.shape[0],) + self.gens.shape[1:]).copy()
        self.branch = Branch(self.branch)

    @property
    def n_batch(self):
        return self.center.shape[0]

    def hull(self) -> Interval:
        k = self.gens.shape[-1]
        box = Interval(-np.ones((self.n_batch, k)), np.ones((self.n_batch, k)), check=False)
        return fadd(self.center, fmatvec(self.gens, box))

    def take(self, idx):
        return PlanarSet(self.center[idx], self.gens[idx], self.branch)

    @classmethod
    def concat(cls, sets):
        b = sets[0].branch
        k = max(s.gens.shape[-1] for s in sets)
        gens = [np.concatenate([s.gens, np.zeros(s.gens.shape[:2] + (k - s.gens.shape[-1],))], -1) for s in sets]
        return cls(Interval(np.concatenate([s.center.lo for s in sets]), np.concatenate([s.center.hi for s in sets]),
                            check=False), np.concatenate(gens), b)

    def sample(self, rng, n):
        """``n`` random points of each patch (for tests), shape (N, n, 2)."""
        c = self.center
        cpt = c.lo[:, None, :] + (c.hi - c.lo)[:, None, :] * rng.random((self.n_batch, n, 2))
        r = rng.uniform(-1, 1, size=(self.n_batch, n, self.gens.shape[-1]))
        return cpt + np.einsum("bij,bnj->bni", self.gens, r)


@dataclass
class AffineImage:
    """Batch of affine sets ``center + sum_i M_i b_i`` with boxes ``b_i``.

    ``center`` has shape (N, d); each term is a pair ``(M, box)`` with ``M``
    an Interval (N, d, k) and ``box`` an Interval (N, k).
    """

    center: Interval
    terms: list = field(default_factory=list)

    @property
    def n_batch(self):
        return self.center.shape[0]

    def hull(self) -> Interval:
        out = self.center
        for M, box in self.terms:
            out = fadd(out, fmatvec(M, box))
        return out

    def rows(self, rows):
        rows = list(rows)
        return AffineImage(self.center[:, rows], [(M[:, rows, :], box) for M, box in self.terms])

    def section(self):
        """Projection to the section coordinates (x, xdot)."""
        return self.rows(SECTION_ROWS)

    def take(self, idx):
        return AffineImage(self.center[idx], [(M[idx], box[idx]) for M, box in self.terms])

    def affine(self, A, c=None):
        """Image under ``z -> A (z - c)`` computed term by term.

        ``A`` is a (d', d) point or interval matrix (optionally batched) and
        ``c`` a point or interval vector.
        """
        cen = self.center if c is None else fsub(self.center, c)
        cen = fmatvec(A, cen) if np.ndim(A if not isinstance(A, Interval) else A.lo) == 3 else _matvec_shared(A, cen)
        terms = []
        for M, box in self.terms:
            terms.append((fmatmul(A, M), box))
        return AffineImage(cen, terms)

    def local(self, A_inv, c=None) -> Interval:
        """Hull of the image in the coordinates ``A_inv (z - c)``."""
        return self.affine(A_inv, c).hull()

    @classmethod
    def concat(cls, items):
        cen = Interval(np.concatenate([i.center.lo for i in items]), np.concatenate([i.center.hi for i in items]),
                       check=False)
        terms = []
        for t in range(len(items[0].terms)):
            Ms = [i.terms[t][0] for i in items]
            bs = [i.terms[t][1] for i in items]
            M = Interval(np.concatenate([m.lo for m in Ms]), np.concatenate([m.hi for m in Ms]), check=False)
            B = Interval(np.concatenate([b.lo for b in bs]), np.concatenate([b.hi for b in bs]), check=False)
            terms.append((M, B))
        return cls(cen, terms)


def _matvec_shared(A, v):
    """A (d', d) applied to a batch of vectors v (N, d)."""
    if isinstance(A, Interval):
        M = Interval(A.lo[None], A.hi[None], check=False)
    else:
        M = np.asarray(A, dtype=float)[None]
    return fmatvec(M, v)


@dataclass
class PoincareBatch:
    """Results of a batched Poincare map evaluation."""

    ok: np.ndarray
    reasons: list
    image: AffineImage  # 4-dimensional, y row identically 0
    time: Interval
    deriv: Optional[Interval]
    kind: MapKind
    crossings: int

    @property
    def section_image(self) -> AffineImage:
        return self.image.section()

    def hull(self) -> Interval:
        return self.image.section().hull()

    def raise_on_failure(self):
        if not self.ok.all():
            bad = int(np.flatnonzero(~self.ok)[0])
            msg = self.reasons[bad] or "failure"
            if "transvers" in msg:
                raise NonTransversal(msg)
            raise DomainFailure(msg)


@dataclass
class PoincareEnclosure:
    """Image of a single set under a Poincare map."""

    image: Interval  # (2,) enclosure of (x, xdot) on the target section
    return_time: Interval
    deriv: Optional[Interval]
    crossings: int
    affine: Optional[AffineImage] = None
    ydot: Optional[Interval] = None


# ------------------------------------------------------------------- lifting

def lift_planar(p: SystemParams, pset: PlanarSet, need_deriv=False):
    """Lift planar patches to phase space doubletons (mean value form).

    Returns ``(doubleton, DT)`` where ``DT`` (N, 4, 2) encloses the derivative
    of the lift over the patch (only when ``need_deriv``; else None).
    """
    N = pset.n_batch
    hull = pset.hull()
    cmid = pset.center.mid()
    crad = pset.center.rad()
    k = pset.gens.shape[-1]
    G = np.zeros((N, 2, k + 2))
    G[:, :, :k] = pset.gens
    G[:, 0, k] = crad[:, 0]
    G[:, 1, k + 1] = crad[:, 1]
    try:
        DT = lift_derivative(p, hull[:, 0], hull[:, 1], pset.branch)  # (N, 4, 2)
        disc_c = discriminant(p, Interval.point(cmid[:, 0]), Interval.point(cmid[:, 1]))
    except (NegativeDiscriminant, AmbiguousDiscriminant):
        raise
    if (disc_c.lo <= 0).any():
        raise AmbiguousDiscriminant("center not liftable")
    yd = disc_c.sqrt()
    if pset.branch == Branch.MINUS:
        yd = -yd
    Tq = Interval(np.stack([cmid[:, 0], np.zeros(N), cmid[:, 1], yd.lo], -1),
                  np.stack([cmid[:, 0], np.zeros(N), cmid[:, 1], yd.hi], -1), check=False)
    x0 = Tq.mid()
    DTG = fmatmul(DT, G)  # (N, 4, k+2)
    C = DTG.mid()
    r0 = Interval(-np.ones((N, k + 2)), np.ones((N, k + 2)), check=False)
    r = fadd(fsub(Tq, x0), fmatvec(fsub(DTG, C), r0))
    B = np.broadcast_to(np.eye(4), (N, 4, 4)).copy()
    return Doubleton(x0, C, r0, B, r), (DT if need_deriv else None)


# ----------------------------------------------------------- crossing helpers

def _center_root(series0: Interval, h, guess_sign):
    """Crossing time of the center trajectory inside the step (NaN if none)."""
    c = series0.mid()[:, :, 1]  # y coefficients (N, K)
    K = c.shape[1]
    t = np.where(c[:, 1] != 0, -c[:, 0] / np.where(c[:, 1] != 0, c[:, 1], 1.0), h)
    t = np.clip(t * guess_sign, 0.0, np.abs(h)) * guess_sign
    powers = np.arange(K)
    for _ in range(40):
        tp = t[:, None] ** powers[None, :]
        val = np.sum(c * tp, axis=1)
        der = np.sum(c[:, 1:] * powers[None, 1:] * (t[:, None] ** (powers[None, 1:] - 1)), axis=1)
        step = np.where(der != 0, val / np.where(der != 0, der, 1.0), 0.0)
        t = t - step
        t = np.clip(t * guess_sign, 0.0, np.abs(h) * 1.0) * guess_sign
    val = np.sum(c * t[:, None] ** powers[None, :], axis=1)
    scale = np.abs(c[:, 1]) * np.abs(h) + np.abs(c[:, 0])
    good = (np.abs(val) <= 1e-9 * np.maximum(scale, 1e-300)) & (t * guess_sign > 0) & (np.abs(t) <= np.abs(h))
    return np.where(good, t, np.nan)


def _sign_strict(iv, s):
    """Entries of ``iv`` strictly of sign ``s`` (array of +-1)."""
    return np.where(s > 0, iv.lo > 0, iv.hi < 0)


def _project(prog, Z_base: Doubleton, target_sign, c1: bool, Zc1: Optional[C1Doubleton]):
    """Project doubletons near y = 0 onto the section along the flow.

    Returns ``(ok, reasons, image, dt, DP4)``.
    """
    N = Z_base.n_batch
    Zh = Z_base.hull()
    yZ = Zh[:, 1]
    ymag = np.maximum(np.abs(yZ.lo), np.abs(yZ.hi))
    ydc = np.abs(Z_base.x0[:, 3])
    delta = 4.0 * ymag / np.maximum(ydc, 1e-300) + 1e-15
    ok = np.zeros(N, dtype=bool)
    reasons = [""] * N
    W2_lo = np.zeros((N, 4))
    W2_hi = np.zeros((N, 4))
    todo = np.arange(N)
    for _ in range(8):
        if todo.size == 0:
            break
        Wf, hf, okf = rough_batch(prog, Zh[todo], delta[todo], max_halvings=0)
        Wb, hb, okb = rough_batch(prog, Zh[todo], -delta[todo], max_halvings=0)
        W2 = Wf.hull(Wb)
        fy = W2[:, 3]
        cert = _sign_strict(fy, np.full(todo.size, target_sign))
        miny = np.minimum(np.abs(fy.lo), np.abs(fy.hi))
        reach = _up(ymag[todo]) < _dn(delta[todo] * miny)
        good = okf & okb & cert & reach
        W2_lo[todo[good]] = W2.lo[good]
        W2_hi[todo[good]] = W2.hi[good]
        ok[todo[good]] = True
        # transversality failure is terminal; otherwise enlarge delta
        bad_t = okf & okb & ~cert
        for i in todo[bad_t]:
            reasons[i] = "ydot not certified transversal at the crossing"
        retry = ~good & ~bad_t
        delta[todo[retry]] *= 4.0
        todo = todo[retry]
    for i in todo:
        reasons[i] = "could not bound the final time shift"
    W2 = Interval(W2_lo, W2_hi, check=False)
    good = np.flatnonzero(ok)
    W2g = W2[good]
    if c1:
        fW2, jW2 = field_and_jacobian(prog, W2g, jac=True)
    else:
        fW2 = field_and_jacobian(prog, W2g)
    fy = fW2[:, 1]
    g = fdiv(fW2, Interval(fy.lo[:, None], fy.hi[:, None], check=False))
    gbar = g.mid()
    gbar[:, 1] = 1.0
    g.lo[:, 1] = 1.0
    g.hi[:, 1] = 1.0
    M = len(good)
    L = np.broadcast_to(np.eye(4), (M, 4, 4)).copy()
    L[:, :, 1] -= gbar
    Zg = Z_base.take(good)
    yZg = yZ[good]
    err = fmul(fsub(g, gbar), Interval(-yZg.hi[:, None], -yZg.lo[:, None], check=False))
    cen = fadd(fmatvec(L, Zg.x0), err)
    M1 = fmatmul(L, Zg.C)
    M2 = fmatmul(L, Zg.B)
    for arr in (cen,):
        arr.lo[:, 1] = 0.0
        arr.hi[:, 1] = 0.0
    M1.lo[:, 1, :] = 0.0
    M1.hi[:, 1, :] = 0.0
    M2.lo[:, 1, :] = 0.0
    M2.hi[:, 1, :] = 0.0
    image = AffineImage(cen, [(M1, Zg.r0), (M2, Zg.r)])
    dt = fdiv(Interval(-yZg.hi, -yZg.lo, check=False), fy)
    DP4 = None
    if c1:
        V2f, okf = rough_variational(jW2, delta[good])
        V2b, okb = rough_variational(jW2, -delta[good])
        V2 = V2f.hull(V2b)
        ok_v = okf & okb
        for i in good[~ok_v]:
            reasons[i] = "variational enclosure at the crossing failed"
        ok[good[~ok_v]] = False
        Dz = Zc1.take(good).deriv()
        P = Interval(np.broadcast_to(np.eye(4), (M, 4, 4)).copy(), check=False)
        P = fsub(P, Interval(np.zeros((M, 4, 4)), check=False))
        corr_lo = np.zeros((M, 4, 4))
        corr_hi = np.zeros((M, 4, 4))
        corr_lo[:, :, 1] = g.lo
        corr_hi[:, :, 1] = g.hi
        P = fsub(P, Interval(corr_lo, corr_hi, check=False))
        DP4 = fmatmul(P, fmatmul(V2, Dz))
    return ok, reasons, good, image, dt, DP4


# ------------------------------------------------------------------ main loop

@_quiet
def poincare_batch(p: SystemParams, kind: MapKind, pset: PlanarSet, order: int, step: float,
                   c1: bool = False, prog=None, guard: float = 1e-6, max_time: float = 20.0,
                   inflate: float = 1e-2) -> PoincareBatch:
    """Evaluate a Poincare map on a batch of planar patches.

    ``step`` is the signed time step; its sign must agree with
    ``kind.inverse`` (negative for inverse maps).  Each patch succeeds or
    fails independently; see ``PoincareBatch.ok`` and ``.reasons``.
    """
    if prog is None:
        prog = field_program(p)
    d = kind.direction
    if np.sign(step) != d:
        raise ValueError(f"step {step} has the wrong sign for {kind}")
    if pset.branch != kind.source:
        raise ValueError(f"set lies on the {pset.branch.name} section but {kind} starts on {kind.source.name}")
    N = pset.n_batch
    base, DT = lift_planar(p, pset, need_deriv=c1)
    S = C1Doubleton.identity(base) if c1 else base
    n_cross = kind.crossings
    side = np.full(N, int(kind.source) * d)  # sign of y right after departure
    count = np.zeros(N, dtype=int)
    straddle = np.zeros(N, dtype=bool)
    departed = np.zeros(N, dtype=bool)
    t_el = np.zeros(N)
    active = np.ones(N, dtype=bool)
    ok_out = np.zeros(N, dtype=bool)
    reasons = [""] * N
    images = [None] * N
    times_lo = np.zeros(N)
    times_hi = np.zeros(N)
    DP_lo = np.zeros((N, 4, 4))
    DP_hi = np.zeros((N, 4, 4))

    def fail(i, why):
        active[i] = False
        reasons[i] = why

    while active.any():
        idx = np.flatnonzero(active)
        Sa = S.take(idx)
        h_req = np.full(idx.size, step, dtype=float)
        if c1:
            Sn, h, okst, W, WV, series0 = c1_step_batch(prog, Sa, h_req, order, inflate=inflate)
            base_n = Sn.base
        else:
            Sn, h, okst, W, series0 = c0_step_batch(prog, Sa, h_req, order, inflate=inflate)
            WV = None
            base_n = Sn
        Wy = W[:, 1]
        Wyd = W[:, 3]
        sd = side[idx]
        cross_sign = -sd * d
        contains0 = (Wy.lo <= 0) & (Wy.hi >= 0)
        toward = _sign_strict(Wyd, cross_sign)
        away = _sign_strict(Wyd, -cross_sign)
        wrong_side = ~contains0 & ~_sign_strict(Wy, sd)
        landing = contains0 & toward & (count[idx] + 1 == n_cross)
        inter = contains0 & toward & (count[idx] + 1 < n_cross)
        regular = (~contains0 & ~wrong_side) | (contains0 & away)
        bad = ~okst | wrong_side | (contains0 & ~toward & ~away)
        early = (landing | inter) & ~departed[idx]
        bad |= early
        landing &= ~early
        inter &= ~early
        regular &= okst
        for j in np.flatnonzero(bad):
            i = idx[j]
            if not okst[j]:
                fail(i, "integration step failed (rough enclosure or singularity)")
            elif early[j]:
                fail(i, "crossing detected before leaving the guard band")
            else:
                fail(i, "ydot sign not certified while y may vanish (transversality)")
        # landing candidates: locate the center's crossing time
        tbar = np.full(idx.size, np.nan)
        li = np.flatnonzero(landing & ~bad)
        if li.size:
            tbar[li] = _center_root(series0[li], h[li], d)
        land_now = landing & ~bad & np.isfinite(tbar) & ~straddle[idx]
        land_later = landing & ~bad & ~land_now
        accept = (regular | inter | land_later) & ~bad
        # accept ordinary steps
        acc = np.flatnonzero(accept)
        if acc.size:
            S.put(idx[acc], Sn.take(acc))
            t_el[idx[acc]] += h[acc]
            newy = base_n.take(acc).hull()[:, 1]
            for jj, j in enumerate(acc):
                i = idx[j]
                ylo, yhi = newy.lo[jj], newy.hi[jj]
                s_ = side[i]
                beyond = (ylo > guard) if s_ > 0 else (yhi < -guard)
                if beyond:
                    departed[i] = True
                if inter[j]:
                    if (yhi < 0 and s_ > 0) or (ylo > 0 and s_ < 0):
                        count[i] += 1
                        side[i] = -s_
                        straddle[i] = False
                    elif (ylo > 0 and s_ > 0) or (yhi < 0 and s_ < 0):
                        pass
                    else:
                        straddle[i] = True
                elif land_later[j]:
                    if not ((ylo > 0 and s_ > 0) or (yhi < 0 and s_ < 0)):
                        fail(i, "set reached the section before its center; use a smaller set or step")
                if abs(t_el[i]) > max_time and active[i]:
                    fail(i, "no return to the section within the time limit")
        # landing
        lj = np.flatnonzero(land_now)
        if lj.size:
            S_L = Sa.take(lj)
            W_L = W[lj]
            if c1:
                Z, _, okz, _, _, _ = c1_step_batch(prog, S_L, tbar[lj], order, W=W_L, WV=WV[lj])
                Zb = Z.base
            else:
                Z, _, okz, _, _ = c0_step_batch(prog, S_L, tbar[lj], order, W=W_L)
                Zb = Z
                Z = None
            target_sign = int(kind.target)
            okp, why, good, image, dt, DP4 = _project(prog, Zb, target_sign, c1, Z)
            for jj, j in enumerate(lj):
                i = idx[j]
                active[i] = False
                if not okz[jj]:
                    reasons[i] = "partial step to the section failed"
                    continue
                if not okp[jj]:
                    reasons[i] = why[jj] or "projection failed"
                    continue
            pos = {int(g): n for n, g in enumerate(good)}
            for jj, j in enumerate(lj):
                i = idx[j]
                if not (okz[jj] and okp[jj]):
                    continue
                n = pos[jj]
                images[i] = image.take([n])
                tt = fadd(fadd(t_el[i], tbar[j]), dt[n])
                times_lo[i] = float(tt.lo)
                times_hi[i] = float(tt.hi)
                if c1:
                    DP_lo[i] = DP4.lo[n]
                    DP_hi[i] = DP4.hi[n]
                ok_out[i] = True
    # assemble
    k0 = base.C.shape[-1]
    blank = AffineImage(Interval(np.zeros((1, 4)), check=False),
                        [(Interval(np.zeros((1, 4, k0)), check=False), Interval(np.zeros((1, k0)), check=False)),
                         (Interval(np.zeros((1, 4, 4)), check=False), Interval(np.zeros((1, 4)), check=False))])
    image = AffineImage.concat([im if im is not None else blank for im in images])
    deriv = None
    if c1:
        DP4 = Interval(DP_lo, DP_hi, check=False)
        rows = DP4[:, list(SECTION_ROWS), :]
        deriv = fmatmul(rows, DT)
        deriv.lo[~ok_out] = 0.0
        deriv.hi[~ok_out] = 0.0
    times = Interval(times_lo, times_hi, check=False)
    return PoincareBatch(ok_out, reasons, image, times, deriv, kind, n_cross)


# ----------------------------------------------------------- single-set API

def _single(p, kind, s, sp: StepParams, c1):
    if isinstance(s, SectionPoint):
        center = stack([s.x, s.xdot], -1)
        pset = PlanarSet(center, np.zeros((2, 0)), s.branch)
    else:
        pset = s
    res = poincare_batch(p, kind, pset, sp.order, float(sp.step), c1=c1, inflate=sp.rough_inflate)
    res.raise_on_failure()
    out = []
    full = res.image.hull()
    sec = res.hull()
    for i in range(pset.n_batch):
        out.append(PoincareEnclosure(sec[i], res.time[i], res.deriv[i] if c1 else None, res.crossings,
                                     res.image.take([i]), full[i, 3]))
    return out[0] if len(out) == 1 else out


def poincare_c0(p: SystemParams, kind: MapKind, s, sp: StepParams):
    """C0 Poincare map of a section point/box or a :class:`PlanarSet`."""
    if kind.inverse:
        raise ValueError("use poincare_inverse for inverse maps")
    return _single(p, kind, s, sp, c1=False)


def poincare_c1(p: SystemParams, kind: MapKind, s, sp: StepParams):
    """Like :func:`poincare_c0` but also returns the 2x2 derivative enclosure."""
    return _single(p, kind, s, sp, c1=True)


def poincare_inverse(p: SystemParams, kind: MapKind, s, sp: StepParams):
    """Inverse map by backward integration (``sp.step`` may be given either sign)."""
    if not kind.inverse:
        kind = kind.inverted()
    sp = StepParams(sp.order, -abs(float(sp.step)), sp.rough_inflate, sp.max_retries)
    return _single(p, kind, s, sp, c1=False)


class MapCache:
    """Memo of Poincare images keyed by (map, set, edge, grid, order, step).

    Several covering relations need the image of the same edge with the same
    parameters; this computes it once.
    """

    def __init__(self):
        self._store = {}
        self.hits = 0
        self.misses = 0

    def get(self, key, compute):
        if key in self._store:
            self.hits += 1
            return self._store[key]
        self.misses += 1
        val = compute()
        self._store[key] = val
        return val
