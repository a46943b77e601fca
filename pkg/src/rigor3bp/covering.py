"""Certified checks of covering relations between h-sets.

Two sufficient criteria are implemented.

* :func:`check_covering_direct` maps the whole boundary of ``N1``.  The
  images of the left and right edges must fall strictly into the matching
  (or crossed) sides of ``N2`` and the image of every edge must stay
  strictly inside the horizontal strip of ``N2``.
* :func:`check_covering_backward` maps only the vertical edges of ``N1``
  forward.  The horizontal edges of ``N2`` are mapped backward and their
  preimages must miss ``|N1|``; the first local coordinate must be strictly
  monotone along the middle segment ``gamma`` of ``N1`` (checked from a
  derivative enclosure) and one point of ``gamma`` must land inside
  ``|N2|``.  This avoids resolving the thin images of the horizontal edges.

Fuzzy h-sets go through the same code; their interval center makes every
inclusion hold for all members at once.  The maps are pluggable objects
(:class:`SectionMap`): the Poincare maps of the flow or analytic toy maps.
Injectivity of the map on ``|N1|`` is assumed, as it holds for Poincare
maps of a flow.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import DomainFailure, Rigor3bpError
from .hset import HSet, Location, locate
from .interval import (
    Interval,
    _coerce,
    _dn,
    _up,
    det2,
    fadd,
    fmatmul,
    fmatvec,
    fmul,
    fsub,
    fsum,
    point_inverse,
    stack,
)
from .model import Branch, SystemParams
from .poincare import AffineImage, MapCache, MapKind, PlanarSet, poincare_batch

__all__ = [
    "Stage", "CheckParams", "Status", "Orientation", "Diagnostic", "CoveringVerdict",
    "HyperbolicityData", "SectionMap", "PoincareSectionMap", "LinearMap", "FunctionMap",
    "check_condition_b", "check_covering_direct", "check_covering_backward",
    "check_covering_fuzzy", "check_hyperbolicity", "check_unique_fixed_point",
    "monotonicity_from_derivative",
]


# ------------------------------------------------------------------ params

@dataclass(frozen=True)
class Stage:
    """Subdivision and Taylor settings for one batch of map evaluations."""

    grid: int
    order: int
    step: float

    def __post_init__(self):
        if self.grid < 1:
            raise ValueError("grid must be at least 1")
        if self.order < 1:
            raise ValueError("order must be at least 1")
        if self.step == 0:
            raise ValueError("step must be nonzero")

    def refined(self, factor=2):
        return replace(self, grid=self.grid * factor)

    def __str__(self):
        return f"grid={self.grid},order={self.order},step={self.step:g}"


@dataclass(frozen=True)
class CheckParams:
    """Settings for one covering relation.

    ``vertical`` is used for the left and right edges of the source.  A
    ``horizontal`` stage with positive step maps the top and bottom edges of
    the source forward (direct check); a negative step maps the top and
    bottom edges of the target backward (backward check).  ``mono`` and
    ``center`` hold the settings for the monotonicity and the interior point
    conditions of the backward check; ``anchor`` is the interior point in
    local coordinates of the source (``(t0, 0)`` on ``gamma`` by default).
    """

    vertical: Stage
    horizontal: Stage
    mono: Optional[Stage] = None
    center: Optional[Stage] = None
    anchor: tuple = (0.0, 0.0)

    def __post_init__(self):
        if abs(self.anchor[0]) >= 1 or abs(self.anchor[1]) >= 1:
            raise ValueError("anchor must lie inside the unit square")

    @property
    def t0(self):
        return self.anchor[0]

    @property
    def backward(self) -> bool:
        return self.horizontal.step < 0

    @property
    def edge_grids(self) -> dict:
        return {"le": self.vertical.grid, "re": self.vertical.grid,
                "te": self.horizontal.grid, "be": self.horizontal.grid}

    def refined(self, factor=2):
        return replace(self, vertical=self.vertical.refined(factor), horizontal=self.horizontal.refined(factor),
                       mono=self.mono.refined(factor) if self.mono else None)

    def patched(self, **kw):
        """Copy with fields changed; keys like ``vertical.step`` reach into stages."""
        out = self
        for k, v in kw.items():
            if "." in k:
                stage, attr = k.split(".", 1)
                st = getattr(out, stage)
                if st is None:
                    raise ValueError(f"relation has no {stage} stage")
                cast = type(getattr(st, attr))
                out = replace(out, **{stage: replace(st, **{attr: cast(v)})})
            elif k in ("t0",):
                out = replace(out, anchor=(float(v), out.anchor[1]))
            else:
                out = replace(out, **{k: v})
        return out


class Status(Enum):
    PASS = "Pass"
    FAIL = "Fail"
    NOT_CHECKED = "NotChecked"


class Orientation(Enum):
    B_PLUS = "b+"
    B_MINUS = "b-"
    UNKNOWN = "unknown"


@dataclass
class Diagnostic:
    """One evaluated piece: where its image landed in local coordinates."""

    condition: str
    edge: str
    index: int
    ok: bool
    local: Optional[Interval] = None  # (2,) local coordinates in the tested h-set
    hull: Optional[Interval] = None  # (2,) (x, xdot) enclosure
    flags: int = 0
    note: str = ""


@dataclass
class CoveringVerdict:
    holds: bool
    orientation: Orientation
    conditions: dict
    diagnostics: list = field(default_factory=list)
    method: str = ""
    message: str = ""
    wall_time: float = 0.0

    def failed_conditions(self):
        return [k for k, v in self.conditions.items() if v is Status.FAIL]

    def __str__(self):
        conds = " ".join(f"{k}:{v.value}" for k, v in self.conditions.items())
        tag = "holds" if self.holds else "FAILS"
        return f"{tag} [{self.method}] {self.orientation.value} {conds} {self.message}".rstrip()


# -------------------------------------------------------------------- maps

@dataclass
class MapBatch:
    ok: np.ndarray
    reasons: list
    image: object  # AffineImage (N, 2) or Interval (N, 2)
    deriv: Optional[Interval] = None

    def hull(self) -> Interval:
        return self.image.hull() if isinstance(self.image, AffineImage) else self.image


class SectionMap:
    """Interface of a planar map usable by the covering checks."""

    name = "map"
    source = Branch.PLUS
    target = Branch.PLUS

    def image(self, pset: PlanarSet, stage: Stage, c1: bool = False, key=None) -> MapBatch:
        raise NotImplementedError

    def preimage(self, pset: PlanarSet, stage: Stage, key=None) -> MapBatch:
        raise NotImplementedError


class PoincareSectionMap(SectionMap):
    """A Poincare map of the flow as a :class:`SectionMap`.

    Evaluations are memoised by ``key`` (when given) so that the same edge
    mapped for two relations is integrated once.  With ``threads > 1`` the
    pieces are split into chunks evaluated on a thread pool.
    """

    def __init__(self, params: SystemParams, kind, cache: Optional[MapCache] = None, threads: int = 1,
                 inflate: float = 1e-2):
        self.params = params
        self.kind = kind if isinstance(kind, MapKind) else MapKind(kind)
        self.cache = cache if cache is not None else MapCache()
        self.threads = max(1, int(threads))
        self.inflate = inflate
        self.name = str(self.kind)
        self.source = self.kind.source
        self.target = self.kind.target
        self.evaluations = 0

    def _run(self, kind: MapKind, pset: PlanarSet, stage: Stage, c1: bool) -> MapBatch:
        step = abs(float(stage.step)) * kind.direction
        n = pset.n_batch
        self.evaluations += n
        if self.threads == 1 or n < 2 * self.threads:
            res = poincare_batch(self.params, kind, pset, stage.order, step, c1=c1, inflate=self.inflate)
            return MapBatch(res.ok, res.reasons, res.section_image, res.deriv)
        chunks = np.array_split(np.arange(n), self.threads)

        def job(idx):
            return poincare_batch(self.params, kind, pset.take(idx), stage.order, step, c1=c1, inflate=self.inflate)

        with ThreadPoolExecutor(self.threads) as ex:
            parts = list(ex.map(job, chunks))
        ok = np.concatenate([p.ok for p in parts])
        reasons = sum((p.reasons for p in parts), [])
        image = AffineImage.concat([p.section_image for p in parts])
        deriv = None
        if c1:
            deriv = Interval(np.concatenate([p.deriv.lo for p in parts]), np.concatenate([p.deriv.hi for p in parts]),
                             check=False)
        return MapBatch(ok, reasons, image, deriv)

    def _cached(self, tag, kind, pset, stage, c1, key):
        if key is None:
            return self._run(kind, pset, stage, c1)
        full = (tag, str(kind), key, stage.order, abs(float(stage.step)), c1)
        return self.cache.get(full, lambda: self._run(kind, pset, stage, c1))

    def image(self, pset, stage, c1=False, key=None):
        return self._cached("fwd", self.kind, pset, stage, c1, key)

    def preimage(self, pset, stage, key=None):
        return self._cached("bwd", self.kind.inverted(), pset, stage, False, key)


class LinearMap(SectionMap):
    """The affine map ``q -> M q + b`` (exact up to rounding); for tests and demos."""

    def __init__(self, M, b=(0.0, 0.0), name="linear", source=Branch.PLUS, target=Branch.PLUS):
        self.M = np.asarray(M, dtype=float)
        self.b = _coerce(np.asarray(b, dtype=float)) if not isinstance(b, Interval) else b
        self.name = name
        self.source = source
        self.target = target

    def _apply(self, M, b, pset):
        n = pset.n_batch
        M = _coerce(M)
        Mb = Interval(np.broadcast_to(M.lo, (n, 2, 2)).copy(), np.broadcast_to(M.hi, (n, 2, 2)).copy(), check=False)
        cen = fmatvec(Mb, fadd(pset.center, b))
        k = pset.gens.shape[-1]
        G = fmatmul(Mb, pset.gens)
        box = Interval(-np.ones((n, k)), np.ones((n, k)), check=False)
        return AffineImage(cen, [(G, box)])

    def image(self, pset, stage=None, c1=False, key=None):
        n = pset.n_batch
        # M q + b = M (q + M^-1 b) is avoided; apply M then shift
        img = self._apply(self.M, Interval(np.zeros(2), check=False), pset)
        img = AffineImage(fadd(img.center, self.b), img.terms)
        deriv = Interval(np.broadcast_to(self.M, (n, 2, 2)).copy(), check=False) if c1 else None
        return MapBatch(np.ones(n, bool), [""] * n, img, deriv)

    def preimage(self, pset, stage=None, key=None):
        n = pset.n_batch
        img = self._apply(point_inverse(self.M), -self.b, pset)
        return MapBatch(np.ones(n, bool), [""] * n, img)


class FunctionMap(SectionMap):
    """A map given by interval functions on boxes.

    ``f`` and ``finv`` take an Interval of shape (N, 2) and return one of the
    same shape; ``df`` returns the (N, 2, 2) derivative enclosure over each
    box.  The boxes are the hulls of the planar pieces.
    """

    def __init__(self, f: Callable, df: Optional[Callable] = None, finv: Optional[Callable] = None,
                 name="function", source=Branch.PLUS, target=Branch.PLUS):
        self.f = f
        self.df = df
        self.finv = finv
        self.name = name
        self.source = source
        self.target = target

    def image(self, pset, stage=None, c1=False, key=None):
        box = pset.hull()
        n = pset.n_batch
        deriv = None
        if c1:
            if self.df is None:
                raise ValueError("no derivative supplied")
            deriv = self.df(box)
        return MapBatch(np.ones(n, bool), [""] * n, self.f(box), deriv)

    def preimage(self, pset, stage=None, key=None):
        if self.finv is None:
            raise ValueError("no inverse supplied")
        n = pset.n_batch
        return MapBatch(np.ones(n, bool), [""] * n, self.finv(pset.hull()))


# ------------------------------------------------------------ local tests

def _set_key(n: HSet, what: str, grid: int):
    return (n.to_text(), what, grid)


def _local(n: HSet, res: MapBatch) -> Interval:
    return n.to_local(res.image)


def _record(diags, cond, edge, n, res, flags_ok, targets):
    """Append diagnostics and return True when every piece satisfies ``flags_ok``.

    ``targets`` is a list of h-sets; a piece passes only if it passes in each.
    """
    hull = res.hull()
    ok_all = True
    locs = [_local(t, res) for t in targets]
    for i in range(len(res.ok)):
        good = bool(res.ok[i])
        fl = 0
        if good:
            for loc in locs:
                f = int(locate(loc[i]))
                good = good and flags_ok(f)
                fl = f
        ok_all = ok_all and good
        diags.append(Diagnostic(cond, edge, i, good, locs[0][i] if res.ok[i] else None,
                                hull[i] if res.ok[i] else None, fl, res.reasons[i] if not res.ok[i] else ""))
    return ok_all


def _has(flag):
    return lambda f: bool(f & int(flag))


def _in_strip_and(flag):
    return lambda f: bool(f & int(flag)) and bool(f & int(Location.IN_STRIP))


def _outside(f):
    return bool(f & int(Location.IN_LEFT | Location.IN_RIGHT | Location.IN_TOP_BOTTOM))


def _edge_images(fmap, n1, cp, edges, stage, c1=False):
    out = {}
    for e in edges:
        pset = n1.edge_segments(e, stage.grid)
        out[e] = fmap.image(pset, stage, c1=c1, key=_set_key(n1, e, stage.grid))
    return out


def check_condition_b(fmap: SectionMap, n1: HSet, n2, cp: CheckParams, diags=None, strip=False):
    """Orientation of the vertical edge images, or ``None`` when condition b fails.

    ``n2`` may be a list of h-sets; the inclusions must then hold in each
    (this is how one evaluation serves two relations).  With ``strip`` the
    images must also be inside the strip, as needed by the direct check.
    """
    targets = n2 if isinstance(n2, (list, tuple)) else [n2]
    diags = [] if diags is None else diags
    try:
        imgs = _edge_images(fmap, n1, cp, ["le", "re"], cp.vertical)
    except (DomainFailure, Rigor3bpError) as exc:
        diags.append(Diagnostic("b", "le/re", -1, False, note=str(exc)))
        return None
    wrap = _in_strip_and if strip else _has
    d_plus, d_minus = [], []
    plus = (_record(d_plus, "b", "le", n1, imgs["le"], wrap(Location.IN_LEFT), targets)
            and _record(d_plus, "b", "re", n1, imgs["re"], wrap(Location.IN_RIGHT), targets))
    if plus:
        diags.extend(d_plus)
        return Orientation.B_PLUS
    minus = (_record(d_minus, "b", "le", n1, imgs["le"], wrap(Location.IN_RIGHT), targets)
             and _record(d_minus, "b", "re", n1, imgs["re"], wrap(Location.IN_LEFT), targets))
    if minus:
        diags.extend(d_minus)
        return Orientation.B_MINUS
    diags.extend(d_plus)
    return None


def _verdict(conds, orient, diags, method, t_start, message=""):
    holds = all(v is Status.PASS for v in conds.values())
    return CoveringVerdict(holds, orient if orient else Orientation.UNKNOWN, conds, diags, method,
                           message, time.perf_counter() - t_start)


def check_covering_direct(fmap: SectionMap, n1: HSet, n2, cp: CheckParams) -> CoveringVerdict:
    """Covering by the boundary criterion: condition b plus all edge images in the strip."""
    t_start = time.perf_counter()
    targets = n2 if isinstance(n2, (list, tuple)) else [n2]
    diags = []
    conds = {"b": Status.NOT_CHECKED, "a'": Status.NOT_CHECKED}
    orient = check_condition_b(fmap, n1, targets, cp, diags, strip=True)
    if orient is None:
        # decide whether only the strip part failed
        o2 = check_condition_b(fmap, n1, targets, cp, [], strip=False)
        conds["b"] = Status.PASS if o2 else Status.FAIL
        conds["a'"] = Status.FAIL
        return _verdict(conds, o2, diags, "direct", t_start, "vertical edge images")
    conds["b"] = Status.PASS
    if cp.horizontal.step < 0:
        raise ValueError("direct check needs a positive step for the horizontal edges")
    try:
        imgs = _edge_images(fmap, n1, cp, ["te", "be"], cp.horizontal)
    except (DomainFailure, Rigor3bpError) as exc:
        conds["a'"] = Status.FAIL
        return _verdict(conds, orient, diags, "direct", t_start, str(exc))
    ok = True
    for e in ("te", "be"):
        ok = _record(diags, "a'", e, n1, imgs[e], _has(Location.IN_STRIP), targets) and ok
    conds["a'"] = Status.PASS if ok else Status.FAIL
    return _verdict(conds, orient, diags, "direct", t_start)


def monotonicity_from_derivative(dp: Interval, u1: np.ndarray, n2: HSet) -> Interval:
    """Enclosure of ``d g1/dt = (A2^-1 DF u1)_1`` for derivative enclosures ``dp``."""
    dp = _coerce(dp)
    if dp.ndim == 2:
        dp = dp.reshape(1, 2, 2)
    u = np.broadcast_to(np.asarray(u1, float), (dp.shape[0], 2)).copy()
    v = fmatvec(dp, u)
    return fsum(fmul(n2.A_inv[0], v), axis=-1)


def _check_a1(fmap, n1, n2, cp, diags, dp_bound=None, gamma_center=None):
    if dp_bound is not None:
        g = monotonicity_from_derivative(dp_bound, n1.u, n2)
        ok = not bool(g.contains_zero().any())
        diags.append(Diagnostic("a1", "gamma", 0, ok, stack([g, g]), note="dg1/dt from DP bound"))
        return ok
    st = cp.mono
    if st is None:
        raise ValueError("monotonicity stage missing")
    pset = n1.horizontal_segments(st.grid, center=gamma_center)
    try:
        res = fmap.image(pset, st, c1=True, key=_set_key(n1, "gamma", st.grid))
    except (DomainFailure, Rigor3bpError) as exc:
        diags.append(Diagnostic("a1", "gamma", -1, False, note=str(exc)))
        return False
    if not res.ok.all():
        i = int(np.flatnonzero(~res.ok)[0])
        diags.append(Diagnostic("a1", "gamma", i, False, note=res.reasons[i]))
        return False
    g = monotonicity_from_derivative(res.deriv, n1.u, n2)
    pos = g.lo > 0
    neg = g.hi < 0
    good = bool(pos.all() or neg.all())
    for i in range(g.shape[0]):
        diags.append(Diagnostic("a1", "gamma", i, bool(pos[i] or neg[i]), stack([g[i], g[i]]), note="dg1/dt"))
    return good


def _check_a2(fmap, n1, n2, cp, diags, source_center=None, target_center=None):
    st = cp.center if cp.center is not None else cp.vertical
    t1, t2 = cp.anchor
    pset = n1.point(t1, t2, center=source_center)
    try:
        res = fmap.image(pset, st, key=None)
    except (DomainFailure, Rigor3bpError) as exc:
        diags.append(Diagnostic("a2", "point", -1, False, note=str(exc)))
        return False
    if not res.ok.all():
        diags.append(Diagnostic("a2", "point", 0, False, note=res.reasons[0]))
        return False
    loc = n2.to_local(res.image, center=target_center)
    f = int(locate(loc[0]))
    good = bool(f & int(Location.IN_SUPPORT_INTERIOR))
    diags.append(Diagnostic("a2", "point", 0, good, loc[0], res.hull()[0], f))
    return good


def _check_a2_fixed_point(n1, n2, box, diags):
    """Interior point condition from a fixed point known to lie in ``box``.

    With ``p = f(p)`` and ``p`` in ``box``, take ``w1 = w2 = p`` and ``t0 = 0``
    for fuzzy sets; then ``f(gamma(0, p)) = p`` is the center of the member
    ``t(p, u2, s2)``.  A plain h-set only has to contain ``box`` in the
    interior of its support (the horizontal line through ``p`` is used).
    """
    good = True
    for n in (n1, n2):
        if n.is_fuzzy:
            continue
        loc = n.to_local(box)
        f = int(locate(loc))
        ok = bool(f & int(Location.IN_SUPPORT_INTERIOR))
        diags.append(Diagnostic("a2", "fixed-point", 0, ok, loc, box, f, f"box in |{n.name}|"))
        good = good and ok
    if good and n1.is_fuzzy and n2.is_fuzzy:
        diags.append(Diagnostic("a2", "fixed-point", 0, True, None, box, 0, "fixed point in W"))
    return good


def _check_a3(fmap, n1_list, n2, cp, diags):
    st = cp.horizontal
    ok = True
    for e in ("te", "be"):
        pset = n2.edge_segments(e, st.grid)
        try:
            res = fmap.preimage(pset, st, key=_set_key(n2, e, st.grid))
        except (DomainFailure, Rigor3bpError) as exc:
            diags.append(Diagnostic("a3", e, -1, False, note=str(exc)))
            return False
        ok = _record(diags, "a3", e, n2, res, _outside, n1_list) and ok
    return ok


def check_covering_backward(fmap: SectionMap, n1: HSet, n2, cp: CheckParams, dp_bound=None,
                            a3_sources=None) -> CoveringVerdict:
    """Covering by the monotone-curve criterion (conditions b, a1, a2, a3).

    ``dp_bound`` is an optional derivative enclosure valid on all of
    ``|N1|``; when given, a1 is decided from it without integration.
    ``a3_sources`` may list extra h-sets whose supports the preimages must
    miss as well (one backward evaluation serving several relations).
    """
    t_start = time.perf_counter()
    targets = n2 if isinstance(n2, (list, tuple)) else [n2]
    diags = []
    conds = {"b": Status.NOT_CHECKED, "a1": Status.NOT_CHECKED, "a2": Status.NOT_CHECKED, "a3": Status.NOT_CHECKED}
    if cp.horizontal.step > 0:
        raise ValueError("backward check needs a negative step for the horizontal edges")
    orient = check_condition_b(fmap, n1, targets, cp, diags)
    conds["b"] = Status.PASS if orient else Status.FAIL
    a1 = True
    for t in targets:
        a1 = _check_a1(fmap, n1, t, cp, diags, dp_bound) and a1
    conds["a1"] = Status.PASS if a1 else Status.FAIL
    a2 = True
    for t in targets:
        a2 = _check_a2(fmap, n1, t, cp, diags) and a2
    conds["a2"] = Status.PASS if a2 else Status.FAIL
    srcs = [n1] + list(a3_sources or [])
    a3 = True
    for t in targets:
        a3 = _check_a3(fmap, srcs, t, cp, diags) and a3
    conds["a3"] = Status.PASS if a3 else Status.FAIL
    return _verdict(conds, orient, diags, "backward", t_start)


def check_covering_fuzzy(fmap: SectionMap, n1: HSet, n2, cp: CheckParams, mode: str = "backward",
                         dp_bound=None, a3_sources=None, anchor_source=None, anchor_target=None,
                         fixed_point=None) -> CoveringVerdict:
    """Covering for fuzzy h-sets.

    The thickened edges and strip and side tests come from the interval
    centers.  In the backward mode the interior point condition is tested
    at one member: ``anchor_source`` (default the midpoint of ``W1``) and
    the target member ``anchor_target`` (default the midpoint of ``W2``).
    Condition names carry an ``f`` (``bf``, ``af1`` ...).  When
    ``fixed_point`` is a box known to hold a fixed point of ``fmap``, the
    interior point condition uses that point instead of an integration.
    """
    t_start = time.perf_counter()
    targets = n2 if isinstance(n2, (list, tuple)) else [n2]
    if mode == "direct":
        v = check_covering_direct(fmap, n1, targets, cp)
        v.conditions = {k.replace("a'", "af").replace("b", "bf"): s for k, s in v.conditions.items()}
        v.method = "fuzzy-direct"
        return v
    if mode != "backward":
        raise ValueError(f"unknown mode {mode!r}")
    if cp.horizontal.step > 0:
        raise ValueError("backward check needs a negative step for the horizontal edges")
    diags = []
    conds = {}
    orient = check_condition_b(fmap, n1, targets, cp, diags)
    conds["bf"] = Status.PASS if orient else Status.FAIL
    a1 = True
    for t in targets:
        # the derivative formula does not depend on the target member
        a1 = _check_a1(fmap, n1, t, cp, diags, dp_bound) and a1
    conds["af1"] = Status.PASS if a1 else Status.FAIL
    w1 = anchor_source if anchor_source is not None else (n1.c.mid() if n1.is_fuzzy else None)
    a2 = True
    for t in targets if fixed_point is None else ():
        w2 = anchor_target if anchor_target is not None else (t.c.mid() if t.is_fuzzy else None)
        a2 = _check_a2(fmap, n1, t, cp, diags, source_center=w1, target_center=w2) and a2
    if fixed_point is not None:
        a2 = all([_check_a2_fixed_point(n1, t, _coerce(fixed_point), diags) for t in targets])
    conds["af2"] = Status.PASS if a2 else Status.FAIL
    srcs = [n1] + list(a3_sources or [])
    a3 = True
    for t in targets:
        a3 = _check_a3(fmap, srcs, t, cp, diags) and a3
    conds["af3"] = Status.PASS if a3 else Status.FAIL
    return _verdict(conds, orient, diags, "fuzzy-backward", t_start)


# ----------------------------------------------------------- hyperbolicity

@dataclass
class HyperbolicityData:
    lambda1: Interval
    lambda2: Interval
    eps1: Interval
    eps2: Interval
    lambda1_prime: float
    lambda2_prime: float
    eps1_prime: float
    eps2_prime: float
    ratio_window: tuple

    @property
    def hyperbolic(self) -> bool:
        lo, hi = self.ratio_window
        return (self.lambda1_prime > 1 and self.lambda2_prime < 1 and self._cone() and lo < hi)

    def _cone(self):
        lhs = _up(self.eps1_prime * self.eps2_prime)
        rhs = _dn(_dn(1.0 - self.lambda2_prime) * _dn(self.lambda1_prime - 1.0))
        return bool(lhs < rhs)

    def admits(self, ratio: float) -> bool:
        lo, hi = self.ratio_window
        return lo < ratio < hi


def check_hyperbolicity(dp_local) -> HyperbolicityData:
    """Hyperbolicity data of a 2x2 derivative enclosure in the ``(u, s)`` frame.

    The matrix is read as ``[[lambda1, eps1], [eps2, lambda2]]``.
    """
    m = _coerce(dp_local)
    l1, e1, e2, l2 = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    l1p = float(l1.abs_inf())
    l2p = float(l2.abs_sup())
    e1p = float(e1.abs_sup())
    e2p = float(e2.abs_sup())
    if l1p > 1:
        lo = float(_up(e1p / _dn(l1p - 1.0))) if e1p > 0 else 0.0
    else:
        lo = np.inf
    if l2p < 1:
        hi = float(_dn(_dn(1.0 - l2p) / _up(e2p))) if e2p > 0 else np.inf
    else:
        hi = -np.inf
    return HyperbolicityData(l1, l2, e1, e2, l1p, l2p, e1p, e2p, (lo, hi))


def check_unique_fixed_point(dp) -> bool:
    """True when ``det([DP] - Id)`` excludes zero (at most one fixed point)."""
    m = _coerce(dp)
    d = det2(fsub(m, np.eye(2)))
    return not bool(d.contains_zero())
