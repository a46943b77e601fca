"""Lemma-by-lemma re-verification of the proof and the resulting certificate.

Each ``verify_*`` function returns a :class:`LemmaReport`.  They share a
:class:`ProofRun`, which holds the h-set data, the memo of Poincare images
(so an edge used by two relations is integrated once) and the derivative
enclosures on ``U1`` and ``U2`` that later lemmas reuse.

Relations are checked with exactly the tabulated settings unless overrides
are given.  With ``auto_refine`` a failed relation is retried on doubled
grids; such results are marked in the report as using non-tabulated
settings.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .covering import (
    CheckParams,
    CoveringVerdict,
    PoincareSectionMap,
    Stage,
    check_covering_backward,
    check_covering_direct,
    check_covering_fuzzy,
    check_hyperbolicity,
    check_unique_fixed_point,
)
from .data import (
    COMPOSED_MAPS,
    GAMMA,
    SYMBOL_SETS,
    ProofData,
    Relation,
    domain_params,
    dp_params,
    lyapunov_params,
    proof_data,
    relations,
)
from .errors import Rigor3bpError
from .hset import HSet, is_r_symmetric
from .interval import Interval, det2, fmatmul, point_inverse, stack
from .model import jacobi
from .poincare import MapCache, MapKind, PlanarSet, poincare_batch

__all__ = ["RunConfig", "SubResult", "LemmaReport", "TransitionGraph", "ProofRun", "LEMMAS",
           "verify_lyapunov", "verify_dp_enclosures", "verify_hyperbolic_coverings", "verify_heteroclinic_chain",
           "verify_exterior_chain", "verify_interior_chain", "assemble_certificate", "run_lemmas", "build_graph",
           "mirror_relation_sets", "audit_branches"]

LEMMAS = ("lyapunov", "dp", "hyperbolic", "heteroclinic", "exterior", "interior")


@dataclass
class RunConfig:
    """Settings of a verification run.

    ``overrides`` maps a relation id to a dict of :meth:`CheckParams.patched`
    keys; bare ``step``, ``order`` and ``grid`` apply to both edge stages
    (step signs are kept).  ``order``, ``step`` and ``grid`` at the top level
    apply to every relation.
    """

    lemmas: tuple = ("all",)
    overrides: dict = field(default_factory=dict)
    report_path: Optional[str] = None
    plot_dir: Optional[str] = None
    threads: int = 1
    auto_refine: bool = False
    order: Optional[int] = None
    step: Optional[float] = None
    grid: Optional[int] = None
    h2_stable_scale: Optional[str] = None

    def __post_init__(self):
        if self.threads < 1:
            raise ValueError("threads must be at least 1")

    def selected(self):
        if "all" in self.lemmas:
            return list(LEMMAS)
        bad = [x for x in self.lemmas if x not in LEMMAS]
        if bad:
            raise ValueError(f"unknown lemma(s): {', '.join(bad)}")
        return [x for x in LEMMAS if x in self.lemmas]


@dataclass
class SubResult:
    """One checked item inside a lemma (a sign, a relation, a bound ...)."""

    kind: str  # sign | domain | dp | hyperbolicity | relation | symmetry
    name: str
    passed: bool
    lines: list = field(default_factory=list)  # report lines (without the lemma header)
    verdict: Optional[CoveringVerdict] = None
    data: dict = field(default_factory=dict)
    params: Optional[object] = None
    refined: bool = False


@dataclass
class LemmaReport:
    lemma_id: str
    verdict: str
    sub_results: list
    wall_time: float
    notes: list = field(default_factory=list)

    @property
    def verified(self) -> bool:
        return self.verdict == "Verified"

    @property
    def params_used(self):
        return {s.name: s.params for s in self.sub_results if s.params is not None}


def _iv(x: Interval) -> str:
    x = Interval(np.atleast_1d(x.lo), np.atleast_1d(x.hi), check=False)
    return "".join(f"[{float(lo)!r},{float(hi)!r}]" for lo, hi in zip(x.lo.ravel(), x.hi.ravel()))


def _finish(lemma, subs, t0, notes=()):
    ok = bool(subs) and all(s.passed for s in subs)
    return LemmaReport(lemma, "Verified" if ok else "Failed", subs, time.perf_counter() - t0, list(notes))


# ----------------------------------------------------------------- state

class ProofRun:
    """Shared state of one verification run."""

    def __init__(self, cfg: Optional[RunConfig] = None, data: Optional[ProofData] = None):
        self.cfg = cfg or RunConfig()
        self.data = data or proof_data(self.cfg.h2_stable_scale)
        self.cache = MapCache()
        self.maps = {}
        self.dp = {}  # "U1"/"U2" -> 2x2 hull of DP
        self.reports = {}
        self.relations = relations()
        known = {r.rid for rs in self.relations.values() for r in rs}
        bad = [k for k in self.cfg.overrides if k not in known]
        if bad:
            raise ValueError(f"override for unknown relation(s): {', '.join(bad)}")
        for rs in self.relations.values():
            for r in rs:
                try:
                    self.params_for(r)
                except (TypeError, ValueError, AttributeError) as exc:
                    raise ValueError(f"bad settings for {r.rid}: {exc}") from None

    def fmap(self, kind) -> PoincareSectionMap:
        kind = kind if isinstance(kind, MapKind) else MapKind(kind)
        key = (kind.tag, kind.inverse)
        if key not in self.maps:
            self.maps[key] = PoincareSectionMap(self.data.params, kind, self.cache, self.cfg.threads)
        return self.maps[key]

    def params_for(self, rel: Relation) -> CheckParams:
        cp = rel.params
        cfg = self.cfg

        def restage(st: Stage, order=None, step=None, grid=None):
            if st is None:
                return None
            o = st.order if order is None else int(order)
            s = st.step if step is None else float(np.sign(st.step)) * abs(float(step))
            g = st.grid if grid is None else int(grid)
            return Stage(g, o, s)

        if cfg.order or cfg.step or cfg.grid:
            cp = CheckParams(restage(cp.vertical, cfg.order, cfg.step, cfg.grid),
                             restage(cp.horizontal, cfg.order, cfg.step, cfg.grid),
                             restage(cp.mono, cfg.order, cfg.step), restage(cp.center, cfg.order, cfg.step),
                             cp.anchor)
        ov = dict(self.cfg.overrides.get(rel.rid, {}))
        bare = {k: ov.pop(k) for k in ("order", "step", "grid") if k in ov}
        if bare:
            cp = CheckParams(restage(cp.vertical, **bare), restage(cp.horizontal, **bare), cp.mono, cp.center,
                             cp.anchor)
        if ov:
            cp = cp.patched(**ov)
        return cp


def audit_branches(data: ProofData, rels) -> list:
    """Branch bookkeeping: each relation must go between the sections of its map."""
    problems = []
    for r in rels:
        k = r.map_kind
        if data[r.source].branch != k.source:
            problems.append(f"{r.rid}: source on {data[r.source].branch.label} but {k} starts on {k.source.label}")
        if data[r.target].branch != k.target:
            problems.append(f"{r.rid}: target on {data[r.target].branch.label} but {k} ends on {k.target.label}")
    return problems


# ------------------------------------------------------------ lyapunov

def verify_lyapunov(run: Optional[ProofRun] = None) -> LemmaReport:
    """Sign of the image xdot for the half maps from ``(x_i -+ eta_i, 0)``."""
    run = run or ProofRun()
    t0 = time.perf_counter()
    d = run.data
    prm = lyapunov_params()
    subs = []
    for name, x, br in d.lyapunov_points():
        i = 1 if name.startswith("L1") else 2
        order, step = prm[i]
        kind = MapKind("half+" if i == 1 else "half-")
        pset = PlanarSet(stack([x, Interval(0.0)]).reshape(1, 2), np.zeros((1, 2, 0)), br)
        expect = -1 if name.endswith("-") else 1
        try:
            res = poincare_batch(d.params, kind, pset, order, step)
            ok = bool(res.ok[0])
            xd = res.hull()[0, 1]
            full = res.image.hull()[0]
            cj = jacobi(d.params, full)
            passed = ok and ((xd.hi < 0) if expect < 0 else (xd.lo > 0))
            line = (f"SIGN {name} MAP {kind} ORDER {order} STEP {step} XDOT {_iv(xd)} "
                    f"EXPECT {'<0' if expect < 0 else '>0'} {'Pass' if passed else 'Fail'}")
            data = {"image": res.hull()[0], "xdot": xd, "time": res.time[0], "jacobi": cj}
        except Rigor3bpError as exc:
            passed, line, data = False, f"SIGN {name} MAP {kind} ERROR {exc} Fail", {}
        subs.append(SubResult("sign", name, bool(passed), [line], data=data, params=(order, step)))
    rep = _finish("lyapunov", subs, t0)
    run.reports["lyapunov"] = rep
    return rep


# ------------------------------------------------------ dp enclosures

def _frame(u, s):
    A = np.column_stack([u, s])
    return A, point_inverse(A)


def dp_enclosure(run: ProofRun, which: str):
    """C1 evaluation of the full return map on the 13x13 cover of ``U1``/``U2``.

    Returns ``(ok, hull, per_cell, reasons)``.
    """
    order, step, nu, ns = dp_params()[which]
    d = run.data
    h = d["H1"] if which == "U1" else d["H2"]
    kind = MapKind("full+" if which == "U1" else "full-")
    cells = h.support(nu, ns)
    res = poincare_batch(d.params, kind, cells, order, step, c1=True)
    ok = bool(res.ok.all())
    D = res.deriv
    hull = Interval(D.lo.min(axis=0), D.hi.max(axis=0), check=False) if ok else None
    return ok, hull, res, [r for r in res.reasons if r]


def verify_dp_enclosures(run: Optional[ProofRun] = None) -> LemmaReport:
    """Derivative enclosures of the full return maps on ``U1`` and ``U2``."""
    run = run or ProofRun()
    t0 = time.perf_counter()
    d = run.data
    subs = []
    names = [["A", "B"], ["C", "D"]]
    for i, which in ((1, "U1"), (2, "U2")):
        try:
            ok, hull, res, reasons = dp_enclosure(run, which)
        except Rigor3bpError as exc:
            ok, hull, reasons = False, None, [str(exc)]
        if not ok:
            bad = reasons[0] if reasons else "failure"
            subs.append(SubResult("dp", which, False, [f"DP {which} DOMAIN Fail {bad}"]))
            continue
        run.dp[which] = hull
        lines = [f"DP {which} DOMAIN Pass CELLS {dp_params()[which][2]}x{dp_params()[which][3]}"]
        paper = d.dp_paper(i, "raw")
        overlap = True
        width_ok = True
        for a in range(2):
            for b in range(2):
                ours = hull[a, b]
                ref = paper[a, b]
                ov = not bool(ours.is_disjoint(ref))
                ratio = float(ours.width()) / float(ref.width())
                overlap &= ov
                width_ok &= ratio <= 3.0
                lines.append(f"DP {which} ENTRY {names[a][b]}{i} ENCL {_iv(ours)} REF {_iv(ref)} "
                             f"OVERLAP {'Pass' if ov else 'Fail'} WIDTH_RATIO {ratio:.3f}")
        u, s = (d.u1, d.s1) if i == 1 else (d.u2, d.s2)
        A, Ainv = _frame(u, s)
        local = fmatmul(fmatmul(Ainv, hull), A)
        ref_l = d.dp_paper(i, "local")
        lam_ok = not bool(local[0, 0].is_disjoint(ref_l[0, 0]))
        lines.append(f"DP {which} LOCAL ENCL {_iv(local)} LAMBDA1 {'Pass' if lam_ok else 'Fail'}")
        hyp = check_hyperbolicity(local)
        lines.append(f"DP {which} HYPERBOLIC {'Pass' if hyp.hyperbolic else 'Fail'} "
                     f"WINDOW [{hyp.ratio_window[0]!r},{hyp.ratio_window[1]!r}] "
                     f"RATIO1 {'Pass' if hyp.admits(1.0) else 'Fail'}")
        det = det2(hull - np.eye(2))
        uniq = check_unique_fixed_point(hull)
        lines.append(f"DP {which} DET {_iv(det)} UNIQUE {'Pass' if uniq else 'Fail'}")
        passed = overlap and width_ok and lam_ok and hyp.hyperbolic and hyp.admits(1.0) and uniq
        subs.append(SubResult("dp", which, passed, lines, data={"raw": hull, "local": local, "hyp": hyp,
                                                                 "det": det, "overlap": overlap,
                                                                 "width_ok": width_ok},
                              params=dp_params()[which]))
    rep = _finish("dp", subs, t0)
    run.reports["dp"] = rep
    return rep


# --------------------------------------------------------- relations

def _rel_lines(rel: Relation, v: CoveringVerdict, label=None) -> list:
    name = label or rel.rid
    out = [f"REL {name} MAP {MapKind(rel.kind)} METHOD {v.method} ORIENT {v.orientation.value} "
           f"{'Pass' if v.holds else 'Fail'}"]
    for cond, st in v.conditions.items():
        dcond = {"bf": "b", "af": "a'"}.get(cond, cond.replace("af", "a"))
        encl = [dg.local for dg in v.diagnostics if dg.condition == dcond and dg.local is not None]
        if encl:
            lo = np.min([e.lo for e in encl], axis=0)
            hi = np.max([e.hi for e in encl], axis=0)
            enc = _iv(Interval(lo, hi, check=False))
        else:
            enc = "-"
        out.append(f"REL {name} COND {cond} {st.value} ENCL {enc}")
    bad = [dg for dg in v.diagnostics if not dg.ok]
    if bad:
        dg = bad[0]
        out.append(f"REL {name} FIRST_FAILURE {dg.condition} {dg.edge} {dg.index} {dg.note or '-'}")
    return out


def check_relation(run: ProofRun, rel: Relation, cp: Optional[CheckParams] = None) -> CoveringVerdict:
    d = run.data
    cp = cp or run.params_for(rel)
    fmap = run.fmap(rel.kind)
    n1, n2 = d[rel.source], d[rel.target]
    dp_bound = None
    if rel.dp_from:
        if rel.dp_from not in run.dp:
            verify_dp_enclosures(run)
        dp_bound = run.dp.get(rel.dp_from)
        if dp_bound is None:
            raise Rigor3bpError(f"no derivative enclosure on {rel.dp_from}")
    if rel.method == "direct":
        return check_covering_direct(fmap, n1, n2, cp)
    if rel.method == "backward":
        return check_covering_backward(fmap, n1, n2, cp, dp_bound=dp_bound)
    box = d.fixed_point_box(rel.fixed_point) if rel.fixed_point else None
    return check_covering_fuzzy(fmap, n1, n2, cp, "backward" if cp.backward else "direct", dp_bound=dp_bound,
                                fixed_point=box)


def _relation_sub(run: ProofRun, rel: Relation) -> SubResult:
    cp = run.params_for(rel)
    try:
        v = check_relation(run, rel, cp)
    except Rigor3bpError as exc:
        return SubResult("relation", rel.rid, False, [f"REL {rel.rid} MAP {MapKind(rel.kind)} ERROR {exc} Fail"],
                         params=cp)
    refined = False
    if not v.holds and run.cfg.auto_refine:
        for _ in range(2):
            cp = cp.refined(2)
            v = check_relation(run, rel, cp)
            refined = True
            if v.holds:
                break
    lines = _rel_lines(rel, v)
    if refined:
        lines.append(f"REL {rel.rid} NOTE auto-refined settings {cp.vertical} / {cp.horizontal}")
    return SubResult("relation", rel.rid, v.holds, lines, verdict=v, params=cp, refined=refined)


def _domain_subs(run: ProofRun, lemma: str) -> list:
    subs = []
    d = run.data
    for name, kind, order, step, grid in domain_params()[lemma]:
        n = d[name]
        st = Stage(grid, order, step if run.cfg.step is None else abs(run.cfg.step))
        try:
            res = run.fmap(kind).image(n.support(grid, grid), st, key=(n.to_text(), "support", grid))
            ok = bool(res.ok.all())
            why = "" if ok else next(r for r in res.reasons if r)
            enc = _iv(res.hull()[0]) if ok else "-"
        except Rigor3bpError as exc:
            ok, why, enc = False, str(exc), "-"
        subs.append(SubResult("domain", f"{name}:{kind}", ok,
                              [f"DOMAIN {name} MAP {MapKind(kind)} ORDER {order} STEP {st.step} GRID {grid}x{grid} "
                               f"{'Pass' if ok else 'Fail'} ENCL {enc}" + (f" {why}" if why else "")],
                              params=st))
    return subs


def _audit_sub(run: ProofRun, rels) -> SubResult:
    problems = audit_branches(run.data, rels)
    return SubResult("audit", "branches", not problems,
                     ["AUDIT branches " + ("Pass" if not problems else "Fail " + "; ".join(problems))])


def _chain(run: ProofRun, lemma: str, extra=()) -> LemmaReport:
    t0 = time.perf_counter()
    rels = run.relations[lemma]
    subs = [_audit_sub(run, rels)]
    if subs[0].passed:
        if lemma in domain_params():
            subs += _domain_subs(run, lemma)
        for rel in rels:
            subs.append(_relation_sub(run, rel))
        for fn in extra:
            subs.append(fn(run))
    rep = _finish(lemma, subs, t0, run.data.notes)
    run.reports[lemma] = rep
    return rep


def verify_hyperbolic_coverings(run: Optional[ProofRun] = None) -> LemmaReport:
    """Coverings of the fuzzy sets around the two fixed points."""
    run = run or ProofRun()
    return _chain(run, "hyperbolic")


def verify_heteroclinic_chain(run: Optional[ProofRun] = None) -> LemmaReport:
    """The chain from ``H1^2`` through ``N0 .. N7`` to ``H2^2``."""
    run = run or ProofRun()
    return _chain(run, "heteroclinic")


def _symmetry_sub(name):
    def fn(run: ProofRun):
        ok = is_r_symmetric(run.data[name])
        return SubResult("symmetry", name, ok, [f"SYMMETRY {name} R-symmetric {'Pass' if ok else 'Fail'}"])
    return fn


def mirror_relation_sets(n1: HSet, n2: HSet):
    """Sets of the mirrored relation: plain reflections of both h-sets.

    If ``n1 => n2`` under ``P``, then the reflected sets (same roles of
    ``u`` and ``s``) satisfy ``R(n1) => R(n2)`` under ``R P R``, which is the
    inverse of the mirrored half map.  In terms of the role-swapping action
    this is the back-covering ``R(n2) <= R(n1)``.
    """
    def refl(n):
        c = stack([n.c[0], -n.c[1]])
        return type(n)(c, np.array([n.u[0], -n.u[1]]) + 0.0, np.array([n.s[0], -n.s[1]]) + 0.0, n.branch,
                       f"R({n.name})")
    return refl(n1), refl(n2)


def _mirror_sub(rid):
    def fn(run: ProofRun):
        rel = next(r for rs in run.relations.values() for r in rs if r.rid == rid)
        m1, m2 = mirror_relation_sets(run.data[rel.source], run.data[rel.target])
        kind = MapKind(rel.kind).mirrored()
        fmap = run.fmap(kind)
        cp = run.params_for(rel)
        label = f"{m2.name}<={m1.name}"
        try:
            if cp.backward:
                v = check_covering_backward(fmap, m1, m2, cp)
            else:
                v = check_covering_direct(fmap, m1, m2, cp)
        except Rigor3bpError as exc:
            return SubResult("mirror", label, False, [f"REL {label} ERROR {exc} Fail"])
        lines = _rel_lines(Relation(label, m1.name, m2.name, kind.tag, cp, rel.method), v, label)
        lines[0] = lines[0].replace(f"MAP {MapKind(kind.tag)}", f"MAP {kind}")
        return SubResult("mirror", label, v.holds, lines, verdict=v, params=cp)
    return fn


def verify_exterior_chain(run: Optional[ProofRun] = None) -> LemmaReport:
    """The chain ``E0 => .. => E5 => H2^2`` plus the symmetry of ``E0``."""
    run = run or ProofRun()
    return _chain(run, "exterior", extra=(_symmetry_sub("E0"), _mirror_sub("E0=>E1")))


def verify_interior_chain(run: Optional[ProofRun] = None) -> LemmaReport:
    """The chain ``F0 => .. => F4 => H1^2 => H1`` plus the symmetry of ``F0``."""
    run = run or ProofRun()
    return _chain(run, "interior", extra=(_symmetry_sub("F0"),))


# ------------------------------------------------------- certificate

# which lemmas each transition rests on, and through which chain
EVIDENCE = {
    (1, 1): ("self", ["lyapunov", "dp", "hyperbolic"]),
    (2, 2): ("self", ["lyapunov", "dp", "hyperbolic"]),
    (1, 2): ("full chain", ["lyapunov", "dp", "hyperbolic", "heteroclinic"]),
    (2, 1): ("full chain, mirrored", ["lyapunov", "dp", "hyperbolic", "heteroclinic"]),
    (3, 2): ("exterior chain", ["lyapunov", "dp", "hyperbolic", "exterior"]),
    (2, 3): ("exterior chain, mirrored", ["lyapunov", "dp", "hyperbolic", "exterior"]),
    (4, 1): ("interior chain", ["lyapunov", "dp", "hyperbolic", "interior"]),
    (1, 4): ("interior chain, mirrored", ["lyapunov", "dp", "hyperbolic", "interior"]),
}

SYMBOL_NAMES = {1: "L1", 2: "L2", 3: "S", 4: "X"}


@dataclass
class TransitionGraph:
    """Certified transitions between the four symbols (1: H1, 2: H2, 3: E0, 4: F0)."""

    symbols: dict
    edges: list
    chain_evidence: dict
    maps: dict
    withheld: list = field(default_factory=list)

    def lines(self):
        out = []
        for e in self.edges:
            chain, lemmas = self.chain_evidence[e]
            out.append(f"EDGE {e[0]}->{e[1]} CHAIN {chain} EVIDENCE {','.join(lemmas)} "
                       f"MAPS {' '.join(self.maps[e])}")
        for e in self.withheld:
            out.append(f"EDGE {e[0]}->{e[1]} WITHHELD")
        return out


def build_graph(reports: dict) -> TransitionGraph:
    ok = {k for k, r in reports.items() if r.verified}
    edges, withheld = [], []
    for e in GAMMA:
        (edges if set(EVIDENCE[e][1]) <= ok else withheld).append(e)
    return TransitionGraph({k: SYMBOL_SETS[k] for k in SYMBOL_SETS}, edges,
                           {e: EVIDENCE[e] for e in edges}, {e: COMPOSED_MAPS[e] for e in GAMMA}, withheld)


def run_lemmas(run: ProofRun, selected=None, progress=None) -> dict:
    fns = {"lyapunov": verify_lyapunov, "dp": verify_dp_enclosures, "hyperbolic": verify_hyperbolic_coverings,
           "heteroclinic": verify_heteroclinic_chain, "exterior": verify_exterior_chain,
           "interior": verify_interior_chain}
    for lem in (selected or run.cfg.selected()):
        if lem in run.reports:
            continue
        rep = fns[lem](run)
        if progress:
            progress(rep)
    return run.reports


def assemble_certificate(run: Optional[ProofRun] = None, progress=None):
    """Run every lemma and build the transition graph of the symbolic dynamics."""
    run = run or ProofRun()
    reports = run_lemmas(run, list(LEMMAS), progress)
    return build_graph(reports), reports

