"""Constants, h-sets and parameter tables of the proof.

Decimal constants are kept as strings and turned into enclosing intervals
with :func:`~rigor3bp.interval.dec`, so that every number used can be
rendered back to the exact text it came from.  Direction vectors ``u`` and
``s`` are machine numbers (nearest doubles of the decimal data); the h-sets
are defined by those doubles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .covering import CheckParams, Stage
from .hset import FuzzyHSet, HSet
from .interval import Interval, _parse_exact, dec, stack
from .model import Branch, SystemParams
from .poincare import MapKind

__all__ = ["TEXT", "ProofData", "Relation", "proof_data", "relations", "lyapunov_params", "dp_params",
           "domain_params", "GAMMA", "COMPOSED_MAPS", "SYMBOL_SETS", "CHAINS"]

# every decimal constant used, exactly as it is written in the source data
TEXT = {
    "mu": "0.0009537",
    "C": "3.03",
    "x1": "0.9208034913207400196",
    "x2": "1.081929486841799903",
    "eta1": "6e-14",
    "eta2": "1e-13",
    "u1": ("1", "2.5733011"),
    "s1": ("-1", "2.5733011"),
    "u2": ("1", "2.2817915"),
    "s2": ("-1", "2.2817915"),
    "alpha1": "3e-10",
    "alpha2": "4e-10",
    "H1sq_u": "2e-7",
    "H1sq_s": "2e-7",
    "H2sq_u": "1.2e-8",
    "H2sq_s": "2.8e-7",
    # unstable/stable sets along the heteroclinic orbit
    "X0": ("0.9522928423486199945", "1.23e-5"),
    "X1": ("0.921005737890425169", "0.0005205932817646883714"),
    "X2": ("0.957916338594066441", "0.02191497366476494527"),
    "X3": ("1.030069865952822683", "0.00330658676251664686"),
    "X4": ("0.967306682018305608", "0.003703230165036550462"),
    "X5": ("1.040628850444842879", "0.02317063455298806404"),
    "X6": ("1.081670357450509545", "0.0005918226490172379421"),
    "X7": ("1.046819673646057103", "2.13365065043902489e-5"),
    "sN0": ("-4e-6", "1.45e-5"),
    "sN1": ("-4.5e-7", "7/6e-6"),
    "sN2": ("-1.2e-7", "2.92e-7"),
    "sN3": ("-1.05e-7", "2.92e-7"),
    "sN4": ("-1e-7", "2.9e-7"),
    "sN5": ("-1.44e-7", "5.8e-7"),
    "sN6": ("-1.625e-7", "3.75e-7"),
    "sN7": ("-8.3e-7", "2.9e-6"),
    # exterior region
    "Y0": ("-2.08509704964865536", "0"),
    "Y1": ("1.160261327316386816", "-0.1812035059427922688"),
    "Y2": ("1.059527808809695232", "-0.03871458787165545984"),
    "Y3": ("1.082284499686768768", "-0.0008090412116073312256"),
    "Y4": ("1.046834433386131072", "-0.00002957990840481726976"),
    "Y5": ("1.081929798158888576", "-0.0000007068412578518833152"),
    "sE0": ("-1e-7", "3e-8"),
    "sE1": ("1e-7", "8e-8"),
    "sE2": ("-3e-7", "81e-8"),
    "sE3": ("-1e-7", "23e-8"),
    "sE4": ("-1e-7", "35e-8"),
    "sE5": ("-1e-8", "22817915e-15"),
    # interior region
    "Z0": ("-0.6160415155975000064", "0"),
    "Z1": ("0.84668503722876047360", "0.17563753764246766080"),
    "Z2": ("0.94793695784874987520", "0.01522141990729746432"),
    "Z3": ("0.92067611200358768640", "0.00032764933375860776"),
    "Z4": ("0.95228425894935162880", "0.00001048139819208300"),
    "sF0": ("-1e-7", "25e-8"),
    "sF1": ("1e-7", "92e-9"),
    "sF2": ("-25e-9", "33/4e-8"),
    "sF3": ("-1e-7", "26e-8"),
    "sF4": ("-1e-7", "37e-8"),
}

# u = k * (-R(s)) = k * (-s_x, s_xdot) for each set
U_FACTOR = {
    "N0": "1/10", "N1": "1/10", "N2": "1", "N3": "1", "N4": "1/2", "N5": "1/6", "N6": "1/2", "N7": "1/5",
    "E0": "1", "E1": "4", "E2": "1/10", "E3": "1/4", "E4": "1/4", "E5": "1/2",
    "F0": "1", "F1": "2.2", "F2": "1/5", "F3": "1/6", "F4": "1/6",
}

# printed enclosures of the derivative of the full return maps
DP_PAPER = {
    1: {"raw": [["695.659", "696.1085"], ["270.3511", "270.4973"],
                ["1789.9112", "1791.46231"], ["695.61982", "696.12441"]],
        "local": [["1391.271", "1392.239"], ["-0.494", "0.472"],
                  ["-0.483", "0.484"], ["-0.482", "0.485"]]},
    2: {"raw": [["573.3983", "573.835"], ["251.3098", "251.4675"],
                ["1308.1679", "1309.5201"], ["573.3613", "573.848"]],
        "local": [["1146.751", "1147.69"], ["-0.481", "0.457"],
                  ["-0.468", "0.47"], ["-0.468", "0.47"]]},
}


def _nearest(text) -> float:
    return float(_parse_exact(text))


def _vec(name) -> np.ndarray:
    return np.array([_nearest(t) for t in TEXT[name]])


def _center(name) -> Interval:
    return dec(list(TEXT[name]))


def _matrix(rows) -> Interval:
    lo = np.array([[dec(r[0]).lo for r in rows[:2]], [dec(r[0]).lo for r in rows[2:]]], dtype=float)
    hi = np.array([[dec(r[1]).hi for r in rows[:2]], [dec(r[1]).hi for r in rows[2:]]], dtype=float)
    return Interval(lo, hi)


def _u_from_s(s: np.ndarray, factor: str) -> np.ndarray:
    k = float(Fraction(factor)) if "/" in factor else float(factor)
    return np.array([-s[0], s[1]]) * k


@dataclass
class ProofData:
    """All sets of the proof, built from :data:`TEXT`."""

    params: SystemParams
    x1: Interval
    x2: Interval
    eta1: Interval
    eta2: Interval
    u1: np.ndarray
    s1: np.ndarray
    u2: np.ndarray
    s2: np.ndarray
    alpha1: float
    alpha2: float
    sets: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def __getitem__(self, name) -> HSet:
        return self.sets[name]

    def dp_paper(self, i, frame="raw") -> Interval:
        return _matrix(DP_PAPER[i][frame])

    def fixed_point_box(self, i) -> Interval:
        """Box ``[x_i - eta_i, x_i + eta_i] x {0}`` holding the symmetric point of the orbit."""
        x, e = (self.x1, self.eta1) if i == 1 else (self.x2, self.eta2)
        return stack([Interval((x - e).lo, (x + e).hi), Interval(0.0)])

    def lyapunov_points(self):
        """The four section points ``(x_i -+ eta_i, 0)`` with their branches."""
        return [("L1-", self.x1 - self.eta1, Branch.PLUS), ("L1+", self.x1 + self.eta1, Branch.PLUS),
                ("L2-", self.x2 - self.eta2, Branch.MINUS), ("L2+", self.x2 + self.eta2, Branch.MINUS)]


def proof_data(h2_stable_scale: Optional[str] = None) -> ProofData:
    """Build every h-set.

    ``h2_stable_scale`` overrides the stable scale of ``H2^2`` (the data
    give it as 2.8e-7 in one place and 2.8e-8 in another; 2.8e-7 is the
    default).
    """
    params = SystemParams.from_text(TEXT["mu"], TEXT["C"])
    x1, x2 = dec(TEXT["x1"]), dec(TEXT["x2"])
    eta1, eta2 = dec(TEXT["eta1"]), dec(TEXT["eta2"])
    u1, s1, u2, s2 = _vec("u1"), _vec("s1"), _vec("u2"), _vec("s2")
    a1, a2 = _nearest(TEXT["alpha1"]), _nearest(TEXT["alpha2"])
    d = ProofData(params, x1, x2, eta1, eta2, u1, s1, u2, s2, a1, a2)
    zero = Interval(0.0)
    h1 = stack([x1, zero])
    h2 = stack([x2, zero])
    sets = d.sets
    sets["H1^1"] = HSet(h1, a1 * u1, a1 * s1, Branch.PLUS, "H1^1")
    sets["H2^1"] = HSet(h2, a2 * u2, a2 * s2, Branch.MINUS, "H2^1")
    sets["H1^2"] = HSet(h1, _nearest(TEXT["H1sq_u"]) * u1, _nearest(TEXT["H1sq_s"]) * s1, Branch.PLUS, "H1^2")
    h2s = TEXT["H2sq_s"] if h2_stable_scale is None else h2_stable_scale
    if h2s != TEXT["H2sq_s"]:
        d.notes.append(f"H2^2 stable scale overridden: {h2s}")
    sets["H2^2"] = HSet(h2, _nearest(TEXT["H2sq_u"]) * u2, _nearest(h2s) * s2, Branch.MINUS, "H2^2")
    W1 = stack([x1 + Interval(-eta1.hi, eta1.hi), zero])
    W2 = stack([x2 + Interval(-eta2.hi, eta2.hi), zero])
    sets["H1"] = FuzzyHSet(W1, a1 * u1, a1 * s1, Branch.PLUS, "H1")
    sets["H2"] = FuzzyHSet(W2, a2 * u2, a2 * s2, Branch.MINUS, "H2")
    for i in range(8):
        s = _vec(f"sN{i}")
        br = Branch.MINUS if i % 2 == 0 else Branch.PLUS
        sets[f"N{i}"] = HSet(_center(f"X{i}"), _u_from_s(s, U_FACTOR[f"N{i}"]), s, br, f"N{i}")
    for i in range(6):
        s = _vec(f"sE{i}")
        br = Branch.PLUS if i % 2 == 0 else Branch.MINUS
        sets[f"E{i}"] = HSet(_center(f"Y{i}"), _u_from_s(s, U_FACTOR[f"E{i}"]), s, br, f"E{i}")
    for i in range(5):
        s = _vec(f"sF{i}")
        br = Branch.MINUS if i % 2 == 0 else Branch.PLUS
        sets[f"F{i}"] = HSet(_center(f"Z{i}"), _u_from_s(s, U_FACTOR[f"F{i}"]), s, br, f"F{i}")
    return d


# ------------------------------------------------------------- relations

@dataclass(frozen=True)
class Relation:
    """One covering relation ``source => target`` under ``kind``.

    ``method`` is ``direct``, ``backward`` or ``fuzzy``.  ``dp_from`` names
    the derivative enclosure (``U1`` or ``U2``) that decides the
    monotonicity condition without integration.  ``fixed_point`` (1 or 2)
    names the libration orbit whose symmetric point gives the interior
    point condition.  ``shared`` lists the ids of
    relations whose inclusions are verified in the same evaluation.
    """

    rid: str
    source: str
    target: str
    kind: str
    params: CheckParams
    method: str
    dp_from: Optional[str] = None
    shared: tuple = ()
    fixed_point: Optional[int] = None

    @property
    def map_kind(self) -> MapKind:
        return MapKind(self.kind)


def _cp(vert, horiz, mono=None, center=None, anchor=(0.0, 0.0)):
    return CheckParams(Stage(*vert), Stage(*horiz), Stage(*mono) if mono else None,
                       Stage(1, *center) if center else None, anchor)


def _het():
    m1 = (1, 4, 0.01)
    c1 = (6, 0.01)
    return [
        Relation("H1^2=>N0", "H1^2", "N0", "half+", _cp((7, 5, 0.01), (6, 4, 0.01)), "direct"),
        Relation("N0=>N1", "N0", "N1", "half-", _cp((40, 8, 0.04), (1, 5, -0.01), m1, c1), "backward"),
        Relation("N1=>N2", "N1", "N2", "half+", _cp((25, 5, 0.01), (8, 6, -0.01), m1, c1), "backward"),
        Relation("N2=>N3", "N2", "N3", "half-", _cp((5, 6, 0.004), (6, 6, -0.004), (4, 4, 0.004), (6, 0.004)),
                 "backward"),
        Relation("N3=>N4", "N3", "N4", "half+", _cp((5, 6, 0.004), (3, 6, -0.005), (2, 4, 0.003), (6, 0.003)),
                 "backward"),
        Relation("N4=>N5", "N4", "N5", "half-", _cp((15, 6, 0.006), (2, 6, -0.01), (1, 4, 0.004), (6, 0.004)),
                 "backward"),
        Relation("N5=>N6", "N5", "N6", "half+", _cp((32, 6, 0.01), (2, 6, -0.01), m1, c1), "backward"),
        Relation("N6=>N7", "N6", "N7", "half-", _cp((5, 6, 0.01), (8, 6, 0.01)), "direct"),
        Relation("N7=>H2^2", "N7", "H2^2", "half+", _cp((33, 5, 0.01), (2, 5, -0.01), m1, c1, (0.228, 0.0)),
                 "backward"),
    ]


def _ext():
    m = (1, 4, 0.02)
    c = (7, 0.02)
    return [
        Relation("E0=>E1", "E0", "E1", "half+", _cp((12, 7, 0.04), (33, 7, -0.04), m, c), "backward"),
        Relation("E1=>E2", "E1", "E2", "half-", _cp((25, 7, 0.02), (12, 8, -0.02), m, c), "backward"),
        Relation("E2=>E3", "E2", "E3", "half+", _cp((50, 7, 0.03), (1, 7, -0.02), m, c), "backward"),
        Relation("E3=>E4", "E3", "E4", "half-", _cp((7, 7, 0.03), (2, 7, -0.02), m, c), "backward"),
        Relation("E4=>E5", "E4", "E5", "half+", _cp((20, 7, 0.03), (2, 7, -0.02), m, c), "backward"),
        Relation("E5=>H2^2", "E5", "H2^2", "full-", _cp((4, 5, 0.01), (1, 5, -0.02), (1, 5, 0.02), (8, 0.02),
                                                      (-0.155, 0.0)), "backward"),
    ]


def _int():
    m = (1, 4, 0.01)
    c = (8, 0.02)
    return [
        Relation("F0=>F1", "F0", "F1", "half-", _cp((20, 8, 0.02), (50, 6, -0.01), (2, 5, 0.01), c), "backward"),
        Relation("F1=>F2", "F1", "F2", "half+", _cp((330, 7, 0.02), (9, 7, -0.02), m, c), "backward"),
        Relation("F2=>F3", "F2", "F3", "half-", _cp((35, 7, 0.03), (1, 7, -0.02), m, c), "backward"),
        Relation("F3=>F4", "F3", "F4", "half+", _cp((10, 7, 0.03), (1, 7, -0.02), m, c), "backward"),
        Relation("F4=>H1^2", "F4", "H1^2", "half-", _cp((45, 7, 0.03), (3, 7, -0.02), m, c), "backward"),
        Relation("H1^2=>H1", "H1^2", "H1", "full+", _cp((7, 7, 0.03), (3, 8, -0.02), m, c), "fuzzy",
                 fixed_point=1),
    ]


def _fuzzy():
    return [
        Relation("H1=>H1", "H1", "H1", "full+", _cp((3, 6, 0.01), (2, 6, -0.01)), "fuzzy", dp_from="U1",
                 shared=("H1=>H1^2",), fixed_point=1),
        Relation("H1=>H1^2", "H1", "H1^2", "full+", _cp((3, 6, 0.01), (2, 5, -0.01)), "fuzzy", dp_from="U1",
                 shared=("H1=>H1",), fixed_point=1),
        Relation("H2^2=>H2", "H2^2", "H2", "full-", _cp((32, 5, 0.01), (4, 8, -0.02), (1, 4, 0.01), (8, 0.02)),
                 "fuzzy", shared=("H2=>H2",), fixed_point=2),
        Relation("H2=>H2", "H2", "H2", "full-", _cp((2, 8, 0.02), (4, 8, -0.02)), "fuzzy", dp_from="U2",
                 shared=("H2^2=>H2",), fixed_point=2),
    ]


def relations() -> dict:
    """Relation tables keyed by lemma: heteroclinic, exterior, interior, hyperbolic."""
    return {"heteroclinic": _het(), "exterior": _ext(), "interior": _int(), "hyperbolic": _fuzzy()}


def lyapunov_params():
    """(order, step) for the crossings from ``x1 -+ eta1`` and ``x2 -+ eta2``."""
    return {1: (20, 0.05), 2: (19, 0.055)}


def dp_params():
    """Settings for the derivative enclosures on U1 and U2: order, step, grid."""
    return {"U1": (5, 0.007, 13, 13), "U2": (5, 0.007, 13, 13)}


def domain_params():
    """Whole-set map evaluations establishing that each map is defined.

    Returns lemma -> list of (set, map kind, order, step, grid).
    """
    het = [("H1", "full+"), ("H1^2", "half+")] + [(f"N{i}", "half-" if i % 2 == 0 else "half+") for i in range(8)]
    het += [("H2^2", "full-")]
    ext = [(f"E{i}", "half+" if i % 2 == 0 else "half-") for i in range(5)] + [("E5", "full-")]
    inn = [(f"F{i}", "half-" if i % 2 == 0 else "half+") for i in range(5)] + [("H1^2", "full+")]
    return {"heteroclinic": [(s, k, 5, 0.01, 1) for s, k in het],
            "exterior": [(s, k, 5, 0.02, 1) for s, k in ext],
            "interior": [(s, k, 5, 0.02, 1) for s, k in inn]}


# ---------------------------------------------------- symbolic dynamics

SYMBOL_SETS = {1: "H1", 2: "H2", 3: "E0", 4: "F0"}

# allowed transitions i -> j
GAMMA = ((1, 1), (1, 2), (1, 4), (2, 1), (2, 2), (2, 3), (3, 2), (4, 1))

# composed maps realising each transition, listed in order of application
COMPOSED_MAPS = {
    (1, 1): ["P+"],
    (1, 2): ["P+"] + ["P1/2,+", "P1/2,-"] * 4 + ["P1/2,+", "P-"],
    (2, 1): ["P-"] + ["P1/2,-", "P1/2,+"] * 4 + ["P1/2,-", "P+"],
    (2, 2): ["P-"],
    (1, 4): ["P+"] + ["P1/2,+", "P1/2,-"] * 2 + ["P1/2,+"],
    (4, 1): ["P1/2,-", "P1/2,+"] * 2 + ["P1/2,-", "P+"],
    (2, 3): ["P-", "P-"] + ["P1/2,-", "P1/2,+"] * 2 + ["P1/2,-"],
    (3, 2): ["P1/2,+", "P1/2,-"] * 2 + ["P1/2,+", "P-", "P-"],
}

# chains of h-sets behind each transition; "mirror" chains follow from the
# forward chain by the reversing symmetry
CHAINS = {
    "full": ["H1", "H1", "H1^2", "N0", "N1", "N2", "N3", "N4", "N5", "N6", "N7", "H2^2", "H2", "H2"],
    "exterior": ["E0", "E1", "E2", "E3", "E4", "E5", "H2^2", "H2"],
    "interior": ["F0", "F1", "F2", "F3", "F4", "H1^2", "H1"],
}
