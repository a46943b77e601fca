"""Text report and plot data of a verification run.

The report is line oriented: a ``LEMMA <id> VERDICT <Verified|Failed>``
header followed by the lines of its checks (``SIGN``, ``DP``, ``DOMAIN``,
``REL ... COND ...``).  Wall times go to ``TIME`` lines at the very end so
that two runs with equal settings give identical reports apart from them.
"""

from __future__ import annotations

import csv
import os
from typing import Optional

import numpy as np

from .data import TEXT, ProofData
from .hset import HSet
from .interval import Interval

__all__ = ["render_report", "write_report", "write_plot_data", "dump_params", "strip_timings"]


def _header(data: ProofData, settings: Optional[dict] = None):
    out = ["# rigor3bp proof report",
           f"PARAMS mu {TEXT['mu']} C {TEXT['C']}"]
    for k, v in sorted((settings or {}).items()):
        out.append(f"SETTING {k} {v}")
    for note in data.notes:
        out.append(f"NOTE {note}")
    return out


def render_report(run, graph=None, timings=True) -> str:
    """Report text of every lemma in ``run.reports`` (and the graph if given)."""
    cfg = run.cfg
    settings = {"threads": cfg.threads, "auto_refine": cfg.auto_refine}
    for k in ("order", "step", "grid"):
        if getattr(cfg, k) is not None:
            settings[k] = getattr(cfg, k)
    for rid, ov in sorted(cfg.overrides.items()):
        settings[f"override {rid}"] = ",".join(f"{k}={v}" for k, v in sorted(ov.items()))
    lines = _header(run.data, settings)
    for lem, rep in run.reports.items():
        lines.append(f"LEMMA {lem} VERDICT {rep.verdict}")
        for sub in rep.sub_results:
            lines.extend(sub.lines)
    if graph is not None:
        complete = not graph.withheld
        lines.append(f"CERTIFICATE VERDICT {'Complete' if complete else 'Partial'} "
                     f"EDGES {len(graph.edges)} WITHHELD {len(graph.withheld)}")
        for k in sorted(graph.symbols):
            lines.append(f"SYMBOL {k} SET {graph.symbols[k]}")
        lines.extend(graph.lines())
        if complete:
            lines.append("CONCLUSION every bi-infinite sequence over {1,2,3,4} admissible for the transition "
                         "graph is realised by an orbit of the return map")
    if timings:
        for lem, rep in run.reports.items():
            lines.append(f"TIME {lem} {rep.wall_time:.2f}")
    return "\n".join(lines) + "\n"


def strip_timings(text: str) -> str:
    return "\n".join(ln for ln in text.splitlines() if not ln.startswith("TIME ")) + "\n"


def write_report(path, run, graph=None):
    text = render_report(run, graph)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)
    return text


# ---------------------------------------------------------------- csv

def _safe(name: str) -> str:
    return name.replace("=>", "_to_").replace("<=", "_from_").replace("^", "sq").replace("(", "").replace(")", "")


def _append(path, header, rows):
    new = not os.path.exists(path)
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(header)
        w.writerows(rows)


def _corners(loc: Interval):
    lo, hi = np.asarray(loc.lo, float), np.asarray(loc.hi, float)
    return [(lo[0], lo[1]), (hi[0], lo[1]), (hi[0], hi[1]), (lo[0], hi[1])]


def _physical(n: HSet, t1, t2):
    c = n.c.mid()
    return c + t1 * n.u + t2 * n.s


REL_HEADER = ["condition", "edge", "piece", "corner", "t1", "t2", "x", "xdot"]
SET_HEADER = ["set", "branch", "corner", "t1", "t2", "x", "xdot"]


def write_plot_data(plot_dir, run):
    """CSV files for external plotting.

    ``sets.csv`` holds the corners of every h-set; one file per relation
    holds the corners of each image enclosure in local coordinates of the
    set it was tested against, together with the matching ``(x, xdot)``.
    """
    os.makedirs(plot_dir, exist_ok=True)
    written = []
    rows = []
    for name in sorted(run.data.sets):
        n = run.data[name]
        for k, (t1, t2) in enumerate([(-1, -1), (1, -1), (1, 1), (-1, 1)]):
            x, xd = _physical(n, t1, t2)
            rows.append([name, n.branch.label, k, t1, t2, repr(float(x)), repr(float(xd))])
    path = os.path.join(plot_dir, "sets.csv")
    _append(path, SET_HEADER, rows)
    written.append(path)

    for rep in run.reports.values():
        for sub in rep.sub_results:
            if sub.kind == "sign" and sub.data:
                path = os.path.join(plot_dir, f"lyapunov_{_safe(sub.name)}.csv")
                img = sub.data["image"]
                rows = [[sub.name, k, repr(float(x)), repr(float(xd))]
                        for k, (x, xd) in enumerate(_corners(img))]
                _append(path, ["point", "corner", "x", "xdot"], rows)
                written.append(path)
            if sub.verdict is None:
                continue
            src, dst = _relation_sets(run, sub.name)
            rows = []
            for dg in sub.verdict.diagnostics:
                if dg.local is None or dg.condition == "a1":
                    continue
                ref = src if dg.condition == "a3" else dst
                for k, (t1, t2) in enumerate(_corners(dg.local)):
                    x, xd = _physical(ref, t1, t2) if ref is not None else (np.nan, np.nan)
                    rows.append([dg.condition, dg.edge, dg.index, k, repr(float(t1)), repr(float(t2)),
                                 repr(float(x)), repr(float(xd))])
            path = os.path.join(plot_dir, f"rel_{_safe(sub.name)}.csv")
            _append(path, REL_HEADER, rows)
            written.append(path)
    return written


def _relation_sets(run, name):
    for rs in run.relations.values():
        for r in rs:
            if r.rid == name:
                return run.data[r.source], run.data[r.target]
    return None, None


# ------------------------------------------------------------- params

def dump_params(run) -> str:
    """Table of every relation with the settings it will be checked with."""
    out = ["# relation map method vertical horizontal mono center anchor"]
    for lem, rs in run.relations.items():
        out.append(f"# {lem}")
        for r in rs:
            cp = run.params_for(r)
            out.append(f"{r.rid} {r.map_kind} {r.method} {cp.vertical} {cp.horizontal} "
                       f"{cp.mono or '-'} {cp.center or '-'} {cp.anchor[0]!r},{cp.anchor[1]!r}"
                       + (f" dp={r.dp_from}" if r.dp_from else ""))
    return "\n".join(out) + "\n"
