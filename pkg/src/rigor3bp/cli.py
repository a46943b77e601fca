"""Command line driver.

    rigor3bp verify all --report proof.txt --plot-dir plots
    rigor3bp verify heteroclinic --override 'N0=>N1.step=-0.02'
    rigor3bp verify all --dump-params

Exit status is 0 when every selected lemma is verified, 1 when one fails
and 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import re
import sys
import time

from .pipeline import LEMMAS, ProofRun, RunConfig, build_graph, run_lemmas
from .report import dump_params, render_report, write_plot_data, write_report

__all__ = ["main", "build_parser", "parse_override", "config_from_args", "run"]

_OVERRIDE = re.compile(r"^(?P<rid>[^.]+=>[^.]+)\.(?P<field>[A-Za-z_][A-Za-z_0-9.]*)=(?P<value>.+)$")


def parse_override(text: str):
    """Split ``'N0=>N1.step=-0.02'`` into ``('N0=>N1', 'step', '-0.02')``."""
    m = _OVERRIDE.match(text.strip())
    if not m:
        raise ValueError(f"bad override {text!r}; expected <relation>.<field>=<value>")
    return m.group("rid"), m.group("field"), m.group("value")


def build_parser():
    ap = argparse.ArgumentParser(prog="rigor3bp", description="Re-run the computer assisted proof of "
                                 "connecting orbits and symbolic dynamics in the planar circular "
                                 "restricted three body problem (C=3.03, mu=0.0009537).")
    sub = ap.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="verify lemmas of the proof")
    v.add_argument("lemmas", nargs="+", choices=list(LEMMAS) + ["all"], metavar="LEMMA",
                   help=f"one or more of {', '.join(LEMMAS)}, all")
    v.add_argument("--order", type=int, help="Taylor order for every relation")
    v.add_argument("--step", type=float, help="time step size for every relation (signs are kept)")
    v.add_argument("--grid", type=int, help="edge subdivision for every relation")
    v.add_argument("--report", help="write the report to this file")
    v.add_argument("--plot-dir", help="write CSV plot data to this directory")
    v.add_argument("--threads", type=int, default=1, help="worker threads for map evaluations")
    v.add_argument("--auto-refine", action="store_true",
                   help="retry failed relations on finer grids (marked in the report)")
    v.add_argument("--dump-params", action="store_true", help="print the relation settings and exit")
    v.add_argument("--override", action="append", default=[], metavar="REL.FIELD=VALUE",
                   help="patch the settings of one relation, e.g. 'N0=>N1.step=-0.02'")
    v.add_argument("--h2-stable-scale", help="stable scale of H2^2 (default 2.8e-7)")
    v.add_argument("--quiet", action="store_true", help="do not echo the report")
    return ap


def config_from_args(args) -> RunConfig:
    overrides = {}
    for text in args.override:
        rid, fld, value = parse_override(text)
        overrides.setdefault(rid, {})[fld] = value
    if args.order is not None and args.order < 1:
        raise ValueError("--order must be positive")
    if args.step is not None and args.step == 0:
        raise ValueError("--step must be nonzero")
    if args.grid is not None and args.grid < 1:
        raise ValueError("--grid must be positive")
    return RunConfig(tuple(args.lemmas), overrides, args.report, args.plot_dir, args.threads, args.auto_refine,
                     args.order, args.step, args.grid, args.h2_stable_scale)


def run(cfg: RunConfig, out=sys.stdout, quiet=False) -> int:
    """Execute the selected lemmas; the exit code depends only on the verdicts."""
    prun = ProofRun(cfg)
    selected = cfg.selected()

    def progress(rep):
        print(f"LEMMA {rep.lemma_id} VERDICT {rep.verdict} ({rep.wall_time:.1f} s)", file=sys.stderr, flush=True)

    t0 = time.perf_counter()
    reports = run_lemmas(prun, selected, progress)
    graph = build_graph(reports) if set(selected) == set(LEMMAS) else None
    if cfg.report_path:
        text = write_report(cfg.report_path, prun, graph)
    else:
        text = render_report(prun, graph)
    if cfg.plot_dir:
        write_plot_data(cfg.plot_dir, prun)
    if not quiet:
        out.write(text)
    print(f"total {time.perf_counter() - t0:.1f} s", file=sys.stderr)
    return 0 if all(reports[k].verified for k in selected) else 1


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = config_from_args(args)
        cfg.selected()
        if args.dump_params:
            sys.stdout.write(dump_params(ProofRun(cfg)))
            return 0
        return run(cfg, quiet=args.quiet)
    except (ValueError, TypeError, KeyError) as exc:
        print(f"rigor3bp: configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
