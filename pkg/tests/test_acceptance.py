"""End-to-end acceptance checks.

A single session-scoped run re-verifies every lemma with the tabulated
settings (about 8 minutes on one core).  Each test records one
``CRITERION`` line that is printed in the terminal summary, then asserts.
"""

import time

import numpy as np
import pytest
import test_covering
import test_interval
import test_model
import test_poincare
import test_taylor_lohner

from rigor3bp.data import CHAINS, GAMMA
from rigor3bp.hset import is_r_symmetric
from rigor3bp.pipeline import ProofRun, RunConfig, assemble_certificate
from rigor3bp.report import write_report

pytestmark = pytest.mark.slow

TIME_LIMIT_SINGLE_THREAD = 30 * 60


@pytest.fixture(scope="session")
def full_run(tmp_path_factory):
    path = tmp_path_factory.mktemp("proof") / "report.txt"
    run = ProofRun(RunConfig(report_path=str(path)))
    t0 = time.perf_counter()
    graph, reports = assemble_certificate(run)
    wall = time.perf_counter() - t0
    text = write_report(str(path), run, graph)
    return run, graph, reports, wall, text


def _record(criteria, n, name, ok, detail):
    criteria.append(f"CRITERION {n} {name}: {'PASS' if ok else 'FAIL'} ({detail})")


def test_criterion_1_lyapunov_signs(full_run, criteria):
    run, _, reports, _, _ = full_run
    rep = reports["lyapunov"]
    signs = {s.name: s.data["xdot"] for s in rep.sub_results}
    ok = (signs["L1-"].hi < 0 and signs["L1+"].lo > 0 and signs["L2-"].hi < 0 and signs["L2+"].lo > 0)
    params = {s.name: s.params for s in rep.sub_results}
    ok = ok and params["L1-"] == (20, 0.05) and params["L2+"] == (19, 0.055)
    ok = ok and rep.wall_time < 5.0 and rep.verified
    _record(criteria, 1, "Lyapunov signs", ok, f"{rep.wall_time:.1f} s, " +
            ", ".join(f"{k} xdot in [{float(v.lo):.3e},{float(v.hi):.3e}]" for k, v in signs.items()))
    assert ok


def test_criterion_2_dp_enclosures(full_run, criteria):
    _, _, reports, _, _ = full_run
    rep = reports["dp"]
    ok = rep.verified and rep.wall_time < 600
    details = []
    for s in rep.sub_results:
        d = s.data
        det = d["det"]
        ok = ok and d["overlap"] and d["width_ok"] and d["hyp"].hyperbolic and float(det.hi) < 0
        details.append(f"{s.name} lambda1 [{float(d['local'][0, 0].lo):.3f},{float(d['local'][0, 0].hi):.3f}] "
                       f"det hi {float(det.hi):.1f}")
        assert s.params[:4] == (5, 0.007, 13, 13)
    _record(criteria, 2, "DP enclosures", ok, f"{rep.wall_time:.1f} s; " + "; ".join(details))
    assert ok


def test_criterion_3_all_coverings(full_run, criteria):
    run, _, reports, wall, _ = full_run
    counts = {}
    failed = []
    for lem in ("heteroclinic", "exterior", "interior", "hyperbolic"):
        rels = [s for s in reports[lem].sub_results if s.kind in ("relation", "mirror")]
        counts[lem] = len(rels)
        failed += [s.name for s in rels if not s.passed]
        # the tabulated settings were used unchanged
        assert not any(s.refined for s in rels)
    linked = {r.rid for rs in run.relations.values() for r in rs}
    for chain in CHAINS.values():
        assert all(f"{a}=>{b}" in linked for a, b in zip(chain, chain[1:]))
    ok = not failed and all(reports[k].verified for k in reports) and wall <= TIME_LIMIT_SINGLE_THREAD
    _record(criteria, 3, "covering relations", ok,
            f"relations checked {counts}, failed {failed or 'none'}, verify all {wall:.0f} s on 1 thread")
    assert ok


def _suite(fn, *args):
    try:
        fn(*args)
        return True
    except AssertionError:
        return False


def test_criterion_4_property_suites(full_run, criteria):
    run, _, reports, _, _ = full_run
    parts = {}
    parts["interval 1e5"] = all(_suite(test_interval.test_containment_randomized, op)
                                for op in ("add", "sub", "mul", "div"))
    parts["AD vs FD"] = _suite(test_taylor_lohner.test_pcr3bp_coefficients_match_finite_differences)
    parts["Lohner containment"] = all(_suite(test_taylor_lohner.test_c0_contains_sampled_trajectories, h)
                                      for h in ("oscillator", "saddle", "pcr3bp"))
    jac = [s.data["jacobi"].contains(3.03) for s in reports["lyapunov"].sub_results]
    parts["Jacobi"] = all(jac) and _suite(test_poincare.test_image_lies_on_the_energy_level)
    mirror = [s for s in reports["exterior"].sub_results if s.kind == "mirror"]
    fixed = all(is_r_symmetric(run.data[n]) for n in ("H1", "H2", "E0", "F0"))
    parts["symmetry"] = (bool(mirror) and all(s.passed for s in mirror) and fixed
                         and _suite(test_model.test_sym_r_is_an_involution))
    parts["covering oracle"] = all(_suite(test_covering.test_linear_toy_table, *row) for row in test_covering.TABLE)
    ok = all(parts.values())
    _record(criteria, 4, "property suites", ok, ", ".join(f"{k} {'ok' if v else 'FAIL'}" for k, v in parts.items()))
    assert ok


EXPECTED_EVIDENCE = {
    (1, 1): ("self", ["lyapunov", "dp", "hyperbolic"]),
    (2, 2): ("self", ["lyapunov", "dp", "hyperbolic"]),
    (1, 2): ("full chain", ["lyapunov", "dp", "hyperbolic", "heteroclinic"]),
    (2, 1): ("full chain, mirrored", ["lyapunov", "dp", "hyperbolic", "heteroclinic"]),
    (3, 2): ("exterior chain", ["lyapunov", "dp", "hyperbolic", "exterior"]),
    (2, 3): ("exterior chain, mirrored", ["lyapunov", "dp", "hyperbolic", "exterior"]),
    (4, 1): ("interior chain", ["lyapunov", "dp", "hyperbolic", "interior"]),
    (1, 4): ("interior chain, mirrored", ["lyapunov", "dp", "hyperbolic", "interior"]),
}


def test_criterion_5_certificate(full_run, criteria):
    _, graph, _, _, text = full_run
    ok = (sorted(graph.edges) == sorted(GAMMA) and len(graph.edges) == 8 and not graph.withheld
          and graph.chain_evidence == EXPECTED_EVIDENCE)
    ok = ok and "CERTIFICATE VERDICT Complete EDGES 8 WITHHELD 0" in text
    edges = " ".join(f"{a}->{b}" for a, b in graph.edges)
    _record(criteria, 5, "certificate", ok, f"edges {edges}")
    assert ok


def test_report_lists_every_relation(full_run):
    run, _, _, _, text = full_run
    for rs in run.relations.values():
        for r in rs:
            assert f"REL {r.rid} MAP" in text
    assert np.all([ln.endswith("Pass") for ln in text.splitlines() if ln.startswith("REL ") and " MAP " in ln])
