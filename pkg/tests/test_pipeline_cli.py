import csv
import io
import os

import pytest

from rigor3bp import cli, pipeline
from rigor3bp.data import GAMMA, Relation
from rigor3bp.pipeline import (
    LEMMAS,
    LemmaReport,
    ProofRun,
    RunConfig,
    _relation_sub,
    audit_branches,
    build_graph,
    verify_lyapunov,
)
from rigor3bp.report import dump_params, render_report, strip_timings, write_plot_data


@pytest.fixture(scope="module")
def lyap_run():
    run = ProofRun(RunConfig(lemmas=("lyapunov",)))
    verify_lyapunov(run)
    return run


def _reports(failed=()):
    return {k: LemmaReport(k, "Failed" if k in failed else "Verified", [], 0.0) for k in LEMMAS}


def test_config_selection():
    assert RunConfig().selected() == list(LEMMAS)
    assert RunConfig(lemmas=("interior", "lyapunov")).selected() == ["lyapunov", "interior"]
    with pytest.raises(ValueError):
        RunConfig(lemmas=("bogus",)).selected()
    with pytest.raises(ValueError):
        RunConfig(threads=0)


def test_overrides_patch_relation_settings():
    run = ProofRun(RunConfig(overrides={"N0=>N1": {"step": "-0.02", "mono.grid": "3"}}))
    rel = next(r for r in run.relations["heteroclinic"] if r.rid == "N0=>N1")
    cp = run.params_for(rel)
    assert cp.vertical.step == 0.02 and cp.horizontal.step == -0.02
    assert cp.mono.grid == 3
    with pytest.raises(ValueError):
        ProofRun(RunConfig(overrides={"N9=>N1": {"step": "0.1"}}))
    with pytest.raises(ValueError):
        ProofRun(RunConfig(overrides={"N0=>N1": {"bogus": "1"}}))
    glob = ProofRun(RunConfig(order=9, grid=2))
    cp = glob.params_for(rel)
    assert (cp.vertical.order, cp.vertical.grid, cp.horizontal.grid) == (9, 2, 2)
    assert cp.horizontal.step < 0


def test_audit_flags_branch_mismatch():
    run = ProofRun()
    assert audit_branches(run.data, [r for rs in run.relations.values() for r in rs]) == []
    good = run.relations["heteroclinic"][1]
    bad = Relation("N0=>N1", "N0", "N1", "half+", good.params, "backward")
    problems = audit_branches(run.data, [bad])
    assert len(problems) == 2 and "N0=>N1" in problems[0]


def test_graph_complete_and_partial():
    g = build_graph(_reports())
    assert sorted(g.edges) == sorted(GAMMA) and not g.withheld
    assert g.chain_evidence[(3, 2)] == ("exterior chain", ["lyapunov", "dp", "hyperbolic", "exterior"])
    g2 = build_graph(_reports(failed=("exterior",)))
    assert sorted(g2.withheld) == [(2, 3), (3, 2)]
    assert len(g2.edges) == 6
    assert "EDGE 3->2 WITHHELD" in g2.lines()
    g3 = build_graph(_reports(failed=("dp",)))
    assert g3.edges == []


def test_report_format(lyap_run):
    text = render_report(lyap_run)
    lines = text.splitlines()
    assert lines[0] == "# rigor3bp proof report"
    assert lines[1] == "PARAMS mu 0.0009537 C 3.03"
    assert "LEMMA lyapunov VERDICT Verified" in lines
    signs = [ln for ln in lines if ln.startswith("SIGN ")]
    assert len(signs) == 4 and all(ln.endswith(" Pass") for ln in signs)
    assert signs[0].startswith("SIGN L1- MAP P1/2,+ ORDER 20 STEP 0.05 XDOT [")
    assert lines[-1].startswith("TIME lyapunov ")
    assert "TIME" not in strip_timings(text)


def test_report_with_partial_certificate(lyap_run):
    g = build_graph(_reports(failed=("interior",)))
    text = render_report(lyap_run, g)
    assert "CERTIFICATE VERDICT Partial EDGES 6 WITHHELD 2" in text
    assert "EDGE 4->1 WITHHELD" in text and "CONCLUSION" not in text
    full = render_report(lyap_run, build_graph(_reports()))
    assert "CERTIFICATE VERDICT Complete EDGES 8 WITHHELD 0" in full and "CONCLUSION" in full


def test_reports_are_deterministic(lyap_run):
    again = ProofRun(RunConfig(lemmas=("lyapunov",)))
    verify_lyapunov(again)
    assert strip_timings(render_report(lyap_run)) == strip_timings(render_report(again))


def test_plot_data(lyap_run, tmp_path):
    files = write_plot_data(str(tmp_path), lyap_run)
    names = sorted(os.path.basename(f) for f in files)
    assert "sets.csv" in names and "lyapunov_L1-.csv" in names
    with open(tmp_path / "sets.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["set", "branch", "corner", "t1", "t2", "x", "xdot"]
    assert len(rows) == 1 + 4 * len(lyap_run.data.sets)
    write_plot_data(str(tmp_path), lyap_run)
    with open(tmp_path / "sets.csv") as fh:
        assert sum(1 for _ in fh) == 1 + 8 * len(lyap_run.data.sets)


def test_dump_params_lists_every_relation():
    run = ProofRun()
    text = dump_params(run)
    n = sum(len(rs) for rs in run.relations.values())
    assert sum(1 for ln in text.splitlines() if "=>" in ln) == n
    assert "H1=>H1 P+ fuzzy" in text and "dp=U1" in text


def test_forced_failure_is_reported_and_refined():
    run = ProofRun(RunConfig(overrides={"E3=>E4": {"t0": "0.95"}}, auto_refine=True))
    rel = next(r for r in run.relations["exterior"] if r.rid == "E3=>E4")
    sub = _relation_sub(run, rel)
    assert not sub.passed and sub.refined
    assert sub.lines[0].endswith(" Fail")
    assert any("COND a2 Fail" in ln for ln in sub.lines)
    assert any(ln.startswith("REL E3=>E4 FIRST_FAILURE") for ln in sub.lines)
    assert "auto-refined" in sub.lines[-1]


# ------------------------------------------------------------------ cli

def test_parse_override():
    assert cli.parse_override("N0=>N1.step=-0.02") == ("N0=>N1", "step", "-0.02")
    assert cli.parse_override("H2^2=>H2.vertical.grid=40") == ("H2^2=>H2", "vertical.grid", "40")
    with pytest.raises(ValueError):
        cli.parse_override("N0=>N1 step -0.02")


def test_cli_exit_codes(tmp_path, capsys):
    report = tmp_path / "r" / "proof.txt"
    assert cli.main(["verify", "lyapunov", "--quiet", "--report", str(report), "--plot-dir",
                     str(tmp_path / "plots")]) == 0
    assert "LEMMA lyapunov VERDICT Verified" in report.read_text()
    assert (tmp_path / "plots" / "sets.csv").exists()
    assert cli.main(["verify", "lyapunov", "--override", "N0=>N1.bogus=1"]) == 2
    assert cli.main(["verify", "lyapunov", "--order", "0"]) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["verify", "nonsense"])
    assert exc.value.code == 2
    capsys.readouterr()
    assert cli.main(["verify", "all", "--dump-params"]) == 0
    assert "N0=>N1 P1/2,- backward" in capsys.readouterr().out


def test_cli_failure_exit_code(monkeypatch):
    # a hopeless integration order makes every sign check fail
    monkeypatch.setattr(pipeline, "lyapunov_params", lambda: {1: (2, 0.5), 2: (2, 0.5)})
    out = io.StringIO()
    code = cli.run(RunConfig(lemmas=("lyapunov",)), out=out)
    assert code == 1
    assert "LEMMA lyapunov VERDICT Failed" in out.getvalue()
