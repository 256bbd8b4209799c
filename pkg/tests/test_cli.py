import json

import pytest
from click.testing import CliRunner

from brownian_lab.cli import main, run_suite


@pytest.fixture
def runner():
    return CliRunner()


def test_version(runner):
    res = runner.invoke(main, ["--version"])
    assert res.exit_code == 0 and "brownian-lab" in res.output


def test_bm_sample_ndjson(runner):
    res = runner.invoke(main, ["bm", "sample", "--level", "2", "--paths", "3", "--seed", "1"])
    assert res.exit_code == 0
    recs = [json.loads(ln) for ln in res.output.splitlines()]
    assert [r["path"] for r in recs] == [0, 1, 2]
    assert recs[0]["t"] == [0.0, 0.25, 0.5, 0.75, 1.0] and recs[0]["x"][0] == 0.0


def test_bm_sample_csv_to_file(runner, tmp_path):
    out = tmp_path / "s.csv"
    res = runner.invoke(main, ["bm", "sample", "--level", "1", "--paths", "2", "--format", "csv",
                               "--out", str(out)])
    assert res.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "path,t,x" and len(lines) == 1 + 2 * 3


def test_bm_sample_thread_determinism(runner):
    args = ["bm", "sample", "--level", "3", "--paths", "9000", "--seed", "5"]
    one = runner.invoke(main, args, env={"BROWNIAN_LAB_THREADS": "1"})
    eight = runner.invoke(main, args, env={"BROWNIAN_LAB_THREADS": "8"})
    assert one.exit_code == eight.exit_code == 0
    assert one.output == eight.output


def test_bm_sample_bad_flags_leave_no_file(runner, tmp_path):
    out = tmp_path / "s.ndjson"
    res = runner.invoke(main, ["bm", "sample", "--horizon", "-1", "--out", str(out)])
    assert res.exit_code == 2 and not out.exists()
    assert list(tmp_path.iterdir()) == []


@pytest.mark.parametrize("suite", ["cov", "moments", "scaling", "markov", "inversion", "drift"])
def test_verify_suites(runner, suite):
    # the fixed moment band (3 +- 0.15) is sized for the suite's 10^5 default
    paths = [] if suite == "moments" else ["--paths", "20000"]
    res = runner.invoke(main, ["bm", "verify", "--suite", suite] + paths)
    report = json.loads(res.output)
    assert res.exit_code == 0, res.output
    assert report["suite"] == suite and report["pass"]
    assert report["config"]["seed"] == 0
    for t in report["tests"]:
        assert set(t) == {"name", "estimate", "target", "tolerance", "pass"}


def test_verify_unknown_suite(runner):
    res = runner.invoke(main, ["bm", "verify", "--suite", "nope"])
    assert res.exit_code == 2


def test_verify_custom_times(runner):
    res = runner.invoke(main, ["bm", "verify", "--suite", "cov", "--paths", "5000",
                               "--times", "0.5,1,3/2"])
    assert res.exit_code == 0
    assert len(json.loads(res.output)["tests"]) == 6


def test_run_suite_is_deterministic():
    a = run_suite("cov", seed=3, paths=2000).to_json()
    assert a == run_suite("cov", seed=3, paths=2000).to_json()


def test_kc_bound_text_and_json(runner):
    res = runner.invoke(main, ["kc", "bound", "--p", "2", "--q", "2", "--d", "1", "--beta", "0.3"])
    assert res.exit_code == 0 and res.output.startswith("R_p = 5.82842712474")
    res = runner.invoke(main, ["kc", "bound", "--p", "2", "--q", "2", "--d", "1", "--beta", "0.3",
                               "--format", "json"])
    d = json.loads(res.output)
    assert abs(d["L"] - 34034961.93) / d["L"] < 1e-9


def test_kc_bound_divergent(runner):
    res = runner.invoke(main, ["kc", "bound", "--p", "2", "--q", "2", "--d", "1", "--beta", "0.5"])
    assert res.exit_code == 2 and "critical" in res.output


def test_kc_check_from_file(runner, tmp_path):
    f = tmp_path / "paths.ndjson"
    res = runner.invoke(main, ["bm", "sample", "--level", "5", "--paths", "500", "--out", str(f)])
    assert res.exit_code == 0
    res = runner.invoke(main, ["kc", "check", "--input", str(f)])
    rep = json.loads(res.output)
    assert res.exit_code == 0 and rep["pass"]


def test_cover_command(runner, tmp_path):
    pts = tmp_path / "pts.csv"
    pts.write_text("0\n1\n2\n3\n4\n")
    res = runner.invoke(main, ["cover", "--points", str(pts), "--eps", "1", "--format", "csv"])
    assert res.exit_code == 0
    assert res.output.splitlines() == ["eps,greedy,N,P_eps,P_2eps", "1.0,2,2,3,2"]
    mat = tmp_path / "d.csv"
    mat.write_text("0,inf\ninf,0\n")
    res = runner.invoke(main, ["cover", "--matrix", str(mat), "--eps", "1", "--format", "json"])
    assert json.loads(res.output)["rows"][0]["N"] == 2
    res = runner.invoke(main, ["cover", "--eps", "1"])
    assert res.exit_code == 2


def test_cover_rejects_bad_metric(runner, tmp_path):
    mat = tmp_path / "d.csv"
    mat.write_text("0,1\n2,0\n")
    assert runner.invoke(main, ["cover", "--matrix", str(mat), "--eps", "1"]).exit_code == 2


def test_sets_demo(runner):
    res = runner.invoke(main, ["sets", "demo"])
    assert res.exit_code == 0
    assert "Caratheodory sets: 16 of 16" in res.output
    assert "mu({1,2}) = 1/2" in res.output


def test_sets_demo_json_with_file(runner, tmp_path):
    f = tmp_path / "fam.txt"
    f.write_text("universe 2\nset 00 0\nset 01 1\nset 10 1\nset 11 2\n")
    res = runner.invoke(main, ["sets", "demo", "--file", str(f), "--query", "0", "--format", "json"])
    d = json.loads(res.output)
    assert res.exit_code == 0 and d["pass"] and d["outer"]["0"] == "1"


def test_gauss_charfun(runner):
    res = runner.invoke(main, ["gauss", "charfun", "--cov", "1", "--probe", "1"])
    assert res.exit_code == 0
    assert res.output.splitlines()[1].split("\t")[1] == "0.6065306597126334"
    res = runner.invoke(main, ["gauss", "charfun", "--cov", "1,2;2,1", "--probe", "1,0"])
    assert res.exit_code == 2
