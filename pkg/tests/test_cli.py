import json

import pytest

from vccount import cli
from vccount import stats as S

from conftest import FIG4


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


def test_count_fig4(capsys):
    code, out = run(capsys, "count", FIG4)
    doc = json.loads(out)
    assert code == 0
    assert doc["count_decimal_string"] == "19"
    assert doc["config"]["command"] == "count"
    assert doc["version"].startswith("vccount ")


def test_oracle_k3(capsys, tmp_path):
    f = tmp_path / "k3.txt"
    f.write_text("3 3\n0 1\n1 2\n0 2\n")
    code, out = run(capsys, "oracle", f)
    doc = json.loads(out)
    assert code == 0 and doc["min_size"] == 2 and doc["count"] == 3


def test_parse_error_exit_code(capsys, tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("3 2\n0 1\n")
    code, out = run(capsys, "count", f)
    assert code == cli.EXIT_PARSE
    assert json.loads(out)["error"] == "parse"
    code, _ = run(capsys, "count", tmp_path / "missing.txt")
    assert code == cli.EXIT_PARSE


def test_oracle_bound_exit_code(capsys):
    code, out = run(capsys, "oracle", FIG4, "--bound", "5")
    assert code == cli.EXIT_ORACLE_BOUND
    assert json.loads(out)["exit_code"] == cli.EXIT_ORACLE_BOUND


def _unverified_graph(tmp_path, capsys):
    # a core component above the oracle bound stays UNVERIFIED
    for seed in range(40):
        f = tmp_path / f"g{seed}.txt"
        run(capsys, "gen", "--param", "3.0", "--n", "200", "--seed", seed, "-o", f)
        r = tmp_path / f"r{seed}.json"
        run(capsys, "reduce", f, "-o", r)
        if json.loads(r.read_text())["rsg"]["exactness"] == "unverified":
            return r
    pytest.skip("no unverified instance found")


def test_count_refuses_unverified(capsys, tmp_path):
    r = _unverified_graph(tmp_path, capsys)
    code, out = run(capsys, "count", r)
    assert code == cli.EXIT_VERIFICATION
    code, out = run(capsys, "count", r, "--allow-unverified", "--max-branches", "5000000")
    assert code in (cli.EXIT_OK, cli.EXIT_BUDGET)


def test_budget_exit_code(capsys, tmp_path):
    r = _unverified_graph(tmp_path, capsys)
    code, out = run(capsys, "count", r, "--allow-unverified", "--max-branches", "1")
    doc = json.loads(out)
    if code == cli.EXIT_OK:
        assert doc["branches_explored"] == 0
    else:
        assert code == cli.EXIT_BUDGET and doc["error"] == "budget"


def test_env_budget_override(capsys, monkeypatch):
    monkeypatch.setenv("VCCOUNT_MAX_BRANCHES", "7")
    code, out = run(capsys, "count", FIG4)
    assert json.loads(out)["config"]["max_branches"] == 7
    monkeypatch.setenv("VCCOUNT_MAX_BRANCHES", "x")
    code, out = run(capsys, "count", FIG4)
    assert code == cli.EXIT_USAGE


def test_outputs_are_byte_identical(capsys, tmp_path):
    # the output path is part of the echoed config, so reuse it
    a = tmp_path / "a.json"
    run(capsys, "count", FIG4, "-o", a)
    first = a.read_bytes()
    run(capsys, "count", FIG4, "-o", a)
    assert a.read_bytes() == first
    g = tmp_path / "g.txt"
    run(capsys, "gen", "--model", "sf", "--param", "2.5", "--n", "100", "--seed", "9", "-o", g)
    first = g.read_bytes()
    run(capsys, "gen", "--model", "sf", "--param", "2.5", "--n", "100", "--seed", "9", "-o", g)
    assert g.read_bytes() == first


def test_reduce_verify_round_trip(capsys, tmp_path):
    r = tmp_path / "r.json"
    assert run(capsys, "reduce", FIG4, "-o", r)[0] == 0
    code, out = run(capsys, "verify", FIG4, "--rsg", r)
    assert code == 0 and json.loads(out)["verification"]["exactness"] == "verified"
    code, out = run(capsys, "count", r)
    assert json.loads(out)["count_decimal_string"] == "19"


def test_marginals_csv(capsys):
    code, out = run(capsys, "marginals", FIG4, "--format", "csv")
    lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert code == 0 and lines[0] == "vertex,p_cover" and len(lines) == 15


def test_marginals_iterative(capsys):
    code, out = run(capsys, "marginals", FIG4, "--mode", "iterative")
    rows = json.loads(out)["marginals"]
    assert code == 0 and all(r["p_cover_raw"] is None or 0 <= r["p_cover_raw"] <= 1 for r in rows)


def test_stats_writes_csvs(capsys, tmp_path):
    code, out = run(
        capsys, "stats", "--sweep-c", "0.5:1.0:0.5", "--n", "100", "--instances", "2",
        "--figures", "fig2,fig5,influence", "--outdir", tmp_path,
    )
    assert code == 0
    assert set(json.loads(out)["written"]) == {"fig2.csv", "fig2_inset.csv", "fig5.csv", "influence.csv"}
    fig5 = (tmp_path / "fig5.csv").read_text().splitlines()
    assert fig5[0].startswith("# version:") and fig5[1].startswith("# config:")
    assert fig5[2] == "c,s_mean,s_stderr,instances_verified" and len(fig5) == 5


def test_stats_gamma(capsys, tmp_path):
    code, _ = run(capsys, "stats", "--gamma", "2", "3", "--n", "100", "--instances", "2", "--outdir", tmp_path)
    assert code == 0
    body = [ln for ln in (tmp_path / "fig6.csv").read_text().splitlines() if not ln.startswith("#")]
    assert body[0] == "bin,mass,ensemble" and len(body) == 1 + 2 * 12


def test_bad_sweep(capsys, tmp_path):
    code, out = run(capsys, "stats", "--sweep-c", "1:0:0.5", "--outdir", tmp_path)
    assert code == cli.EXIT_USAGE


def test_trace(capsys, tmp_path):
    t = tmp_path / "trace.csv"
    code, out = run(capsys, "trace", "--n", "20", "--c-final", "1.0", "--csv", t)
    doc = json.loads(out)
    assert code == 0 and doc["steps"] == len(S.random_edge_schedule(20, 1.0, 0))
    assert "step,case,log_count" in t.read_text()


def test_help_lists_exit_codes(capsys):
    with pytest.raises(SystemExit):
        cli.main(["--help"])
    assert "exit codes" in capsys.readouterr().out
