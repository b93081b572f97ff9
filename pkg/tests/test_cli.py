import json
import subprocess
import sys

import pytest

from subgraph_mr import cli
from subgraph_mr.generators import complete_graph, petersen_graph


def write_graph(path, g):
    path.write_text(g.to_edge_list())
    return str(path)


@pytest.fixture
def k4(tmp_path):
    return write_graph(tmp_path / "k4.txt", complete_graph(4))


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_cq_counts(capsys):
    code, out, _ = run(capsys, "gen-cq", "--sample", "square")
    assert code == 0 and out.startswith("3 CQs")
    _, out, _ = run(capsys, "gen-cq", "--sample", "cycle:5")
    assert "3 CQs (run-sequence method)" in out and "7 CQs (general method)" in out
    _, out, _ = run(capsys, "gen-cq", "--sample", "edge", "--json")
    assert json.loads(out)["general"]["count"] == 1


def test_gen_cq_bad_sample(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["gen-cq", "--sample", "dodecahedron"])
    assert exc.value.code == 2


def test_plan_lollipop(capsys):
    code, out, _ = run(capsys, "plan", "--sample", "lollipop", "--cq", "1", "--k", "750", "--json")
    d = json.loads(out)
    shares = d["plan"]["shares"]
    assert code == 0
    assert [round(shares[v], 6) for v in "WXYZ"] == [1, 30, 5, 5]
    assert d["plan"]["cost_per_edge"] == pytest.approx(65)


def test_plan_triangle_and_edge(capsys):
    _, out, _ = run(capsys, "plan", "--sample", "triangle", "--k", "216", "--json")
    assert list(json.loads(out)["plan"]["shares"].values()) == pytest.approx([6, 6, 6])
    code, out, _ = run(capsys, "plan", "--sample", "edge", "--k", "1")
    assert code == 0 and "1" in out


def test_run_verify(capsys, k4, tmp_path):
    out_file = tmp_path / "inst.txt"
    code, out, _ = run(capsys, "run", "--graph", k4, "--sample", "triangle", "--scheme", "bucket-ordered",
                       "--b", "2", "--verify", "--out", str(out_file))
    assert code == 0
    assert "instances 4" in out and "OK" in out
    lines = out_file.read_text().splitlines()
    assert len(lines) == 4 and lines[0].startswith("1: v(")


def test_run_single_bucket(capsys, k4):
    _, out, _ = run(capsys, "run", "--graph", k4, "--sample", "triangle", "--scheme", "bucket-ordered",
                    "--b", "1", "--json")
    rep = json.loads(out)["report"]
    assert rep["distinct_reducers_used"] == 1 and rep["per_edge_replication"] == 1


def test_run_verify_mismatch_exits_nonzero(capsys, k4, monkeypatch):
    real = cli.run_round

    def lossy(*a, **kw):
        inst, rep = real(*a, **kw)
        return inst[1:], rep

    monkeypatch.setattr(cli, "run_round", lossy)
    code, out, _ = run(capsys, "run", "--graph", k4, "--sample", "triangle", "--scheme", "bucket-ordered",
                       "--b", "2", "--verify")
    assert code == cli.EXIT_MISMATCH and "MISMATCH" in out


def test_run_usage_errors(capsys, k4, tmp_path):
    for argv in (["run", "--graph", k4, "--sample", "triangle", "--scheme", "partition", "--b", "2"],
                 ["run", "--graph", k4, "--sample", "triangle", "--scheme", "bucket-ordered"],
                 ["run", "--graph", str(tmp_path / "missing.txt"), "--sample", "triangle",
                  "--scheme", "bucket-ordered", "--b", "2"]):
        with pytest.raises(SystemExit) as exc:
            cli.main(argv)
        assert exc.value.code == 2


def test_run_variable_oriented_with_k(capsys, k4):
    code, out, _ = run(capsys, "run", "--graph", k4, "--sample", "square", "--scheme", "variable-oriented",
                       "--k", "16", "--verify")
    assert code == 0 and "OK" in out


def test_oracle(capsys, tmp_path):
    pet = write_graph(tmp_path / "petersen.txt", petersen_graph())
    k5 = write_graph(tmp_path / "k5.txt", complete_graph(5))
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    for path, want in ((pet, 12), (k5, 12), (str(empty), 0)):
        code, out, _ = run(capsys, "oracle", "--graph", path, "--sample", "cycle:5")
        assert code == 0 and out.strip() == f"{want} instances"


def test_compare_small(capsys):
    code, out, _ = run(capsys, "compare", "--n", "300", "--m", "2000", "--json")
    rows = {r["scheme"]: r for r in json.loads(out)["rows"]}
    assert code == 0
    assert rows["partition"]["b"] == 12 and rows["multiway"]["b"] == 6 and rows["bucket-ordered"]["b"] == 10
    assert rows["multiway"]["per_edge"] == 16 and rows["bucket-ordered"]["per_edge"] == 10
    assert len({r["instances"] for r in rows.values()}) == 1


def test_compare_single_reducer(capsys):
    _, out, _ = run(capsys, "compare", "--k", "1", "--n", "50", "--m", "200", "--json")
    assert {r["reducers"] for r in json.loads(out)["rows"]} == {1}


def test_compare_buckets():
    assert cli.compare_buckets(220) == {"partition": 12, "multiway": 6, "bucket-ordered": 10}


def test_deterministic_output(capsys, k4):
    argv = ["run", "--graph", k4, "--sample", "triangle", "--scheme", "partition", "--b", "4", "--json"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b


def test_console_module_entry():
    res = subprocess.run([sys.executable, "-m", "subgraph_mr", "gen-cq", "--sample", "triangle"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.startswith("1 CQs")
