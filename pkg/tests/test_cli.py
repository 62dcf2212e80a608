import json
import subprocess
import sys

import pytest

from qdecay import arch
from qdecay.bounds import BoundReport
from qdecay.cli import main, read_trajectories


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bound_examples(capsys):
    code, out, _ = run(capsys, "bound", "parallel-lambda", "--q", "2", "--k", "2", "--n", "1024", "--Ck", "1")
    assert code == 0 and round(json.loads(out)["value"], 6) == 0.012593
    code, out, _ = run(capsys, "bound", "glue", "--eps1", "0", "--eps2", "0", "--k", "2", "--dimB", "1024")
    assert code == 0 and json.loads(out)["value"] == 0.01953125
    code, out, err = run(capsys, "bound", "parallel-r", "--q", "2", "--k", "1", "--n", "8", "--eps", "0.5")
    report = json.loads(out)
    assert code == 0 and report["value"] == 18
    assert {"name": "r < n/4", "ok": False} in report["validity"] and "r < n/4" in err


def test_bound_round_trip(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, _, _ = run(capsys, "bound", "tree-lambda", "--q", "2", "--k", "1", "--n", "16", "--ell", "2",
                     "--eps-prime", "0.5", "--min-p-lambda", "1/30", "--C", "1", "-o", str(path))
    assert code == 0
    report = BoundReport.from_dict(json.loads(path.read_text()))
    assert report.value == 0.5 / 30 / (4 * 366) and report.extras["f"] == 366


def test_bound_sweep_csv(capsys):
    code, out, _ = run(capsys, "bound", "parallel-r", "--q", "2", "--k", "2", "--eps", "0.1",
                       "--sweep", "n=64,256,1024", "--sweep", "variant=as_stated,as_derived", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 7
    code, out, _ = run(capsys, "bound", "parallel-r", "--q", "2", "--k", "2", "--eps", "0.1", "--sweep", "n=64,128")
    assert len(json.loads(out)) == 2


def test_bound_validation_errors(capsys):
    code, _, err = run(capsys, "bound", "glue", "--eps1", "0", "--eps2", "0", "--k", "1", "--dimB", "0")
    assert code == 2 and "dim_B" in err
    code, _, err = run(capsys, "bound", "parallel-delta", "--q", "2", "--k", "1", "--n", "8", "--r", "3")
    assert code == 2 and "even" in err
    code, _, err = run(capsys, "bound", "parallel-r", "--sweep", "bogus=1")
    assert code == 2
    assert run(capsys, "bound", "nonsense")[0] == 2


def test_simulate_brickwork(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["simulate", "brickwork", "--n", "4", "--k", "1", "--layers", "20", "--samples", "10",
                     "--seed", "7", "-o", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = read_trajectories(a.read_text())
    assert len(rows) == 200
    assert max(r["entropy"] for r in rows if r["layer"] == 20) <= 1e-6


def test_simulate_trajectories_monotone(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["simulate", "lattice", "--D", "1", "--side", "4", "--k", "2", "--layers", "6", "--samples", "3",
                 "--seed", "1", "-o", str(out)]) == 0
    rows = read_trajectories(out.read_text())
    for t in range(3):
        ent = [r["entropy"] for r in rows if r["trial"] == t]
        assert all(b <= a + 1e-8 for a, b in zip(ent, ent[1:]))


def test_simulate_spurious_identity(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["simulate", "spurious", "--n", "6", "--k", "1", "--alpha", "0", "--layers", "5",
                 "-o", str(out)]) == 0
    rows = read_trajectories(out.read_text())
    for t in {r["trial"] for r in rows}:
        ent = [r["entropy"] for r in rows if r["trial"] == t]
        assert max(ent) - min(ent) <= 1e-10


def test_simulate_worker_count_invariant(tmp_path):
    one, two = tmp_path / "1.csv", tmp_path / "2.csv"
    args = ["simulate", "spurious", "--n", "4", "--k", "1", "--alpha", "0.5", "--layers", "4", "--samples", "4",
            "--seed", "3"]
    assert main(args + ["-o", str(one)]) == 0
    assert main(args + ["--workers", "2", "-o", str(two)]) == 0
    assert one.read_bytes() == two.read_bytes()


def test_simulate_file_and_caps(capsys, tmp_path):
    path = tmp_path / "arch.json"
    assert main(["arch", "generate", "brickwork", "--n", "4", "-o", str(path)]) == 0
    code, out, _ = run(capsys, "simulate", "file", "--arch", str(path), "--layers", "2", "--samples", "1")
    assert code == 0 and len(read_trajectories(out)) == 2
    code, _, err = run(capsys, "simulate", "brickwork", "--n", "12")
    assert code == 2 and "4096" in err
    code, _, err = run(capsys, "simulate", "file")
    assert code == 2


def test_qdecay_dim_cap_env():
    code = ("import qdecay.config as c, qdecay.channels as ch;"
            "from qdecay.channels import Identity;"
            "import sys\n"
            "try:\n    ch.choi(Identity((8,)))\nexcept c.CapacityError:\n    sys.exit(3)\n")
    res = subprocess.run([sys.executable, "-c", code], env={"QDECAY_DIM_CAP": "16", "PATH": ""})
    assert res.returncode == 3


def test_arch_generate_validate(capsys, tmp_path):
    path = tmp_path / "lat.json"
    assert main(["arch", "generate", "lattice", "--D", "2", "--side", "4", "-o", str(path)]) == 0
    spec = arch.loads(path.read_text())
    assert spec.layers == arch.lattice(2, 4).layers
    code, out, _ = run(capsys, "arch", "validate", str(path))
    assert code == 0 and json.loads(out)["cluster_graph_connected"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 3, "q": 2, "layers": [{"type": "parallel", "clusters": [[0, 1], [1, 2]]}]}))
    code, _, err = run(capsys, "arch", "validate", str(bad))
    assert code == 2 and "$.layers[0].clusters[1]" in err
    garbage = tmp_path / "garbage.json"
    garbage.write_text("{")
    assert run(capsys, "arch", "validate", str(garbage))[0] == 2
    code, out, _ = run(capsys, "arch", "generate", "complete", "--n", "4")
    assert code == 0 and len(json.loads(out)["layers"][0]["edges"]) == 6


def test_verify_commands(capsys):
    code, out, _ = run(capsys, "verify", "entropy", "--trials", "200", "--seed", "1")
    assert code == 0 and "entropy: PASS" in out
    code, out, _ = run(capsys, "verify", "walks", "--trees", "500")
    assert code == 0 and "walks: PASS" in out
    code, out, _ = run(capsys, "verify", "glue", "--n", "5", "--k", "1")
    assert code == 0 and "glue: PASS" in out


def test_verify_failure_exit_code(capsys, monkeypatch):
    from qdecay import verify

    def failing(**_):
        res = verify.SuiteResult("fake")
        res.add("always fails", False, "forced")
        return res

    monkeypatch.setitem(verify.SUITES, "cbrt", failing)
    code, out, _ = run(capsys, "verify", "cbrt")
    assert code == 1 and "first failure: always fails" in out


def test_console_script_help():
    res = subprocess.run([sys.executable, "-m", "qdecay.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "bound" in res.stdout
