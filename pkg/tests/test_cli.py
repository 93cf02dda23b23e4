import json
import subprocess
import sys

import pytest

from andor.cli import main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_sample_trees(capsys):
    code, out, _ = run(["sample", "--model", "catalan", "--leaves", "3", "--k", "2",
                        "--trials", "4", "--seed", "1"], capsys)
    assert code == 0
    js = json.loads(out)
    assert len(js["trees"]) == 4
    assert all(t.count("x") == 3 for t in js["trees"])


def test_sample_size_stats_csv(capsys):
    code, out, _ = run(["sample", "--model", "bst", "--n", "20", "--trials", "5", "--seed", "2",
                        "--stats", "size", "--format", "csv"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "size,height,saturation"
    assert all(line.startswith("20,") for line in lines[1:])


def test_sample_alpha_split(capsys):
    code, out, _ = run(["sample", "--model", "alpha:0.5", "--n", "6", "--trials", "3000",
                        "--seed", "3", "--stats", "split"], capsys)
    assert code == 0
    js = json.loads(out)
    assert js["total_variation"] < 0.05
    assert [r["left_size"] for r in js["split"]] == [1, 2, 3, 4, 5]


def test_trim(capsys):
    code, out, _ = run(["trim", "(x1&(x1|x2))"], capsys)
    assert code == 0
    js = json.loads(out)
    assert js["trim_size"] == 1 and js["function"] == "2:A"


def test_trim_parse_error(capsys):
    code, _, err = run(["trim", "(x1)"], capsys)
    assert code == 2
    assert "unary group at position 0" in err


def test_dist_exact(capsys):
    code, out, _ = run(["dist", "--model", "shape:(o,o)", "--k", "1", "--exact"], capsys)
    assert code == 0
    js = json.loads(out)
    assert js["trials"] == 8
    assert [e["fn"] for e in js["entries"]] == ["1:0", "1:1", "1:2", "1:3"]
    assert all(e["p_exact"] == "1/4" for e in js["entries"])


def test_dist_mc_needs_seed(capsys):
    code, _, err = run(["dist", "--model", "spine:catalan", "--k", "2"], capsys)
    assert code == 2
    assert "--seed" in err


def test_dist_csv_and_output_file(tmp_path, capsys):
    path = tmp_path / "d.csv"
    code, out, _ = run(["dist", "--model", "spine:catalan", "--k", "2", "--trials", "500",
                        "--seed", "4", "--format", "csv", "-o", str(path)], capsys)
    assert code == 0 and out == ""
    lines = path.read_text().splitlines()
    assert lines[0] == "fn,count,p,stderr"
    assert sum(int(line.split(",")[1]) for line in lines[1:]) == 500


def test_scaling_csv(capsys):
    code, out, _ = run(["scaling", "--model", "spine:catalan", "--fn", "1:2", "--ks", "1,2,4",
                        "--trials", "2000", "--seed", "5", "--format", "csv"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "k,p_hat,stderr,log_k,log_p"


@pytest.mark.parametrize("argv", [
    ["dist", "--model", "nosuch", "--k", "2", "--seed", "1"],
    ["scaling", "--model", "catalan", "--fn", "1:2", "--ks", "1", "--trials", "5", "--seed", "1"],
    ["scaling", "--model", "spine:catalan", "--fn", "zz", "--ks", "1", "--trials", "5", "--seed", "1"],
    ["dist", "--model", "spine:catalan", "--k", "0", "--seed", "1"],
    ["checks", "--criteria", "99", "--seed", "1"],
    ["frobnicate"],
])
def test_usage_errors(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert err.startswith("andor: error:")


def test_unattainable_size_is_runtime_error(capsys):
    code, _, err = run(["sample", "--model", "catalan", "--n", "4", "--size-mode", "total_nodes",
                        "--seed", "1"], capsys)
    assert code == 1
    assert "UnattainableSize" in err


def test_complexity_csv(capsys):
    code, out, _ = run(["complexity", "--k", "2", "--max-size", "4"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "fn,L,Ess,read_once,witness"
    assert len(lines) == 17


def test_checks_subset(capsys):
    code, out, err = run(["checks", "--criteria", "5,11", "--seed", "42", "--format", "csv"], capsys)
    assert code == 0
    assert "criterion  5: PASS" in err and "criterion 11: PASS" in err
    assert out.splitlines()[0] == "criterion,passed,title"


def test_thread_count_does_not_change_output(capsys):
    argv = ["dist", "--model", "spine:catalan", "--k", "2", "--trials", "4100", "--seed", "6"]
    _, one, _ = run(argv + ["--threads", "1"], capsys)
    _, three, _ = run(argv + ["--threads", "3"], capsys)
    assert one == three


def test_console_script_module():
    res = subprocess.run([sys.executable, "-m", "andor.cli", "trim", "(x1|x2)"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["trim_size"] == 2
