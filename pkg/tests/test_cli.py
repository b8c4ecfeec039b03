import csv
import io
import json
import subprocess
import sys

import pytest

from jsrbound.cli import CSV_COLUMNS, run


@pytest.fixture
def write(tmp_path):
    def _write(obj, name="set.json"):
        path = tmp_path / name
        path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(path)
    return _write


DIAG = {"d": 2, "matrices": [[[2, 0], [0, 1]]]}
NIL = {"d": 2, "matrices": [[[0, 1], [0, 0]], [[0, 2], [0, 0]]]}
IDENT = {"d": 2, "matrices": [[[1, 0], [0, 1]]]}
ZERO = {"d": 2, "matrices": [[[0, 0], [0, 0]]]}
PAIR = {"d": 2, "matrices": [[[0.3, [0.8, 0.1]], [-0.5, 0.2]], [[0.9, 0], [[0, 0.4], -0.7]]]}


def _csv(text):
    return list(csv.reader(io.StringIO(text)))


# -- certify -------------------------------------------------------------------

def test_certify_human_itemizes_everything(write):
    code, out = run(["certify", write(DIAG), "--n", "4", "--norm", "inf"])
    assert code == 0
    for key in ("C_d", "sigma_d(n)", "nu_d(n)", "||S||", "||S^d||", "||S^n||",
                "||S^n||^(1/n)", "lower", "upper"):
        assert key in out
    assert "0.8773826753" in out and "upper          = 2.0" in out


def test_certify_json_full_precision(write):
    code, out = run(["certify", write(DIAG), "--n", "4", "--norm", "inf", "--format", "json"])
    assert code == 0
    obj = json.loads(out)
    assert obj["upper"] == 2.0
    assert obj["lower"] == pytest.approx(2 * 3 ** -0.75, abs=1e-15)
    assert (obj["bochi_constant"], obj["sigma"], obj["nu"]) == (3.0, 3, 1)
    assert (obj["set_norm"], obj["power_d_norm"], obj["power_n_norm"]) == (2.0, 4.0, 16.0)
    assert obj["power_n_root"] == 2.0 and obj["norm"] == "inf" and obj["mode"] == "exact"
    closed = json.loads(run(["certify", write(DIAG), "--n", "4", "--norm", "inf",
                             "--mode", "closed", "--format", "json"])[1])
    assert closed["lower"] == pytest.approx(2 * 3 ** -1.5, abs=1e-15)


def test_certify_json_repr_round_trips(write):
    _, out = run(["certify", write(PAIR), "--n", "3", "--format", "json"])
    obj = json.loads(out)
    # json writes the shortest repr, which reads back to the same double
    assert repr(obj["lower"]) in out and repr(obj["upper"]) in out


def test_certify_csv(write):
    code, out = run(["certify", write(DIAG), "--n", "4", "--norm", "inf", "--format", "csv"])
    rows = _csv(out)
    assert code == 0 and rows[0] == CSV_COLUMNS
    assert rows[1][0] == "4" and rows[1][2] == "2.0"
    assert float(rows[1][1]) == pytest.approx(2 * 3 ** -0.75, abs=1e-15)
    assert (rows[1][3], rows[1][4]) == ("3", "1")
    assert rows[1][5:] == ["inf", "exact"]


def test_certify_nilpotent(write):
    code, out = run(["certify", write(NIL), "--n", "3"])
    assert code == 0
    assert "exact zero (nilpotent by d-product test)" in out


def test_certify_identity(write):
    _, out = run(["certify", write(IDENT), "--n", "1", "--format", "json"])
    obj = json.loads(out)
    assert obj["upper"] == 1.0 and obj["lower"] == pytest.approx(1 / 3, rel=1e-15)


def test_certify_huge_power_is_null_in_json(write):
    big = {"d": 2, "matrices": [[[1e10, 0], [0, 1]]]}
    _, out = run(["certify", write(big), "--n", "64", "--format", "json"])
    obj = json.loads(out)
    assert obj["power_n_norm"] is None
    assert obj["log_power_n_norm"] == pytest.approx(640 * 2.302585092994046, rel=1e-12)
    assert obj["upper"] == pytest.approx(1e10, rel=1e-12)


# -- exit codes --------------------------------------------------------------------

def test_exit_code_parse_error(write, capsys):
    code, _ = run(["certify", write({"d": 2, "matrices": [[[1, 0], [0, "x"]]]})])
    assert code == 2
    assert "matrices[0][1][1]" in capsys.readouterr().err
    assert run(["certify", write("{not json")])[0] == 2


def test_exit_code_budget(write, capsys):
    perms = {"d": 3, "matrices": [
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        [[0, 1, 0], [0, 0, 1], [1, 0, 0]],
        [[0, 1, 0], [1, 0, 0], [0, 0, 1]]]}
    path = write(perms)
    assert run(["certify", path, "--n", "10", "--budget", "100"])[0] == 3
    assert "budget" in capsys.readouterr().err
    # upper available, lower not
    code, out = run(["certify", path, "--n", "1", "--budget", "10", "--format", "json"])
    assert code == 3 and json.loads(out)["lower"] is None
    assert run(["sweep", path, "--n-max", "6", "--budget", "400"])[0] == 3


def test_exit_code_verify_rejects_pairs(write, capsys):
    assert run(["verify", write(PAIR)])[0] == 2
    assert "single matrix" in capsys.readouterr().err


def test_argparse_errors_exit_2(write):
    with pytest.raises(SystemExit) as info:
        run(["certify", write(DIAG), "--norm", "max"])
    assert info.value.code == 2


# -- sweep -------------------------------------------------------------------

def test_sweep_csv_diag(write):
    code, out = run(["sweep", write(DIAG), "--n-max", "8", "--norm", "inf", "--format", "csv"])
    assert code == 0
    lines = out.splitlines()
    rows = _csv("\n".join(x for x in lines if not x.startswith("#")))
    assert rows[0] == CSV_COLUMNS and len(rows) == 9
    assert all(float(r[2]) == 2.0 for r in rows[1:])
    lows = [float(r[1]) for r in rows[1:]]
    assert lows[1] < lows[3] < lows[7]
    assert f"# best_lower={max(lows)!r}" in lines and "# best_upper=2.0" in lines


def test_sweep_zero_matrix(write):
    code, out = run(["sweep", write(ZERO), "--n-max", "4", "--format", "json"])
    obj = json.loads(out)
    assert code == 0 and all(iv["exact_zero"] for iv in obj["intervals"])


def test_sweep_random_pair_with_gsr(write):
    code, out = run(["sweep", write(PAIR), "--n-max", "6", "--gsr-depth", "4", "--format", "json"])
    obj = json.loads(out)
    assert code == 0
    assert obj["best_lower"] <= obj["best_upper"]
    assert obj["reported_lower"] == max(obj["best_lower"], obj["gsr_lower_estimate"])
    assert obj["reported_lower"] <= obj["best_upper"] * (1 + 1e-9)


def test_sweep_human(write):
    code, out = run(["sweep", write(DIAG), "--n-max", "3"])
    assert code == 0 and "best_upper" in out and "best_lower" in out


# -- verify ------------------------------------------------------------------

@pytest.mark.parametrize("doc, rho", [
    (DIAG, "2.0"),
    ({"d": 2, "matrices": [[[0, 1], [-1, 0]]]}, "1.0"),
    ({"d": 2, "matrices": [[[0, 1], [0, 0]]]}, "0.0"),
])
def test_verify_passes(write, doc, rho):
    code, out = run(["verify", write(doc), "--n-max", "8", "--norm", "inf"])
    assert code == 0, out
    assert f"oracle rho = {rho}" in out
    assert "FAIL" not in out and "PASS  bochi inequality" in out


def test_verify_nilpotent_uses_exact_zero_path(write):
    _, out = run(["verify", write({"d": 2, "matrices": [[[0, 1], [0, 0]]]})])
    assert "via exact-zero path" in out and "SKIP  omega" in out


def test_verify_omega_rows(write):
    _, out = run(["verify", write(DIAG), "--n-max", "8"])
    for k in range(4):
        assert f"PASS  omega recursion k={k}" in out


# -- bench -------------------------------------------------------------------

def test_bench_deterministic_and_clean(capsys):
    argv = ["bench", "--seed", "1", "--dims", "2", "3", "--instances", "6", "--n-max", "5"]
    code, out = run(argv)
    err = capsys.readouterr().err
    assert code == 0 and "violations=0" in err
    assert run(argv)[1] == out
    rows = _csv(out)
    assert rows[0] == ["d", "r", "n", "mean_width_ratio", "instances", "bochi_constant"]
    ratio = {(int(r[0]), int(r[2])): float(r[3]) for r in rows[1:]}
    for n in range(1, 6):
        assert ratio[(3, n)] > ratio[(2, n)]


def test_bench_pairs(capsys):
    code, out = run(["bench", "--seed", "2", "--dims", "2", "--members", "2",
                     "--instances", "3", "--n-max", "4"])
    assert code == 0 and len(_csv(out)) == 5


def test_bench_empty_ensemble():
    code, out = run(["bench", "--seed", "1", "--instances", "0"])
    assert code == 0 and _csv(out) == [["d", "r", "n", "mean_width_ratio", "instances",
                                        "bochi_constant"]]


def test_bench_rejects_d1():
    assert run(["bench", "--dims", "1", "--instances", "1"])[0] == 2


def test_module_entry_point(write):
    proc = subprocess.run([sys.executable, "-m", "jsrbound", "certify", write(DIAG), "--n", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "upper" in proc.stdout


def test_stdin_input():
    proc = subprocess.run([sys.executable, "-m", "jsrbound", "certify", "-", "--format", "json"],
                          input=json.dumps(IDENT), capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["upper"] == 1.0
