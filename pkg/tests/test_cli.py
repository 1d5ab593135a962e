import json
import math
import subprocess
import sys

import pytest

from thermoshift import cli, coe, formats

R_B = (1 + math.sqrt(5)) / 2


@pytest.fixture(scope="module")
def ex(tmp_path_factory):
    d = tmp_path_factory.mktemp("example")
    assert cli.main(["example", str(d), "--output", str(d / "listing.txt")]) == 0
    return d


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_example_files_round_trip(ex):
    assert formats.read_witness(ex / "witness.json") == coe.golden_example()
    assert formats.read_matrix(ex / "B.txt").rows == coe.GOLDEN_MEAN


def test_example_idempotent(ex, tmp_path):
    assert cli.main(["example", str(tmp_path), "--output", str(tmp_path / "x")]) == 0
    for name in cli.example_files():
        assert (tmp_path / name).read_bytes() == (ex / name).read_bytes()


def test_entropy(capsys, ex):
    code, out, _ = run(capsys, "entropy", ex / "B.txt")
    assert code == 0
    assert "r: 1.61803398874989" in out and "log_r: 0.481211825059603" in out


def test_entropy_rejects_identity(capsys, tmp_path):
    (tmp_path / "id.txt").write_text("2\n1 0\n0 1\n")
    code, _, err = run(capsys, "entropy", tmp_path / "id.txt")
    assert code == 2 and "NotIrreducible" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "entropy", tmp_path / "nope.txt")
    assert code == 2


def test_rpf(capsys, ex):
    code, out, _ = run(capsys, "rpf", ex / "B.txt", ex / "phi_c2_B.json")
    assert code == 0
    assert abs(json.loads(out)["eigenvalue"] - 2) < 1e-9
    code, out, _ = run(capsys, "rpf", ex / "A.txt", ex / "zero_A.json")
    data = json.loads(out)
    assert data["eigenvalue"] == 2 and set(data["eigenfunction"]["values"].values()) == {1.0}


def test_rpf_malformed_potential(capsys, ex, tmp_path):
    (tmp_path / "bad.json").write_text('{"depth": 1, "values": {"1": 0}}')
    assert run(capsys, "rpf", ex / "A.txt", tmp_path / "bad.json")[0] == 2
    (tmp_path / "bad2.json").write_text("not json")
    assert run(capsys, "rpf", ex / "A.txt", tmp_path / "bad2.json")[0] == 2


def test_kms_solve(capsys, ex):
    code, out, _ = run(capsys, "kms", ex / "A.txt", ex / "one_A.json", "--solve")
    assert code == 0 and abs(json.loads(out)["beta"] - 2) < 1e-8
    code, out, _ = run(capsys, "kms", ex / "A.txt", ex / "c1.json", "--solve", "--emit-masses", 3)
    data = json.loads(out)
    assert code == 0 and abs(data["beta"] - R_B) < 1e-8
    assert len(data["masses"]) == 15


def test_kms_wrong_beta(capsys, caplog, ex):
    code, out, _ = run(capsys, "kms", ex / "A.txt", ex / "one_A.json", "--beta", 2.5)
    assert code == 4 and "KMS condition fails" in caplog.text
    assert json.loads(out)["kms_deviation"] > 1e-3


def test_kms_no_bracket(capsys, ex):
    code, _, err = run(capsys, "kms", ex / "B.txt", ex / "c2.json", "--solve")
    assert code == 3 and "NoBracket" in err
    code, out, _ = run(capsys, "kms", ex / "B.txt", ex / "c2.json", "--solve", "--bracket", 1.5, 3)
    assert code == 0 and abs(json.loads(out)["beta"] - 2) < 1e-8


def test_no_convergence_exit(capsys, ex):
    assert run(capsys, "entropy", ex / "B.txt", "--max-iter", 2)[0] == 3


def test_coe_verify(capsys, ex):
    code, out, _ = run(capsys, "coe", ex / "witness.json", "verify")
    assert code == 0 and json.loads(out)["passed"] is True


def test_coe_verify_failure(capsys, ex, tmp_path):
    data = json.loads((ex / "witness.json").read_text())
    data["l1"]["values"] = {"1": 2, "2": 1}
    (tmp_path / "bad.json").write_text(json.dumps(data))
    code, out, _ = run(capsys, "coe", tmp_path / "bad.json", "verify")
    assert code == 4 and json.loads(out)["violations"]


def test_coe_scoe(capsys, ex):
    code, out, _ = run(capsys, "coe", ex / "witness.json", "scoe")
    assert json.loads(out) == {"cycle": "2", "cycle_sum": 2, "period": 1, "scoe": False}


def test_coe_cocycles(capsys, ex):
    out = json.loads(run(capsys, "coe", ex / "witness.json", "cocycles")[1])
    assert out["c1"]["values"] == {"1": 1, "2": 2}
    assert out["c2"]["values"] == {"1": 1, "2": 0}


def test_entropy_limit_csv(capsys, ex):
    code, out, _ = run(capsys, "coe", ex / "witness.json", "entropy-limit", "--n-max", 6)
    lines = out.splitlines()
    assert lines[0] == "n,E_n,entropy_estimate,r_pow_n_times_E_n"
    assert all(row.split(",")[2] == "0.693147180559945" for row in lines[1:])
    assert len(lines) == 7


def test_parallel_matches_serial(capsys, ex):
    args = ["coe", ex / "witness.json", "entropy-limit", "--side", "both", "--n-max", 12]
    serial = run(capsys, *args)[1]
    parallel = run(capsys, *args, "--parallel")[1]
    assert serial == parallel


def test_constants(capsys, ex):
    out = json.loads(run(capsys, "coe", ex / "witness.json", "constants", "--side", "2", "--n-max", 30)[1])
    assert abs(out["2"]["last"] - 2 * R_B / 3) < 1e-6


def test_hn_check(capsys, ex):
    code, out, _ = run(capsys, "coe", ex / "witness.json", "hn-check")
    assert code == 0 and json.loads(out)["max_deviation"] == "0"


def test_zeta(capsys, ex):
    code, out, _ = run(capsys, "zeta", ex / "B.txt", "--terms", 6)
    data = json.loads(out)
    assert data["rational"] == "1/(1 - z - z^2)"
    assert data["coefficients"] == [1, 1, 2, 3, 5, 8, 13]
    assert json.loads(run(capsys, "zeta", ex / "A.txt")[1])["rational"] == "1/(1 - 2z)"


def test_zeta_needs_terms(capsys, ex):
    assert run(capsys, "zeta", ex / "B.txt", "--terms", 0)[0] == 2


def test_bad_tolerance(capsys, ex):
    assert run(capsys, "entropy", ex / "B.txt", "--tolerance", 0.5)[0] == 2


def test_depth_cap(capsys, ex, monkeypatch):
    assert run(capsys, "coe", ex / "witness.json", "verify", "--depth", 30)[0] == 2
    monkeypatch.setenv("THERMOSHIFT_MAX_DEPTH", "40")
    assert run(capsys, "coe", ex / "witness.json", "verify", "--depth", 30)[0] == 0


def test_output_file(capsys, ex, tmp_path):
    target = tmp_path / "z.json"
    assert run(capsys, "zeta", ex / "B.txt", "--output", target)[0] == 0
    assert json.loads(target.read_text())["rational"] == "1/(1 - z - z^2)"


def test_deterministic_bytes(capsys, ex):
    args = ["kms", ex / "B.txt", ex / "one_A.json", "--solve", "--emit-masses", 4]
    first = run(capsys, *args)[1]
    assert run(capsys, *args)[1] == first


def test_module_entry_point(ex):
    proc = subprocess.run([sys.executable, "-m", "thermoshift", "zeta", str(ex / "A.txt"), "--terms", "3"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["coefficients"] == [1, 2, 4, 8]
