import json
import subprocess
import sys

import pytest

from thetaseed.cli import main

from conftest import FIXTURES


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestGaps:
    def test_stratum(self, capsys):
        code, out, _ = run(capsys, "gaps", "--stratum", "2,1,even")
        data = json.loads(out)
        assert code == 0
        assert data["lambda"] == [2, 1]
        row0 = data["table"][0]
        assert row0["A_k"] == [3] and row0["c_k"] == -1

    def test_semigroup(self, capsys):
        code, out, _ = run(capsys, "gaps", "--semigroup", "3,7,8")
        assert code == 0 and json.loads(out)["lambda"] == [2, 2, 1, 1]

    def test_duplicate_gap(self, capsys):
        code, _, err = run(capsys, "gaps", "--b", "1,1,3")
        assert code == 2 and "error" in err

    def test_no_profile(self, capsys):
        assert run(capsys, "gaps")[0] == 2


class TestSchur:
    def test_staircase(self, capsys):
        code, out, _ = run(capsys, "schur", "2,1")
        assert code == 0 and out.strip()


class TestCurveCommands:
    def test_missing_curve_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "periods", str(tmp_path / "missing.json"))
        assert code == 2 and "error" in err

    def test_sigma_genus1(self, capsys):
        code, out, _ = run(capsys, "sigma", str(FIXTURES / "curve_g1.json"), "--u", "0.1", "--u", "0")
        assert code == 0
        vals = json.loads(out)["values"]
        re, im = vals[0]["sigma"]
        assert abs(re - 0.1) < 1e-5 and abs(im) < 1e-12
        assert max(map(abs, vals[1]["sigma"])) < 1e-15

    def test_sigma_wrong_dimension(self, capsys):
        assert run(capsys, "sigma", str(FIXTURES / "curve_g1.json"), "--u", "0.1,0.2")[0] == 2

    def test_rst_check(self, capsys):
        code, out, _ = run(capsys, "rst-check", str(FIXTURES / "curve_g2.json"))
        assert code == 0 and json.loads(out)["passed"]

    def test_modular_unknown_generator(self, capsys):
        assert run(capsys, "modular-check", str(FIXTURES / "curve_g1.json"), "--generator", "Q")[0] == 2


class TestVerify:
    def test_pass(self, capsys, tmp_path):
        report = tmp_path / "r.json"
        code, out, _ = run(capsys, "verify", "--checks", "duality,minimal", "--quiet", "--report", str(report))
        assert code == 0 and out.startswith("PASS")
        data = json.loads(report.read_text())
        assert data["passed"] and all({"name", "paper_ref", "residual", "tolerance", "pass"} <= set(c)
                                      for c in data["checks"])

    def test_mutation_fails(self, capsys):
        code, out, _ = run(capsys, "verify", "--mutate", "sign-flip", "--checks", "schur,tau", "--quiet")
        assert code == 1 and "FAIL" in out

    def test_precision_rejected(self, capsys):
        assert run(capsys, "verify", "--checks", "duality", "--precision", "200")[0] == 2

    def test_missing_fixture_dir(self, capsys, tmp_path):
        assert run(capsys, "verify", "--checks", "duality", "--fixture-dir", str(tmp_path / "none"))[0] == 2


@pytest.mark.slow
def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "thetaseed.cli", "gaps", "--stratum", "3,2,odd"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["lambda"] == [3, 2, 1]
