import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from pcsmono.cli import SWEEP_COLUMNS, main
from pcsmono.states import load_state


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def fixture_file(tmp_path, capsys):
    path = tmp_path / "fixture.json"
    assert run(capsys, "build", "--standard-w", 3, 2, "--p", 0.5, "--lambda", 0.7, "-o", path)[0] == 0
    return path


class TestBuild:
    def test_fixture(self, fixture_file):
        pcs = load_state(fixture_file)
        assert (pcs.n, pcs.d, pcs.p, pcs.lam) == (3, 2, 0.5, 0.7)

    def test_random_reproducible(self, capsys):
        a = run(capsys, "build", "--random", 4, 3, "--seed", 7)
        b = run(capsys, "build", "--random", 4, 3, "--seed", 7)
        assert a[0] == 0 and a[1] == b[1]
        assert "normalization residual" in a[2]

    def test_non_normalized(self, tmp_path, capsys):
        path = tmp_path / "a.json"
        path.write_text(json.dumps([[0.5], [0.5], [0.5]]))
        code, _, err = run(capsys, "build", "--coeffs", path)
        assert code == 2 and "normalization" in err

    def test_bad_seed(self, capsys):
        assert run(capsys, "build", "--random", 3, 2, "--seed", -1)[0] == 2


class TestVerify:
    def test_monogamy_fixture(self, fixture_file, capsys):
        code, out, _ = run(capsys, "verify-monogamy", "--input", fixture_file)
        rep = json.loads(out)
        assert code == 0 and rep["pass"] and abs(rep["residual"]) <= 1e-6

    def test_strong_four_parties(self, tmp_path, capsys):
        path = tmp_path / "w4.json"
        run(capsys, "build", "--standard-w", 4, 2, "--p", 0.5, "--lambda", 0.3, "-o", path)
        code, out, _ = run(capsys, "verify-strong", "--input", path)
        rep = json.loads(out)
        assert code == 0 and len(rep["terms"]) == 6 and rep["claim"] == "sm"

    def test_strong_generic(self, fixture_file, capsys):
        code, out, _ = run(capsys, "verify-strong", "--input", fixture_file, "--force-generic", "--seed", 3)
        assert code == 0 and json.loads(out)["tolerance"] == 1e-4

    def test_tolerance_override(self, fixture_file, capsys):
        code, out, _ = run(capsys, "verify-monogamy", "--input", fixture_file, "--tolerance", 1e-3)
        assert code == 0 and json.loads(out)["tolerance"] == 1e-3

    def test_violation_exits_one(self, fixture_file, capsys, monkeypatch):
        from dataclasses import replace
        import pcsmono.cli as cli
        real = cli.strong_monogamy_residual

        def violated(*a, **k):
            rep = real(*a, **k)
            return replace(rep, residual=-1.0, passed=False, saturated=False)

        monkeypatch.setattr(cli, "strong_monogamy_residual", violated)
        code, out, _ = run(capsys, "verify-strong", "--input", fixture_file)
        assert code == 1 and json.loads(out)["pass"] is False

    def test_negative_member_exits_one(self, fixture_file, capsys, monkeypatch):
        import pcsmono.cli as cli
        from pcsmono.measures import NegativeMeasureError

        def boom(*a, **k):
            raise NegativeMeasureError("member value -0.1")

        monkeypatch.setattr(cli, "ckw_residual_scren", boom)
        code, out, _ = run(capsys, "verify-monogamy", "--input", fixture_file)
        assert code == 1 and json.loads(out)["pass"] is False

    def test_truncated_json(self, fixture_file, capsys):
        text = fixture_file.read_text()
        fixture_file.write_text(text[: len(text) // 2])
        assert run(capsys, "verify-monogamy", "--input", fixture_file)[0] == 2

    def test_missing_file(self, tmp_path, capsys):
        assert run(capsys, "verify-strong", "--input", tmp_path / "nope.json")[0] == 2

    def test_byte_identical_reports(self, fixture_file, capsys):
        a = run(capsys, "verify-strong", "--input", fixture_file, "--force-generic", "--seed", 9)[1]
        b = run(capsys, "verify-strong", "--input", fixture_file, "--force-generic", "--seed", 9)[1]
        assert a == b


class TestMeasureReduce:
    def test_measure_kinds(self, fixture_file, capsys):
        out = json.loads(run(capsys, "measure", "--input", fixture_file)[1])
        assert abs(out["value"] - 2 / 9) < 1e-15
        out = json.loads(run(capsys, "measure", "--input", fixture_file, "--kind", "pair", "--other", 2)[1])
        assert abs(out["value"] - 1 / 9) < 1e-15
        out = json.loads(run(capsys, "measure", "--input", fixture_file, "--kind", "nscren", "--force-generic")[1])
        assert abs(out["value"]) <= 1e-6

    def test_pair_needs_other(self, fixture_file, capsys):
        assert run(capsys, "measure", "--input", fixture_file, "--kind", "pair")[0] == 2

    def test_reduce(self, fixture_file, capsys):
        code, out, err = run(capsys, "reduce", "--input", fixture_file, "--trace", 2)
        red = json.loads(out)
        assert code == 0 and red["n"] == 2
        assert red["p"] == pytest.approx(1 / 3, abs=1e-15)
        assert red["lambda"] == pytest.approx(0.7 * math.sqrt(0.5 / (2 / 3)), abs=1e-15)
        assert "deviation" in err

    def test_reduce_degenerate(self, tmp_path, capsys):
        path = tmp_path / "a.json"
        path.write_text(json.dumps([[1.0], [0.0], [0.0]]))
        run(capsys, "build", "--coeffs", path, "--p", 0.5, "-o", tmp_path / "s.json")
        assert run(capsys, "reduce", "--input", tmp_path / "s.json", "--trace", 0)[0] == 2


class TestChannel:
    @pytest.mark.parametrize("lam", [0.0, 0.7, 1.0])
    def test_residual(self, capsys, lam):
        code, out, _ = run(capsys, "channel", "--standard-w", 3, 2, "--p", 0.5, "--lambda", lam)
        payload = json.loads(out)
        assert code == 0 and payload["pcs_residual"] <= 1e-12
        rho = np.array(payload["re"]) + 1j * np.array(payload["im"])
        assert abs(np.trace(rho) - 1) < 1e-12


class TestSweep:
    def parse(self, text):
        return list(csv.DictReader(io.StringIO(text)))

    def test_sample_sweep(self, capsys):
        code, out, _ = run(capsys, "sweep", "--n", 3, "--d", 2, "--samples", 100, "--seed", 1)
        rows = self.parse(out)
        assert code == 0 and len(rows) == 100
        assert max(abs(float(r["ckw_residual"])) for r in rows) <= 1e-6
        assert list(rows[0].keys()) == SWEEP_COLUMNS

    def test_empty_grid(self, capsys):
        code, out, _ = run(capsys, "sweep", "--n", 3, "--d", 2, "--p-grid")
        assert code == 0 and out == ",".join(SWEEP_COLUMNS) + "\n"

    def test_grid(self, capsys):
        _, out, _ = run(capsys, "sweep", "--n", 3, "--d", 3, "--samples", 2,
                        "--p-grid", 0.2, 0.8, "--lambda-grid", 0.0, 1.0)
        rows = self.parse(out)
        assert len(rows) == 8 and {r["p"] for r in rows} == {"0.2", "0.8"}

    def test_generic_and_threads_deterministic(self, capsys):
        args = ["sweep", "--n", 3, "--d", 2, "--samples", 3, "--force-generic", "--seed", 4]
        a = run(capsys, *args)[1]
        b = run(capsys, *args, "--threads", 3)[1]
        assert a == b
        assert max(abs(float(r["sm_residual"])) for r in self.parse(a)) <= 1e-4

    def test_floats_round_trip(self, capsys):
        _, out, _ = run(capsys, "sweep", "--n", 4, "--d", 2, "--samples", 5)
        for r in self.parse(out):
            assert repr(float(r["p"])) == r["p"]

    def test_bad_spec(self, capsys, monkeypatch):
        assert run(capsys, "sweep", "--n", 2, "--d", 2)[0] == 2
        monkeypatch.setenv("PCSMONO_THREADS", "zero")
        assert run(capsys, "sweep", "--n", 3, "--d", 2, "--samples", 1)[0] == 2


def test_unknown_command(capsys):
    assert run(capsys, "frobnicate")[0] == 2


def test_module_entry_point(tmp_path):
    out = tmp_path / "s.json"
    proc = subprocess.run([sys.executable, "-m", "pcsmono", "build", "--standard-w", "3", "2", "-o", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and load_state(out).n == 3
