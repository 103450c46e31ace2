import io
import math
import subprocess
import sys

import pytest

from teleport3.cli import main
from teleport3.protocols import TABLE_W_P0


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def rows(text):
    lines = text.strip().split("\n")
    assert lines[0] == "param,simulated,oracle,deviation"
    return [[float(x) if x else None for x in line.split(",")] for line in lines[1:]]


class TestRun:
    def test_ghz_perfect(self):
        code, text = run("run", "--resource", "ghz", "--nu", "45", "--deg", "--theta", "0.7")
        assert code == 0
        assert "average 1.000000000000" in text
        assert text.count("1.000000000000") >= 9

    def test_w_p0(self):
        code, text = run("run", "--resource", "w", "--nu", "0")
        assert code == 0 and "average 0.777777777778" in text

    def test_w_p1_n4(self):
        code, text = run("run", "--resource", "w", "--protocol", "p1", "--n", "4")
        assert code == 0 and "average 0.666666666667" in text
        assert "n=4 receiver=5" in text

    def test_degenerate_branch_listed(self):
        code, text = run("run", "--theta", "0", "--nu", "0")
        assert code == 0 and text.count("degenerate") == 4

    def test_deg_matches_radians(self):
        a = run("run", "--resource", "w", "--nu", "30", "--theta", "60", "--phi", "90", "--deg")[1]
        b = run("run", "--resource", "w", "--nu", repr(math.pi / 6), "--theta", repr(math.pi / 3), "--phi", repr(math.pi / 2))[1]
        assert a.split("\n")[1:] == b.split("\n")[1:]


class TestSweep:
    def test_nu(self):
        code, text = run("sweep", "--param", "nu", "--steps", "5")
        assert code == 0
        for x, sim, orc, dev in rows(text):
            assert sim == pytest.approx(2 / 3 + math.sin(2 * x) / 3, abs=1e-9)
            assert dev < 1e-9

    def test_w_noise(self):
        _, text = run("sweep", "--resource", "w", "--param", "w", "--steps", "5", "--nu", "0.2")
        for x, sim, orc, dev in rows(text):
            assert sim == pytest.approx(7 / 9 - 5 / 18 * (1 - x), abs=1e-9)

    def test_n(self):
        _, text = run("sweep", "--resource", "w", "--protocol", "p1", "--param", "n", "--start", "3", "--stop", "10")
        data = rows(text)
        assert [r[0] for r in data] == list(range(3, 11))
        for n, sim, orc, dev in data:
            assert sim == pytest.approx((n + 4) / (3 * n), abs=1e-9)

    def test_theta(self):
        _, text = run("sweep", "--resource", "w", "--protocol", "p1", "--n", "5", "--param", "theta", "--steps", "3")
        assert [r[1] for r in rows(text)] == pytest.approx([0.4, 0.7, 0.4], abs=1e-11)

    def test_byte_identical(self, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for p in paths:
            assert run("sweep", "--param", "w", "--steps", "4", "--nu", "0.4", "--output", str(p))[0] == 0
        a, b = (p.read_bytes() for p in paths)
        assert a == b and b"\r" not in a and a.startswith(b"param,simulated,oracle,deviation\n")

    def test_out_of_domain(self):
        assert run("sweep", "--param", "nu", "--start", "0", "--stop", "2")[0] == 2


class TestMonteCarlo:
    def test_output(self):
        code, text = run("mc", "--resource", "w", "--nu", "0.3", "--shots", "2000", "--seed", "1", "--seed", "2")
        assert code == 0
        lines = text.strip().split("\n")
        assert len(lines) == 2 and lines[0].startswith("seed 1 shots 2000")

    def test_repeatable(self):
        args = ("mc", "--shots", "1000", "--seed", "5", "--nu", "0.1")
        assert run(*args)[1] == run(*args)[1]


class TestExitCodes:
    @pytest.mark.parametrize(
        "argv",
        [
            ["run", "--protocol", "p1", "--nu", "0.3"],
            ["run", "--protocol", "p1", "--w", "0.5"],
            ["run", "--n", "4"],
            ["run", "--resource", "w", "--protocol", "p1", "--n", "17"],
            ["run", "--resource", "w", "--protocol", "p1", "--receiver", "5"],
            ["run", "--theta", "4"],
            ["run", "--nu", "2"],
            ["run", "--w", "1.5"],
            ["run", "--quad", "1x1"],
            ["sweep", "--param", "n"],
            ["bogus"],
        ],
    )
    def test_config_errors(self, argv, capsys):
        assert run(*argv)[0] == 2

    def test_unwritable_output(self, tmp_path, capsys):
        code, _ = run("sweep", "--param", "nu", "--steps", "2", "--output", str(tmp_path / "missing" / "x.csv"))
        assert code == 3
        assert "missing" in capsys.readouterr().err

    def test_missing_table(self, tmp_path, capsys):
        assert run("run", "--table", str(tmp_path / "none.txt"))[0] == 3

    def test_table_kind_mismatch(self, tmp_path, capsys):
        path = tmp_path / "t.txt"
        path.write_text("1 - X\n2 - Y\n3 - I\n4 - Z\n")
        assert run("run", "--table", str(path))[0] == 2

    def test_help(self, capsys):
        assert run("--help")[0] == 0


class TestTablesAndVerify:
    def test_loaded_table_changes_result(self, tmp_path):
        path = tmp_path / "t.txt"
        TABLE_W_P0.replace((3, 1), "X").save(path)
        code, text = run("run", "--resource", "w", "--nu", "0.3", "--table", str(path))
        assert code == 0
        assert " 3  1     X" in text
        assert "average 0.777777777778" not in text

    def test_verify_passes(self):
        code, text = run("verify", "--shots", "20000")
        assert code == 0
        assert text.strip().split("\n")[-1].endswith(" 0 failed")
        assert all(line.startswith(("PASS", "FAIL")) for line in text.strip().split("\n")[:-1])

    def test_verify_catches_mutation(self, tmp_path):
        path = tmp_path / "t.txt"
        TABLE_W_P0.replace((2, 2), "I").save(path)
        code, text = run("verify", "--resource", "w", "--table", str(path), "--shots", "2000")
        assert code == 1
        assert "FAIL" in text


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "teleport3", "run", "--resource", "w", "--protocol", "p1"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert "average 0.777777777778" in proc.stdout
