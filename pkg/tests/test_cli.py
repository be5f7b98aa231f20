"""Command-line front end: exit codes, config files and command outputs."""

import csv
import json
import subprocess
import sys

import pytest

from burgers_enstrophy.cli import build_parser, constants_table, main, read_config
from burgers_enstrophy.errors import ValidationError


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestExitCodes:
    @pytest.mark.parametrize(
        "cmd", ["simulate", "oracle", "maximize", "family", "sweep", "fit", "constants", "figures"]
    )
    def test_help(self, cmd):
        with pytest.raises(SystemExit) as exc:
            main([cmd, "--help"])
        assert exc.value.code == 0

    def test_top_level_help_via_module(self):
        proc = subprocess.run([sys.executable, "-m", "burgers_enstrophy", "--help"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "simulate" in proc.stdout

    @pytest.mark.parametrize(
        "argv",
        [
            ["simulate", "--k", "0", "--t-end", "0.01"],
            ["simulate", "--k", "16", "--t-end", "-1"],
            ["simulate", "--k", "16", "--t-end", "0.01", "--n", "0"],
            ["figures", "--which", "fig9"],
        ],
    )
    def test_validation_exit_2(self, argv):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2

    def test_resolution_exit_3(self, capsys):
        code, _, err = _run(capsys, "simulate", "--k", "16", "--l", "16", "--n", "64", "--t-end", "0.01")
        assert code == 3
        assert err.startswith("error:")

    def test_precondition_exit_3(self, capsys):
        code, _, _ = _run(capsys, "maximize", "--E", "1e-3")
        assert code == 3

    def test_family_needs_one_target(self, capsys):
        code, _, _ = _run(capsys, "family", "--k", "8", "--E", "1000")
        assert code == 2

    def test_failed_sweep_exit_4(self, capsys, tmp_path):
        out = tmp_path / "s.csv"
        code, _, _ = _run(capsys, "sweep", "--k", "8", "--n", "1024", "--t-end", "1e-4", "--out", str(out))
        assert code == 4


class TestCommands:
    def test_simulate(self, capsys, tmp_path):
        out = tmp_path / "traj.csv"
        code, stdout, _ = _run(
            capsys, "simulate", "--k", "16", "--l", "16", "--n", "2048", "--t-end", "0.02", "--out", str(out)
        )
        assert code == 0
        summary = json.loads(stdout)
        assert summary["peak"]["interior"] is True
        assert 0 < summary["peak"]["t_star"] < 0.02
        with open(out) as fh:
            assert next(csv.reader(fh)) == ["t", "K", "E", "R"]

    def test_oracle_compare(self, capsys, tmp_path):
        code, stdout, _ = _run(capsys, "oracle", "--k", "5", "--t", "0.05", "--compare", "--out", str(tmp_path / "u.csv"))
        assert code == 0
        assert json.loads(stdout)["sup_discrepancy"] <= 1e-8

    def test_maximize(self, capsys, tmp_path):
        code, stdout, _ = _run(capsys, "maximize", "--E", "1e4", "--n", "256", "--out", str(tmp_path / "m.csv"))
        assert code == 0
        summary = json.loads(stdout)
        assert summary["E"] == pytest.approx(1e4, rel=1e-8)
        assert summary["a_minus"] < 0 < summary["a_plus"]

    def test_family_from_enstrophy(self, capsys):
        code, stdout, _ = _run(capsys, "family", "--E", "1e4", "--policy", "l_log:3")
        assert code == 0
        assert json.loads(stdout)["E0"] == pytest.approx(1e4, rel=1e-10)

    def test_sweep_then_fit(self, capsys, tmp_path):
        out = tmp_path / "s.csv"
        code, stdout, _ = _run(
            capsys, "sweep", "--k", "8", "12", "16", "--n", "1024", "--horizon", "logk_k2", "--out", str(out)
        )
        assert code == 0
        assert json.loads(stdout) == {"csv": str(out), "records": 3, "failed": 0, "audits_ok": True}
        fit_path = tmp_path / "fit.json"
        code, stdout, _ = _run(capsys, "fit", "--csv", str(out), "--out", str(fit_path))
        assert code == 0
        result = json.loads(stdout)
        assert set(result) == {"exponent", "log_exponent", "prefactor", "rms_residual"}
        assert json.loads(fit_path.read_text()) == result

    def test_sweep_overwrites_unless_append(self, capsys, tmp_path):
        out = tmp_path / "s.csv"
        argv = ["sweep", "--k", "16", "--n", "1024", "--horizon", "logk_k2", "--out", str(out)]
        _run(capsys, *argv)
        _run(capsys, *argv)
        assert len(out.read_text().splitlines()) == 2
        _run(capsys, *argv, "--append")
        assert len(out.read_text().splitlines()) == 3


class TestConstants:
    @pytest.fixture(scope="class")
    def lines(self):
        return {name: value for name, value in constants_table()}

    def test_printed_format(self, capsys):
        code, stdout, _ = _run(capsys, "constants")
        assert code == 0
        rows = stdout.splitlines()
        assert len(rows) == 6
        assert all(len(r.split()[-1].split(".")[1]) == 8 for r in rows)

    def test_values(self, capsys):
        _, stdout, _ = _run(capsys, "constants")
        text = stdout
        assert "5.51889365" in text
        assert "0.02533030" in text
        assert "0.02529693" in text
        assert "0.55032121" in text

    def test_rate_constant_line(self, capsys):
        _, stdout, _ = _run(capsys, "constants")
        assert "0.99057817" in stdout

    @pytest.mark.xfail(strict=True, reason="3^(5/3)/(5*2^(1/3)) evaluates to 0.990578174668, not 0.99057607")
    def test_rate_constant_listed_digits(self, capsys):
        _, stdout, _ = _run(capsys, "constants")
        assert "0.99057607" in stdout


class TestConfig:
    def test_read_config(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("# comment\nt-end = 0.02\n\nn=2048\n")
        assert read_config(path) == {"t_end": "0.02", "n": "2048"}

    def test_rejects_malformed_line(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("just words\n")
        with pytest.raises(ValidationError):
            read_config(path)

    def test_precedence(self, capsys, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("k = 16\nn = 2048\nt_end = 0.02\n")
        traj = tmp_path / "t.csv"
        code, stdout, _ = _run(capsys, "simulate", "--config", str(cfg), "--out", str(traj))
        assert code == 0
        summary = json.loads(stdout)
        assert (summary["k"], summary["n"], summary["t_end"]) == (16.0, 2048, 0.02)
        # Flags beat the file.
        code, stdout, _ = _run(capsys, "simulate", "--config", str(cfg), "--t-end", "0.015", "--out", str(traj))
        assert json.loads(stdout)["t_end"] == 0.015

    def test_unknown_key(self, capsys, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("bogus = 1\n")
        code, _, _ = _run(capsys, "simulate", "--config", str(cfg))
        assert code == 2

    def test_parser_builds(self):
        assert build_parser().prog
