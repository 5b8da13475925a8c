"""End-to-end tests of the command line front end.

All tests drive cli.main() in process; one subprocess test pins the
python -m entry point and exit codes as seen by a shell.
"""

import cmath
import subprocess
import sys
from pathlib import Path

import pytest

from lowregnls import __version__
from lowregnls.cli import CliError, DIAG_HEADER, main, parse_cutoff, parse_time
from lowregnls.harness import CSV_HEADER
from lowregnls.integrator import load_trajectory

DATA = Path(__file__).parent / "data"


class TestValueParsing:
    def test_time_shorthand(self):
        assert parse_time("2^-6") == 2.0 ** -6
        assert parse_time("2^3") == 8.0
        assert parse_time(" 2^-2 ") == 0.25
        assert parse_time("0.125") == 0.125

    @pytest.mark.parametrize("bad", ["abc", "0", "-1", "2^", "inf", "nan"])
    def test_time_rejects(self, bad):
        with pytest.raises(CliError):
            parse_time(bad)

    def test_cutoff_shorthand(self):
        assert parse_cutoff("2^5") == 32
        assert parse_cutoff("17") == 17

    @pytest.mark.parametrize("bad", ["0", "-3", "x", "2^-3"])
    def test_cutoff_rejects(self, bad):
        with pytest.raises(CliError):
            parse_cutoff(bad)


class TestSolve:
    def test_prints_summary(self, capsys):
        rc = main(["solve", "--tau", "2^-3", "--N", "8", "--T", "0.5"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "scheme=lowreg" in out
        assert "final: l2=" in out
        assert "h1_max=" in out

    def test_writes_dump(self, tmp_path, capsys):
        dump = tmp_path / "run"
        rc = main(["solve", "--tau", "2^-3", "--N", "8", "--T", "0.5",
                   "--out", str(dump)])
        out = capsys.readouterr().out
        assert rc == 0
        assert "wrote trajectory dump" in out
        traj = load_trajectory(dump)
        assert traj.snapshot_times == (0.0, 0.5)
        assert traj.final.cutoff == 8

    def test_constant_state_closed_form(self, tmp_path, capsys):
        # 1000 first-order steps of u' : u(1) = e^{-i lambda} with lambda=-1
        dump = tmp_path / "run"
        rc = main(["solve", "--initial", "constant", "--amplitude", "1",
                   "--tau", "0.001", "--N", "4", "--T", "1",
                   "--out", str(dump)])
        capsys.readouterr()
        assert rc == 0
        final = load_trajectory(dump).final
        assert abs(final.coefficient(0) - cmath.exp(1j)) <= 2e-3

    def test_splitting_scheme_selected(self, capsys):
        rc = main(["solve", "--tau", "2^-4", "--N", "8", "--T", "0.5",
                   "--scheme", "lie"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "scheme=lie" in out


class TestDiagnostics:
    def test_stdout_series(self, capsys):
        rc = main(["diagnostics", "--tau", "2^-3", "--N", "8", "--T", "0.5"])
        out = capsys.readouterr().out
        lines = out.strip().splitlines()
        assert rc == 0
        assert lines[0] == DIAG_HEADER
        assert len(lines) == 1 + 5  # steps 0..4
        first = lines[1].split(",")
        assert float(first[0]) == 0.0
        assert float(first[3]) == 0.0 and float(first[4]) == 0.0

    def test_out_file(self, tmp_path, capsys):
        rc = main(["diagnostics", "--tau", "2^-3", "--N", "8", "--T", "0.5",
                   "--out", str(tmp_path)])
        out = capsys.readouterr().out
        assert rc == 0
        assert "wrote" in out
        text = (tmp_path / "diagnostics.csv").read_text()
        assert text.startswith(DIAG_HEADER + "\n")

    def test_reread_matches_fresh_run(self, tmp_path, capsys):
        args = ["--tau", "2^-3", "--N", "8", "--T", "0.5"]
        assert main(["diagnostics"] + args) == 0
        fresh = capsys.readouterr().out
        dump = tmp_path / "run"
        assert main(["solve", *args, "--diag-stride", "1",
                     "--out", str(dump)]) == 0
        capsys.readouterr()
        assert main(["diagnostics", "--in", str(dump)]) == 0
        reread = capsys.readouterr().out
        # repr round trip through the manifest is exact
        assert reread == fresh

    def test_in_excludes_fresh_run_flags(self, capsys):
        rc = main(["diagnostics", "--in", "somewhere", "--tau", "2^-3"])
        err = capsys.readouterr().err
        assert rc == 2
        assert err.startswith("error:")

    def test_requires_tau_and_cutoff(self, capsys):
        rc = main(["diagnostics"])
        err = capsys.readouterr().err
        assert rc == 2
        assert "error:" in err


class TestStudies:
    def test_temporal_csv_to_stdout(self, capsys):
        rc = main(["study-temporal", "--tau-list", "2^-4,2^-5",
                   "--N-list", "8", "--T", "0.5"])
        out = capsys.readouterr().out
        lines = out.strip().splitlines()
        assert rc == 0
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + 2
        first = lines[1].split(",")
        assert first[0] == "temporal"
        assert first[1] == "1.0"
        assert first[2] == "-1"
        assert float(first[4]) == 2.0 ** -4
        assert int(first[5]) == 8

    def test_spatial_report_to_dir(self, tmp_path, capsys):
        rc = main(["study-spatial", "--tau-list", "2^-5",
                   "--N-list", "8,16,32", "--T", "0.5",
                   "--out", str(tmp_path)])
        out = capsys.readouterr().out
        assert rc == 0
        assert "spatial study:" in out
        assert "rate" in out
        assert "wrote" in out
        text = (tmp_path / "study_spatial.csv").read_text()
        assert text.startswith(CSV_HEADER + "\n")
        assert len(text.strip().splitlines()) == 1 + 3

    def test_jobs_flag_is_deterministic(self, capsys):
        args = ["study-temporal", "--tau-list", "2^-4,2^-5",
                "--N-list", "8", "--T", "0.25"]
        assert main(args + ["--jobs", "1"]) == 0
        serial = capsys.readouterr().out
        assert main(args + ["--jobs", "3"]) == 0
        pooled = capsys.readouterr().out
        # wall_ms differs run to run; everything before it must not
        strip = lambda txt: [ln.rsplit(",", 1)[0] for ln in txt.splitlines()]
        assert strip(pooled) == strip(serial)


class TestConfigFile:
    def test_config_supplies_defaults(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# defaults\n\ntau=2^-3\nN=8\nT=0.5\nscheme=lie\n")
        rc = main(["solve", "--config", str(cfg)])
        out = capsys.readouterr().out
        assert rc == 0
        assert "scheme=lie" in out
        assert "T=0.5" in out

    def test_explicit_flag_wins(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("tau=2^-3\nN=8\nT=0.5\nscheme=lie\n")
        rc = main(["solve", "--config", str(cfg), "--scheme", "lowreg"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "scheme=lowreg" in out
        assert "T=0.5" in out  # untouched keys still apply

    def test_underscore_keys_map_to_dashes(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("tau=2^-3\nN=8\nT=0.5\ninit_mode=sampled\n")
        assert main(["solve", "--config", str(cfg)]) == 0
        capsys.readouterr()

    def test_malformed_line(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("tau=2^-3\nnonsense\n")
        rc = main(["solve", "--config", str(cfg), "--N", "8"])
        err = capsys.readouterr().err
        assert rc == 2
        assert "expected key=value" in err

    def test_missing_file(self, capsys):
        rc = main(["solve", "--tau", "2^-3", "--N", "8",
                   "--config", "no/such/file.cfg"])
        err = capsys.readouterr().err
        assert rc == 2
        assert "cannot read config file" in err


class TestErrorContract:
    def check(self, argv, code, capsys):
        rc = main(argv)
        captured = capsys.readouterr()
        assert rc == code
        lines = captured.err.strip().splitlines()
        assert len(lines) == 1
        assert lines[0].startswith("error: ")
        return lines[0]

    def test_no_subcommand(self, capsys):
        msg = self.check([], 2, capsys)
        assert "subcommand" in msg

    def test_unknown_flag(self, capsys):
        self.check(["solve", "--tau", "2^-3", "--N", "8", "--nope"], 2, capsys)

    def test_bad_time_literal(self, capsys):
        self.check(["solve", "--tau", "abc", "--N", "8"], 2, capsys)

    def test_bad_format_choice(self, capsys):
        self.check(["solve", "--tau", "2^-3", "--N", "8",
                    "--format", "json"], 2, capsys)

    def test_empty_tau_list(self, capsys):
        self.check(["study-temporal", "--tau-list", ",", "--N-list", "8"],
                   2, capsys)

    def test_horizon_off_step_grid(self, capsys):
        msg = self.check(["solve", "--tau", "2^-3", "--N", "8", "--T", "0.3"],
                         1, capsys)
        assert "multiple" in msg

    def test_blow_up_reported(self, capsys):
        msg = self.check(["solve", "--initial", "constant", "--amplitude",
                          "1e8", "--tau", "0.5", "--N", "4", "--T", "2"],
                         1, capsys)
        assert "blew up" in msg


class TestSelftest:
    def test_all_checks_pass(self, capsys):
        rc = main(["selftest"])
        out = capsys.readouterr().out
        lines = out.strip().splitlines()
        assert rc == 0
        assert len(lines) == 3
        assert all(": pass (" in ln for ln in lines)


HELP_CASES = [
    ("help_main.txt", ["--help"]),
    ("help_solve.txt", ["solve", "--help"]),
    ("help_diagnostics.txt", ["diagnostics", "--help"]),
    ("help_study_temporal.txt", ["study-temporal", "--help"]),
    ("help_study_spatial.txt", ["study-spatial", "--help"]),
    ("help_selftest.txt", ["selftest", "--help"]),
]


class TestHelpGolden:
    @pytest.mark.parametrize("fname,argv", HELP_CASES)
    def test_help_matches_golden(self, fname, argv, capsys, monkeypatch):
        monkeypatch.setenv("COLUMNS", "100")  # argparse wraps to the terminal
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 0
        assert capsys.readouterr().out == (DATA / fname).read_text()

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert capsys.readouterr().out == f"lowregnls {__version__}\n"


class TestModuleEntryPoint:
    def test_selftest_and_error_exit_codes(self):
        ok = subprocess.run(
            [sys.executable, "-m", "lowregnls", "selftest"],
            capture_output=True, text=True,
        )
        assert ok.returncode == 0
        assert ok.stdout.count(": pass (") == 3

        bad = subprocess.run(
            [sys.executable, "-m", "lowregnls", "solve", "--tau", "abc",
             "--N", "8"],
            capture_output=True, text=True,
        )
        assert bad.returncode == 2
        assert bad.stderr.startswith("error: ")
