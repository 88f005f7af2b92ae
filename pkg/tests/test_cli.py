"""End-to-end tests of the command-line front end."""

import json

import pandas as pd
import pytest

from lane_emden_lab.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, build_parser, main
from lane_emden_lab.config import create_sample_config
from lane_emden_lab.sweeps import CSV_COLUMNS


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    """Prefix of a (1, 4) solve on 256 radial nodes."""
    out = tmp_path_factory.mktemp("solve") / "run"
    assert main(["solve", "--p", "1", "--q", "4", "--grid", "256", "--out", str(out)]) == EXIT_OK
    return out


class TestUsage:
    """Argument and input errors exit with 1."""

    def test_should_reject_inadmissible_exponents(self, tmp_path, capsys):
        """q = 0.5 with p = 1 is outside the superlinear regime."""
        code = main(["solve", "--p", "1", "--q", "0.5", "--grid", "64", "--out", str(tmp_path / "x")])
        assert code == EXIT_USAGE
        assert "pq > 1" in capsys.readouterr().err

    def test_should_list_valid_checks_for_unknown_name(self, capsys):
        """An unknown check name prints the valid ones."""
        assert main(["verify", "--p", "1", "--q", "4", "--checks", "nosuch"]) == EXIT_USAGE
        assert "valid names" in capsys.readouterr().err

    def test_should_exit_one_on_bad_flags(self, capsys):
        """Unknown flags and missing subcommands are usage errors."""
        assert main(["solve", "--bogus"]) == EXIT_USAGE
        assert main([]) == EXIT_USAGE

    def test_should_require_input_for_verify(self):
        """verify needs a solution file or an exponent pair."""
        assert main(["verify", "--checks", "energy"]) == EXIT_USAGE

    def test_should_require_ray_slope(self, tmp_path):
        """--mode ray without --K is a usage error."""
        assert main(["sweep", "--mode", "ray", "--q-list", "2,4", "--out", str(tmp_path / "s")]) == EXIT_USAGE

    def test_should_reject_bad_config_file(self, tmp_path):
        """Unknown sections in the config file are rejected."""
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"plotting": {}}), encoding="utf-8")
        assert main(["--config", str(path), "eigen", "--grid", "64"]) == EXIT_USAGE

    def test_should_refuse_shooting_on_rectangles_before_solving(self, tmp_path, capsys):
        """--shooting with --domain rect fails fast and writes nothing."""
        out = tmp_path / "rect"
        args = ["solve", "--domain", "rect", "--p", "2", "--q", "2", "--grid", "17", "--shooting", "--out", str(out)]
        assert main(args) == EXIT_USAGE
        assert "--shooting" in capsys.readouterr().err
        assert list(tmp_path.iterdir()) == []

    def test_should_parse_sweep_flags(self):
        """--q-list and --q-dyadic are mutually exclusive alternatives."""
        args = build_parser().parse_args(["sweep", "--mode", "diagonal", "--q-dyadic", "1:3", "--cold"])
        assert args.q_dyadic == "1:3" and args.cold and args.q_list is None


class TestSolveAndVerify:
    """solve writes files that verify can read."""

    def test_should_write_solution_and_report(self, solved):
        """Both JSON files exist and carry provenance."""
        solution = solved.with_name(solved.name + ".solution.json")
        report = solved.with_name(solved.name + ".report.json")
        assert solution.exists() and report.exists()
        data = json.loads(report.read_text(encoding="utf-8"))
        assert data["provenance"]["flags"]["command"] == "solve"
        assert data["p"] == 1.0 and data["q"] == 4.0

    def test_should_verify_saved_solution(self, solved, capsys):
        """Exact identities on the saved solution pass."""
        path = solved.with_name(solved.name + ".solution.json")
        code = main(["verify", "--in", str(path), "--checks", "pohozaev,energy,flux"])
        out = capsys.readouterr().out
        assert code == EXIT_OK
        assert "pohozaev" in out and "PASS" in out and "FAIL" not in out

    def test_should_write_verify_report(self, solved, tmp_path):
        """--report writes the diagnostics JSON."""
        path = solved.with_name(solved.name + ".solution.json")
        target = tmp_path / "verify.json"
        assert main(["verify", "--in", str(path), "--checks", "comparison", "--report", str(target)]) == EXIT_OK
        assert json.loads(target.read_text(encoding="utf-8"))["schema"] == "1"

    def test_should_exit_two_when_solver_fails(self, tmp_path):
        """A one-step Newton budget from the config cannot converge."""
        config = tmp_path / "lab.json"
        config.write_text(json.dumps({"radial_solver": {"max_iter": 1}}), encoding="utf-8")
        out = tmp_path / "fail"
        code = main(["--config", str(config), "solve", "--p", "1", "--q", "8", "--grid", "64", "--out", str(out)])
        assert code == EXIT_NUMERICAL


class TestSweepAndEigen:
    """sweep and eigen subcommands."""

    def test_should_write_sweep_tables(self, tmp_path, capsys):
        """A small dyadic sweep writes CSV and JSON and prints the rows."""
        out = tmp_path / "sweep"
        code = main(["sweep", "--mode", "fixed-p", "--q-dyadic", "2:4", "--grid", "64", "--out", str(out)])
        assert code == EXIT_OK
        frame = pd.read_csv(tmp_path / "sweep.csv")
        assert list(frame.columns) == CSV_COLUMNS
        assert list(frame["q"]) == [4.0, 8.0, 16.0]
        assert (tmp_path / "sweep.json").exists()
        out_text = capsys.readouterr().out
        assert "status" in out_text and "converged" in out_text

    def test_should_compare_eigenvalue_with_closed_form(self, capsys):
        """eigen prints the discrete, extrapolated and exact values."""
        assert main(["eigen", "--grid", "128"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "λ exact" in out and "relative gap" in out

    def test_should_use_config_defaults(self, tmp_path, capsys):
        """A sample config file is accepted as-is."""
        path = create_sample_config(tmp_path / "lab_config.json")
        assert main(["--config", str(path), "eigen", "--grid", "64"]) == EXIT_OK
