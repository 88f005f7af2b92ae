"""Tests for sweep modes, the sweep driver, table analysis and export."""

import math
import warnings

import numpy as np
import pandas as pd
import pytest

from lane_emden_lab.config import RadialSolveConfig
from lane_emden_lab.errors import (
    ConfigError,
    ExportError,
    InsufficientDataError,
    InvalidExponentsError,
    NonConvergenceError,
)
from lane_emden_lab.models import ExponentPair, Field, RadialGrid, SolutionPair
from lane_emden_lab.sweeps import (
    COLUMNS,
    CSV_COLUMNS,
    Diagonal,
    ExportFormat,
    FixedP,
    PowerRay,
    Ray,
    RowStatus,
    SweepPlan,
    SweepTable,
    dyadic,
    energy_contrast,
    export,
    failed_row,
    fit_logarithmic,
    import_table,
    l1_floor_summary,
    normalize_frame,
    run_sweep,
    row_status,
)


@pytest.fixture(scope="module")
def small_table():
    """Warm p = 1 sweep over q = 4..32 on a coarse disk grid."""
    return run_sweep(SweepPlan(FixedP(1.0, dyadic(2, 5)), resolution=128), flags={"command": "test"})


def synthetic_table(**columns):
    return SweepTable(normalize_frame(pd.DataFrame(columns)))


class TestModes:
    """Exponent families."""

    def test_should_build_dyadic_lists(self):
        """dyadic(k0, k1) = [2^k0, ..., 2^k1]."""
        assert dyadic(2, 5) == [4.0, 8.0, 16.0, 32.0]
        assert dyadic(3, 3) == [8.0]
        with pytest.raises(ValueError):
            dyadic(5, 2)

    def test_should_generate_pairs_for_each_mode(self):
        """Each mode maps q to its (p, q) pair."""
        assert [e.p for e in FixedP(2.0, [2.0, 4.0]).pairs()] == [2.0, 2.0]
        assert [(e.p, e.q) for e in Diagonal([2.0, 3.0]).pairs()] == [(2.0, 2.0), (3.0, 3.0)]
        assert [e.p for e in Ray(0.5, [4.0, 8.0]).pairs()] == [2.0, 4.0]
        assert [e.p for e in PowerRay(0.5, [4.0, 16.0]).pairs()] == [2.0, 4.0]
        assert PowerRay(0.25, [2.0]).pairs()[0].p == pytest.approx(2.0**0.25)

    @pytest.mark.parametrize(
        "make",
        [
            lambda: FixedP(1.0, []),
            lambda: FixedP(1.0, [8.0, 4.0]),
            lambda: Ray(0.0, [4.0]),
            lambda: PowerRay(1.0, [4.0]),
        ],
    )
    def test_should_reject_bad_mode_parameters(self, make):
        """Empty or unsorted q-lists and out-of-range K, alpha."""
        with pytest.raises(ConfigError):
            make()

    def test_should_reject_inadmissible_pairs(self):
        """Diagonal q = 1 gives pq = 1."""
        with pytest.raises(InvalidExponentsError):
            Diagonal([1.0, 2.0])

    def test_should_validate_plan(self):
        """Unknown checks and non-positive job counts are configuration errors."""
        with pytest.raises(ConfigError):
            SweepPlan(FixedP(1.0, [4.0]), checks=frozenset({"nosuch"}))
        with pytest.raises(ConfigError):
            SweepPlan(FixedP(1.0, [4.0]), jobs=0)

    def test_should_drop_trend_from_row_checks(self):
        """Trend fits need the whole table."""
        plan = SweepPlan(FixedP(1.0, [4.0]), checks=frozenset({"trend", "energy"}))
        assert plan.checks == frozenset({"energy"})


class TestRunSweep:
    """The sweep driver."""

    def test_should_converge_every_row(self, small_table):
        """All rows converge and come back sorted by q."""
        frame = small_table.frame
        assert len(small_table) == 4
        assert frame["converged"].all()
        assert list(frame["q"]) == [4.0, 8.0, 16.0, 32.0]
        assert list(frame.columns) == COLUMNS
        assert small_table.convergence_rate == 1.0
        assert set(frame["status"]) == {RowStatus.CONVERGED.value}

    def test_should_record_exact_inequalities(self, small_table):
        """Lower bound and comparison hold; the envelope does not apply below q = 64."""
        frame = small_table.frame
        assert all(flag is True for flag in frame["lower_bound"])
        assert all(flag is True for flag in frame["comparison_ok"])
        assert all(flag is None for flag in frame["upper_envelope"])
        assert (frame["error"] == "").all()

    def test_should_carry_provenance(self, small_table):
        """Provenance names the package, the flags and the plan."""
        prov = small_table.provenance
        assert prov["package"] == "lane-emden-lab"
        assert prov["flags"] == {"command": "test"}
        assert prov["plan"]["mode"]["name"] == "fixed-p"
        assert prov["plan"]["mode"]["q_list"] == [4.0, 8.0, 16.0, 32.0]

    def test_should_give_same_maxima_warm_and_cold(self):
        """Continuation from the previous row and independent solves agree."""
        mode = FixedP(1.0, dyadic(2, 4))
        checks = frozenset({"energy"})
        warm = run_sweep(SweepPlan(mode, resolution=128, checks=checks))
        cold = run_sweep(SweepPlan(mode, resolution=128, checks=checks, warm_start=False))
        assert np.allclose(warm.frame["M"], cold.frame["M"], rtol=1e-8, atol=0.0)
        assert np.allclose(warm.frame["N"], cold.frame["N"], rtol=1e-8, atol=0.0)

    def test_should_record_failed_rows_without_aborting(self):
        """A one-step Newton budget fails every row; the sweep still returns a table."""
        plan = SweepPlan(
            FixedP(1.0, [4.0, 8.0]),
            resolution=64,
            solver=RadialSolveConfig(max_iter=1),
            checks=frozenset({"energy"}),
            warm_start=False,
        )
        table = run_sweep(plan)
        assert len(table) == 2
        assert not table.frame["converged"].any()
        assert all(msg for msg in table.frame["error"])
        assert set(table.frame["status"]) <= {RowStatus.FAILED.value, RowStatus.UNRESOLVED.value}
        assert table.points() == []

    def test_should_report_ratio_for_power_ray(self):
        """Power-ray rows carry max(M, N)/log(pq)."""
        table = run_sweep(SweepPlan(PowerRay(0.5, [4.0, 16.0]), resolution=128, checks=frozenset({"energy"})))
        frame = table.frame
        expected = np.maximum(frame["M"], frame["N"]) / np.log(frame["p"] * frame["q"])
        assert np.allclose(frame["max_over_log_pq"], expected, rtol=1e-12)
        assert list(frame["p"]) == [2.0, 4.0]


class TestRowStatus:
    """Converged, failed and unresolved rows."""

    @pytest.mark.parametrize(
        "converged, R1, expected",
        [
            (True, 1e-6, RowStatus.CONVERGED),
            (False, 1e-3, RowStatus.UNRESOLVED),
            (False, 0.1, RowStatus.FAILED),
            (False, None, RowStatus.FAILED),
            (False, math.nan, RowStatus.FAILED),
        ],
    )
    def test_should_classify_rows(self, converged, R1, expected):
        """Failures below one grid spacing are unresolved, the rest failed."""
        assert row_status(converged, R1, spacing=1.0 / 64.0) is expected

    def test_should_mark_failure_below_grid_spacing_unresolved(self):
        """A best iterate with N = 1e8 puts R₁ at (1/(64·1e8))^{1/2}, far below h = 1/64."""
        grid = RadialGrid(1.0, 64)
        best = SolutionPair(
            ExponentPair(1.0, 32.0),
            Field(grid, 1.0 - grid.nodes**2),
            Field(grid, 1e8 * (1.0 - grid.nodes**2)),
            residual_norm=1.0,
            newton_iterations=50,
            converged=False,
        )
        row = failed_row(ExponentPair(1.0, 64.0), NonConvergenceError("stalled", best=best), grid)
        assert row["status"] == RowStatus.UNRESOLVED.value
        assert row["R1"] == pytest.approx(math.sqrt(1.0 / (64.0 * 1e8)))
        assert row["M"] == 1.0 and row["N"] == 1e8
        assert "NonConvergenceError" in row["error"]

    def test_should_mark_failure_without_iterate_failed(self):
        """No best iterate means no R₁ estimate."""
        row = failed_row(ExponentPair(1.0, 64.0), NonConvergenceError("stalled"), RadialGrid(1.0, 64))
        assert row["status"] == RowStatus.FAILED.value
        assert "R1" not in row

    def test_should_fill_missing_flags_without_warnings(self):
        """Missing booleans become False and missing statuses 'failed' without pandas deprecation warnings."""
        frame = pd.DataFrame({"q": [8.0, 4.0], "converged": [None, True], "status": [None, "converged"]})
        with warnings.catch_warnings():
            warnings.simplefilter("error", FutureWarning)
            out = normalize_frame(frame)
        assert list(out["converged"]) == [True, False]
        assert out["converged"].dtype == bool
        assert list(out["status"]) == ["converged", "failed"]
        assert not out["resolved"].any()


class TestExport:
    """CSV and JSON output."""

    def test_should_write_csv_with_fixed_columns(self, small_table, tmp_path):
        """One header line plus one line per row, floats round-tripping exactly."""
        path = export(small_table, ExportFormat.CSV, tmp_path / "sweep.csv")
        lines = path.read_text(encoding="utf-8").strip().splitlines()
        assert len(lines) == len(small_table) + 1
        assert lines[0].split(",") == CSV_COLUMNS
        back = pd.read_csv(path)
        assert np.array_equal(back["M"].to_numpy(), small_table.frame["M"].to_numpy())

    def test_should_round_trip_json(self, small_table, tmp_path):
        """import_table recovers the exported frame."""
        path = export(small_table, "json", tmp_path / "sweep.json")
        back = import_table(path)
        pd.testing.assert_frame_equal(back.frame, small_table.frame)
        assert back.provenance["plan"]["resolution"] == 128

    def test_should_write_header_only_for_empty_table(self, tmp_path):
        """An empty sweep still produces a valid CSV."""
        table = SweepTable(normalize_frame(pd.DataFrame(columns=COLUMNS)))
        path = export(table, "csv", tmp_path / "empty.csv")
        assert path.read_text(encoding="utf-8").strip() == ",".join(CSV_COLUMNS)

    def test_should_raise_export_error_for_missing_directory(self, small_table, tmp_path):
        """Unwritable targets raise ExportError."""
        with pytest.raises(ExportError):
            export(small_table, "csv", tmp_path / "missing" / "sweep.csv")
        with pytest.raises(ExportError):
            export(small_table, "json", tmp_path / "missing" / "sweep.json")

    def test_should_reject_unknown_format(self, small_table, tmp_path):
        """Only csv and json are supported."""
        with pytest.raises(ValueError):
            export(small_table, "xlsx", tmp_path / "sweep.xlsx")


class TestAnalysis:
    """Fits and summaries over sweep tables."""

    def test_should_fit_exact_logarithm(self):
        """N = 0.5 log q + 1 gives slope 0.5 and correlation 1."""
        qs = np.array([16.0, 32.0, 64.0, 128.0, 256.0])
        N = 0.5 * np.log(qs) + 1.0
        table = synthetic_table(p=1.0, q=qs, M=1.5, N=N, converged=True)
        fit = fit_logarithmic(table)
        assert fit.slope == pytest.approx(0.5, abs=1e-12)
        assert fit.intercept == pytest.approx(1.0, abs=1e-12)
        assert fit.correlation == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(fit.growth.to_numpy(), 0.5)
        assert list(fit.ratio.index) == list(qs)
        assert fit.ratio_spread == pytest.approx(fit.ratio[64.0] / fit.ratio[256.0])

    def test_should_skip_unconverged_and_small_q_rows(self):
        """Only converged rows with q ≥ q_min enter the fit."""
        qs = np.array([4.0, 16.0, 32.0, 64.0, 128.0, 256.0])
        N = 0.5 * np.log(qs) + 1.0
        N[-1] = 100.0
        table = synthetic_table(p=1.0, q=qs, N=N, converged=[True, True, True, True, True, False])
        fit = fit_logarithmic(table)
        assert fit.slope == pytest.approx(0.5, abs=1e-12)
        assert list(fit.ratio.index) == [16.0, 32.0, 64.0, 128.0]

    def test_should_require_p_equal_one(self):
        """The logarithmic law concerns p = 1."""
        table = synthetic_table(p=2.0, q=[4.0, 8.0, 16.0, 32.0], N=1.0, converged=True)
        with pytest.raises(ValueError):
            fit_logarithmic(table)

    def test_should_need_four_rows(self):
        """Three converged rows are not enough."""
        table = synthetic_table(p=1.0, q=[16.0, 32.0, 64.0], N=[1.0, 2.0, 3.0], converged=True)
        with pytest.raises(InsufficientDataError):
            fit_logarithmic(table)

    def test_should_summarize_l1_floors(self):
        """The floor holds when the minimum stays above half the first value."""
        table = synthetic_table(
            p=1.0,
            q=[2.0, 4.0, 8.0],
            L1_u=[1.0, 0.8, 0.6],
            L1_uq=[1.0, 0.5, 0.3],
            L1_v=[2.0, 2.0, 2.0],
            L1_uq1=[1.0, 1.2, 1.5],
            converged=True,
        )
        summary = l1_floor_summary(table)
        assert summary.loc["L1_u", "ratio"] == pytest.approx(0.6)
        assert bool(summary.loc["L1_u", "holds"])
        assert not bool(summary.loc["L1_uq", "holds"])
        assert summary.loc["L1_uq1", "min"] == 1.0

    def test_should_measure_energy_contrast(self):
        """Relative spread of p·energy over resolved rows and the growth of q∫u^{q+1}."""
        table = synthetic_table(
            p=1.0,
            q=[8.0, 16.0, 32.0, 64.0],
            p_energy=[10.0, 4.0, 5.0, 6.0],
            L1_uq1=[1.0, 1.0, 1.0, 1.0],
            resolved=[True, True, True, False],
            converged=True,
        )
        contrast = energy_contrast(table)
        assert contrast.p_energy_min == 4.0
        assert contrast.p_energy_max == 5.0
        assert contrast.spread == pytest.approx(0.25)
        assert contrast.uq1_growth == pytest.approx(8.0)

    def test_should_leave_spread_undefined_without_resolved_rows(self):
        """No resolved rows with q ≥ q_min gives NaN."""
        table = synthetic_table(p=1.0, q=[2.0, 4.0], p_energy=1.0, L1_uq1=1.0, resolved=True, converged=True)
        assert math.isnan(energy_contrast(table).spread)
