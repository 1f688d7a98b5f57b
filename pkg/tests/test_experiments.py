import pytest

from codedcache.experiments import (
    COST_SWEEP_HEADER,
    DELAY_SWEEP_HEADER,
    evaluate_cost_point,
    normalized_cached_delay,
    rows_to_csv,
    run_cost_sweep,
    run_delay_sweep,
    run_session_experiment,
)
from codedcache.model import zipf_popularity
from codedcache.placement import min_delay_placement


class TestDelaySweep:
    def test_row_grid_shape_and_order(self):
        rows = run_delay_sweep(5, 10, [0.9, 0.7], [0.5, 0.3], 10)
        assert len(rows) == 2 * 2 * 3
        keys = [(r.w, r.c_hat, r.policy) for r in rows]
        assert keys == sorted(keys)

    def test_proposed_row_matches_direct_call(self):
        rows = run_delay_sweep(3, 10, [0.0], [7 / 30 + 1e-12], 10)
        proposed = next(r for r in rows if r.policy == "proposed")
        direct = min_delay_placement(zipf_popularity(3, 0.0), 10, 7)
        assert proposed.avg_delay == direct.avg_delay
        assert proposed.budget_segments == 7

    def test_full_cache_row_hits_floor_delay(self):
        rows = run_delay_sweep(4, 10, [0.8], [1.0], 10)
        assert all(r.avg_delay == pytest.approx(1.0, abs=1e-9) for r in rows)

    def test_infeasible_cells_are_flagged_and_run_continues(self):
        rows = run_delay_sweep(10, 10, [0.8], [0.05, 1.0], 10)
        infeasible = [r for r in rows if r.c_hat == 0.05]
        feasible = [r for r in rows if r.c_hat == 1.0]
        assert all(r.status == "infeasible" and r.avg_delay is None for r in infeasible)
        assert all(r.status == "ok" for r in feasible)

    def test_strict_floor_changes_feasibility(self):
        relaxed = run_delay_sweep(10, 10, [0.8], [0.1], 10)
        strict = run_delay_sweep(10, 10, [0.8], [0.1], 10, strict_floor=True)
        assert all(r.status == "ok" for r in relaxed)
        assert all(r.status == "infeasible" for r in strict)

    def test_unknown_policy_rejected(self):
        with pytest.raises(ValueError, match="unknown policies"):
            run_delay_sweep(4, 10, [0.8], [0.5], 10, policies=("lru",))


class TestCostSweep:
    def test_rows_and_monotone_theta(self):
        rows = run_cost_sweep(30, 10, [0.9], [2.0, 4.0, 8.0], 24, 10)
        assert len(rows) == 9
        by_policy = {}
        for row in rows:
            by_policy.setdefault(row.policy, []).append((row.d_avg_max, row.theta))
        for series in by_policy.values():
            thetas = [t for _, t in sorted(series)]
            assert all(a >= b - 1e-12 for a, b in zip(thetas, thetas[1:]))

    def test_proposed_never_worse(self):
        rows = run_cost_sweep(30, 10, [0.8, 1.0], [2.0, 5.0], 24, 10)
        cells = {}
        for row in rows:
            cells.setdefault((row.w, row.d_avg_max), {})[row.policy] = row.theta
        for values in cells.values():
            assert values["proposed"] <= min(values["mpfc"], values["efc"]) + 1e-12


class TestCsvRendering:
    def test_delay_csv_header_and_formatting(self):
        rows = run_delay_sweep(5, 10, [0.75], [0.3], 10)
        csv = rows_to_csv(DELAY_SWEEP_HEADER, rows)
        lines = csv.splitlines()
        assert lines[0] == "w,c_hat,policy,avg_delay,budget_segments,exact_termination,status"
        assert lines[1].startswith("0.75,0.3,efc,")
        assert csv.endswith("\n")

    def test_cost_csv_header(self):
        rows = run_cost_sweep(5, 10, [0.75], [5.0], 10, 10)
        csv = rows_to_csv(COST_SWEEP_HEADER, rows)
        assert csv.splitlines()[0] == "w,d_avg_max,policy,theta,avg_delay,cached_count,status"

    def test_nine_significant_digits(self):
        rows = run_delay_sweep(7, 10, [1 / 3], [0.5], 10)
        csv = rows_to_csv(DELAY_SWEEP_HEADER, rows)
        assert "0.333333333," in csv

    def test_identical_inputs_identical_bytes(self):
        first = rows_to_csv(DELAY_SWEEP_HEADER, run_delay_sweep(20, 10, [0.9], [0.2, 0.4], 10))
        second = rows_to_csv(DELAY_SWEEP_HEADER, run_delay_sweep(20, 10, [0.9], [0.2, 0.4], 10))
        assert first == second


class TestNormalizedDelay:
    def test_reporting_column_only_divides_by_cached_mass(self):
        popularity = zipf_popularity(10, 1.0)
        outcomes = evaluate_cost_point(10, 10, 1.0, 6, 10, 5.0)
        outcome = outcomes["proposed"]
        normalized = normalized_cached_delay(outcome, popularity, 10)
        cached_mass = popularity[: len(outcome.cached_indices)].sum()
        assert normalized == pytest.approx(outcome.avg_delay / cached_mass)
        assert normalized >= outcome.avg_delay


class TestSessionExperiment:
    def test_trace_only_for_single_trial(self):
        single = run_session_experiment(20, 10, 3, seed=1, trials=1)
        many = run_session_experiment(20, 10, 3, seed=1, trials=5)
        assert single.trace_lines
        assert many.trace_lines is None
        assert single.formula_delay == 4
        assert many.min_delay == many.max_delay == 4

    def test_real_coding_flag(self):
        result = run_session_experiment(
            12, 6, 2, seed=3, trials=2, with_real_coding=True, slot_bits=64
        )
        assert result.payload_matches is True
