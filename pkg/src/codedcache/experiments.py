"""Experiment grids and reporting.

Evaluates the proposed optimizer against the MPFC/EFC benchmarks over
(skew, cache-size) and (skew, delay-cap) grids, renders deterministic CSV,
and wraps single-point evaluations and session runs for the service layer.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .benchmarks import (
    efc_cost_placement,
    efc_delay_placement,
    mpfc_cost_placement,
    mpfc_delay_placement,
)
from .delay import cumulative_delay, delay_levels
from .model import InfeasibleError, make_fragmentation, segment_budget_from_ratio, zipf_popularity
from .placement import (
    CostPlacementResult,
    DelayPlacementResult,
    min_cost_placement,
    min_delay_placement,
    min_feasible_level,
)
from .simulate import _pattern_payload, generate_path, monte_carlo_delay, simulate_session
from .verification import SuiteResult, run_verification

DELAY_POLICIES = {
    "proposed": min_delay_placement,
    "mpfc": mpfc_delay_placement,
    "efc": efc_delay_placement,
}

COST_POLICIES = {
    "proposed": min_cost_placement,
    "mpfc": mpfc_cost_placement,
    "efc": efc_cost_placement,
}

DELAY_SWEEP_HEADER = "w,c_hat,policy,avg_delay,budget_segments,exact_termination,status"
COST_SWEEP_HEADER = "w,d_avg_max,policy,theta,avg_delay,cached_count,status"


def _fmt(value: float) -> str:
    return f"{value:.9g}"


@dataclass(frozen=True)
class DelaySweepRow:
    w: float
    c_hat: float
    policy: str
    avg_delay: float | None
    budget_segments: int
    exact_termination: bool | None
    status: str

    def to_csv(self) -> str:
        avg = _fmt(self.avg_delay) if self.avg_delay is not None else ""
        exact = (
            ""
            if self.exact_termination is None
            else ("true" if self.exact_termination else "false")
        )
        return (
            f"{_fmt(self.w)},{_fmt(self.c_hat)},{self.policy},{avg},"
            f"{self.budget_segments},{exact},{self.status}"
        )


@dataclass(frozen=True)
class CostSweepRow:
    w: float
    d_avg_max: float
    policy: str
    theta: float | None
    avg_delay: float | None
    cached_count: int | None
    status: str

    def to_csv(self) -> str:
        theta = _fmt(self.theta) if self.theta is not None else ""
        avg = _fmt(self.avg_delay) if self.avg_delay is not None else ""
        cached = str(self.cached_count) if self.cached_count is not None else ""
        return (
            f"{_fmt(self.w)},{_fmt(self.d_avg_max)},{self.policy},{theta},"
            f"{avg},{cached},{self.status}"
        )


def rows_to_csv(header: str, rows: Sequence[DelaySweepRow | CostSweepRow]) -> str:
    return "\n".join([header, *(row.to_csv() for row in rows)]) + "\n"


def run_delay_sweep(
    library_size: int,
    slots: int,
    skews: Sequence[float],
    c_hats: Sequence[float],
    max_file_delay: int,
    policies: Sequence[str] = ("proposed", "mpfc", "efc"),
    strict_floor: bool = False,
) -> list[DelaySweepRow]:
    """Average stall total per (skew, cache size, policy) cell."""
    unknown = set(policies) - set(DELAY_POLICIES)
    if unknown:
        raise ValueError(f"unknown policies: {sorted(unknown)}")
    levels = delay_levels(slots)
    rows = []
    for w in sorted(skews):
        popularity = zipf_popularity(library_size, w)
        floor_level = min_feasible_level(levels, max_file_delay, strict=strict_floor)
        for c_hat in sorted(c_hats):
            budget = segment_budget_from_ratio(c_hat, library_size, slots)
            for policy in sorted(policies):
                try:
                    outcome = DELAY_POLICIES[policy](
                        popularity, slots, budget, floor_level, levels
                    )
                    rows.append(
                        DelaySweepRow(
                            w=w,
                            c_hat=c_hat,
                            policy=policy,
                            avg_delay=outcome.avg_delay,
                            budget_segments=budget,
                            exact_termination=outcome.exact_termination,
                            status="ok",
                        )
                    )
                except InfeasibleError:
                    rows.append(
                        DelaySweepRow(
                            w=w,
                            c_hat=c_hat,
                            policy=policy,
                            avg_delay=None,
                            budget_segments=budget,
                            exact_termination=None,
                            status="infeasible",
                        )
                    )
    return rows


def run_cost_sweep(
    library_size: int,
    slots: int,
    skews: Sequence[float],
    d_avg_maxes: Sequence[float],
    budget: int,
    max_file_delay: int,
    policies: Sequence[str] = ("proposed", "mpfc", "efc"),
    strict_floor: bool = False,
) -> list[CostSweepRow]:
    """Offload mass per (skew, average-delay cap, policy) cell at a fixed budget."""
    unknown = set(policies) - set(COST_POLICIES)
    if unknown:
        raise ValueError(f"unknown policies: {sorted(unknown)}")
    levels = delay_levels(slots)
    rows = []
    for w in sorted(skews):
        popularity = zipf_popularity(library_size, w)
        floor_level = min_feasible_level(levels, max_file_delay, strict=strict_floor)
        for cap in sorted(d_avg_maxes):
            for policy in sorted(policies):
                try:
                    outcome = COST_POLICIES[policy](
                        popularity, slots, budget, floor_level, cap, levels
                    )
                    rows.append(
                        CostSweepRow(
                            w=w,
                            d_avg_max=cap,
                            policy=policy,
                            theta=outcome.theta,
                            avg_delay=outcome.avg_delay,
                            cached_count=len(outcome.cached_indices),
                            status="ok",
                        )
                    )
                except InfeasibleError:
                    rows.append(
                        CostSweepRow(
                            w=w,
                            d_avg_max=cap,
                            policy=policy,
                            theta=None,
                            avg_delay=None,
                            cached_count=None,
                            status="infeasible",
                        )
                    )
    return rows


def evaluate_delay_point(
    library_size: int,
    slots: int,
    skew: float,
    budget: int,
    max_file_delay: int,
    policies: Sequence[str] = ("proposed", "mpfc", "efc"),
    strict_floor: bool = False,
) -> dict[str, DelayPlacementResult]:
    """One cache size, every requested policy."""
    popularity = zipf_popularity(library_size, skew)
    levels = delay_levels(slots)
    floor_level = min_feasible_level(levels, max_file_delay, strict=strict_floor)
    return {
        policy: DELAY_POLICIES[policy](popularity, slots, budget, floor_level, levels)
        for policy in policies
    }


def evaluate_cost_point(
    library_size: int,
    slots: int,
    skew: float,
    budget: int,
    max_file_delay: int,
    max_avg_delay: float,
    policies: Sequence[str] = ("proposed", "mpfc", "efc"),
    strict_floor: bool = False,
) -> dict[str, CostPlacementResult]:
    """One delay cap, every requested policy."""
    popularity = zipf_popularity(library_size, skew)
    levels = delay_levels(slots)
    floor_level = min_feasible_level(levels, max_file_delay, strict=strict_floor)
    return {
        policy: COST_POLICIES[policy](
            popularity, slots, budget, floor_level, max_avg_delay, levels
        )
        for policy in policies
    }


def normalized_cached_delay(outcome: CostPlacementResult, popularity: np.ndarray, slots: int) -> float | None:
    """Average stall total renormalized by the cached popularity mass.

    Reporting aid only; the optimizer constraint uses the unnormalized sum.
    """
    cached_mass = float(np.sum(popularity[list(outcome.cached_indices)]))
    if cached_mass <= 0:
        return None
    return outcome.avg_delay / cached_mass


@dataclass(frozen=True)
class SessionExperiment:
    fragment_sizes: tuple[int, ...]
    formula_delay: int
    trials: int
    mean_delay: float
    min_delay: int
    max_delay: int
    deltas: tuple[int, ...]
    payload_matches: bool | None
    trace_lines: tuple[str, ...] | None


def run_session_experiment(
    sbs_count: int,
    slots: int,
    fragments: int,
    seed: int = 0,
    trials: int = 1,
    with_real_coding: bool = False,
    slot_bits: int = 64,
) -> SessionExperiment:
    """Simulate sessions for one file split into ``fragments`` fragments."""
    sizes = make_fragmentation(slots, fragments)
    rng = np.random.default_rng(seed)
    first_path = generate_path(sbs_count, slots, rng)
    first = simulate_session(
        sizes, first_path, with_real_coding=with_real_coding, slot_bits=slot_bits
    )
    payload_matches = None
    if with_real_coding:
        payload_matches = first.displayed_payload == _pattern_payload(
            slots * (slot_bits // 8)
        )
    stats = monte_carlo_delay(sizes, sbs_count, trials, np.random.default_rng(seed))
    return SessionExperiment(
        fragment_sizes=sizes,
        formula_delay=cumulative_delay(sizes),
        trials=trials,
        mean_delay=stats.mean,
        min_delay=stats.min,
        max_delay=stats.max,
        deltas=first.deltas,
        payload_matches=payload_matches,
        trace_lines=tuple(first.to_lines()) if trials == 1 else None,
    )


def verification_report(quick: bool = False) -> tuple[bool, list[SuiteResult]]:
    suites = run_verification(quick=quick)
    return all(s.passed for s in suites), suites
