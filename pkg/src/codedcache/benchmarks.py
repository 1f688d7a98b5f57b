"""Comparison placement policies.

MPFC (most popular file caching) raises the most popular files to a full
copy after the common floor allocation; EFC (equal file caching) advances
every file one decrement point per round-robin pass. Each comes in a
cost-free variant and an eviction variant for the average-delay-capped
scenario.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .delay import DelayLevels, average_rebuffer_delay, delay_levels
from .model import CachePlan, InfeasibleError
from .placement import (
    CostPlacementResult,
    DelayPlacementResult,
    _as_popularity,
    _prefix_cost_result,
    _result_from_counts,
    _search_largest_feasible_prefix,
)


def _floor_setup(
    popularity: Sequence[float],
    slots: int,
    budget: int,
    floor_level: int,
    levels: DelayLevels | None,
) -> tuple[np.ndarray, DelayLevels, int, int]:
    p = _as_popularity(popularity)
    if levels is None:
        levels = delay_levels(slots)
    if not 1 <= floor_level <= levels.level_count:
        raise ValueError(f"floor_level must lie in [1, {levels.level_count}]")
    floor_count = levels.fragment_counts[floor_level - 1]
    floor_cost = p.size * floor_count
    if budget < floor_cost:
        raise InfeasibleError(
            f"budget {budget} cannot cover the floor of {floor_count} segments "
            f"for {p.size} files",
            deficit=floor_cost - budget,
        )
    return p, levels, floor_count, int(budget) - floor_cost


def mpfc_delay_placement(
    popularity: Sequence[float],
    slots: int,
    budget: int,
    floor_level: int = 1,
    levels: DelayLevels | None = None,
) -> DelayPlacementResult:
    """Floor allocation, then full copies in popularity order; the remainder
    partially raises the next file."""
    p, levels, floor_count, remaining = _floor_setup(
        popularity, slots, budget, floor_level, levels
    )
    counts = np.full(p.size, floor_count, dtype=np.int64)
    full_raise = slots - floor_count
    if full_raise > 0:
        full_files = min(p.size, remaining // full_raise)
        counts[:full_files] = slots
        remainder = remaining - full_files * full_raise
        if full_files < p.size and remainder > 0:
            counts[full_files] += remainder
    exact = bool(np.isin(counts, levels.fragment_counts).all())
    return _result_from_counts(p, slots, levels, counts, exact=exact)


def efc_delay_placement(
    popularity: Sequence[float],
    slots: int,
    budget: int,
    floor_level: int = 1,
    levels: DelayLevels | None = None,
) -> DelayPlacementResult:
    """Floor allocation, then round-robin passes that lift every file to its
    next decrement point, most popular first; a pass that no longer fits
    advances a popularity prefix and grants the remainder partially."""
    p, levels, floor_count, remaining = _floor_setup(
        popularity, slots, budget, floor_level, levels
    )
    file_count = p.size
    m = np.asarray(levels.fragment_counts, dtype=np.int64)
    cursor = np.full(file_count, floor_level - 1, dtype=np.int64)
    partial = 0
    lifted = 0
    for level in range(floor_level - 1, levels.level_count - 1):
        step = int(m[level + 1] - m[level])
        if remaining >= file_count * step:
            cursor += 1
            remaining -= file_count * step
            continue
        lifted = remaining // step
        cursor[:lifted] += 1
        partial = remaining - lifted * step
        break
    counts = m[cursor].copy()
    exact = True
    if partial:
        counts[lifted] += partial
        exact = False
    return _result_from_counts(p, slots, levels, counts, exact=exact)


def mpfc_cost_placement(
    popularity: Sequence[float],
    slots: int,
    budget: int,
    floor_level: int = 1,
    max_avg_delay: float | None = None,
    levels: DelayLevels | None = None,
) -> CostPlacementResult:
    """Delay-capped MPFC: floor the largest affordable popularity prefix,
    then repeatedly evict the least popular cached file and spend the freed
    segments raising the most popular not-yet-full file toward a full copy."""
    p = _as_popularity(popularity)
    if levels is None:
        levels = delay_levels(slots)
    floor_count = levels.fragment_counts[floor_level - 1]
    if budget < floor_count:
        raise InfeasibleError(
            "budget cannot cache even a single file at the floor level",
            deficit=floor_count - budget,
        )
    if max_avg_delay is None:
        max_avg_delay = float(slots)
    cached = min(budget // floor_count, p.size)
    counts = np.zeros(p.size, dtype=np.int64)
    counts[:cached] = floor_count
    pool = int(budget) - cached * floor_count
    raise_ptr = 0

    def spend(pool: int) -> int:
        nonlocal raise_ptr
        while pool > 0 and raise_ptr < cached:
            need = slots - int(counts[raise_ptr])
            if need == 0:
                raise_ptr += 1
                continue
            grant = min(need, pool)
            counts[raise_ptr] += grant
            pool -= grant
        return pool

    pool = spend(pool)
    while average_rebuffer_delay(counts[:cached], p[:cached], slots) > max_avg_delay:
        if cached == 1:
            raise InfeasibleError(
                f"average-delay cap {max_avg_delay} unreachable even with one cached file"
            )
        cached -= 1
        pool += int(counts[cached])
        counts[cached] = 0
        raise_ptr = min(raise_ptr, cached)
        pool = spend(pool)
    return CostPlacementResult(
        plan=CachePlan(tuple(int(c) for c in counts)),
        cached_indices=tuple(range(cached)),
        theta=float(p[cached:].sum()),
        avg_delay=average_rebuffer_delay(counts, p, slots),
    )


def efc_cost_placement(
    popularity: Sequence[float],
    slots: int,
    budget: int,
    floor_level: int = 1,
    max_avg_delay: float | None = None,
    levels: DelayLevels | None = None,
) -> CostPlacementResult:
    """Delay-capped EFC: floor the largest affordable popularity prefix, run
    the round-robin allocation over it with the full budget, and evict the
    least popular cached file (re-running the round-robin) until the cap
    holds."""
    p = _as_popularity(popularity)
    if levels is None:
        levels = delay_levels(slots)
    floor_count = levels.fragment_counts[floor_level - 1]
    if budget < floor_count:
        raise InfeasibleError(
            "budget cannot cache even a single file at the floor level",
            deficit=floor_count - budget,
        )
    if max_avg_delay is None:
        max_avg_delay = float(slots)
    prefix_cap = min(budget // floor_count, p.size)

    def evaluate(prefix: int) -> DelayPlacementResult:
        return efc_delay_placement(p[:prefix], slots, budget, floor_level, levels)

    prefix, result = _search_largest_feasible_prefix(evaluate, prefix_cap, max_avg_delay)
    return _prefix_cost_result(p, prefix, result)
