"""Cache placement optimizers.

The delay minimizer greedily spends segment budget on the file whose
piecewise-linear delay curve currently descends fastest; the cost minimizer
caches a popularity prefix and shrinks it until the average-delay cap holds.
Exhaustive oracles for both problems back the test suite.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .delay import (
    WEIGHTED_DELAY_TOL,
    DelayLevels,
    average_rebuffer_delay,
    delay_levels,
    piecewise_values,
)
from .model import CachePlan, InfeasibleError, InstanceTooLargeError

# Below this many cached files the eviction loop runs literally, one file per
# iteration; above it a bisection finds the same stopping point (the average
# delay of the greedy allocation is non-decreasing in the prefix length:
# adding a file both adds its own stall term and starves the others).
_LITERAL_EVICTION_LIMIT = 256

_ENUMERATION_LIMIT = 5_000_000


@dataclass(frozen=True)
class DelayPlacementResult:
    """Outcome of a delay-minimizing allocation.

    ``exact_termination`` is true when every file ends on a decrement point,
    in which case the realized average delay coincides with its
    piecewise-linear lower bound.
    """

    plan: CachePlan
    avg_delay: float
    approx_avg_delay: float
    exact_termination: bool
    budget_used: int

    def __post_init__(self):
        if self.approx_avg_delay > self.avg_delay + WEIGHTED_DELAY_TOL:
            raise ValueError("piecewise relaxation must lower-bound the realized delay")
        if self.exact_termination and (
            abs(self.avg_delay - self.approx_avg_delay) > WEIGHTED_DELAY_TOL
        ):
            raise ValueError("exact termination implies equal realized and relaxed delay")


@dataclass(frozen=True)
class CostPlacementResult:
    """Outcome of a cost-minimizing allocation: the cached prefix, the
    popularity mass ``theta`` that falls back to the macro cell, and the
    realized average delay of the cached files."""

    plan: CachePlan
    cached_indices: tuple[int, ...]
    theta: float
    avg_delay: float


def min_feasible_level(levels: DelayLevels, max_delay: float, strict: bool = False) -> int:
    """Smallest level whose stall total meets the per-file delay cap.

    Non-strict comparison by default; ``strict`` switches to a strictly-less
    reading, which can make a cap of one slot unsatisfiable.
    """
    for idx, delay in enumerate(levels.delays):
        if (delay < max_delay) if strict else (delay <= max_delay):
            return idx + 1
    raise InfeasibleError(
        f"no delay level satisfies the cap {max_delay} (strict={strict})"
    )


def _as_popularity(popularity: Sequence[float]) -> np.ndarray:
    p = np.asarray(popularity, dtype=np.float64)
    if p.ndim != 1 or p.size < 1:
        raise ValueError("popularity must be a nonempty vector")
    if np.any(p < 0):
        raise ValueError("popularity must be nonnegative")
    return p


def _result_from_counts(
    p: np.ndarray,
    slots: int,
    levels: DelayLevels,
    counts: np.ndarray,
    exact: bool,
    approx: float | None = None,
) -> DelayPlacementResult:
    avg = average_rebuffer_delay(counts, p, slots)
    if approx is None:
        approx = float(np.dot(p, piecewise_values(levels, counts)))
    return DelayPlacementResult(
        plan=CachePlan(tuple(int(c) for c in counts)),
        avg_delay=avg,
        approx_avg_delay=approx,
        exact_termination=exact,
        budget_used=int(counts.sum()),
    )


def _step_profile(
    levels: DelayLevels, floor_level: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, bool]:
    """Step sizes and slope magnitudes from the floor level upward.

    ``convex`` reports whether the magnitudes are non-increasing; the step
    function's decrement-point polyline is not convex for every slot count
    (the first exception is 36 slots), so callers that rely on it must
    check.
    """
    m = np.asarray(levels.fragment_counts, dtype=np.int64)
    d = np.asarray(levels.delays, dtype=np.int64)
    level_count = levels.level_count
    step_sizes = m[floor_level:] - m[floor_level - 1 : level_count - 1]
    step_rates = (d[floor_level - 1 : level_count - 1] - d[floor_level:]) / step_sizes
    convex = bool(np.all(step_rates[:-1] >= step_rates[1:])) if step_rates.size else True
    return m, d, step_sizes, step_rates, convex


def _greedy_sorted_walk(
    p: np.ndarray,
    slots: int,
    remaining: int,
    floor_level: int,
    levels: DelayLevels,
    m: np.ndarray,
    d: np.ndarray,
    step_sizes: np.ndarray,
    step_rates: np.ndarray,
) -> DelayPlacementResult:
    """Greedy via one global sort of all (file, level-step) pairs.

    Valid when each file's own steps come in non-increasing slope order:
    the descending sort with (slope, file, step) keys then takes steps
    exactly as the stepwise argmax would, including the lowest-index
    tie-break and the final partial grant.
    """
    file_count = p.size
    steps_per_file = step_sizes.size
    weighted = np.multiply.outer(p, step_rates).ravel()
    file_idx = np.repeat(np.arange(file_count), steps_per_file)
    step_idx = np.tile(np.arange(steps_per_file), file_count)
    order = np.lexsort((step_idx, file_idx, -weighted))
    cum_cost = np.cumsum(step_sizes[step_idx[order]])
    taken = int(np.searchsorted(cum_cost, remaining, side="right"))
    spent = int(cum_cost[taken - 1]) if taken else 0
    leftover = remaining - spent

    advances = np.bincount(file_idx[order[:taken]], minlength=file_count)
    cursor = (floor_level - 1) + advances
    counts = m[cursor].copy()
    approx = float(np.dot(p, d[cursor].astype(np.float64)))
    exact = True
    if leftover and taken < order.size:
        partial = order[taken]
        counts[file_idx[partial]] += leftover
        approx -= float(weighted[partial]) * leftover
        exact = False
    return _result_from_counts(p, slots, levels, counts, exact=exact, approx=approx)


def _greedy_stepwise(
    p: np.ndarray,
    slots: int,
    remaining: int,
    floor_level: int,
    levels: DelayLevels,
    m: np.ndarray,
    d: np.ndarray,
    step_sizes: np.ndarray,
    step_rates: np.ndarray,
) -> DelayPlacementResult:
    """Literal stepwise greedy: advance the file whose current level-step
    has the steepest weighted slope, ties to the lower index."""
    file_count = p.size
    steps_per_file = step_sizes.size
    cursor = np.full(file_count, floor_level - 1, dtype=np.int64)
    counts = m[cursor].copy()
    heap = [(-p[k] * step_rates[0], k, 0) for k in range(file_count)]
    heapq.heapify(heap)
    approx_partial = 0.0
    exact = True
    while remaining > 0 and heap:
        _, file, step = heapq.heappop(heap)
        size = int(step_sizes[step])
        if remaining >= size:
            remaining -= size
            cursor[file] += 1
            counts[file] = m[cursor[file]]
            if step + 1 < steps_per_file:
                heapq.heappush(heap, (-p[file] * step_rates[step + 1], file, step + 1))
        else:
            counts[file] += remaining
            approx_partial = p[file] * step_rates[step] * remaining
            remaining = 0
            exact = False
    approx = float(np.dot(p, d[cursor].astype(np.float64)) - approx_partial)
    return _result_from_counts(p, slots, levels, counts, exact=exact, approx=approx)


def min_delay_placement(
    popularity: Sequence[float],
    slots: int,
    budget: int,
    floor_level: int = 1,
    levels: DelayLevels | None = None,
) -> DelayPlacementResult:
    """Greedy average-delay minimization under a segment budget.

    Every file starts at the floor level's fragment count. Budget then goes,
    one level-step at a time, to the file with the steepest weighted slope
    (ties to the lower index). A step that no longer fits is granted
    partially from the remaining budget, which ends the run between
    decrement points.
    """
    p = _as_popularity(popularity)
    file_count = p.size
    if levels is None:
        levels = delay_levels(slots)
    level_count = levels.level_count
    if not 1 <= floor_level <= level_count:
        raise ValueError(f"floor_level must lie in [1, {level_count}]")
    m, d, step_sizes, step_rates, convex = _step_profile(levels, floor_level)
    floor_count = int(m[floor_level - 1])
    floor_cost = file_count * floor_count
    if budget < floor_cost:
        raise InfeasibleError(
            f"budget {budget} cannot cover the floor of {floor_count} segments "
            f"for {file_count} files",
            deficit=floor_cost - budget,
        )
    remaining = int(budget) - floor_cost
    if step_sizes.size == 0 or remaining == 0:
        counts = np.full(file_count, floor_count, dtype=np.int64)
        return _result_from_counts(p, slots, levels, counts, exact=True)
    walk = _greedy_sorted_walk if convex else _greedy_stepwise
    return walk(p, slots, remaining, floor_level, levels, m, d, step_sizes, step_rates)


def exact_completion_pad(result: DelayPlacementResult, levels: DelayLevels) -> int:
    """Extra segments that would carry an interrupted run to its next
    decrement point (zero if it already ended on one); at most half a file."""
    if result.exact_termination:
        return 0
    m = np.asarray(levels.fragment_counts, dtype=np.int64)
    counts = np.asarray(result.plan.fragment_counts, dtype=np.int64)
    off_point = ~np.isin(counts, m)
    (positions,) = np.nonzero(off_point)
    if positions.size != 1:
        raise ValueError("expected exactly one file between decrement points")
    count = counts[positions[0]]
    next_point = m[np.searchsorted(m, count, side="right")]
    return int(next_point - count)


def brute_force_min_delay(
    popularity: Sequence[float],
    slots: int,
    budget: int,
    floor_level: int = 1,
    levels: DelayLevels | None = None,
) -> DelayPlacementResult:
    """Exhaustive delay minimizer over all per-file fragment counts.

    Test oracle only: guarded to small instances. Ties resolve to the
    lexicographically smallest count vector.
    """
    p = _as_popularity(popularity)
    file_count = p.size
    if file_count > 6 or budget > 40:
        raise InstanceTooLargeError("oracle guard: needs files <= 6 and budget <= 40")
    if levels is None:
        levels = delay_levels(slots)
    floor_count = levels.fragment_counts[floor_level - 1]
    floor_cost = file_count * floor_count
    if budget < floor_cost:
        raise InfeasibleError(
            "budget cannot cover the per-file floor", deficit=floor_cost - budget
        )
    per_file_cap = min(slots, budget - (file_count - 1) * floor_count)
    choices = np.arange(floor_count, per_file_cap + 1, dtype=np.int64)
    if choices.size**file_count > _ENUMERATION_LIMIT:
        raise InstanceTooLargeError("oracle guard: enumeration too large")
    grids = np.meshgrid(*([choices] * file_count), indexing="ij")
    combos = np.stack([g.ravel() for g in grids], axis=-1)
    combos = combos[combos.sum(axis=1) <= budget]
    stall = -(-slots // combos)
    avg = stall.astype(np.float64) @ p
    best = int(np.argmin(avg))
    counts = combos[best]
    exact = bool(np.isin(counts, levels.fragment_counts).all())
    return _result_from_counts(p, slots, levels, counts, exact=exact)


def _search_largest_feasible_prefix(
    evaluate: Callable[[int], DelayPlacementResult],
    upper: int,
    max_avg_delay: float,
    allow_bisection: bool = True,
) -> tuple[int, DelayPlacementResult]:
    """Largest prefix length in [1, upper] whose allocation meets the cap.

    Mirrors the evict-one-at-a-time loop; the bisection shortcut is valid
    when the evaluated average delay is non-decreasing in the prefix length
    (adding a file adds its own stall term and can only starve the others).
    """
    result = evaluate(upper)
    if result.avg_delay <= max_avg_delay:
        return upper, result
    if upper <= _LITERAL_EVICTION_LIMIT or not allow_bisection:
        for size in range(upper - 1, 0, -1):
            result = evaluate(size)
            if result.avg_delay <= max_avg_delay:
                return size, result
        raise InfeasibleError(
            f"average-delay cap {max_avg_delay} unreachable even with one cached file"
        )
    result = evaluate(1)
    if result.avg_delay > max_avg_delay:
        raise InfeasibleError(
            f"average-delay cap {max_avg_delay} unreachable even with one cached file"
        )
    low, high = 1, upper - 1
    while low < high:
        mid = (low + high + 1) // 2
        if evaluate(mid).avg_delay <= max_avg_delay:
            low = mid
        else:
            high = mid - 1
    return low, evaluate(low)


def _prefix_cost_result(
    p: np.ndarray, prefix: int, prefix_result: DelayPlacementResult
) -> CostPlacementResult:
    counts = np.zeros(p.size, dtype=np.int64)
    counts[:prefix] = prefix_result.plan.fragment_counts
    return CostPlacementResult(
        plan=CachePlan(tuple(int(c) for c in counts)),
        cached_indices=tuple(range(prefix)),
        theta=float(p[prefix:].sum()),
        avg_delay=prefix_result.avg_delay,
    )


def min_cost_placement(
    popularity: Sequence[float],
    slots: int,
    budget: int,
    floor_level: int = 1,
    max_avg_delay: float | None = None,
    levels: DelayLevels | None = None,
) -> CostPlacementResult:
    """Minimize the macro-cell offload mass under an average-delay cap.

    Caches as many of the most popular files as the budget's floor
    allocation allows, optimizes the delay allocation over that prefix with
    the full budget, and evicts the least popular cached file (re-optimizing
    each time) until the cap holds.
    """
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
    # the monotone-prefix argument behind the bisection needs convex steps
    convex = _step_profile(levels, floor_level)[4]

    def evaluate(prefix: int) -> DelayPlacementResult:
        return min_delay_placement(p[:prefix], slots, budget, floor_level, levels)

    prefix, result = _search_largest_feasible_prefix(
        evaluate, prefix_cap, max_avg_delay, allow_bisection=convex
    )
    return _prefix_cost_result(p, prefix, result)


def brute_force_min_cost(
    popularity: Sequence[float],
    slots: int,
    budget: int,
    floor_level: int = 1,
    max_avg_delay: float | None = None,
    levels: DelayLevels | None = None,
) -> CostPlacementResult:
    """Exhaustive offload-cost minimizer (test oracle, guarded small).

    Enumerates every cached subset and allocation jointly by letting each
    file take either zero segments or any count from the floor upward.
    Minimal theta wins; equal theta resolves to the lower average delay,
    then to the lexicographically smallest vector. The delay cap gets a
    1e-9 slack so boundary instances never look infeasible to the oracle
    while feasible to the greedy.
    """
    p = _as_popularity(popularity)
    file_count = p.size
    if file_count > 6 or budget > 40:
        raise InstanceTooLargeError("oracle guard: needs files <= 6 and budget <= 40")
    if levels is None:
        levels = delay_levels(slots)
    if max_avg_delay is None:
        max_avg_delay = float(slots)
    floor_count = levels.fragment_counts[floor_level - 1]
    per_file_cap = min(slots, budget)
    choices = np.concatenate(
        [[0], np.arange(floor_count, per_file_cap + 1, dtype=np.int64)]
    )
    if choices.size**file_count > _ENUMERATION_LIMIT:
        raise InstanceTooLargeError("oracle guard: enumeration too large")
    grids = np.meshgrid(*([choices] * file_count), indexing="ij")
    combos = np.stack([g.ravel() for g in grids], axis=-1)
    combos = combos[combos.sum(axis=1) <= budget]
    stall = np.zeros(combos.shape, dtype=np.float64)
    cached = combos > 0
    stall[cached] = -(-slots // combos[cached])
    avg = stall @ p
    theta = (~cached).astype(np.float64) @ p
    feasible = avg <= max_avg_delay + 1e-9
    if not feasible.any():
        raise InfeasibleError("no allocation satisfies the average-delay cap")
    combos, avg, theta = combos[feasible], avg[feasible], theta[feasible]
    best_theta = theta.min()
    tied = theta == best_theta
    combos, avg = combos[tied], avg[tied]
    best = int(np.argmin(avg))
    counts = combos[best]
    return CostPlacementResult(
        plan=CachePlan(tuple(int(c) for c in counts)),
        cached_indices=tuple(int(k) for k in np.nonzero(counts)[0]),
        theta=float(best_theta),
        avg_delay=average_rebuffer_delay(counts, p, slots),
    )
