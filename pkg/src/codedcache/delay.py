"""Re-buffering delay model.

Implements the per-fragment stall recursion, its closed form (the session
stall total equals the display duration of the largest fragment), and the
stepwise delay-versus-cache-size tradeoff that drives the placement
optimizers.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

WEIGHTED_DELAY_TOL = 1e-9


def _check_sizes(fragment_sizes: Sequence[int]) -> list[int]:
    sizes = [int(s) for s in fragment_sizes]
    if not sizes:
        raise ValueError("fragment_sizes must be nonempty")
    if any(s < 1 for s in sizes):
        raise ValueError("fragment sizes must be positive")
    return sizes


@dataclass(frozen=True)
class RebufferResult:
    """Per-fragment stall durations and their session total, in slots."""

    deltas: tuple[int, ...]
    cumulative: int

    def __post_init__(self):
        if self.cumulative != sum(self.deltas):
            raise ValueError("cumulative must equal the sum of the deltas")


def rebuffer_sequence(fragment_sizes: Sequence[int]) -> RebufferResult:
    """Stall durations via the running-sum recursion (O(fragments)).

    The m-th stall is ``max(d_m - sum of earlier stalls, 0)``; the first
    stall equals the first fragment's display duration.
    """
    sizes = _check_sizes(fragment_sizes)
    deltas = []
    stalled = 0
    for size in sizes:
        delta = max(size - stalled, 0)
        deltas.append(delta)
        stalled += delta
    return RebufferResult(deltas=tuple(deltas), cumulative=stalled)


def rebuffer_timeline(fragment_sizes: Sequence[int]) -> RebufferResult:
    """Stall durations via explicit download/playback-start timestamps.

    Equivalent to :func:`rebuffer_sequence`; kept as an independent route for
    testing. Download of fragment m completes at the sum of the first m
    display durations; its playback starts once all earlier fragments have
    been displayed, stalls included.
    """
    sizes = _check_sizes(fragment_sizes)
    deltas = []
    download_done = 0
    play_start = 0
    for size in sizes:
        download_done += size
        deltas.append(max(download_done - play_start, 0))
        play_start += deltas[-1] + size
    return RebufferResult(deltas=tuple(deltas), cumulative=sum(deltas))


def cumulative_delay(fragment_sizes: Sequence[int]) -> int:
    """Session stall total: the display duration of the largest fragment."""
    return max(_check_sizes(fragment_sizes))


def min_rebuffer_delay(slots: int, fragments: int) -> int:
    """Least achievable session stall when a file of ``slots`` segments is
    split into ``fragments`` near-equal fragments: ceil(slots / fragments)."""
    if slots < 1:
        raise ValueError("slots must be at least 1")
    if not 1 <= fragments <= slots:
        raise ValueError(f"fragments must lie in [1, {slots}], got {fragments}")
    return -(-slots // fragments)


@dataclass(frozen=True)
class DelayLevels:
    """The distinct values of the delay-versus-fragments step function.

    ``delays`` lists each achievable stall total in decreasing order and
    ``fragment_counts`` the smallest fragment count achieving it; the last
    entry is always (1, slots).
    """

    slots: int
    delays: tuple[int, ...]
    fragment_counts: tuple[int, ...]

    def __post_init__(self):
        d, m = self.delays, self.fragment_counts
        if len(d) != len(m) or not d:
            raise ValueError("delays and fragment_counts must be nonempty and parallel")
        if any(d[i] <= d[i + 1] for i in range(len(d) - 1)):
            raise ValueError("delays must be strictly decreasing")
        if any(m[i] >= m[i + 1] for i in range(len(m) - 1)):
            raise ValueError("fragment_counts must be strictly increasing")
        if m[0] != 1 or d[-1] != 1 or m[-1] != self.slots:
            raise ValueError("levels must start at one fragment and end at one slot")
        for delay, count in zip(d, m):
            if min_rebuffer_delay(self.slots, count) != delay:
                raise ValueError(f"inconsistent level ({delay}, {count})")
            if count > 1 and min_rebuffer_delay(self.slots, count - 1) == delay:
                raise ValueError(f"fragment count {count} is not minimal for {delay}")

    @property
    def level_count(self) -> int:
        return len(self.delays)

    def level_for_count(self, fragments: int) -> int:
        """1-based level whose span [m_l, m_{l+1}) contains ``fragments``."""
        if not 1 <= fragments <= self.slots:
            raise ValueError(f"fragments must lie in [1, {self.slots}]")
        return int(np.searchsorted(self.fragment_counts, fragments, side="right"))


def delay_levels(slots: int) -> DelayLevels:
    """Scan fragment counts 1..slots and record each new stall value."""
    if slots < 1:
        raise ValueError("slots must be at least 1")
    delays: list[int] = []
    counts: list[int] = []
    for fragments in range(1, slots + 1):
        delay = min_rebuffer_delay(slots, fragments)
        if not delays or delay != delays[-1]:
            delays.append(delay)
            counts.append(fragments)
    return DelayLevels(slots=slots, delays=tuple(delays), fragment_counts=tuple(counts))


def level_slope(popularity: float, levels: DelayLevels, level: int) -> float:
    """Weighted delay change per extra cached segment from ``level`` to the
    next one; negative for positive popularity, and steepest at low levels."""
    if not 1 <= level <= levels.level_count - 1:
        raise ValueError(f"level must lie in [1, {levels.level_count - 1}]: no next level")
    delta_d = levels.delays[level] - levels.delays[level - 1]
    delta_m = levels.fragment_counts[level] - levels.fragment_counts[level - 1]
    return popularity * delta_d / delta_m


def piecewise_values(levels: DelayLevels, fragment_counts: np.ndarray) -> np.ndarray:
    """Unweighted piecewise-linear lower bound of the stall-vs-fragments step
    function, evaluated at each entry of ``fragment_counts``.

    Exact at every decrement point, a chord (hence a lower bound) in between.
    """
    counts = np.asarray(fragment_counts, dtype=np.int64)
    if counts.size and (counts.min() < 1 or counts.max() > levels.slots):
        raise ValueError(f"fragment counts must lie in [1, {levels.slots}]")
    m = np.asarray(levels.fragment_counts, dtype=np.int64)
    d = np.asarray(levels.delays, dtype=np.float64)
    idx = np.searchsorted(m, counts, side="right") - 1
    values = d[idx].copy()
    inside = counts > m[idx]
    if np.any(inside):
        j = idx[inside]
        slope = (d[j + 1] - d[j]) / (m[j + 1] - m[j])
        values[inside] += slope * (counts[inside] - m[j])
    return values


def piecewise_delay(popularity: float, levels: DelayLevels, fragments: int) -> float:
    """Popularity-weighted value of the piecewise-linear relaxation."""
    return popularity * float(piecewise_values(levels, np.array([fragments]))[0])


def average_rebuffer_delay(
    fragment_counts: Sequence[int], popularity: Sequence[float], slots: int
) -> float:
    """Popularity-weighted stall total over the cached files.

    Uncached files (count zero) contribute nothing here; their traffic is
    accounted separately as offload cost.
    """
    counts = np.asarray(fragment_counts, dtype=np.int64)
    weights = np.asarray(popularity, dtype=np.float64)
    if counts.shape != weights.shape:
        raise ValueError("fragment_counts and popularity must have equal length")
    if counts.size and (counts.min() < 0 or counts.max() > slots):
        raise ValueError(f"fragment counts must lie in [0, {slots}]")
    delays = np.zeros(counts.shape, dtype=np.float64)
    cached = counts > 0
    delays[cached] = -(-slots // counts[cached])
    return float(np.dot(weights, delays))
