"""Core system model: network configuration, video library, fragmentation,
and per-SBS cache plans shared by the optimizer, coder, and simulator."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

POPULARITY_SUM_TOL = 1e-12

# Guard against float round-off when a budget is derived from a product like
# c_hat * K * T (0.29 * 100 is 28.999999999999996 in binary).
_BUDGET_EPS = 1e-9


class InfeasibleError(ValueError):
    """A requested allocation cannot be satisfied.

    ``deficit`` carries the number of missing segments when the failure is a
    cache budget that cannot cover the mandatory per-file floor.
    """

    def __init__(self, message: str, deficit: int = 0):
        super().__init__(message)
        self.deficit = deficit


class InstanceTooLargeError(ValueError):
    """An exhaustive-search helper was asked to enumerate an instance beyond
    its tractability guard."""


@dataclass(frozen=True)
class SystemConfig:
    """Static parameters of one deployment.

    ``slots_per_file`` is the number of transmission slots needed for a full
    file, so ``file_bits == slots_per_file * slot_bits`` exactly; the display
    rate is pinned to ``slot_bits`` (one segment downloaded and one displayed
    per slot).
    """

    sbs_count: int
    library_size: int
    slots_per_file: int
    slot_bits: int
    max_file_delay: int
    file_bits: int | None = None
    display_rate: int | None = None
    cache_bits: int = 0
    zipf_skew: float = 0.0
    max_avg_delay: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.sbs_count < 1:
            raise ValueError("sbs_count must be at least 1")
        if self.library_size < 1:
            raise ValueError("library_size must be at least 1")
        if self.slots_per_file < 1:
            raise ValueError("slots_per_file must be at least 1")
        if self.slot_bits < 1:
            raise ValueError("slot_bits must be at least 1")
        expected_bits = self.slots_per_file * self.slot_bits
        if self.file_bits is None:
            object.__setattr__(self, "file_bits", expected_bits)
        elif self.file_bits != expected_bits:
            raise ValueError(
                f"file_bits must equal slots_per_file * slot_bits "
                f"({expected_bits}), got {self.file_bits}"
            )
        if self.display_rate is None:
            object.__setattr__(self, "display_rate", self.slot_bits)
        elif self.display_rate != self.slot_bits:
            raise ValueError("display_rate must equal slot_bits")
        if self.cache_bits < 0:
            raise ValueError("cache_bits must be nonnegative")
        if not 1 <= self.max_file_delay <= self.slots_per_file:
            raise ValueError("max_file_delay must lie in [1, slots_per_file]")
        if self.max_avg_delay is not None and not (
            1 <= self.max_avg_delay <= self.max_file_delay
        ):
            raise ValueError("max_avg_delay must lie in [1, max_file_delay]")
        if self.zipf_skew < 0:
            raise ValueError("zipf_skew must be nonnegative")

    @property
    def segment_budget(self) -> int:
        """Per-SBS cache capacity in whole coded segments."""
        return self.cache_bits // self.slot_bits


def zipf_popularity(library_size: int, skew: float) -> np.ndarray:
    """Request probabilities p_k proportional to k**(-skew), most popular first."""
    if library_size < 1:
        raise ValueError("empty library: library_size must be at least 1")
    if skew < 0:
        raise ValueError("skew must be nonnegative")
    ranks = np.arange(1, library_size + 1, dtype=np.float64)
    weights = ranks ** (-float(skew))
    popularity = weights / weights.sum()
    popularity.flags.writeable = False
    return popularity


@dataclass(frozen=True)
class VideoLibrary:
    """A popularity-ordered library; index 0 is the most requested file."""

    popularity: np.ndarray

    def __post_init__(self):
        popularity = np.asarray(self.popularity, dtype=np.float64).copy()
        if popularity.ndim != 1 or popularity.size < 1:
            raise ValueError("empty library: popularity must be a nonempty vector")
        if np.any(popularity <= 0):
            raise ValueError("all request probabilities must be positive")
        if np.any(np.diff(popularity) > 0):
            raise ValueError("popularity must be non-increasing")
        if abs(popularity.sum() - 1.0) > POPULARITY_SUM_TOL:
            raise ValueError("popularity must sum to 1")
        popularity.flags.writeable = False
        object.__setattr__(self, "popularity", popularity)

    @classmethod
    def from_zipf(cls, library_size: int, skew: float) -> "VideoLibrary":
        return cls(zipf_popularity(library_size, skew))

    def __len__(self) -> int:
        return self.popularity.size


def make_fragmentation(slots: int, fragments: int) -> tuple[int, ...]:
    """Split ``slots`` segments into ``fragments`` near-equal groups.

    Sizes differ by at most one and the oversized groups come last, which
    keeps the initial buffering stall as short as possible.
    """
    if slots < 1:
        raise ValueError("slots must be at least 1")
    if not 1 <= fragments <= slots:
        raise ValueError(f"fragments must lie in [1, {slots}], got {fragments}")
    base, extra = divmod(slots, fragments)
    return (base,) * (fragments - extra) + (base + 1,) * extra


@dataclass(frozen=True)
class FragmentationPlan:
    """Near-equal grouping of one file's segments into jointly coded fragments."""

    file_index: int
    fragment_sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.fragment_sizes)
        if not sizes:
            raise ValueError("a fragmentation needs at least one fragment")
        if any(s < 1 for s in sizes):
            raise ValueError("fragment sizes must be positive")
        if max(sizes) - min(sizes) > 1:
            raise ValueError("fragment sizes must be near-equal (spread <= 1)")
        object.__setattr__(self, "fragment_sizes", sizes)

    @property
    def slots(self) -> int:
        return sum(self.fragment_sizes)

    @property
    def fragment_count(self) -> int:
        return len(self.fragment_sizes)


@dataclass(frozen=True)
class CachePlan:
    """Per-file fragment counts; zero means the file is not cached at all."""

    fragment_counts: tuple[int, ...]

    def __post_init__(self):
        counts = tuple(int(c) for c in self.fragment_counts)
        if any(c < 0 for c in counts):
            raise ValueError("fragment counts must be nonnegative")
        object.__setattr__(self, "fragment_counts", counts)

    @property
    def total_segments(self) -> int:
        """Coded segments stored per SBS (one per fragment of every file)."""
        return sum(self.fragment_counts)

    @property
    def cached_indices(self) -> tuple[int, ...]:
        return tuple(k for k, c in enumerate(self.fragment_counts) if c > 0)

    def __len__(self) -> int:
        return len(self.fragment_counts)


def plan_cache_bits(plan: CachePlan, slot_bits: int) -> int:
    """Per-SBS memory the plan consumes, in bits."""
    if slot_bits < 1:
        raise ValueError("slot_bits must be at least 1")
    return plan.total_segments * slot_bits


def segment_budget_from_ratio(c_hat: float, library_size: int, slots: int) -> int:
    """Per-SBS segment budget for a cache sized at ``c_hat`` of the library."""
    if not 0 < c_hat <= 1:
        raise ValueError("c_hat must lie in (0, 1]")
    return int(c_hat * library_size * slots + _BUDGET_EPS)
