"""Coded cache placement for small-cell video streaming."""

from .benchmarks import (
    efc_cost_placement,
    efc_delay_placement,
    mpfc_cost_placement,
    mpfc_delay_placement,
)
from .coding import CodedSegment, CodeSpec, decode, encode, gf_mul
from .delay import (
    DelayLevels,
    RebufferResult,
    average_rebuffer_delay,
    cumulative_delay,
    delay_levels,
    level_slope,
    min_rebuffer_delay,
    piecewise_delay,
    rebuffer_sequence,
    rebuffer_timeline,
)
from .model import (
    CachePlan,
    FragmentationPlan,
    InfeasibleError,
    InstanceTooLargeError,
    SystemConfig,
    VideoLibrary,
    make_fragmentation,
    plan_cache_bits,
    segment_budget_from_ratio,
    zipf_popularity,
)
from .placement import (
    CostPlacementResult,
    DelayPlacementResult,
    brute_force_min_cost,
    brute_force_min_delay,
    exact_completion_pad,
    min_cost_placement,
    min_delay_placement,
    min_feasible_level,
)
from .simulate import (
    DelayStats,
    MobilityPath,
    SessionTrace,
    generate_path,
    monte_carlo_delay,
    simulate_session,
)

__version__ = "0.1.0"
