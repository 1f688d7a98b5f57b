"""Self-verification suites.

Each suite checks one pillar of the package against an independent route:
the stall recursion against its closed form, the greedy placement against
exhaustive search, field arithmetic against a log/antilog oracle, coded
shares against any-k reconstruction, and the simulator against the formula.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import coding
from .delay import cumulative_delay, delay_levels, rebuffer_sequence, rebuffer_timeline
from .model import InfeasibleError
from .placement import (
    brute_force_min_cost,
    brute_force_min_delay,
    exact_completion_pad,
    min_cost_placement,
    min_delay_placement,
)
from .simulate import generate_path, simulate_session

_MAX_REPORTED_FAILURES = 5


@dataclass
class SuiteResult:
    name: str
    passed: bool
    cases: int
    detail: str = ""
    failures: list[str] = field(default_factory=list)

    def record_failure(self, message: str):
        self.passed = False
        if len(self.failures) < _MAX_REPORTED_FAILURES:
            self.failures.append(message)


def compositions(total: int):
    """All ordered partitions of ``total`` into positive parts."""
    for mask in range(1 << (total - 1)):
        part = 1
        parts = []
        for bit in range(total - 1):
            if mask >> bit & 1:
                parts.append(part)
                part = 1
            else:
                part += 1
        parts.append(part)
        yield tuple(parts)


def closed_form_suite(max_slots: int = 12) -> SuiteResult:
    """Stall recursion == timeline form == largest fragment, exhaustively."""
    result = SuiteResult(name="stall-closed-form", passed=True, cases=0)
    for total in range(1, max_slots + 1):
        for sizes in compositions(total):
            result.cases += 1
            seq = rebuffer_sequence(sizes)
            tl = rebuffer_timeline(sizes)
            closed = cumulative_delay(sizes)
            if seq != tl or seq.cumulative != closed or sum(seq.deltas) != closed:
                result.record_failure(f"sizes={sizes}: {seq} vs {tl} vs max={closed}")
    result.detail = f"all compositions up to {max_slots} slots"
    return result


def placement_oracle_suite(instances: int = 500, seed: int = 20240901) -> SuiteResult:
    """Greedy delay minimizer versus exhaustive search on random instances."""
    rng = np.random.default_rng(seed)
    result = SuiteResult(name="delay-placement-oracle", passed=True, cases=instances)
    exact_hits = 0
    for case in range(instances):
        file_count = int(rng.integers(1, 6))
        slots = int(rng.integers(2, 11))
        levels = delay_levels(slots)
        # keep the floor allocation inside the oracle's budget guard
        eligible = [
            lvl
            for lvl in range(1, levels.level_count + 1)
            if file_count * levels.fragment_counts[lvl - 1] <= 30
        ]
        floor_level = int(rng.choice(eligible))
        floor_count = levels.fragment_counts[floor_level - 1]
        low = file_count * floor_count
        budget = int(rng.integers(low, min(30, file_count * slots) + 1))
        weights = rng.integers(1, 20, size=file_count)
        popularity = np.sort(weights / weights.sum())[::-1]
        tag = f"case {case}: K={file_count} T={slots} fl={floor_level} b={budget}"
        greedy = min_delay_placement(popularity, slots, budget, floor_level, levels)
        oracle = brute_force_min_delay(popularity, slots, budget, floor_level, levels)
        if greedy.plan.total_segments > budget:
            result.record_failure(f"{tag}: budget overrun")
        if min(greedy.plan.fragment_counts) < floor_count:
            result.record_failure(f"{tag}: floor violated")
        if not (
            greedy.approx_avg_delay <= oracle.avg_delay + 1e-9
            and oracle.avg_delay <= greedy.avg_delay + 1e-9
        ):
            result.record_failure(
                f"{tag}: sandwich broken "
                f"({greedy.approx_avg_delay}, {oracle.avg_delay}, {greedy.avg_delay})"
            )
        if greedy.exact_termination:
            exact_hits += 1
            if abs(greedy.avg_delay - oracle.avg_delay) > 1e-9:
                result.record_failure(
                    f"{tag}: exact termination but {greedy.avg_delay} != {oracle.avg_delay}"
                )
        pad = exact_completion_pad(greedy, levels)
        if pad > -(-slots // 2):
            result.record_failure(f"{tag}: pad {pad} exceeds half a file")
        padded = min_delay_placement(popularity, slots, budget + pad, floor_level, levels)
        if not padded.exact_termination:
            result.record_failure(f"{tag}: pad {pad} did not restore exact termination")
    result.detail = f"{exact_hits}/{instances} instances terminated exactly"
    return result


def cost_oracle_suite(instances: int = 200, seed: int = 20240902) -> SuiteResult:
    """Eviction-based cost minimizer versus exhaustive search."""
    rng = np.random.default_rng(seed)
    result = SuiteResult(name="cost-placement-oracle", passed=True, cases=instances)
    gaps = []
    greedy_infeasible = 0
    for case in range(instances):
        file_count = int(rng.integers(1, 6))
        slots = int(rng.integers(2, 11))
        levels = delay_levels(slots)
        floor_level = int(rng.integers(1, levels.level_count + 1))
        floor_count = levels.fragment_counts[floor_level - 1]
        budget = int(rng.integers(floor_count, 31))
        weights = rng.integers(1, 20, size=file_count)
        popularity = np.sort(weights / weights.sum())[::-1]
        floor_delay = levels.delays[floor_level - 1]
        cap = float(rng.uniform(1.0, floor_delay))
        tag = f"case {case}: K={file_count} T={slots} fl={floor_level} b={budget} cap={cap:.3f}"
        oracle = brute_force_min_cost(popularity, slots, budget, floor_level, cap, levels)
        try:
            greedy = min_cost_placement(popularity, slots, budget, floor_level, cap, levels)
        except InfeasibleError:
            # the greedy only caches popularity prefixes; a cap below the
            # most popular file's weighted floor stalls it even when the
            # oracle can cache some less popular file instead
            greedy_infeasible += 1
            continue
        if greedy.avg_delay > cap:
            result.record_failure(f"{tag}: cap violated ({greedy.avg_delay} > {cap})")
        if greedy.plan.total_segments > budget:
            result.record_failure(f"{tag}: budget overrun")
        if greedy.theta < oracle.theta - 1e-9:
            result.record_failure(
                f"{tag}: greedy theta {greedy.theta} beats the oracle {oracle.theta}"
            )
        gaps.append(greedy.theta - oracle.theta)
    result.detail = (
        f"mean theta gap over the oracle: {np.mean(gaps):.6f} "
        f"({greedy_infeasible} greedy-infeasible)"
        if gaps
        else "no feasible cases"
    )
    return result


def mds_suite(max_total: int = 10, payload_len: int = 64, seed: int = 20240903) -> SuiteResult:
    """Any-k reconstruction for every subset, plus field table validation."""
    rng = np.random.default_rng(seed)
    result = SuiteResult(name="mds-round-trip", passed=True, cases=0)

    # Independent log/antilog oracle built here with its own doubling loop.
    exp = [0] * 255
    log = [0] * 256
    value = 1
    for power in range(255):
        exp[power] = value
        log[value] = power
        value <<= 1
        if value & 0x100:
            value ^= coding.FIELD_POLY
    for a in range(256):
        for b in range(256):
            expected = 0 if 0 in (a, b) else exp[(log[a] + log[b]) % 255]
            if coding.gf_mul(a, b) != expected:
                result.record_failure(f"gf_mul({a}, {b}) != {expected}")
            result.cases += 1

    for total in range(1, max_total + 1):
        for threshold in range(1, total + 1):
            spec = coding.CodeSpec(threshold, total)
            segments = [rng.bytes(payload_len) for _ in range(threshold)]
            shares = coding.encode(spec, segments)
            if [s.payload for s in shares[:threshold]] != segments:
                result.record_failure(f"(k={threshold}, n={total}): not systematic")
            for subset in combinations(shares, threshold):
                result.cases += 1
                if coding.decode(spec, list(subset)) != segments:
                    result.record_failure(
                        f"(k={threshold}, n={total}): subset "
                        f"{[s.sbs_index for s in subset]} failed to reconstruct"
                    )
            if threshold > 1:
                try:
                    coding.decode(spec, list(shares[: threshold - 1]))
                except ValueError:
                    pass
                else:
                    result.record_failure(
                        f"(k={threshold}, n={total}): under-collection decoded"
                    )
    result.detail = f"all subsets up to n={max_total}, field table vs log/antilog oracle"
    return result


def simulation_agreement_suite(
    slots: int = 10, paths_per: int = 50, sbs_count: int = 20, seed: int = 20240904
) -> SuiteResult:
    """Simulated stall totals match the closed form; real coded payloads
    reconstruct byte-identically on every path."""
    rng = np.random.default_rng(seed)
    result = SuiteResult(name="simulation-agreement", passed=True, cases=0)
    for sizes in compositions(slots):
        expected = cumulative_delay(sizes)
        payload = rng.bytes(slots * 8)
        for _ in range(paths_per):
            result.cases += 1
            path = generate_path(sbs_count, slots, rng)
            trace = simulate_session(
                sizes, path, with_real_coding=True, payload=payload, slot_bits=64
            )
            if trace.cumulative != expected or sum(trace.deltas) != expected:
                result.record_failure(
                    f"sizes={sizes} path={path.sbs_sequence}: measured "
                    f"{trace.cumulative} != {expected}"
                )
            if trace.displayed_payload != payload:
                result.record_failure(
                    f"sizes={sizes} path={path.sbs_sequence}: payload mismatch"
                )
    result.detail = f"all compositions of {slots} slots, {paths_per} paths each"
    return result


def run_verification(quick: bool = False) -> list[SuiteResult]:
    """Run every suite; ``quick`` shrinks the workloads for smoke testing."""
    if quick:
        return [
            closed_form_suite(max_slots=9),
            placement_oracle_suite(instances=60),
            cost_oracle_suite(instances=30),
            mds_suite(max_total=6, payload_len=16),
            simulation_agreement_suite(slots=7, paths_per=8, sbs_count=12),
        ]
    return [
        closed_form_suite(),
        placement_oracle_suite(),
        cost_oracle_suite(),
        mds_suite(),
        simulation_agreement_suite(),
    ]
