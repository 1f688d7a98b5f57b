"""Request and response models of the placement service.

``ExperimentSpec`` doubles as the on-disk config format: a single JSON
document, unknown keys rejected.
"""
from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..model import segment_budget_from_ratio

Scenario = Literal["delay_sweep", "cost_sweep", "simulate", "verify"]
PolicyName = Literal["proposed", "mpfc", "efc"]


class ExperimentSpec(BaseModel):
    """One experiment request: system parameters plus the sweep axes."""

    model_config = ConfigDict(extra="forbid")

    scenario: Scenario
    library_size: int | None = Field(default=None, ge=1)
    slots_per_file: int | None = Field(default=None, ge=1)
    slot_bits: int = Field(default=64, ge=1)
    file_bits: int | None = Field(default=None, ge=1)
    display_rate: int | None = Field(default=None, ge=1)
    sbs_count: int | None = Field(default=None, ge=1)
    zipf_skew: float | list[float] | None = None
    max_file_delay: int | None = Field(default=None, ge=1)
    max_avg_delay: float | None = Field(default=None, ge=1)
    cache_bits: int | None = Field(default=None, ge=0)
    c_hat_values: list[float] | None = None
    d_avg_max_values: list[float] | None = None
    policies: list[PolicyName] = Field(
        default_factory=lambda: ["proposed", "mpfc", "efc"]
    )
    fragments: int | None = Field(default=None, ge=1)
    trials: int = Field(default=1, ge=1)
    with_real_coding: bool = False
    strict_lmin: bool = False
    quick: bool = False
    seed: int = Field(default=0, ge=0, le=2**64 - 1)
    output: str | None = None

    @field_validator("c_hat_values")
    @classmethod
    def _check_c_hats(cls, values):
        if values is not None:
            if not values:
                raise ValueError("c_hat_values must not be empty")
            if any(not 0 < v <= 1 for v in values):
                raise ValueError("normalized cache sizes must lie in (0, 1]")
        return values

    @field_validator("d_avg_max_values")
    @classmethod
    def _check_caps(cls, values):
        if values is not None:
            if not values:
                raise ValueError("d_avg_max_values must not be empty")
            if any(v < 1 for v in values):
                raise ValueError("average-delay caps must be at least one slot")
        return values

    @field_validator("policies")
    @classmethod
    def _check_policies(cls, values):
        if not values:
            raise ValueError("policies must not be empty")
        if len(set(values)) != len(values):
            raise ValueError("policies must be unique")
        return values

    @model_validator(mode="after")
    def _check_scenario_fields(self):
        if self.scenario == "verify":
            return self
        if self.slots_per_file is None:
            raise ValueError(f"scenario {self.scenario} requires slots_per_file")
        if self.file_bits is not None and self.file_bits != self.slots_per_file * self.slot_bits:
            raise ValueError("file_bits must equal slots_per_file * slot_bits")
        if self.display_rate is not None and self.display_rate != self.slot_bits:
            raise ValueError("display_rate must equal slot_bits")
        if self.scenario == "simulate":
            if self.sbs_count is None or self.fragments is None:
                raise ValueError("scenario simulate requires sbs_count and fragments")
            if self.fragments > self.slots_per_file:
                raise ValueError("fragments must not exceed slots_per_file")
            if self.sbs_count < self.slots_per_file:
                raise ValueError("simulate requires sbs_count >= slots_per_file")
            return self
        if self.library_size is None:
            raise ValueError(f"scenario {self.scenario} requires library_size")
        if self.zipf_skew is None:
            raise ValueError(f"scenario {self.scenario} requires zipf_skew")
        if self.max_file_delay is not None and self.max_file_delay > self.slots_per_file:
            raise ValueError("max_file_delay must not exceed slots_per_file")
        if self.scenario == "delay_sweep" and not self.skew_values():
            raise ValueError("delay_sweep requires at least one zipf_skew value")
        if self.scenario == "delay_sweep" and self.c_hat_values is None and self.cache_bits is None:
            raise ValueError("delay_sweep requires c_hat_values or cache_bits")
        if self.scenario == "cost_sweep":
            if self.d_avg_max_values is None and self.max_avg_delay is None:
                raise ValueError("cost_sweep requires d_avg_max_values or max_avg_delay")
            if self.c_hat_values is None and self.cache_bits is None:
                raise ValueError("cost_sweep requires a cache size (c_hat_values or cache_bits)")
        return self

    def skew_values(self) -> list[float]:
        if self.zipf_skew is None:
            return []
        if isinstance(self.zipf_skew, (int, float)):
            return [float(self.zipf_skew)]
        return [float(w) for w in self.zipf_skew]

    def effective_max_file_delay(self) -> int:
        """Per-file cap; defaults to the whole session (no binding cap)."""
        if self.max_file_delay is not None:
            return self.max_file_delay
        return int(self.slots_per_file)

    def budget_segments(self) -> int:
        """Per-SBS segment budget from cache_bits, else the first c_hat."""
        if self.cache_bits is not None:
            return self.cache_bits // self.slot_bits
        if self.c_hat_values:
            return segment_budget_from_ratio(
                self.c_hat_values[0], self.library_size, self.slots_per_file
            )
        raise ValueError("no cache size given (set cache_bits or c_hat_values)")


class DelayPolicyModel(BaseModel):
    policy: str
    avg_delay: float
    approx_avg_delay: float
    exact_termination: bool
    budget_used: int
    fragment_counts: list[int]


class OptimizeResponse(BaseModel):
    w: float
    c_hat: float | None
    budget_segments: int
    floor_fragments: int
    results: list[DelayPolicyModel]


class CostPolicyModel(BaseModel):
    policy: str
    theta: float
    avg_delay: float
    avg_delay_cached_normalized: float | None
    cached_count: int
    fragment_counts: list[int]


class CostMinResponse(BaseModel):
    w: float
    d_avg_max: float
    budget_segments: int
    floor_fragments: int
    results: list[CostPolicyModel]


class SimulateResponse(BaseModel):
    fragment_sizes: list[int]
    formula_delay: int
    trials: int
    mean_delay: float
    min_delay: int
    max_delay: int
    deltas: list[int]
    payload_matches: bool | None
    trace: list[str] | None


class SweepResponse(BaseModel):
    scenario: str
    row_count: int
    csv: str


class SuiteModel(BaseModel):
    name: str
    passed: bool
    cases: int
    detail: str
    failures: list[str]


class VerifyResponse(BaseModel):
    passed: bool
    suites: list[SuiteModel]


class HealthResponse(BaseModel):
    status: str
    version: str
