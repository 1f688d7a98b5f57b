"""HTTP service exposing the placement optimizer, simulator, and sweeps."""
from __future__ import annotations

from fastapi import Body, FastAPI, HTTPException
from fastapi.responses import JSONResponse

from .. import __version__
from ..delay import delay_levels
from ..experiments import (
    COST_SWEEP_HEADER,
    DELAY_SWEEP_HEADER,
    evaluate_cost_point,
    evaluate_delay_point,
    normalized_cached_delay,
    rows_to_csv,
    run_cost_sweep,
    run_delay_sweep,
    run_session_experiment,
    verification_report,
)
from ..model import InfeasibleError, zipf_popularity
from ..placement import min_feasible_level
from .schemas import (
    CostMinResponse,
    CostPolicyModel,
    DelayPolicyModel,
    ExperimentSpec,
    HealthResponse,
    OptimizeResponse,
    SimulateResponse,
    SuiteModel,
    SweepResponse,
    VerifyResponse,
)


def _floor_fragments(spec: ExperimentSpec) -> int:
    levels = delay_levels(spec.slots_per_file)
    level = min_feasible_level(
        levels, spec.effective_max_file_delay(), strict=spec.strict_lmin
    )
    return levels.fragment_counts[level - 1]


def create_app() -> FastAPI:
    app = FastAPI(
        title="codedcache",
        description=(
            "Cache placement for MDS-coded video fragments across small base "
            "stations, with benchmark policies, a session simulator, and "
            "self-verification."
        ),
        version=__version__,
    )

    @app.exception_handler(InfeasibleError)
    async def infeasible_handler(_, exc: InfeasibleError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def value_error_handler(_, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/healthz", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/optimize", response_model=OptimizeResponse)
    def optimize(spec: ExperimentSpec) -> OptimizeResponse:
        if spec.library_size is None or spec.zipf_skew is None:
            raise HTTPException(
                status_code=400, detail="optimize requires library_size and zipf_skew"
            )
        skew = spec.skew_values()[0]
        budget = spec.budget_segments()
        outcomes = evaluate_delay_point(
            spec.library_size,
            spec.slots_per_file,
            skew,
            budget,
            spec.effective_max_file_delay(),
            policies=spec.policies,
            strict_floor=spec.strict_lmin,
        )
        return OptimizeResponse(
            w=skew,
            c_hat=spec.c_hat_values[0] if spec.c_hat_values else None,
            budget_segments=budget,
            floor_fragments=_floor_fragments(spec),
            results=[
                DelayPolicyModel(
                    policy=policy,
                    avg_delay=outcome.avg_delay,
                    approx_avg_delay=outcome.approx_avg_delay,
                    exact_termination=outcome.exact_termination,
                    budget_used=outcome.budget_used,
                    fragment_counts=list(outcome.plan.fragment_counts),
                )
                for policy, outcome in outcomes.items()
            ],
        )

    @app.post("/cost-min", response_model=CostMinResponse)
    def cost_min(spec: ExperimentSpec) -> CostMinResponse:
        if spec.library_size is None or spec.zipf_skew is None:
            raise HTTPException(
                status_code=400, detail="cost-min requires library_size and zipf_skew"
            )
        caps = (
            [spec.max_avg_delay]
            if spec.max_avg_delay is not None
            else spec.d_avg_max_values
        )
        if not caps:
            raise HTTPException(
                status_code=400,
                detail="cost-min requires max_avg_delay or d_avg_max_values",
            )
        skew = spec.skew_values()[0]
        budget = spec.budget_segments()
        outcomes = evaluate_cost_point(
            spec.library_size,
            spec.slots_per_file,
            skew,
            budget,
            spec.effective_max_file_delay(),
            caps[0],
            policies=spec.policies,
            strict_floor=spec.strict_lmin,
        )
        popularity = zipf_popularity(spec.library_size, skew)
        return CostMinResponse(
            w=skew,
            d_avg_max=caps[0],
            budget_segments=budget,
            floor_fragments=_floor_fragments(spec),
            results=[
                CostPolicyModel(
                    policy=policy,
                    theta=outcome.theta,
                    avg_delay=outcome.avg_delay,
                    avg_delay_cached_normalized=normalized_cached_delay(
                        outcome, popularity, spec.slots_per_file
                    ),
                    cached_count=len(outcome.cached_indices),
                    fragment_counts=list(outcome.plan.fragment_counts),
                )
                for policy, outcome in outcomes.items()
            ],
        )

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(spec: ExperimentSpec) -> SimulateResponse:
        if spec.scenario != "simulate":
            raise HTTPException(
                status_code=400, detail="simulate requires scenario 'simulate'"
            )
        experiment = run_session_experiment(
            sbs_count=spec.sbs_count,
            slots=spec.slots_per_file,
            fragments=spec.fragments,
            seed=spec.seed,
            trials=spec.trials,
            with_real_coding=spec.with_real_coding,
            slot_bits=spec.slot_bits,
        )
        return SimulateResponse(
            fragment_sizes=list(experiment.fragment_sizes),
            formula_delay=experiment.formula_delay,
            trials=experiment.trials,
            mean_delay=experiment.mean_delay,
            min_delay=experiment.min_delay,
            max_delay=experiment.max_delay,
            deltas=list(experiment.deltas),
            payload_matches=experiment.payload_matches,
            trace=list(experiment.trace_lines) if experiment.trace_lines else None,
        )

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(spec: ExperimentSpec) -> SweepResponse:
        if spec.scenario == "delay_sweep":
            c_hats = spec.c_hat_values or []
            if not c_hats:
                raise HTTPException(
                    status_code=400, detail="delay_sweep requires c_hat_values"
                )
            rows = run_delay_sweep(
                spec.library_size,
                spec.slots_per_file,
                spec.skew_values(),
                c_hats,
                spec.effective_max_file_delay(),
                policies=spec.policies,
                strict_floor=spec.strict_lmin,
            )
            return SweepResponse(
                scenario=spec.scenario,
                row_count=len(rows),
                csv=rows_to_csv(DELAY_SWEEP_HEADER, rows),
            )
        if spec.scenario == "cost_sweep":
            caps = spec.d_avg_max_values or (
                [spec.max_avg_delay] if spec.max_avg_delay is not None else []
            )
            rows = run_cost_sweep(
                spec.library_size,
                spec.slots_per_file,
                spec.skew_values(),
                caps,
                spec.budget_segments(),
                spec.effective_max_file_delay(),
                policies=spec.policies,
                strict_floor=spec.strict_lmin,
            )
            return SweepResponse(
                scenario=spec.scenario,
                row_count=len(rows),
                csv=rows_to_csv(COST_SWEEP_HEADER, rows),
            )
        raise HTTPException(
            status_code=400,
            detail="sweep requires scenario 'delay_sweep' or 'cost_sweep'",
        )

    @app.post("/verify", response_model=VerifyResponse)
    def verify(spec: ExperimentSpec | None = Body(default=None)) -> VerifyResponse:
        quick = spec.quick if spec is not None else False
        passed, suites = verification_report(quick=quick)
        return VerifyResponse(
            passed=passed,
            suites=[
                SuiteModel(
                    name=s.name,
                    passed=s.passed,
                    cases=s.cases,
                    detail=s.detail,
                    failures=s.failures,
                )
                for s in suites
            ],
        )

    return app


app = create_app()
