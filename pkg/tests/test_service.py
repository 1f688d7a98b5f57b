import pytest
from fastapi.testclient import TestClient

from codedcache.service.app import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


BASE_SPEC = {
    "scenario": "delay_sweep",
    "library_size": 6,
    "slots_per_file": 10,
    "zipf_skew": 0.9,
    "max_file_delay": 10,
    "c_hat_values": [0.4],
}


class TestHealth:
    def test_healthz(self, client):
        body = client.get("/healthz").json()
        assert body["status"] == "ok"


class TestOptimize:
    def test_happy_path(self, client):
        response = client.post("/optimize", json=BASE_SPEC)
        assert response.status_code == 200
        body = response.json()
        assert body["budget_segments"] == 24
        assert body["floor_fragments"] == 1
        policies = {r["policy"]: r for r in body["results"]}
        assert set(policies) == {"proposed", "mpfc", "efc"}
        assert policies["proposed"]["avg_delay"] <= policies["mpfc"]["avg_delay"]
        assert len(policies["proposed"]["fragment_counts"]) == 6

    def test_unknown_key_rejected(self, client):
        spec = dict(BASE_SPEC, mystery_knob=1)
        assert client.post("/optimize", json=spec).status_code == 422

    def test_missing_fields_rejected(self, client):
        spec = {"scenario": "delay_sweep", "slots_per_file": 10}
        assert client.post("/optimize", json=spec).status_code == 422

    def test_infeasible_budget_conflict(self, client):
        spec = dict(BASE_SPEC, c_hat_values=[0.01])
        assert client.post("/optimize", json=spec).status_code == 409

    def test_strict_floor_flag(self, client):
        spec = dict(BASE_SPEC, strict_lmin=True)
        body = client.post("/optimize", json=spec).json()
        assert body["floor_fragments"] == 2


class TestCostMin:
    def test_happy_path(self, client):
        spec = {
            "scenario": "cost_sweep",
            "library_size": 6,
            "slots_per_file": 10,
            "zipf_skew": 0.9,
            "max_file_delay": 10,
            "c_hat_values": [0.1],
            "max_avg_delay": 4.0,
        }
        body = client.post("/cost-min", json=spec).json()
        policies = {r["policy"]: r for r in body["results"]}
        assert policies["proposed"]["theta"] <= policies["efc"]["theta"] + 1e-12
        assert policies["proposed"]["avg_delay"] <= 4.0
        normalized = policies["proposed"]["avg_delay_cached_normalized"]
        assert normalized >= policies["proposed"]["avg_delay"]


class TestSimulate:
    def test_single_trial_trace(self, client):
        spec = {
            "scenario": "simulate",
            "sbs_count": 20,
            "slots_per_file": 10,
            "fragments": 4,
            "seed": 7,
        }
        body = client.post("/simulate", json=spec).json()
        assert body["fragment_sizes"] == [2, 2, 3, 3]
        assert body["formula_delay"] == 3
        assert body["min_delay"] == body["max_delay"] == 3
        assert body["trace"]

    def test_real_coding(self, client):
        spec = {
            "scenario": "simulate",
            "sbs_count": 16,
            "slots_per_file": 8,
            "fragments": 2,
            "trials": 3,
            "with_real_coding": True,
        }
        body = client.post("/simulate", json=spec).json()
        assert body["payload_matches"] is True

    def test_wrong_scenario(self, client):
        assert client.post("/simulate", json=BASE_SPEC).status_code == 400

    def test_too_few_stations(self, client):
        spec = {
            "scenario": "simulate",
            "sbs_count": 5,
            "slots_per_file": 10,
            "fragments": 2,
        }
        assert client.post("/simulate", json=spec).status_code == 422


class TestSweep:
    def test_delay_sweep_csv(self, client):
        spec = dict(BASE_SPEC, c_hat_values=[0.2, 0.4])
        body = client.post("/sweep", json=spec).json()
        assert body["row_count"] == 6
        header = body["csv"].splitlines()[0]
        assert header == "w,c_hat,policy,avg_delay,budget_segments,exact_termination,status"

    def test_cost_sweep_csv(self, client):
        spec = {
            "scenario": "cost_sweep",
            "library_size": 8,
            "slots_per_file": 10,
            "zipf_skew": [0.8, 1.0],
            "max_file_delay": 10,
            "c_hat_values": [0.1],
            "d_avg_max_values": [3.0, 6.0],
        }
        body = client.post("/sweep", json=spec).json()
        assert body["row_count"] == 12
        header = body["csv"].splitlines()[0]
        assert header == "w,d_avg_max,policy,theta,avg_delay,cached_count,status"

    def test_verify_scenario_rejected_here(self, client):
        assert client.post("/sweep", json={"scenario": "verify"}).status_code == 400


class TestVerify:
    def test_quick_run_passes(self, client):
        body = client.post("/verify", json={"scenario": "verify", "quick": True}).json()
        assert body["passed"] is True
        assert {s["name"] for s in body["suites"]} == {
            "stall-closed-form",
            "delay-placement-oracle",
            "cost-placement-oracle",
            "mds-round-trip",
            "simulation-agreement",
        }
        assert all(s["passed"] for s in body["suites"])
