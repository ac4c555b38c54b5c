"""In-process HTTP service: endpoint contracts and error taxonomy."""

import math

import pytest

from singlab import BudgetError, ConfigError
from singlab.client import ServiceClient, ServiceError

BERN = {"bernoulli": "1/2"}
RAD = {"rademacher": True}
IID_BERN = {"iid": BERN}


@pytest.fixture(scope="module")
def client():
    return ServiceClient()


def test_healthz(client):
    out = client.get("/healthz")
    assert out["status"] == "ok"
    assert isinstance(out["version"], str)


# -- oracle endpoints ---------------------------------------------------------------


def test_oracle_singularity(client):
    out = client.post(
        "/oracle/singularity", {"scheme": IID_BERN, "n": 2, "kind": "ginibre"}
    )
    assert out == {"probability": "5/8", "approx": 0.625}
    out = client.post("/oracle/singularity", {"scheme": IID_BERN, "n": 2, "kind": "wigner"})
    assert out["probability"] == "1/2"


def test_oracle_linear(client):
    out = client.post("/oracle/linear", {"alphas": [1, 1], "dists": [RAD, RAD]})
    assert out["sup_mass"] == "1/2"
    assert out["at"] == "0"
    assert out["sup_mass_approx"] == 0.5
    assert out["law"] == {"atoms": [["-2", "1/4"], ["0", "1/2"], ["2", "1/4"]]}


def test_oracle_quadratic(client):
    out = client.post(
        "/oracle/quadratic", {"coeffs": [[0, 1], [1, 0]], "dists": [BERN, BERN]}
    )
    assert out["sup_mass"] == "3/4" and out["at"] == "0"


def test_oracle_decoupling(client):
    out = client.post(
        "/oracle/decoupling",
        {
            "coeffs": [[0, 1], [1, 0]],
            "dists": [BERN, BERN],
            "s1": [1],
            "s2": [2],
            "interval": {"lo": 2, "hi": 2},
        },
    )
    assert out["lhs_squared"] == "1/16"
    assert out["rhs"] == "1/8"
    assert out["holds"] is True


def test_oracle_border_law(client):
    out = client.post(
        "/oracle/border-law", {"matrix": [[1, 1], [1, 1]], "scheme": IID_BERN}
    )
    assert out["approx"] == {"0": 0.25, "1": 0.25, "2": 0.5}


def test_oracle_rank_process(client):
    out = client.post("/oracle/rank-process", {"scheme": IID_BERN, "n_max": 2})
    assert out["expectations"] == pytest.approx([0.5452538663326288, 0.5575912891248118])


def test_oracle_first_row_zero(client):
    out = client.post(
        "/oracle/first-row-zero", {"scheme": IID_BERN, "n": 2, "kind": "ginibre"}
    )
    assert out == {"probability": "1/4", "approx": 0.25}


# -- bound endpoints ---------------------------------------------------------------


def test_bound_kr_and_kesten(client):
    out = client.post(
        "/bound/kr", {"lambdas": [1, 1, 1, 1], "L": 1.0, "q_at_lambda": [0.5] * 4}
    )
    assert out["value"] == pytest.approx(1 / math.sqrt(2))
    out = client.post(
        "/bound/kesten",
        {
            "lambdas": [1, 1],
            "L": 1.0,
            "q_at_lambda": [0.5, 0.5],
            "q_at_L": [0.25, 0.75],
        },
    )
    assert out["value"] == pytest.approx(40 * math.sqrt(2) * 0.5)


def test_bound_linear_endpoints(client):
    out = client.post("/bound/linear", {"kappas": [0.5, 0.5], "kappa_deltas": [0.5, 0.5]})
    assert out["value"] == pytest.approx(40 * math.sqrt(2) * 0.5 / 1.0)
    out = client.post("/bound/linear-simplified", {"kappa": 0.5, "n": 2})
    assert out["value"] == pytest.approx(1.0)


def test_bound_quadratic_endpoints(client):
    out = client.post(
        "/bound/quadratic",
        {
            "neighbor_jumps": [[[0.5, 0.5]], [[0.5, 0.5]]],
            "own_jumps": [[0.5, 0.5], [0.5, 0.5]],
        },
    )
    ratio = 0.25 / 0.5**1.5
    assert out["mean_term"] == pytest.approx(ratio)
    assert out["sup_term"] == pytest.approx(ratio)
    assert out["sup_size"] == 1
    assert out["value"] == pytest.approx(math.sqrt(2 * ratio))
    out = client.post("/bound/quadratic-simplified", {"kappa": 0.5, "n": 4})
    assert out["value"] == pytest.approx(math.sqrt(0.5 / math.sqrt(0.5)))


def test_bound_ginibre_tail(client):
    out = client.post("/bound/ginibre-tail", {"kappa": 0.5, "m": 4, "k": 2, "n": 4})
    assert out == {
        "fill": pytest.approx(0.25),
        "deficit": pytest.approx(0.25),
        "deficit_anywhere": pytest.approx(1.5),
    }


def test_bound_entropy_beta(client):
    out = client.post("/bound/entropy-beta", {"alpha": 0.5, "kappa": 0.5})
    beta = out["beta"]
    assert 0.0 < beta < 0.5
    # plug-back inequality, strictly below alpha
    assert -math.log2(beta**beta * (1 - beta) ** (1 - beta)) / math.log2(0.5) + beta < 0.5
    assert isinstance(out["gamma"], float)


def test_bound_wigner_rate(client):
    out = client.post("/bound/wigner-rate", {"kappa": 0.5, "n": 16, "eps": 0.5})
    assert out["f_value"] == pytest.approx(1.0908964152537144)
    assert out["final_rate"] == pytest.approx(0.8408964152537145)


def test_bound_graph_rate(client):
    out = client.post("/bound/graph-rate", {"c": 1.0, "beta": 0.3, "eps": 0.2, "n": 16})
    assert out["rate"] == pytest.approx(1.5102563159446645)
    assert out["density"] == 0.5
    assert out["kappa"] == 0.5
    assert out["rate"] == pytest.approx(max(out["exp_term"], out["quarter_term"]))


# -- experiment endpoints ----------------------------------------------------------


def test_experiment_mc_roundtrip(client):
    out = client.post(
        "/experiment/mc",
        {"config": {"scheme": IID_BERN, "kind": "ginibre", "ns": [2], "trials": 60, "seed": 3}},
    )
    report = out["report"]
    assert report["kind"] == "ginibre"
    assert len(report["rows"]) == 1
    assert report["rows"][0]["trials"] == 60
    assert out["csv"].splitlines()[0].startswith("n,trials,singular_count,p_hat")


def test_experiment_mc_dispatches_by_kind(client):
    out = client.post(
        "/experiment/mc",
        {
            "config": {
                "scheme": IID_BERN,
                "kind": "rank_process",
                "ns": [2, 3],
                "trials": 40,
                "seed": 1,
            }
        },
    )
    assert "increment_hist_total" in out["report"]["extras"]
    out = client.post(
        "/experiment/mc",
        {
            "config": {
                "scheme": {"graph": {"c": 1.0, "beta": 0.3}},
                "kind": "graph",
                "ns": [4],
                "trials": 40,
                "seed": 1,
                "eps": 0.2,
            }
        },
    )
    assert "isolated_hist" in out["report"]["rows"][0]["extras"]


def test_experiment_dedicated_routes(client):
    out = client.post(
        "/experiment/rank-process",
        {
            "config": {
                "scheme": IID_BERN,
                "kind": "rank_process",
                "ns": [2],
                "trials": 30,
                "seed": 2,
            }
        },
    )
    assert out["report"]["rows"][0]["extras"]["kappa"] == 0.5
    out = client.post(
        "/experiment/graph",
        {
            "config": {
                "scheme": {"graph": {"p": "1/2"}},
                "kind": "graph",
                "ns": [4],
                "trials": 30,
                "seed": 2,
            }
        },
    )
    assert out["report"]["rows"][0]["extras"]["implication_violations"] == 0


def test_experiment_check_bounds(client):
    out = client.post(
        "/experiment/check-bounds",
        {
            "config": {
                "trials": 150,
                "pairs": [[3, 2]],
                "shape_ns": [4, 6],
                "zero_ns": [3, 5],
            }
        },
    )
    assert out["report"]["all_hold"] is True
    assert "fixed_corner_fill" in out["text"]


def test_fit_endpoint(client):
    out = client.post(
        "/fit", {"points": [[4, 0.5], [16, 0.25], [64, 0.125], [256, 0.0625]]}
    )
    assert out["exponent"] == pytest.approx(-0.5)
    assert out["points"] == 4


# -- error taxonomy ---------------------------------------------------------------


def test_domain_config_error_maps_to_config_exception(client):
    with pytest.raises(ConfigError):
        client.post("/oracle/singularity", {"scheme": {"mystery": 1}, "n": 2, "kind": "ginibre"})


def test_budget_error_maps_to_budget_exception(client):
    with pytest.raises(BudgetError):
        client.post(
            "/oracle/singularity",
            {"scheme": IID_BERN, "n": 2, "kind": "ginibre", "budget": 10},
        )


def test_float_rationals_are_rejected(client):
    with pytest.raises(ConfigError):
        client.post(
            "/oracle/singularity",
            {"scheme": {"iid": {"bernoulli": 0.5}}, "n": 2, "kind": "ginibre"},
        )


def test_pydantic_validation_maps_to_config_error(client):
    with pytest.raises(ConfigError):
        client.post(
            "/oracle/singularity",
            {"scheme": IID_BERN, "n": 2, "kind": "hermite"},
        )
    with pytest.raises(ConfigError):
        client.post(
            "/oracle/singularity",
            {"scheme": IID_BERN, "n": 2, "kind": "ginibre", "surprise": 1},
        )


def test_unknown_route_raises_service_error(client):
    with pytest.raises(ServiceError):
        client.get("/no-such-route")
