import pytest
from fastapi.testclient import TestClient

from app.main import app

client = TestClient(app)

BARNES1 = {"a": [0.5, 0.7], "b": [0.6, 0.9]}


def test_root_banner():
    response = client.get("/")
    assert response.status_code == 200
    assert "MB Verify" in response.json()


def test_list_identities():
    response = client.get("/api/v1/identities")
    assert response.status_code == 200
    ids = [entry["id"] for entry in response.json()]
    assert "g1" in ids and "barnes2" in ids
    assert len(ids) == 14


def test_get_identity():
    response = client.get("/api/v1/identities/s2")
    assert response.status_code == 200
    assert response.json()["min_n"] == 2
    assert client.get("/api/v1/identities/nope").status_code == 404


def test_sample_params():
    response = client.post("/api/v1/identities/g1/sample", json={"n": 2, "seed": 7})
    assert response.status_code == 200
    body = response.json()
    assert len(body["alpha"]) == 3 and len(body["beta"]) == 3
    assert client.post("/api/v1/identities/g1/sample", json={"n": 2, "seed": 7}).json() == body
    assert client.post("/api/v1/identities/nope/sample", json={"n": 1, "seed": 0}).status_code == 404


def test_build_identity():
    response = client.post("/api/v1/identities/build", json={"id": "barnes1", "params": BARNES1})
    assert response.status_code == 200
    body = response.json()
    assert body["dim"] == 1
    assert len(body["lhs"]["gamma_factors"]) == 4


def test_build_rejects_degenerate_parameters():
    response = client.post(
        "/api/v1/identities/build", json={"id": "g3", "params": {"alpha": [0.7, 0.7], "beta": [0.05]}}
    )
    assert response.status_code == 422
    assert response.json()["detail"]["error"] == "ConstraintViolated"


def test_verify():
    response = client.post("/api/v1/verify", json={"identity": "barnes1", "params": BARNES1})
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "pass"
    assert body["rel_deviation"] < 1e-8


@pytest.mark.parametrize(
    "payload",
    [
        {"identity": "barnes1", "params": BARNES1, "seed": 1},
        {"identity": "barnes1", "n": 2, "seed": 1},
        {"identity": "nope", "seed": 1},
        {"identity": "barnes1", "params": {"a": [0.5], "b": [0.6, 0.9]}},
    ],
)
def test_verify_rejects_bad_input(payload):
    assert client.post("/api/v1/verify", json=payload).status_code == 422


def test_sweep():
    response = client.post("/api/v1/sweep", json={"identity": "barnes1", "trials": 2, "seed": 3})
    assert response.status_code == 200
    assert response.json()["counts"]["pass"] == 2


def test_residue():
    response = client.post("/api/v1/residue", json={"id": "barnes1", "params": BARNES1})
    assert response.status_code == 200
    assert response.json()["rel_deviation"] < 1e-8
    collision = client.post("/api/v1/residue", json={"id": "barnes1", "params": {"a": [0.5, 0.7], "b": [0.6, 0.6]}})
    assert collision.status_code == 422
    assert collision.json()["detail"]["error"] == "SeriesDivergent"


def test_transition():
    response = client.post("/api/v1/halfplane/transition", json={"s": 1.0, "nu": 0.4, "p": 2.0})
    assert response.status_code == 200
    assert response.json()["status"] == "pass"


def test_chain_rule_domain_violation():
    response = client.post(
        "/api/v1/halfplane/chain-rule",
        json={"s": 1.0, "alpha": [0.9, 0.0], "beta": [0.9, 0.0], "z": {"x": 0.0, "y": 1.0}, "zeta": {"x": 0.0, "y": 1.0}},
    )
    assert response.status_code == 422
    assert response.json()["detail"]["error"] == "DomainViolation"


def test_chain_rule_rejects_lower_half_plane():
    response = client.post(
        "/api/v1/halfplane/chain-rule",
        json={"s": 1.0, "alpha": 1.5, "beta": 1.5, "z": {"x": 0.0, "y": -1.0}, "zeta": {"x": 0.0, "y": 1.0}},
    )
    assert response.status_code == 422


def test_provenance_key_in_responses():
    listing = client.get("/api/v1/identities").json()
    assert all(entry["paper_anchor"] and "anchor" not in entry for entry in listing)
    assert "Barnes" in client.get("/api/v1/identities/barnes1").json()["paper_anchor"]
    report = client.post("/api/v1/verify", json={"identity": "barnes1", "params": BARNES1}).json()
    assert report["paper_anchor"] == "Barnes' first lemma (g1 at N=1)"
    assert "anchor" not in report


def test_verify_without_a_straight_contour():
    response = client.post(
        "/api/v1/verify", json={"identity": "g1", "params": {"alpha": [0.1, 0.9], "beta": [-0.3, 0.8]}}
    )
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "inconclusive"
    assert body["diagnostics"][0].startswith("Infeasible")
