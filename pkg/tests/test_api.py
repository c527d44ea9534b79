"""API HTTP (FastAPI) sobre as mesmas operações da linha de comando."""
import pytest
from fastapi.testclient import TestClient

from app.api import app
from scripts import codec


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


@pytest.fixture(scope="module")
def docs(samples):
    names = ("step", "geo", "path", "rect", "model", "weights", "bad_fn")
    return {n: codec.load_json(samples / f"{n}.json") for n in names}


def test_health(client):
    assert client.get("/api/health").json() == {"status": "ok"}


def test_eval_and_limits(client, docs):
    r = client.post("/api/eval", json={"fn": docs["step"], "t": 1.5})
    assert r.status_code == 200 and r.json()["value"] == 1.0
    r = client.post("/api/limits", json={"fn": docs["step"], "t": 1})
    assert r.json() == {"t": 1.0, "left": 0.0, "value": 1.0, "right": 1.0, "jump": 1.0}


def test_jumps_and_partition(client, docs):
    r = client.post("/api/jumps", json={"fn": docs["geo"], "eps": 0.2})
    assert r.json()["jumps"] == [[0.5, 0.5], [0.75, 0.25]]
    r = client.post("/api/partition", json={"fn": docs["geo"], "depth": 4, "window": {"interval": [0, 2]}})
    layers = r.json()["layers"]
    assert layers == {"2": [[0.5, 0.5]], "4": [[0.75, 0.25]]}


def test_sums(client, docs):
    r = client.post("/api/sum-jumps", json={"fn": docs["geo"], "set": {"interval": [0, 1]}, "phi": "power:2"})
    assert r.json()["value"] == pytest.approx(1 / 3, abs=1e-10)
    r = client.post("/api/sum", json={"weights": docs["weights"]})
    assert r.json() == {"status": "finite", "value": pytest.approx(0.5), "error": 0.0}


def test_cumulate(client, docs):
    r = client.post("/api/cumulate", json={"weights": docs["weights"], "at": [1.0, 2.0]})
    assert [v for _, v in r.json()["values"]] == pytest.approx([0.2, 0.5])


def test_counting_and_stopping_times(client, docs):
    r = client.post("/api/count", json={"path": docs["path"], "rect": docs["rect"]})
    assert r.json() == {"count": 1}
    r = client.post("/api/stopping-times", json={"path": docs["path"]})
    assert r.json()["times"] == [0.3, 0.7, 1.4]


def test_simulate_round_trips_into_count(client, docs):
    r = client.post("/api/simulate", json={"model": docs["model"], "seed": 11})
    assert r.status_code == 200
    path = r.json()
    again = client.post("/api/simulate", json={"model": docs["model"], "seed": 11}).json()
    assert path == again
    rect = {"time": {"interval": [0, 3]}, "size": {"complement_ball": 0}}
    count = client.post("/api/count", json={"path": path, "rect": rect}).json()["count"]
    assert count == len(path["fn"]["train"]["explicit"])


def test_validate_reports_instead_of_failing(client, docs):
    r = client.post("/api/validate", json={"fn": docs["bad_fn"]})
    assert r.status_code == 200
    assert r.json()["ok"] is False


def test_domain_errors_are_422(client, docs):
    r = client.post("/api/eval", json={"fn": docs["step"], "t": 5})
    assert r.status_code == 422
    assert r.json()["error"] == "OutOfDomain"


def test_input_errors_are_400(client, docs):
    r = client.post("/api/eval", json={"fn": docs["step"]})
    assert r.status_code == 400 and r.json()["error"] == "SchemaError"
    r = client.post("/api/eval", json={"fn": docs["bad_fn"], "t": 1})
    assert r.status_code == 400 and r.json()["error"] == "InvalidTrain"
    r = client.post("/api/eval", json={"fn": docs["step"], "t": "soon"})
    assert r.status_code == 400 and r.json()["error"] == "SchemaError"
