"""FastAPI application exposing the saltos operations over JSON."""
from __future__ import annotations

from typing import Any, Dict, Optional

from fastapi import Body, FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from scripts import codec
from scripts.errors import DomainError, SaltosError, SchemaError
from scripts.index_sets import ALL, index_set_from_dict
from scripts.jump_measure import PhiSpec, cumulative_jump_function, jump_counting_measure, phi_sum_of_jumps
from scripts.path_sim import simulate, stopping_times
from scripts.regulated_core import (
    eval_at,
    jump_process,
    jumps_at_least,
    layered_partition,
    left_limit,
    right_limit,
    validate,
)
from scripts.unordered_sum import unordered_sum
from scripts.utils.logger import get_logger
from scripts.utils.normalization import normalize_structure

LOG = get_logger("api")

app = FastAPI(title="saltos", version="1.0.0")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=False,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.exception_handler(SaltosError)
async def _saltos_error(request: Request, exc: SaltosError) -> JSONResponse:
    status = 422 if isinstance(exc, DomainError) else 400
    LOG.warning("request failed", extra={"extra_fields": {"path": request.url.path, "error": exc.to_dict()}})
    return JSONResponse(status_code=status, content=normalize_structure(exc.to_dict()))


@app.exception_handler(ValueError)
@app.exception_handler(TypeError)
@app.exception_handler(KeyError)
async def _malformed(request: Request, exc: Exception) -> JSONResponse:
    return await _saltos_error(request, SchemaError(f"{type(exc).__name__}: {exc}"))


def _require(payload: Dict[str, Any], *keys: str) -> None:
    missing = [k for k in keys if k not in payload]
    if missing:
        raise SchemaError(f"request body is missing {missing}")


def _window(payload: Dict[str, Any]):
    raw = payload.get("window")
    return codec.interval_from_dict({"kind": "window", **raw}) if raw else None


def _respond(result: Any) -> Dict[str, Any]:
    return normalize_structure(result)


@app.get("/api/health")
def health() -> Dict[str, Any]:
    return {"status": "ok"}


@app.post("/api/eval")
def eval_endpoint(payload: Dict[str, Any] = Body(...)) -> Dict[str, Any]:
    _require(payload, "fn", "t")
    f = codec.function_from_dict(payload["fn"])
    t = float(payload["t"])
    return _respond({"t": t, "value": eval_at(f, t, payload.get("tol"))})


@app.post("/api/limits")
def limits_endpoint(payload: Dict[str, Any] = Body(...)) -> Dict[str, Any]:
    _require(payload, "fn", "t")
    f = codec.function_from_dict(payload["fn"])
    t = float(payload["t"])
    tol: Optional[float] = payload.get("tol")
    return _respond({
        "t": t,
        "left": left_limit(f, t, tol) if f.domain.has_left_neighborhood(t) else None,
        "value": eval_at(f, t, tol),
        "right": right_limit(f, t, tol) if f.domain.has_right_neighborhood(t) else None,
        "jump": jump_process(f, t),
    })


@app.post("/api/jumps")
def jumps_endpoint(payload: Dict[str, Any] = Body(...)) -> Dict[str, Any]:
    _require(payload, "fn", "eps")
    f = codec.function_from_dict(payload["fn"])
    points = jumps_at_least(f, float(payload["eps"]), _window(payload))
    return _respond({"jumps": [[loc, jump] for loc, jump in points]})


@app.post("/api/partition")
def partition_endpoint(payload: Dict[str, Any] = Body(...)) -> Dict[str, Any]:
    _require(payload, "fn")
    f = codec.function_from_dict(payload["fn"])
    return _respond(layered_partition(f, _window(payload), payload.get("depth")).to_dict())


@app.post("/api/sum-jumps")
def sum_jumps_endpoint(payload: Dict[str, Any] = Body(...)) -> Dict[str, Any]:
    _require(payload, "fn", "set")
    f = codec.function_from_dict(payload["fn"])
    phi = PhiSpec.parse(str(payload.get("phi", "power:1")))
    return _respond(phi_sum_of_jumps(f, phi, index_set_from_dict(payload["set"]), payload.get("tol")).to_dict())


@app.post("/api/count")
def count_endpoint(payload: Dict[str, Any] = Body(...)) -> Dict[str, Any]:
    _require(payload, "path", "rect")
    path = codec.path_from_json(payload["path"])
    return {"count": jump_counting_measure(path, codec.rectangle_from_dict(payload["rect"]))}


@app.post("/api/simulate")
def simulate_endpoint(payload: Dict[str, Any] = Body(...)) -> Dict[str, Any]:
    _require(payload, "model")
    model = codec.model_from_dict(payload["model"], seed=payload.get("seed"))
    return _respond(codec.path_to_dict(simulate(model)))


@app.post("/api/validate")
def validate_endpoint(payload: Dict[str, Any] = Body(...)) -> Dict[str, Any]:
    _require(payload, "fn")
    return _respond(validate(codec.function_from_dict(payload["fn"], strict=False)).to_dict())


@app.post("/api/sum")
def sum_endpoint(payload: Dict[str, Any] = Body(...)) -> Dict[str, Any]:
    _require(payload, "weights")
    family = codec.family_from_dict(payload["weights"])
    A = index_set_from_dict(payload["set"]) if "set" in payload else ALL
    return _respond(unordered_sum(family, A, payload.get("tol")).to_dict())


@app.post("/api/cumulate")
def cumulate_endpoint(payload: Dict[str, Any] = Body(...)) -> Dict[str, Any]:
    _require(payload, "weights")
    g = cumulative_jump_function(codec.family_from_dict(payload["weights"]), payload.get("tol"))
    values = [[float(t), eval_at(g, float(t))] for t in payload.get("at", [])]
    return _respond({"fn": codec.function_to_dict(g), "values": values})


@app.post("/api/stopping-times")
def stopping_times_endpoint(payload: Dict[str, Any] = Body(...)) -> Dict[str, Any]:
    _require(payload, "path")
    return _respond(stopping_times(codec.path_from_json(payload["path"])).to_dict())
