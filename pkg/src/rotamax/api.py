"""HTTP service exposing simulate, solve, and verify-bounds.

Thin wrapper over the service layer; every endpoint speaks the document
models from schemas, so CLI files post verbatim.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import __version__
from .errors import RotamaxError
from .schemas import (
    SimulateRequest,
    SimulateResponse,
    SolveRequest,
    SolveResponse,
    VerifyBoundsReport,
    VerifyBoundsRequest,
)
from .service import run_simulate, run_solve, run_verify_bounds

app = FastAPI(title="rotamax", version=__version__)


@app.get("/healthz")
def healthz() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/simulate", response_model=SimulateResponse)
def simulate_endpoint(req: SimulateRequest) -> SimulateResponse:
    try:
        return run_simulate(req)
    except (RotamaxError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.post("/solve", response_model=SolveResponse)
def solve_endpoint(req: SolveRequest) -> SolveResponse:
    try:
        return run_solve(req)
    except (RotamaxError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.post("/verify-bounds", response_model=VerifyBoundsReport)
def verify_bounds_endpoint(req: VerifyBoundsRequest) -> VerifyBoundsReport:
    try:
        return run_verify_bounds(req)
    except (RotamaxError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
