"""HTTP facade over the experiment runner.

The service exposes exactly what the library computes, as pydantic
models: configs go in, the full run payload (records, summary, text,
pre-rendered CSV and extras) comes out.  Clients that persist the
returned strings verbatim get files identical to a local run, which is
what keeps the CLI a thin client rather than a second implementation.

Library errors map onto HTTP statuses but always carry the structured
error record, including the process exit code a CLI should use:

    ConfigError                -> 422, exit_code 2
    BudgetExceededError        -> 409, exit_code 3
    SolverBudgetError          -> 409, exit_code 3
    InternalInconsistencyError -> 500, exit_code 4
    other SparselabError       -> 400, exit_code 1
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from . import __version__
from .config import EXPERIMENT_NAMES, ExperimentConfig, parse_config
from .errors import (
    BudgetExceededError,
    ConfigError,
    InternalInconsistencyError,
    SolverBudgetError,
    SparselabError,
    exit_code_for,
)
from .runner import records_to_csv, run_experiment

__all__ = [
    "RecordModel",
    "RunResponse",
    "ValidateRequest",
    "ValidateResponse",
    "ExperimentsResponse",
    "HealthResponse",
    "ErrorRecord",
    "create_app",
    "app",
]


class RecordModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    experiment: str
    N: int
    n: int
    trial: int
    statistic: str
    value: float
    seed: int


class RunResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    experiment: str
    config: dict
    summary: dict
    text: str
    records: list[RecordModel]
    samples_csv: str
    extra_files: dict[str, str]


class ValidateRequest(BaseModel):
    # free-form payload; validation happens against ExperimentConfig
    model_config = ConfigDict(extra="allow")


class ValidateResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    valid: bool
    error: str | None = None
    config: dict | None = None


class ExperimentsResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    experiments: list[str]


class HealthResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    status: str
    version: str


class ErrorRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: str
    message: str
    exit_code: int


_HTTP_STATUS = {
    ConfigError: 422,
    BudgetExceededError: 409,
    SolverBudgetError: 409,
    InternalInconsistencyError: 500,
}


def _error_response(exc: SparselabError) -> JSONResponse:
    status = 400
    for cls, code in _HTTP_STATUS.items():
        if isinstance(exc, cls):
            status = code
            break
    record = ErrorRecord(
        type=type(exc).__name__, message=str(exc), exit_code=exit_code_for(exc)
    )
    return JSONResponse(status_code=status, content={"error": record.model_dump()})


def create_app() -> FastAPI:
    app = FastAPI(title="sparselab", version=__version__)

    @app.exception_handler(SparselabError)
    async def _lib_error(request: Request, exc: SparselabError):
        return _error_response(exc)

    @app.exception_handler(RequestValidationError)
    async def _body_error(request: Request, exc: RequestValidationError):
        record = ErrorRecord(type="ConfigError", message=str(exc), exit_code=2)
        return JSONResponse(status_code=422, content={"error": record.model_dump()})

    @app.get("/api/health", response_model=HealthResponse)
    async def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.get("/api/experiments", response_model=ExperimentsResponse)
    async def experiments() -> ExperimentsResponse:
        return ExperimentsResponse(experiments=list(EXPERIMENT_NAMES))

    @app.post("/api/validate", response_model=ValidateResponse)
    async def validate(payload: ValidateRequest) -> ValidateResponse:
        try:
            cfg = parse_config(payload.model_dump())
        except ConfigError as exc:
            return ValidateResponse(valid=False, error=str(exc))
        return ValidateResponse(valid=True, config=cfg.model_dump(mode="json"))

    @app.post("/api/run", response_model=RunResponse)
    def run(cfg: ExperimentConfig) -> RunResponse:
        result = run_experiment(cfg)
        return RunResponse(
            experiment=cfg.experiment,
            config=cfg.model_dump(mode="json"),
            summary=_plain(result.summary),
            text=result.text,
            records=[RecordModel(**r.as_dict()) for r in result.records],
            samples_csv=records_to_csv(result.records),
            extra_files=dict(result.extra_files),
        )

    return app


def _plain(obj):
    # summaries may hold numpy scalars/arrays; JSON needs plain python
    from .runner import _jsonable

    return _jsonable(obj)


app = create_app()
