"""HTTP surface over the evaluation engine.

Endpoints accept fully materialized graphs (edges plus positions), so the
service is stateless and deterministic: identical payloads give identical
results up to timing fields. Domain errors map to structured JSON bodies —
bad parameters and bad inputs are 400 with the error class named, internal
invariant breaches are 500.
"""

from __future__ import annotations

import math

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import engine
from ..dataflow import ExecConfig
from ..model import GlareError, InputError, InvariantError, LayoutGraph, MetricParams
from .schemas import (
    BenchRequest,
    BenchResponse,
    BenchRow,
    CompareRequest,
    CompareResponse,
    CompareRow,
    EvaluateRequest,
    GenerateRequest,
    GenerateResponse,
    GraphPayload,
    HealthResponse,
    ParamsModel,
    PositionRow,
    ReportModel,
)


def _to_graph(payload: GraphPayload) -> LayoutGraph:
    positions = {row.id: (row.x, row.y) for row in payload.positions}
    if len(positions) != len(payload.positions):
        raise InputError("duplicate vertex ids in positions")
    return LayoutGraph.from_positions(positions, payload.edges)


def _to_params(model: ParamsModel) -> MetricParams:
    return MetricParams(
        radius=model.radius,
        ideal_angle=math.radians(model.ideal_angle_deg),
        strip_fraction=model.strip_fraction,
        orientation=model.orientation,
    )


def _canonical_mode(mode: str) -> str:
    return "exact-parallel" if mode == "exact" else mode


def create_app() -> FastAPI:
    app = FastAPI(title="graph layout readability service")

    @app.exception_handler(GlareError)
    def _domain_error(_request, exc: GlareError):
        status = 500 if isinstance(exc, InvariantError) else 400
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    @app.get("/healthz", response_model=HealthResponse)
    def healthz() -> HealthResponse:
        return HealthResponse()

    @app.post("/evaluate", response_model=ReportModel)
    def evaluate(req: EvaluateRequest) -> ReportModel:
        g = _to_graph(req.graph)
        report = engine.evaluate(
            g,
            _canonical_mode(req.mode),
            _to_params(req.params),
            ExecConfig(workers=req.params.threads),
            req.metrics,
        )
        return ReportModel(**report.to_dict())

    @app.post("/compare", response_model=CompareResponse)
    def compare(req: CompareRequest) -> CompareResponse:
        g = _to_graph(req.graph)
        rows = engine.compare(
            g,
            _to_params(req.params),
            ExecConfig(workers=req.params.threads),
            req.metrics,
        )
        return CompareResponse(rows=[CompareRow(**row) for row in rows])

    @app.post("/bench", response_model=BenchResponse)
    def bench(req: BenchRequest) -> BenchResponse:
        g = _to_graph(req.graph)
        rows = engine.bench(
            g,
            _canonical_mode(req.mode),
            req.threads_list,
            _to_params(req.params),
            req.metrics,
        )
        return BenchResponse(rows=[BenchRow(**row) for row in rows])

    @app.post("/generate", response_model=GenerateResponse)
    def generate(req: GenerateRequest) -> GenerateResponse:
        g = engine.generate_layout(
            req.edges,
            kind=req.kind,
            seed=req.seed,
            extent=req.extent,
            iterations=req.iterations,
        )
        rows = [
            PositionRow(id=vid, x=x, y=y)
            for vid, (x, y) in zip(g.ids.tolist(), g.xy.tolist())
        ]
        return GenerateResponse(positions=rows)

    return app


app = create_app()
