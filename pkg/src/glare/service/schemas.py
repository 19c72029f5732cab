"""Request/response models for the readability service."""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field

MetricKey = Literal["nc", "ma", "ml", "ec", "eca"]


class PositionRow(BaseModel):
    id: int
    x: float
    y: float


class GraphPayload(BaseModel):
    """A laid-out graph: id pairs plus one position row per vertex."""

    edges: list[tuple[int, int]]
    positions: list[PositionRow]


class ParamsModel(BaseModel):
    """Metric parameters as they appear on the wire (angle in degrees)."""

    radius: float = 0.5
    ideal_angle_deg: float = 70.0
    strip_fraction: float = 0.05
    orientation: Literal["vertical", "horizontal", "both"] = "vertical"
    threads: int = Field(default=1, ge=1)


class EvaluateRequest(BaseModel):
    graph: GraphPayload
    mode: Literal["oracle", "exact", "exact-parallel", "enhanced"] = "oracle"
    metrics: Optional[list[MetricKey]] = None
    params: ParamsModel = ParamsModel()


class ReportModel(BaseModel):
    mode: Literal["oracle", "exact-parallel", "enhanced"]
    metrics: dict[str, Union[int, float, None]]
    params: dict[str, Union[int, float, str]]
    elapsed: dict[str, float]
    warnings: list[str]


class CompareRequest(BaseModel):
    graph: GraphPayload
    metrics: Optional[list[MetricKey]] = None
    params: ParamsModel = ParamsModel()


class CompareRow(BaseModel):
    metric: str
    oracle: Union[int, float]
    enhanced: Union[int, float]
    pct_error: Optional[float]
    flagged: bool


class CompareResponse(BaseModel):
    rows: list[CompareRow]


class BenchRequest(BaseModel):
    graph: GraphPayload
    mode: Literal["oracle", "exact", "exact-parallel", "enhanced"] = "enhanced"
    metrics: Optional[list[MetricKey]] = None
    threads_list: list[int] = [1, 2, 4]
    params: ParamsModel = ParamsModel()


class BenchRow(BaseModel):
    threads: int
    metric: str
    value: Union[int, float]
    seconds: float
    speedup: float


class BenchResponse(BaseModel):
    rows: list[BenchRow]


class GenerateRequest(BaseModel):
    edges: list[tuple[int, int]]
    kind: Literal["random", "fr"] = "random"
    seed: int = 0
    extent: float = 100.0
    iterations: int = 50


class GenerateResponse(BaseModel):
    positions: list[PositionRow]


class HealthResponse(BaseModel):
    status: Literal["ok"] = "ok"
