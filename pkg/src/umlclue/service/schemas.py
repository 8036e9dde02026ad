"""Request/response models for the scoring service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class DiagnosticOut(BaseModel):
    line: int
    column: int
    message: str


class ValidateRequest(BaseModel):
    code: str


class ValidateResponse(BaseModel):
    valid: bool
    diagnostics: list[DiagnosticOut] = []


class ExtractRequest(BaseModel):
    text: str


class ExtractResponse(BaseModel):
    status: str
    code: str


class ScoreRequest(BaseModel):
    reference: str = Field(description="reference diagram as PlantUML code")
    candidate: str = Field(description="candidate diagram as PlantUML code")
    weights: dict[str, float] | None = None


class ScoreResponse(BaseModel):
    clue: float
    clue_class: float
    clue_attribute: float
    clue_method: float
    clue_relation: float


class SampleCount(BaseModel):
    task_id: int | str = 0
    n: int
    c: int


class PassKRequest(BaseModel):
    records: list[SampleCount]
    k: int


class PassKResponse(BaseModel):
    value: float


class FeaturesIn(BaseModel):
    class_count: float
    avg_attributes: float
    avg_methods: float
    relationship_count: float
    readability: float


class DifficultyRequest(BaseModel):
    tasks: list[FeaturesIn]


class DifficultyResponse(BaseModel):
    weights: dict[str, float]
    thresholds: dict[str, float]
    ratings: list[float]
    bands: list[str]


class StatsRequest(BaseModel):
    x: list[float]
    y: list[float]


class StatsResponse(BaseModel):
    coefficient: float
    p_value: float
    n: int
