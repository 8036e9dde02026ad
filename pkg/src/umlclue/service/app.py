"""HTTP scoring service wrapping the core package.

Exposes the per-request operations (syntax validation, code extraction,
pair scoring, Pass@k, difficulty rating, correlations) so that graders and
dashboards can share one long-running process; the CLI can act as a thin
client against it.  Batch pipeline work (dataset evaluation, generation,
weight fitting) stays in the CLI.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..clue import RelationshipTypeLUT, WeightConfig, WeightConfigError, clue
from ..difficulty import DegenerateFeaturesError, TaskFeatures, difficulty_ratings
from ..passk import PassAtKDomainError, TaskSampleRecord, pass_at_k
from ..plantuml import extract_plantuml, parse
from ..semantics import LexicalProvider, cached
from ..stats import DegenerateInputError, pearson, spearman
from .schemas import (
    DiagnosticOut,
    DifficultyRequest,
    DifficultyResponse,
    ExtractRequest,
    ExtractResponse,
    HealthResponse,
    PassKRequest,
    PassKResponse,
    ScoreRequest,
    ScoreResponse,
    StatsRequest,
    StatsResponse,
    ValidateRequest,
    ValidateResponse,
)


def create_app(
    weights: WeightConfig | None = None,
    lut: RelationshipTypeLUT | None = None,
    provider=None,
) -> FastAPI:
    weights = weights or WeightConfig.default()
    lut = lut or RelationshipTypeLUT.default()
    provider = provider or cached(LexicalProvider())

    app = FastAPI(title="umlclue scoring service", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/validate", response_model=ValidateResponse)
    def validate_code(request: ValidateRequest) -> ValidateResponse:
        outcome = parse(request.code)
        return ValidateResponse(
            valid=outcome.ok,
            diagnostics=[
                DiagnosticOut(line=d.line, column=d.column, message=d.message)
                for d in outcome.diagnostics
            ],
        )

    @app.post("/extract", response_model=ExtractResponse)
    def extract(request: ExtractRequest) -> ExtractResponse:
        outcome = extract_plantuml(request.text)
        return ExtractResponse(status=outcome.status, code=outcome.code)

    @app.post("/score", response_model=ScoreResponse)
    def score(request: ScoreRequest) -> ScoreResponse:
        reference = parse(request.reference)
        if not reference.ok:
            raise HTTPException(
                status_code=400,
                detail=f"reference does not parse: {reference.diagnostics[0]}",
            )
        candidate = parse(request.candidate)
        if not candidate.ok:
            raise HTTPException(
                status_code=400,
                detail=f"candidate does not parse: {candidate.diagnostics[0]}",
            )
        try:
            config = (
                WeightConfig.from_mapping(request.weights) if request.weights else weights
            )
        except WeightConfigError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        scores = clue(reference.model, candidate.model, provider, config, lut)
        return ScoreResponse(**scores.to_mapping())

    @app.post("/passk", response_model=PassKResponse)
    def passk(request: PassKRequest) -> PassKResponse:
        try:
            records = [
                TaskSampleRecord(entry.task_id, entry.n, entry.c)
                for entry in request.records
            ]
            return PassKResponse(value=pass_at_k(records, request.k))
        except PassAtKDomainError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.post("/difficulty", response_model=DifficultyResponse)
    def difficulty(request: DifficultyRequest) -> DifficultyResponse:
        try:
            report = difficulty_ratings(
                [TaskFeatures(**entry.model_dump()) for entry in request.tasks]
            )
        except (ValueError, DegenerateFeaturesError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        doc = report.to_document()
        return DifficultyResponse(
            weights=doc["weights"],
            thresholds=doc["thresholds"],
            ratings=[float(r) for r in report.ratings],
            bands=report.bands,
        )

    @app.post("/stats/pearson", response_model=StatsResponse)
    def stats_pearson(request: StatsRequest) -> StatsResponse:
        try:
            result = pearson(request.x, request.y)
        except DegenerateInputError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return StatsResponse(coefficient=result.coefficient, p_value=result.p_value, n=result.n)

    @app.post("/stats/spearman", response_model=StatsResponse)
    def stats_spearman(request: StatsRequest) -> StatsResponse:
        try:
            result = spearman(request.x, request.y)
        except DegenerateInputError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return StatsResponse(coefficient=result.coefficient, p_value=result.p_value, n=result.n)

    return app
