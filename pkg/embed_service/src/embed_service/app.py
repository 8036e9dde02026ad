"""The embedding HTTP service.

Routes:

* ``GET /health`` -> ``{"status": "ok", "model": <name>, "dim": <int>}``
* ``POST /embed`` with body ``{"texts": ["...", ...]}`` -> 200 and
  ``{"model": <name>, "dim": <int>, "vectors": [[...], ...]}`` with one
  unit-norm vector per input text, in request order.

Oversized batches are refused with 413, malformed bodies with 422.  When
the service is started with a shared token (or the EMBED_SERVICE_TOKEN
environment variable is set), requests must carry it as a bearer header.
"""

from __future__ import annotations

import os

from fastapi import Depends, FastAPI, HTTPException, Request
from pydantic import BaseModel, Field

TOKEN_ENV_VAR = "EMBED_SERVICE_TOKEN"
DEFAULT_BATCH_CAP = 256


class EmbedRequest(BaseModel):
    texts: list[str] = Field(min_length=1)


class EmbedResponse(BaseModel):
    model: str
    dim: int
    vectors: list[list[float]]


class HealthResponse(BaseModel):
    status: str
    model: str
    dim: int


def create_app(encoder, batch_cap: int = DEFAULT_BATCH_CAP,
               token: str | None = None) -> FastAPI:
    expected_token = token if token is not None else os.environ.get(TOKEN_ENV_VAR)
    app = FastAPI(title="embed-service")

    def authorize(request: Request) -> None:
        if not expected_token:
            return
        header = request.headers.get("Authorization", "")
        if header != f"Bearer {expected_token}":
            raise HTTPException(status_code=401, detail="missing or wrong token")

    def probe_dim() -> int:
        return encoder.encode(["probe"]).shape[1]

    dim = probe_dim()

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", model=encoder.name, dim=dim)

    @app.post("/embed", response_model=EmbedResponse)
    def embed(request: EmbedRequest, _: None = Depends(authorize)) -> EmbedResponse:
        if len(request.texts) > batch_cap:
            raise HTTPException(
                status_code=413,
                detail=f"batch of {len(request.texts)} exceeds cap {batch_cap}",
            )
        vectors = encoder.encode(request.texts)
        return EmbedResponse(
            model=encoder.name,
            dim=vectors.shape[1],
            vectors=[[float(v) for v in row] for row in vectors],
        )

    return app
