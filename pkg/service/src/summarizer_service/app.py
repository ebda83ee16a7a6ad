"""FastAPI app implementing the summarizer wire protocol.

Endpoints:
  GET  /health     -> 200 {"status": "ok"} once the engine is loaded, else 503
  POST /summarize  -> 200 {"summaries": [{"beam_width": int, "text": str}]}
                      with one entry per requested width, in request order;
                      errors are non-200 with {"error": str}

Environment: CTXGEN_MODEL_PATH selects a transformers checkpoint (otherwise
the built-in deterministic condenser is used); CTXGEN_PORT sets the port.
"""

from __future__ import annotations

import logging
import os
import threading
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from summarizer_service.engine import CheckpointEngine, CondenserEngine, SummaryEngine

log = logging.getLogger(__name__)


class SummarizeRequest(BaseModel):
    text: str
    beam_widths: list[int]


def default_engine_factory() -> SummaryEngine:
    model_path = os.environ.get("CTXGEN_MODEL_PATH")
    if model_path:
        log.info("loading checkpoint from %s", model_path)
        return CheckpointEngine(model_path)
    log.info("no CTXGEN_MODEL_PATH set; using the built-in condenser engine")
    return CondenserEngine()


def create_app(engine_factory=default_engine_factory) -> FastAPI:
    state = {"engine": None, "error": "engine not loaded yet"}
    generate_lock = threading.Lock()

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        try:
            state["engine"] = engine_factory()
            state["error"] = None
        except Exception as exc:
            state["error"] = f"engine load failed: {exc}"
            log.exception("engine load failed")
        yield

    app = FastAPI(title="summarizer-service", lifespan=lifespan)

    @app.exception_handler(RequestValidationError)
    async def malformed_request(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc.errors())})

    @app.get("/health")
    def health():
        if state["engine"] is None:
            return JSONResponse(status_code=503, content={"error": state["error"]})
        return {"status": "ok"}

    @app.post("/summarize")
    def summarize(request: SummarizeRequest):
        if state["engine"] is None:
            return JSONResponse(status_code=503, content={"error": state["error"]})
        if not request.text.strip():
            return JSONResponse(status_code=400, content={"error": "text must be non-empty"})
        if not request.beam_widths or any(w < 1 for w in request.beam_widths):
            return JSONResponse(
                status_code=400, content={"error": "beam_widths must each be >= 1"}
            )
        summaries = []
        with generate_lock:  # single model instance, serialized generation
            for width in request.beam_widths:
                summaries.append(
                    {"beam_width": width, "text": state["engine"].summarize(request.text, width)}
                )
        return {"summaries": summaries}

    return app


app = create_app()


def serve():
    import uvicorn

    port = int(os.environ.get("CTXGEN_PORT", "8757"))
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="info")


if __name__ == "__main__":
    serve()
