"""HTTP prediction service.

Read-only by design: bundles are loaded once at startup and never mutated,
so responses are a pure function of the request body and any number of
clients can hit the endpoints concurrently.

Endpoints:
  GET  /api/schema      input-field descriptors, vendors, metric catalog
  POST /api/predict     {"spec": {...}} -> predictions for all nine metrics
  GET  /api/importance  normalized feature-importance matrix, if trained

Errors: 400 for malformed JSON, 422 with the offending field name for
invalid input, 500 otherwise.  Static UI assets, when configured, are served
under /.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .features import UnknownVendorError
from .serving import (
    ModelSet,
    SpecFieldError,
    load_importance_file,
    load_model_dir,
    parse_spec_fields,
    prediction_set,
    schema_payload,
)

__all__ = ["create_app"]


def create_app(model_dir: str | Path, static_dir: str | Path | None = None) -> FastAPI:
    modelset: ModelSet = load_model_dir(model_dir)
    importance = load_importance_file(model_dir)
    schema_doc = schema_payload(modelset)

    app = FastAPI(title="uxcast prediction service", docs_url=None, redoc_url=None)

    @app.get("/api/schema")
    def get_schema():
        return schema_doc

    @app.get("/api/importance")
    def get_importance():
        if importance is None:
            return JSONResponse(
                status_code=404, content={"error": "no importance matrix available"}
            )
        return importance.to_json_obj()

    @app.post("/api/predict")
    async def post_predict(request: Request):
        body = await request.body()
        try:
            payload = json.loads(body)
        except json.JSONDecodeError:
            return JSONResponse(status_code=400, content={"error": "malformed JSON body"})
        if not isinstance(payload, dict) or "spec" not in payload:
            return JSONResponse(
                status_code=422,
                content={"error": "body must be an object with a 'spec' field",
                         "field": "spec"},
            )
        if not isinstance(payload["spec"], dict):
            return JSONResponse(
                status_code=422,
                content={"error": "'spec' must be an object", "field": "spec"},
            )
        try:
            spec = parse_spec_fields(payload["spec"])
            return prediction_set(modelset, spec)
        except UnknownVendorError as exc:
            return JSONResponse(
                status_code=422, content={"error": str(exc), "field": "cpu_vendor"}
            )
        except SpecFieldError as exc:
            return JSONResponse(
                status_code=422, content={"error": str(exc), "field": exc.field}
            )

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    else:
        @app.get("/")
        def index():
            return {
                "service": "uxcast",
                "bundle_version": modelset.bundle_version,
                "endpoints": ["/api/schema", "/api/predict", "/api/importance"],
            }

    return app
