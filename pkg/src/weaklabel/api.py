"""HTTP API over a project directory; the editor and review UI consume this.

All routes live under a versioned prefix and every JSON body carries the
project state version. Mutating endpoints take a module-level lock so only
one writer runs at a time; manifest saves additionally require the client's
base version to match (optimistic concurrency, first writer wins).
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import corpus as corpus_mod
from . import ops
from .dsl import LfParseError
from .models import TrainConfig
from .project import Project
from .schema import MULTI_CLASS

API_PREFIX = "/api/v1"


class ManifestPut(BaseModel):
    base_version: int
    task: str
    version: str = "v0"
    files: dict[str, str]


class AnalyzeRequest(BaseModel):
    task: str
    manifest: str | None = None


class FitRequest(BaseModel):
    task: str
    model: str = "cm"
    epochs: int | None = None
    batch_size: int | None = None
    learning_rate: float | None = None
    l2: float | None = None
    seed: int | None = None
    uniform_prior: bool = False
    a_fire: float = 0.9


class PredictRequest(BaseModel):
    task: str
    model_id: str | None = None
    threshold: float | None = None


class ReviewRequest(BaseModel):
    doc_id: str
    task: str
    label: str | dict[str, bool]
    reviewer: str = "annotator"


def create_app(root) -> FastAPI:
    root = Path(root)
    app = FastAPI(title="weaklabel", docs_url=None, redoc_url=None)
    write_lock = threading.Lock()

    def project() -> Project:
        instance = Project(root)
        instance.require_exists()
        return instance

    def current_version() -> int:
        return Project(root).state.version

    def ok(payload: dict, version: int, status_code: int = 200) -> JSONResponse:
        body = dict(payload)
        body["version"] = version
        return JSONResponse(body, status_code=status_code)

    @app.exception_handler(HTTPException)
    def _http_error(request, exc: HTTPException):
        return JSONResponse(
            {"error": exc.detail, "version": current_version()}, status_code=exc.status_code
        )

    @app.exception_handler(LfParseError)
    def _parse_error(request, exc: LfParseError):
        return JSONResponse(
            {
                "error": str(exc).splitlines()[0],
                "diagnostics": [d.to_json() for d in exc.diagnostics],
                "version": current_version(),
            },
            status_code=400,
        )

    @app.exception_handler(ValueError)
    def _user_error(request, exc: ValueError):
        message = str(exc).strip().splitlines()[0] if str(exc).strip() else type(exc).__name__
        return JSONResponse({"error": message, "version": current_version()}, status_code=400)

    @app.exception_handler(KeyError)
    def _key_error(request, exc: KeyError):
        return JSONResponse(
            {"error": str(exc).strip("'\""), "version": current_version()}, status_code=400
        )

    # -- project ----------------------------------------------------------
    @app.get(API_PREFIX + "/project")
    def get_project():
        p = project()
        tasks = {
            name: {"mode": schema.mode, "labels": list(schema.labels)}
            for name, schema in p.schemas.items()
        }
        return ok(
            {
                "settings": p.state.settings,
                "tasks": tasks,
                "manifests": p.state.manifests,
                "matrices": p.state.matrices,
                "models": p.state.models,
                "predictions": p.state.predictions,
            },
            p.state.version,
        )

    # -- documents ----------------------------------------------------------
    @app.get(API_PREFIX + "/documents")
    def list_documents(split: str | None = None, page: int = 1, page_size: int = 50):
        p = project()
        if split is not None and split not in corpus_mod.SPLITS:
            raise HTTPException(400, f"unknown split '{split}'")
        records = ops.document_records(p, split)
        page = max(1, page)
        page_size = max(1, min(page_size, 500))
        start = (page - 1) * page_size
        return ok(
            {
                "total": len(records),
                "page": page,
                "page_size": page_size,
                "items": records[start : start + page_size],
            },
            p.state.version,
        )

    @app.get(API_PREFIX + "/documents/{doc_id}")
    def get_document(doc_id: str):
        p = project()
        for record in ops.document_records(p):
            if record["id"] == doc_id:
                return ok({"document": record}, p.state.version)
        raise HTTPException(404, f"unknown document '{doc_id}'")

    # -- manifests ----------------------------------------------------------
    @app.get(API_PREFIX + "/manifests")
    def list_manifests():
        p = project()
        items = [
            {
                "name": name,
                "task": entry["task"],
                "manifest_version": entry["version"],
                "n_lfs": entry["n_lfs"],
            }
            for name, entry in sorted(p.state.manifests.items())
        ]
        return ok({"manifests": items}, p.state.version)

    @app.get(API_PREFIX + "/manifests/{name}")
    def get_manifest(name: str):
        p = project()
        if name not in p.state.manifests:
            raise HTTPException(404, f"unknown manifest '{name}'")
        entry = p.state.manifests[name]
        return ok(
            {
                "name": name,
                "task": entry["task"],
                "manifest_version": entry["version"],
                "files": ops.manifest_sources(p, name),
            },
            p.state.version,
        )

    @app.put(API_PREFIX + "/manifests/{name}")
    def put_manifest(name: str, body: ManifestPut):
        with write_lock:
            p = project()
            if body.base_version != p.state.version:
                return ok(
                    {
                        "error": (
                            f"stale base version {body.base_version}; "
                            f"current is {p.state.version}"
                        )
                    },
                    p.state.version,
                    status_code=409,
                )
            manifest, diagnostics = ops.validate_manifest_files(
                p, name, body.task, body.version, body.files
            )
            diagnostics_json = [d.to_json() for d in diagnostics]
            if manifest is None:
                return ok({"diagnostics": diagnostics_json}, p.state.version, status_code=422)
            ops.register_manifest(p, manifest, save_state=False)
            ops.build_matrix(p, manifest.task, manifest.name, save_state=False)
            p.save()
            report = ops.analyze_task(p, manifest.task)
            return ok(
                {"name": name, "diagnostics": diagnostics_json, "analysis": report.to_json()},
                p.state.version,
            )

    # -- analysis and models -------------------------------------------------
    @app.post(API_PREFIX + "/analyze")
    def analyze(body: AnalyzeRequest):
        with write_lock:
            p = project()
            report = ops.analyze_task(p, body.task, body.manifest)
            return ok({"analysis": report.to_json()}, p.state.version)

    @app.post(API_PREFIX + "/fit")
    def fit(body: FitRequest):
        with write_lock:
            p = project()
            if body.model not in ("mv", "cm"):
                raise HTTPException(400, f"unknown model '{body.model}' (expected mv or cm)")
            defaults = TrainConfig()
            config = TrainConfig(
                learning_rate=(
                    defaults.learning_rate if body.learning_rate is None else body.learning_rate
                ),
                l2=defaults.l2 if body.l2 is None else body.l2,
                epochs=defaults.epochs if body.epochs is None else body.epochs,
                batch_size=defaults.batch_size if body.batch_size is None else body.batch_size,
                seed=p.state.settings.get("seed", 0) if body.seed is None else body.seed,
            )
            model_id = ops.fit_task(
                p,
                body.task,
                model=body.model,
                config=config,
                uniform_prior=body.uniform_prior,
                a_fire=body.a_fire,
            )
            return ok(
                {"model_id": model_id, "model": p.state.models[model_id]}, p.state.version
            )

    @app.post(API_PREFIX + "/predict")
    def predict(body: PredictRequest):
        with write_lock:
            p = project()
            entry = ops.predict_task(
                p, body.task, model_id=body.model_id, threshold=body.threshold
            )
            return ok({"task": body.task, "predictions": entry}, p.state.version)

    @app.get(API_PREFIX + "/predictions/{task}")
    def predictions(task: str, kind: str = "soft", page: int = 1, page_size: int = 50):
        p = project()
        records = ops.load_predictions(p, task, kind)
        schema = p.schemas[task]
        items = []
        for doc in p.load_documents():
            if doc.id not in records:
                continue
            item = {"id": doc.id, "split": doc.split or "train"}
            value = records[doc.id]
            if kind == "soft":
                item["probs"] = value
            elif schema.mode == MULTI_CLASS:
                item["label"] = value
            else:
                item["labels"] = value
            items.append(item)
        page = max(1, page)
        page_size = max(1, min(page_size, 500))
        start = (page - 1) * page_size
        return ok(
            {
                "task": task,
                "kind": kind,
                "model_id": p.state.predictions[task]["model_id"],
                "total": len(items),
                "page": page,
                "page_size": page_size,
                "items": items[start : start + page_size],
            },
            p.state.version,
        )

    # -- review ---------------------------------------------------------------
    @app.get(API_PREFIX + "/review-queue/{task}")
    def review_queue(task: str, split: str | None = None, only_conflicted: bool = False):
        p = project()
        items = ops.review_queue(p, task, split=split, only_conflicted=only_conflicted)
        progress = ops.review_progress(p, task, split=split)
        return ok({"task": task, "items": items, "progress": progress}, p.state.version)

    @app.post(API_PREFIX + "/reviews")
    def post_review(body: ReviewRequest):
        with write_lock:
            p = project()
            record = ops.review(p, body.doc_id, body.task, body.label, reviewer=body.reviewer)
            return ok({"record": ops.gold_record_to_json(record)}, p.state.version)

    # -- evaluation and export -------------------------------------------------
    @app.get(API_PREFIX + "/metrics/{task}")
    def metrics(task: str, split: str = "validation", threshold: float | None = None):
        p = project()
        report = ops.evaluate_task(p, task, split=split, threshold=threshold)
        return ok({"metrics": report.to_json()}, p.state.version)

    @app.get(API_PREFIX + "/export/{task}")
    def export(task: str, split: str, labels: str = "soft"):
        p = project()
        records = ops.export_records(p, task, split, labels)
        return ok(
            {"task": task, "split": split, "labels": labels, "records": records},
            p.state.version,
        )

    return app
