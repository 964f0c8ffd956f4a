"""Project operations: one function per CLI subcommand and API endpoint.

The CLI and the HTTP API are thin shells over this module, so the two
surfaces cannot drift apart. Every operation loads what it needs from the
project directory, writes derived files atomically, then registers them in
project.json. The registry write is the commit point; a crash before it
leaves the previous consistent state on disk.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from pathlib import Path

import numpy as np
import yaml

from . import analysis
from . import corpus as corpus_mod
from . import models as models_mod
from . import runtime
from .bundled import bundled_manifest_names, load_bundled_manifest
from .dsl import (
    Diagnostic,
    LfParseError,
    Manifest,
    check_lf_source,
    load_manifest,
    manifest_from_sources,
    save_manifest,
    validate_project,
)
from .evaluation import (
    GoldRecord,
    GoldStore,
    evaluate_multiclass,
    evaluate_multilabel,
    record_review,
)
from .project import (
    MANIFESTS_DIR,
    Project,
    ProjectError,
    fingerprint_text,
    write_json_atomic,
    write_text_atomic,
)
from .schema import MULTI_CLASS, MULTI_LABEL

DEFAULT_THRESHOLD = 0.5


# ---------------------------------------------------------------------------
# Ingest


def ingest(
    root,
    raw_path,
    max_tokens: int = corpus_mod.DEFAULT_MAX_TOKENS,
    train_ratio: float = 0.8,
    validation_ratio: float = 0.1,
    seed: int = 0,
    include_bundled: bool = True,
) -> Project:
    """Create a project: chunk raw articles, assign splits, register rule sets.

    The bundled manifests ship with the package so a fresh project can apply,
    analyze and fit without authoring rules first.
    """
    project = Project(root)
    if project.exists():
        raise ProjectError(f"project already exists at {project.root}; ingest needs a fresh directory")
    articles = corpus_mod.load_raw_articles(raw_path)
    docs = corpus_mod.chunk_corpus(articles, max_tokens=max_tokens)
    if not docs:
        raise ProjectError(f"no documents produced from {raw_path}")
    spec = corpus_mod.SplitSpec.from_ratios(len(docs), train=train_ratio, validation=validation_ratio)
    docs = corpus_mod.assign_splits(docs, spec, seed)
    project.root.mkdir(parents=True, exist_ok=True)
    project.save_documents(docs)
    project.state.settings = {
        "seed": seed,
        "max_tokens": max_tokens,
        "train_ratio": train_ratio,
        "validation_ratio": validation_ratio,
        "joiner": corpus_mod.DEFAULT_JOINER,
        "threshold": DEFAULT_THRESHOLD,
        "n_articles": len(articles),
        "n_documents": len(docs),
    }
    if include_bundled:
        for name in bundled_manifest_names():
            register_manifest(project, load_bundled_manifest(name), save_state=False)
    project.save()
    return project


def document_splits(docs: list[corpus_mod.Document]) -> dict[str, str]:
    return {doc.id: doc.split or "train" for doc in docs}


# ---------------------------------------------------------------------------
# Manifests


def register_manifest(project: Project, manifest: Manifest, save_state: bool = True) -> None:
    """Write a manifest into the project and record it in the registry."""
    if manifest.task not in project.schemas:
        raise ProjectError(f"manifest '{manifest.name}' targets unknown task '{manifest.task}'")
    existing = project.state.manifests.get(manifest.name)
    if existing is not None and existing["task"] != manifest.task:
        raise ProjectError(
            f"manifest '{manifest.name}' is registered for task '{existing['task']}'; "
            f"it cannot switch to '{manifest.task}'"
        )
    save_manifest(manifest, project.root / MANIFESTS_DIR)
    project.state.manifests[manifest.name] = {
        "task": manifest.task,
        "version": manifest.version,
        "n_lfs": len(manifest.specs),
    }
    if save_state:
        project.save()


def get_manifest(project: Project, name: str) -> Manifest:
    project.require_exists()
    if name not in project.state.manifests:
        known = ", ".join(sorted(project.state.manifests)) or "none"
        raise ProjectError(f"unknown manifest '{name}' (registered: {known})")
    return load_manifest(project.manifest_dir(name) / "manifest.yaml", project.schemas)


def manifest_sources(project: Project, name: str) -> dict[str, str]:
    """Raw rule-file text keyed by file name, for editors."""
    project.require_exists()
    if name not in project.state.manifests:
        known = ", ".join(sorted(project.state.manifests)) or "none"
        raise ProjectError(f"unknown manifest '{name}' (registered: {known})")
    directory = project.manifest_dir(name)
    data = yaml.safe_load((directory / "manifest.yaml").read_text(encoding="utf-8"))
    return {rel: (directory / rel).read_text(encoding="utf-8") for rel in data["lfs"]}


def resolve_manifest_name(project: Project, task: str, name: str | None) -> str:
    """Accept either a full manifest name or a short version suffix like "v0"."""
    if name is None:
        entry = project.state.matrices.get(task)
        if entry is not None:
            return entry["manifest"]
        candidates = [n for n, e in project.state.manifests.items() if e["task"] == task]
        if len(candidates) == 1:
            return candidates[0]
        if not candidates:
            raise ProjectError(f"no manifest registered for task '{task}'")
        raise ProjectError(
            f"task '{task}' has several manifests ({', '.join(sorted(candidates))}); pick one"
        )
    if name in project.state.manifests:
        return name
    prefixed = f"{task}-{name}"
    if prefixed in project.state.manifests:
        return prefixed
    known = ", ".join(sorted(project.state.manifests)) or "none"
    raise ProjectError(f"unknown manifest '{name}' (registered: {known})")


def check_manifests(project: Project, names: list[str] | None = None) -> dict[str, list[Diagnostic]]:
    """Parse and validate rule sets; returns diagnostics per manifest, empty list = clean."""
    project.require_exists()
    if names is None:
        names = sorted(project.state.manifests)
    report: dict[str, list[Diagnostic]] = {}
    for name in names:
        try:
            manifest = get_manifest(project, name)
        except LfParseError as exc:
            report[name] = list(exc.diagnostics)
            continue
        report[name] = list(validate_project(list(manifest.specs), project.schemas).diagnostics)
    return report


def validate_manifest_files(
    project: Project, name: str, task: str, version: str, files: dict[str, str]
) -> tuple[Manifest | None, list[Diagnostic]]:
    """Validate editor-submitted rule files; returns the manifest when clean.

    Diagnostics keep their line/column positions and are tagged with the file
    they came from so an editor can render them inline.
    """
    diagnostics: list[Diagnostic] = []
    if task not in project.schemas:
        diagnostics.append(Diagnostic("error", "unknown-task", f"unknown task '{task}'"))
    existing = project.state.manifests.get(name)
    if existing is not None and existing["task"] != task:
        diagnostics.append(
            Diagnostic(
                "error",
                "task-mismatch",
                f"manifest '{name}' is registered for task '{existing['task']}'",
            )
        )
    if not files:
        diagnostics.append(Diagnostic("error", "syntax", "a manifest needs at least one rule file"))
    for file_name, source in sorted(files.items()):
        if file_name == "manifest.yaml":
            diagnostics.append(
                Diagnostic(
                    "error",
                    "reserved-file",
                    "manifest.yaml is generated from the request; submit rule files only",
                    lf_name=file_name,
                )
            )
            continue
        for diag in check_lf_source(source, project.schemas):
            if diag.lf_name is None:
                diag = dataclasses.replace(diag, lf_name=file_name)
            diagnostics.append(diag)
    if any(d.severity == "error" for d in diagnostics):
        return None, diagnostics
    manifest = manifest_from_sources(
        name=name, task=task, version=version, sources=files, schemas=project.schemas
    )
    diagnostics.extend(validate_project(list(manifest.specs), project.schemas).diagnostics)
    if any(d.severity == "error" for d in diagnostics):
        return None, diagnostics
    return manifest, diagnostics


# ---------------------------------------------------------------------------
# Matrices


def build_matrix(
    project: Project,
    task: str,
    manifest_name: str | None = None,
    stage1_model: str = "mv",
    threshold: float | None = None,
    use_gold_tags: bool = False,
    seed: int | None = None,
    save_state: bool = True,
) -> dict:
    """Apply a rule set to the corpus and persist the vote matrix plus metadata.

    Second-stage tasks consume the first stage's predicted tags, so building
    their matrix re-runs tag aggregation on the fly with the active tags
    manifest.
    """
    project.require_exists()
    if task not in project.schemas:
        raise ProjectError(f"unknown task '{task}'")
    schema = project.schemas[task]
    name = resolve_manifest_name(project, task, manifest_name)
    manifest = get_manifest(project, name)
    if manifest.task != task:
        raise ProjectError(f"manifest '{name}' targets task '{manifest.task}', not '{task}'")
    docs = project.load_documents()
    threshold = DEFAULT_THRESHOLD if threshold is None else threshold
    seed = project.state.settings.get("seed", 0) if seed is None else seed

    stage1_meta = None
    if schema.mode == MULTI_LABEL:
        matrix = runtime.apply_lfs(docs, list(manifest.specs), schema)
    else:
        tags_name = resolve_manifest_name(project, "tags", None)
        tags_manifest = get_manifest(project, tags_name)
        gold_tags = None
        if use_gold_tags:
            store = GoldStore(project.gold_dir(), document_splits(docs))
            gold_tags = store.labels_for("tags")
        result = runtime.run_pipeline(
            docs,
            tags_manifest,
            manifest,
            project.schemas,
            stage1_model=stage1_model,
            threshold=threshold,
            use_gold_tags=use_gold_tags,
            gold_tags=gold_tags,
            seed=seed,
        )
        matrix = result.sentiment_matrix
        stage1_meta = {
            "manifest": tags_name,
            "model": stage1_model,
            "threshold": threshold,
            "use_gold_tags": use_gold_tags,
        }

    text = runtime.dumps_matrix(matrix)
    fingerprint = fingerprint_text(text)
    meta = {
        "task": task,
        "manifest": name,
        "manifest_version": manifest.version,
        "fingerprint": fingerprint,
        "n_docs": matrix.n,
        "n_lfs": matrix.m,
        "lf_targets": list(matrix.lf_targets) if matrix.lf_targets is not None else None,
        "stage1": stage1_meta,
    }
    write_text_atomic(project.matrix_path(task), text)
    write_json_atomic(project.matrix_meta_path(task), meta)
    project.state.matrices[task] = {
        "manifest": name,
        "fingerprint": fingerprint,
        "n_docs": matrix.n,
        "n_lfs": matrix.m,
    }
    # Predictions built from the previous matrix no longer describe this one.
    project.state.predictions.pop(task, None)
    if save_state:
        project.save()
    return meta


def load_matrix(project: Project, task: str) -> tuple[runtime.LabelMatrix, dict]:
    project.require_exists()
    meta_path = project.matrix_meta_path(task)
    matrix_path = project.matrix_path(task)
    if not meta_path.is_file() or not matrix_path.is_file():
        raise ProjectError(f"no matrix built for task '{task}' (run apply first)")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    text = matrix_path.read_text(encoding="utf-8")
    if fingerprint_text(text) != meta["fingerprint"]:
        raise ProjectError(
            f"matrix file for task '{task}' does not match its recorded fingerprint; rebuild with apply"
        )
    targets = meta.get("lf_targets")
    matrix = runtime.loads_matrix(
        text,
        project.schemas[task],
        lf_targets=tuple(targets) if targets is not None else None,
    )
    return matrix, meta


def analyze_task(project: Project, task: str, manifest_name: str | None = None) -> analysis.AnalysisReport:
    """Coverage/overlap/conflict report for the task's current matrix.

    Naming a manifest other than the one the matrix was built from rebuilds
    the matrix first, so the report always describes what it claims to.
    """
    project.require_exists()
    if task not in project.schemas:
        raise ProjectError(f"unknown task '{task}'")
    entry = project.state.matrices.get(task)
    if manifest_name is not None:
        wanted = resolve_manifest_name(project, task, manifest_name)
        if entry is None or entry["manifest"] != wanted:
            build_matrix(project, task, wanted)
    elif entry is None:
        build_matrix(project, task)
    matrix, meta = load_matrix(project, task)
    return analysis.analyze(matrix, manifest=meta["manifest"])


# ---------------------------------------------------------------------------
# Models


def train_config_to_json(config: models_mod.TrainConfig) -> dict:
    return dataclasses.asdict(config)


def train_config_from_json(data: dict) -> models_mod.TrainConfig:
    return models_mod.TrainConfig(**data)


def _model_identity(task: str, kind: str, config_json: dict, extras: dict, fingerprint: str) -> str:
    payload = {
        "task": task,
        "kind": kind,
        "config": config_json,
        "extras": extras,
        "matrix_fingerprint": fingerprint,
    }
    digest = hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()
    return digest[:12]


def fit_task(
    project: Project,
    task: str,
    model: str = "cm",
    config: models_mod.TrainConfig | None = None,
    uniform_prior: bool = False,
    a_fire: float = 0.9,
) -> str:
    """Fit an aggregation model on the task's matrix; returns the model id.

    The id is a digest of everything that determines the fit, so refitting
    with the same inputs rewrites the same file with the same bytes.
    """
    project.require_exists()
    if model not in ("mv", "cm"):
        raise ProjectError(f"unknown model '{model}' (expected mv or cm)")
    matrix, meta = load_matrix(project, task)
    schema = project.schemas[task]
    if config is None:
        config = models_mod.TrainConfig(seed=project.state.settings.get("seed", 0))
    config_json = train_config_to_json(config)

    if schema.mode == MULTI_LABEL:
        extras = {"a_fire": a_fire}
        fitted = models_mod.fit_tag_model(
            matrix, model=model, a_fire=a_fire, train_config=config, seed=config.seed
        )
        params = fitted.to_json()
    elif model == "cm":
        extras = {"uniform_prior": uniform_prior}
        fitted = models_mod.fit_covariance_model(matrix, config=config, uniform_prior=uniform_prior)
        params = fitted.to_json()
    else:
        extras = {"uniform_prior": uniform_prior}
        prior = (
            models_mod.ClassPrior.uniform(schema.k)
            if uniform_prior
            else models_mod.mv_prior(matrix)
        )
        params = {
            "task": task,
            "labels": list(schema.labels),
            "lf_names": list(matrix.lf_names),
            "prior": prior.p.tolist(),
        }

    model_id = _model_identity(task, model, config_json, extras, meta["fingerprint"])
    entry = {
        "task": task,
        "kind": model,
        "manifest": meta["manifest"],
        "matrix_fingerprint": meta["fingerprint"],
        "config": config_json,
        "extras": extras,
    }
    document = dict(entry)
    document["model_id"] = model_id
    document["params"] = params
    write_json_atomic(project.model_path(model_id), document)
    registry_entry = dict(entry)
    registry_entry["fitted_at_version"] = project.state.version + 1
    project.state.models[model_id] = registry_entry
    project.save()
    return model_id


def _latest_model_id(project: Project, task: str) -> str:
    best = None
    for model_id, entry in project.state.models.items():
        if entry["task"] != task:
            continue
        key = (entry.get("fitted_at_version", 0), model_id)
        if best is None or key > best[0]:
            best = (key, model_id)
    if best is None:
        raise ProjectError(f"no model fitted for task '{task}' (run fit first)")
    return best[1]


def load_model(project: Project, model_id: str) -> dict:
    project.require_exists()
    path = project.model_path(model_id)
    if model_id not in project.state.models or not path.is_file():
        raise ProjectError(f"unknown model '{model_id}'")
    return json.loads(path.read_text(encoding="utf-8"))


def predict_task(
    project: Project,
    task: str,
    model_id: str | None = None,
    threshold: float | None = None,
) -> dict:
    """Write soft and hard prediction files for every document.

    Refuses a model whose recorded matrix fingerprint differs from the
    current matrix: predictions must come from the matrix the model saw.
    """
    project.require_exists()
    matrix, meta = load_matrix(project, task)
    if model_id is None:
        model_id = _latest_model_id(project, task)
    document = load_model(project, model_id)
    if document["task"] != task:
        raise ProjectError(f"model '{model_id}' was fitted for task '{document['task']}', not '{task}'")
    if document["matrix_fingerprint"] != meta["fingerprint"]:
        raise ProjectError(
            f"model '{model_id}' was fitted on a different matrix than the current one; "
            "re-run fit after apply"
        )
    schema = project.schemas[task]
    threshold = (
        project.state.settings.get("threshold", DEFAULT_THRESHOLD) if threshold is None else threshold
    )

    if schema.mode == MULTI_LABEL:
        fitted = models_mod.TagVoteModel.from_json(document["params"])
        probs = models_mod.predict_tag_probs(matrix, fitted)
    elif document["kind"] == "cm":
        params = models_mod.LabelModelParams.from_json(document["params"])
        probs = models_mod.predict_proba(matrix, params)
    else:
        prior = models_mod.ClassPrior(np.asarray(document["params"]["prior"], dtype=np.float64))
        probs = models_mod.majority_vote(matrix, prior)

    hard = models_mod.harden(probs, schema, threshold=threshold)
    soft_lines = []
    hard_lines = []
    for i, doc_id in enumerate(matrix.doc_ids):
        soft_lines.append(
            json.dumps({"id": doc_id, "probs": [float(p) for p in probs[i]]}, sort_keys=True)
        )
        if schema.mode == MULTI_CLASS:
            record = {"id": doc_id, "label": hard[i]}
        else:
            record = {"id": doc_id, "labels": hard[i]}
        hard_lines.append(json.dumps(record, ensure_ascii=False, sort_keys=True))
    write_text_atomic(project.predictions_path(task, "soft"), "\n".join(soft_lines) + "\n")
    write_text_atomic(project.predictions_path(task, "hard"), "\n".join(hard_lines) + "\n")
    entry = {
        "model_id": model_id,
        "threshold": threshold,
        "matrix_fingerprint": meta["fingerprint"],
        "n_docs": matrix.n,
    }
    project.state.predictions[task] = entry
    project.save()
    return entry


def load_predictions(project: Project, task: str, kind: str) -> dict[str, object]:
    """Prediction records keyed by document id; kind is "soft" or "hard"."""
    project.require_exists()
    if kind not in ("soft", "hard"):
        raise ProjectError(f"unknown prediction kind '{kind}' (expected soft or hard)")
    if task not in project.state.predictions:
        raise ProjectError(f"no predictions for task '{task}' (run predict first)")
    path = project.predictions_path(task, kind)
    if not path.is_file():
        raise ProjectError(f"prediction file missing for task '{task}'; re-run predict")
    out: dict[str, object] = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line:
            continue
        record = json.loads(line)
        if kind == "soft":
            out[record["id"]] = record["probs"]
        else:
            out[record["id"]] = record.get("label", record.get("labels"))
    return out


# ---------------------------------------------------------------------------
# Review and evaluation


def gold_store(project: Project) -> GoldStore:
    docs = project.load_documents()
    return GoldStore(project.gold_dir(), document_splits(docs))


def review(
    project: Project,
    doc_id: str,
    task: str,
    label,
    reviewer: str = "annotator",
) -> GoldRecord:
    """Record a human decision; the current hard prediction becomes revised_from."""
    project.require_exists()
    if task not in project.schemas:
        raise ProjectError(f"unknown task '{task}'")
    schema = project.schemas[task]
    store = gold_store(project)
    predicted = None
    if task in project.state.predictions:
        predicted = load_predictions(project, task, "hard").get(doc_id)
    record = record_review(store, doc_id, task, label, reviewer, schema, predicted=predicted)
    project.save()
    return record


def gold_record_to_json(record: GoldRecord) -> dict:
    return {
        "doc_id": record.doc_id,
        "task": record.task,
        "label": record.label,
        "reviewer": record.reviewer,
        "revised_from": record.revised_from,
        "reviewed_at": record.reviewed_at,
    }


def _gold_status(record: GoldRecord | None) -> str:
    if record is None:
        return "unreviewed"
    if record.revised_from is not None and record.label == record.revised_from:
        return "accepted"
    return "revised"


def review_queue(
    project: Project,
    task: str,
    split: str | None = None,
    only_conflicted: bool = False,
) -> list[dict]:
    """Reviewable documents with their current predictions and gold status.

    Only validation and test documents are reviewable; training stays
    model-labeled. The conflicted filter keeps rows where rules disagreed,
    matching the analysis report's conflict definition exactly.
    """
    project.require_exists()
    if task not in project.schemas:
        raise ProjectError(f"unknown task '{task}'")
    if split is not None and split not in ("validation", "test"):
        raise ProjectError(f"review queue covers validation and test, not '{split}'")
    docs = project.load_documents()
    soft = load_predictions(project, task, "soft")
    hard = load_predictions(project, task, "hard")
    matrix, _ = load_matrix(project, task)
    conflicted = {
        doc_id
        for doc_id, flag in zip(matrix.doc_ids, analysis.conflict_rows(matrix))
        if flag
    }
    store = GoldStore(project.gold_dir(), document_splits(docs))
    joiner = project.state.settings.get("joiner", corpus_mod.DEFAULT_JOINER)
    items = []
    for doc in docs:
        doc_split = doc.split or "train"
        if doc_split == "train":
            continue
        if split is not None and doc_split != split:
            continue
        if only_conflicted and doc.id not in conflicted:
            continue
        record = store.get(task, doc.id)
        items.append(
            {
                "doc_id": doc.id,
                "split": doc_split,
                "input": corpus_mod.render_input(doc, joiner),
                "prediction": hard.get(doc.id),
                "probs": soft.get(doc.id),
                "conflicted": doc.id in conflicted,
                "gold_status": _gold_status(record),
                "gold_label": record.label if record is not None else None,
            }
        )
    return items


def review_progress(project: Project, task: str, split: str | None = None) -> dict:
    """Reviewed-vs-total counter plus the gold label distribution."""
    project.require_exists()
    if task not in project.schemas:
        raise ProjectError(f"unknown task '{task}'")
    schema = project.schemas[task]
    docs = project.load_documents()
    store = GoldStore(project.gold_dir(), document_splits(docs))
    total = 0
    reviewed = 0
    distribution = {label: 0 for label in schema.labels}
    for doc in docs:
        doc_split = doc.split or "train"
        if doc_split == "train":
            continue
        if split is not None and doc_split != split:
            continue
        total += 1
        record = store.get(task, doc.id)
        if record is None:
            continue
        reviewed += 1
        if schema.mode == MULTI_CLASS:
            distribution[record.label] += 1
        else:
            for tag, present in record.label.items():
                if present:
                    distribution[tag] += 1
    return {"task": task, "split": split, "total": total, "reviewed": reviewed, "distribution": distribution}


def evaluate_task(project: Project, task: str, split: str = "validation", threshold: float | None = None):
    """Score current predictions against reviewed labels on one split."""
    project.require_exists()
    if task not in project.schemas:
        raise ProjectError(f"unknown task '{task}'")
    schema = project.schemas[task]
    docs = project.load_documents()
    splits = document_splits(docs)
    store = GoldStore(project.gold_dir(), splits)
    gold = {
        doc_id: label
        for doc_id, label in store.labels_for(task).items()
        if splits.get(doc_id) == split
    }
    if not gold:
        raise ProjectError(f"no reviewed labels for task '{task}' in split '{split}'")
    if schema.mode == MULTI_CLASS:
        hard = load_predictions(project, task, "hard")
        missing = sorted(set(gold) - set(hard))
        if missing:
            raise ProjectError(f"missing predictions for reviewed docs: {', '.join(missing[:5])}")
        predictions = {doc_id: hard[doc_id] for doc_id in gold}
        return evaluate_multiclass(predictions, gold, schema, split=split)
    soft = load_predictions(project, task, "soft")
    missing = sorted(set(gold) - set(soft))
    if missing:
        raise ProjectError(f"missing predictions for reviewed docs: {', '.join(missing[:5])}")
    if threshold is None:
        threshold = project.state.predictions.get(task, {}).get("threshold", DEFAULT_THRESHOLD)
    probs = {doc_id: [float(p) for p in soft[doc_id]] for doc_id in gold}
    return evaluate_multilabel(probs, gold, schema, threshold=threshold, split=split)


# ---------------------------------------------------------------------------
# Export


def export_records(
    project: Project,
    task: str,
    split: str,
    labels: str = "soft",
) -> list[dict]:
    """Dataset records for one split: id, rendered input, and the chosen labels."""
    project.require_exists()
    if task not in project.schemas:
        raise ProjectError(f"unknown task '{task}'")
    if split not in corpus_mod.SPLITS:
        raise ProjectError(f"unknown split '{split}' (expected one of {', '.join(corpus_mod.SPLITS)})")
    if labels not in ("soft", "hard", "gold"):
        raise ProjectError(f"unknown label kind '{labels}' (expected soft, hard or gold)")
    schema = project.schemas[task]
    docs = [doc for doc in project.load_documents() if (doc.split or "train") == split]
    joiner = project.state.settings.get("joiner", corpus_mod.DEFAULT_JOINER)

    if labels == "gold":
        store = gold_store(project)
        gold = store.labels_for(task)
        records = []
        for doc in docs:
            if doc.id not in gold:
                continue
            record = {"id": doc.id, "input": corpus_mod.render_input(doc, joiner)}
            if schema.mode == MULTI_CLASS:
                record["label"] = gold[doc.id]
            else:
                record["labels"] = gold[doc.id]
            records.append(record)
        if not records:
            raise ProjectError(f"no reviewed labels for task '{task}' in split '{split}'")
        return records

    kind = "soft" if labels == "soft" else "hard"
    predictions = load_predictions(project, task, kind)
    records = []
    for doc in docs:
        if doc.id not in predictions:
            raise ProjectError(f"no prediction for document '{doc.id}'; re-run predict")
        record = {"id": doc.id, "input": corpus_mod.render_input(doc, joiner)}
        if labels == "soft":
            record["soft_label"] = predictions[doc.id]
        elif schema.mode == MULTI_CLASS:
            record["label"] = predictions[doc.id]
        else:
            record["labels"] = predictions[doc.id]
        records.append(record)
    return records


def export_dataset(
    project: Project,
    task: str,
    split: str,
    labels: str = "soft",
    out_path=None,
) -> Path:
    """Write one line-delimited record per document; returns the file path."""
    records = export_records(project, task, split, labels)
    if out_path is None:
        out_path = project.exports_dir() / f"{task}.{split}.{labels}.jsonl"
    out_path = Path(out_path)
    lines = [json.dumps(record, ensure_ascii=False, sort_keys=True) for record in records]
    write_text_atomic(out_path, "\n".join(lines) + "\n")
    return out_path


# ---------------------------------------------------------------------------
# Read-side helpers shared with the API


def document_records(
    project: Project,
    split: str | None = None,
) -> list[dict]:
    project.require_exists()
    docs = project.load_documents()
    joiner = project.state.settings.get("joiner", corpus_mod.DEFAULT_JOINER)
    out = []
    for doc in docs:
        doc_split = doc.split or "train"
        if split is not None and doc_split != split:
            continue
        out.append(
            {
                "id": doc.id,
                "title": doc.title,
                "text": doc.text,
                "tags": doc.tags,
                "split": doc_split,
                "input": corpus_mod.render_input(doc, joiner),
            }
        )
    return out
