"""Project directory: versioned state, atomic writes, model registry.

A project is a directory. Every file in it is written atomically (temp file
in the same directory, then rename), so a crash between any two operations
leaves the previous consistent state on disk. project.json carries a
monotonically increasing version that every mutating operation bumps; the
HTTP layer uses it for optimistic concurrency.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from . import corpus as corpus_mod
from .schema import BUILTIN_SCHEMAS


class ProjectError(ValueError):
    pass


def write_text_atomic(path, text: str) -> None:
    """Write UTF-8 text via a temp file and rename; never leaves partial files."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def write_json_atomic(path, payload) -> None:
    write_text_atomic(path, json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n")


def fingerprint_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def fingerprint_text(text: str) -> str:
    return fingerprint_bytes(text.encode("utf-8"))


PROJECT_FILE = "project.json"
CORPUS_FILE = "corpus.jsonl"
MANIFESTS_DIR = "manifests"
MATRICES_DIR = "matrices"
MODELS_DIR = "models"
PREDICTIONS_DIR = "predictions"
GOLD_DIR = "gold"
EXPORTS_DIR = "exports"


@dataclass
class ProjectState:
    """The mutable registry persisted as project.json."""

    version: int = 0
    settings: dict = field(default_factory=dict)
    manifests: dict = field(default_factory=dict)  # name -> {task, version, path}
    matrices: dict = field(default_factory=dict)  # task -> {manifest, fingerprint, path, ...}
    models: dict = field(default_factory=dict)  # model_id -> registry entry
    predictions: dict = field(default_factory=dict)  # task -> {model_id, soft_path, hard_path}

    def to_json(self) -> dict:
        return {
            "version": self.version,
            "settings": self.settings,
            "manifests": self.manifests,
            "matrices": self.matrices,
            "models": self.models,
            "predictions": self.predictions,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ProjectState":
        return cls(
            version=data.get("version", 0),
            settings=data.get("settings", {}),
            manifests=data.get("manifests", {}),
            matrices=data.get("matrices", {}),
            models=data.get("models", {}),
            predictions=data.get("predictions", {}),
        )


class Project:
    """Handle on a project directory. Loading is cheap; mutations write through."""

    def __init__(self, root):
        self.root = Path(root)
        self.state = ProjectState()
        state_path = self.root / PROJECT_FILE
        if state_path.is_file():
            self.state = ProjectState.from_json(json.loads(state_path.read_text(encoding="utf-8")))

    # -- paths ------------------------------------------------------------
    @property
    def corpus_path(self) -> Path:
        return self.root / CORPUS_FILE

    def manifest_dir(self, name: str) -> Path:
        return self.root / MANIFESTS_DIR / name

    def matrix_path(self, task: str) -> Path:
        return self.root / MATRICES_DIR / f"{task}.tsv"

    def matrix_meta_path(self, task: str) -> Path:
        return self.root / MATRICES_DIR / f"{task}.meta.json"

    def model_path(self, model_id: str) -> Path:
        return self.root / MODELS_DIR / f"{model_id}.json"

    def predictions_path(self, task: str, kind: str) -> Path:
        return self.root / PREDICTIONS_DIR / f"{task}.{kind}.jsonl"

    def gold_dir(self) -> Path:
        return self.root / GOLD_DIR

    def exports_dir(self) -> Path:
        return self.root / EXPORTS_DIR

    # -- state ------------------------------------------------------------
    def exists(self) -> bool:
        return (self.root / PROJECT_FILE).is_file()

    def require_exists(self) -> None:
        if not self.exists():
            raise ProjectError(f"no project at {self.root} (run ingest first)")

    def save(self, bump: bool = True) -> int:
        """Persist project.json, optionally bumping the version. Returns the version."""
        if bump:
            self.state.version += 1
        write_json_atomic(self.root / PROJECT_FILE, self.state.to_json())
        return self.state.version

    # -- corpus -----------------------------------------------------------
    def load_documents(self) -> list[corpus_mod.Document]:
        self.require_exists()
        if not self.corpus_path.is_file():
            raise ProjectError(f"project at {self.root} has no corpus file")
        return corpus_mod.load_corpus(self.corpus_path)

    def save_documents(self, docs: list[corpus_mod.Document]) -> None:
        corpus_mod.save_corpus(docs, self.corpus_path)

    # -- schemas ----------------------------------------------------------
    @property
    def schemas(self):
        return BUILTIN_SCHEMAS
