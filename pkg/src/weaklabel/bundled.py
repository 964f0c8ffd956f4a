"""Access to the rule sets that ship inside the package.

Three manifests are bundled: one for the tags stage and two alternative
sentiment sets (a coverage-leaning "v0" and a conflict-averse "v1"). They
are plain manifest directories, so a project can copy and edit them.
"""

from __future__ import annotations

from pathlib import Path

from .dsl import Manifest, load_manifest

_ROOT = Path(__file__).parent / "builtin"


def bundled_manifest_names() -> list[str]:
    return sorted(p.parent.name for p in _ROOT.glob("*/manifest.yaml"))


def bundled_manifest_path(name: str) -> Path:
    path = _ROOT / name / "manifest.yaml"
    if not path.is_file():
        known = ", ".join(bundled_manifest_names()) or "none"
        raise FileNotFoundError(f"no bundled manifest '{name}'; available: {known}")
    return path


def load_bundled_manifest(name: str) -> Manifest:
    return load_manifest(bundled_manifest_path(name))
