"""Labeling-function specs, rule-set manifests, and project-level validation."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from ..schema import BUILTIN_SCHEMAS, MULTI_CLASS, MULTI_LABEL, TaskSchema
from .expr import Expr, referenced_tags, uses_tag_primitives
from .parser import Diagnostic, LfParseError, parse_lf_spec


@dataclass(frozen=True)
class LabelFunctionSpec:
    """A named rule voting one target label or abstaining."""

    name: str
    task: str
    label: str
    rule: Expr

    def vote_index(self, schema: TaskSchema) -> int:
        return schema.index_of(self.label)


@dataclass(frozen=True)
class Manifest:
    """A named set of labeling functions for one task, plus a version tag."""

    name: str
    task: str
    version: str
    specs: tuple[LabelFunctionSpec, ...]

    def lf_names(self) -> list[str]:
        return [spec.name for spec in self.specs]


def check_lf_source(source: str, schemas: dict[str, TaskSchema] | None = None) -> list[Diagnostic]:
    """Parse for side effect; return diagnostics instead of raising."""
    try:
        parse_lf_spec(source, schemas)
    except LfParseError as exc:
        return list(exc.diagnostics)
    return []


def manifest_from_sources(
    name: str,
    task: str,
    version: str,
    sources: dict[str, str],
    schemas: dict[str, TaskSchema] | None = None,
) -> Manifest:
    """Build a manifest from {file name: rule source}. Raises with every file's diagnostics."""
    if schemas is None:
        schemas = BUILTIN_SCHEMAS
    specs = []
    problems: list[Diagnostic] = []
    for file_name in sorted(sources):
        try:
            spec = parse_lf_spec(sources[file_name], schemas)
        except LfParseError as exc:
            for diag in exc.diagnostics:
                problems.append(
                    Diagnostic(
                        diag.severity,
                        diag.code,
                        diag.message,
                        line=diag.line,
                        col=diag.col,
                        lf_name=file_name,
                    )
                )
            continue
        if spec.task != task:
            problems.append(
                Diagnostic(
                    "error",
                    "task-mismatch",
                    f"rule file declares task '{spec.task}' but manifest is for '{task}'",
                    lf_name=file_name,
                )
            )
            continue
        specs.append(spec)
    if problems:
        raise LfParseError(problems)
    return Manifest(name=name, task=task, version=version, specs=tuple(specs))


def load_manifest(path, schemas: dict[str, TaskSchema] | None = None) -> Manifest:
    """Load a manifest file: YAML with name/task/version and a list of rule file paths."""
    path = Path(path)
    data = yaml.safe_load(path.read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise LfParseError(
            [Diagnostic("error", "syntax", f"manifest {path.name} is not a mapping")]
        )
    problems = []
    for key in ("name", "task", "version", "lfs"):
        if key not in data:
            problems.append(
                Diagnostic("error", "syntax", f"manifest {path.name} missing key '{key}'")
            )
    if problems:
        raise LfParseError(problems)
    sources = {}
    for rel in data["lfs"]:
        lf_path = path.parent / rel
        if not lf_path.is_file():
            problems.append(
                Diagnostic("error", "missing-file", f"rule file not found: {rel}", lf_name=rel)
            )
            continue
        sources[rel] = lf_path.read_text(encoding="utf-8")
    if problems:
        raise LfParseError(problems)
    return manifest_from_sources(
        name=data["name"], task=data["task"], version=str(data["version"]), sources=sources,
        schemas=schemas,
    )


def save_manifest(manifest: Manifest, directory) -> Path:
    """Write a manifest and its rule files under directory/<manifest.name>/."""
    from ..project import write_text_atomic
    from .parser import print_lf_spec

    directory = Path(directory)
    target = directory / manifest.name
    target.mkdir(parents=True, exist_ok=True)
    rel_paths = []
    for spec in manifest.specs:
        rel = f"{_slug(spec.name)}.lf"
        rel_paths.append(rel)
        write_text_atomic(target / rel, print_lf_spec(spec))
    doc = {
        "name": manifest.name,
        "task": manifest.task,
        "version": manifest.version,
        "lfs": rel_paths,
    }
    manifest_path = target / "manifest.yaml"
    write_text_atomic(manifest_path, yaml.safe_dump(doc, sort_keys=False, allow_unicode=True))
    return manifest_path


def _slug(name: str) -> str:
    out = []
    for ch in name:
        if ch.isalnum() or ch in "-_":
            out.append(ch)
        else:
            out.append("-")
    return "".join(out)


@dataclass
class ValidationReport:
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)

    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]

    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "warning"]

    def render(self) -> str:
        if not self.diagnostics:
            return "ok: no problems found"
        return "\n".join(d.render() for d in self.diagnostics)


def validate_project(
    specs: list[LabelFunctionSpec], schemas: dict[str, TaskSchema] | None = None
) -> ValidationReport:
    """Cross-rule checks for a whole project's rule set.

    Errors: duplicate names within a task; tag predicates in a task whose
    documents cannot carry tags (the tags task itself, or any task when no
    tags stage exists). Warnings: labels no rule votes for; tag names that
    are not in the tags schema.
    """
    if schemas is None:
        schemas = BUILTIN_SCHEMAS
    diags: list[Diagnostic] = []
    tags_schema = None
    for schema in schemas.values():
        if schema.mode == MULTI_LABEL:
            tags_schema = schema
            break

    seen: dict[tuple[str, str], str] = {}
    for spec in specs:
        key = (spec.task, spec.name)
        if key in seen:
            diags.append(
                Diagnostic(
                    "error",
                    "duplicate-name",
                    f"duplicate rule name '{spec.name}' in task '{spec.task}'",
                    lf_name=spec.name,
                )
            )
        seen[key] = spec.name

    for spec in specs:
        if not uses_tag_primitives(spec.rule):
            continue
        task_schema = schemas.get(spec.task)
        if task_schema is not None and task_schema.mode == MULTI_LABEL:
            diags.append(
                Diagnostic(
                    "error",
                    "tags-unavailable",
                    f"rule '{spec.name}' reads tags, but task '{spec.task}' produces the tags"
                    " itself; its documents carry none",
                    lf_name=spec.name,
                )
            )
            continue
        if tags_schema is None:
            diags.append(
                Diagnostic(
                    "error",
                    "tags-unavailable",
                    f"rule '{spec.name}' reads tags but the project has no tags stage",
                    lf_name=spec.name,
                )
            )
            continue
        unknown = sorted(referenced_tags(spec.rule) - set(tags_schema.labels))
        if unknown:
            diags.append(
                Diagnostic(
                    "warning",
                    "unknown-tag",
                    f"rule '{spec.name}' references tags not in the {tags_schema.name} schema: "
                    + ", ".join(unknown),
                    lf_name=spec.name,
                )
            )

    by_task: dict[str, set[str]] = {}
    for spec in specs:
        by_task.setdefault(spec.task, set()).add(spec.label)
    for task, covered in sorted(by_task.items()):
        schema = schemas.get(task)
        if schema is None:
            continue
        for label in schema.labels:
            if label not in covered:
                diags.append(
                    Diagnostic(
                        "warning",
                        "uncovered-label",
                        f"no rule votes for label '{label}' in task '{task}'",
                    )
                )
    return ValidationReport(diagnostics=diags)
