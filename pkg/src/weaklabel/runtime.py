"""Running rule sets over documents: the label matrix and the two-stage pipeline.

A label matrix is a dense n x m grid of votes: votes[i][j] is the class index
labeling function j assigned to document i, or -1 for abstain. Rows follow
document order, columns follow the rule set's order, so reruns are
reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Document
from .dsl.expr import evaluate
from .dsl.spec import LabelFunctionSpec, Manifest
from .schema import MULTI_LABEL, TaskSchema

ABSTAIN = -1


class MatrixError(ValueError):
    pass


@dataclass(frozen=True)
class LabelMatrix:
    doc_ids: tuple[str, ...]
    lf_names: tuple[str, ...]
    votes: np.ndarray  # (n, m) int16, -1 = abstain
    schema: TaskSchema
    lf_targets: tuple[int, ...] | None = None  # target class per column, when known

    def __post_init__(self):
        n, m = self.votes.shape
        if n != len(self.doc_ids) or m != len(self.lf_names):
            raise MatrixError(
                f"votes shape {self.votes.shape} does not match "
                f"{len(self.doc_ids)} docs x {len(self.lf_names)} rules"
            )
        if len(set(self.doc_ids)) != n:
            raise MatrixError("duplicate document ids in matrix")
        if len(set(self.lf_names)) != m:
            raise MatrixError("duplicate rule names in matrix")
        if m and (self.votes.max(initial=ABSTAIN) >= self.schema.k or self.votes.min(initial=ABSTAIN) < ABSTAIN):
            raise MatrixError(f"votes outside [-1, {self.schema.k - 1}]")
        if self.lf_targets is not None:
            if len(self.lf_targets) != m:
                raise MatrixError("lf_targets length does not match rule count")
            if self.schema.mode == MULTI_LABEL:
                for j, target in enumerate(self.lf_targets):
                    col = self.votes[:, j]
                    bad = col[(col != ABSTAIN) & (col != target)]
                    if bad.size:
                        raise MatrixError(
                            f"rule '{self.lf_names[j]}' votes classes other than its own target"
                        )

    @property
    def n(self) -> int:
        return self.votes.shape[0]

    @property
    def m(self) -> int:
        return self.votes.shape[1]


def apply_lfs(docs: list[Document], specs: list[LabelFunctionSpec], schema: TaskSchema) -> LabelMatrix:
    """Evaluate every rule on every document. Deterministic in doc and rule order."""
    names = []
    targets = []
    for spec in specs:
        if spec.task != schema.name:
            raise MatrixError(f"rule '{spec.name}' targets task '{spec.task}', not '{schema.name}'")
        names.append(spec.name)
        targets.append(spec.vote_index(schema))
    votes = np.full((len(docs), len(specs)), ABSTAIN, dtype=np.int16)
    for j, spec in enumerate(specs):
        target = targets[j]
        rule = spec.rule
        for i, doc in enumerate(docs):
            if evaluate(rule, doc):
                votes[i, j] = target
    return LabelMatrix(
        doc_ids=tuple(doc.id for doc in docs),
        lf_names=tuple(names),
        votes=votes,
        schema=schema,
        lf_targets=tuple(targets),
    )


def dumps_matrix(matrix: LabelMatrix) -> str:
    """Tabular text: header of rule names, one row per document id."""
    lines = ["\t".join(("doc_id",) + matrix.lf_names)]
    for i, doc_id in enumerate(matrix.doc_ids):
        lines.append(doc_id + "\t" + "\t".join(str(v) for v in matrix.votes[i]))
    return "\n".join(lines) + "\n"


def loads_matrix(
    text: str, schema: TaskSchema, lf_targets: tuple[int, ...] | None = None
) -> LabelMatrix:
    lines = [line for line in text.split("\n") if line]
    if not lines:
        raise MatrixError("empty matrix file")
    header = lines[0].split("\t")
    if header[:1] != ["doc_id"]:
        raise MatrixError("matrix header must start with doc_id")
    lf_names = tuple(header[1:])
    doc_ids = []
    rows = []
    for line_no, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != len(header):
            raise MatrixError(f"matrix line {line_no} has {len(parts)} cells, expected {len(header)}")
        doc_ids.append(parts[0])
        try:
            rows.append([int(cell) for cell in parts[1:]])
        except ValueError:
            raise MatrixError(f"matrix line {line_no} has a non-integer vote") from None
    votes = np.array(rows, dtype=np.int16).reshape(len(doc_ids), len(lf_names))
    return LabelMatrix(
        doc_ids=tuple(doc_ids), lf_names=lf_names, votes=votes, schema=schema, lf_targets=lf_targets
    )


def attach_stage1_tags(
    docs: list[Document], predictions: dict[str, dict[str, bool]], schema: TaskSchema
) -> list[Document]:
    """Write predicted-true tags onto each document, comma-joined in schema order."""
    out = []
    for doc in docs:
        assigned = predictions.get(doc.id, {})
        names = [label for label in schema.labels if assigned.get(label)]
        out.append(doc.with_tags(",".join(names)))
    return out


@dataclass
class PipelineResult:
    tags_matrix: LabelMatrix | None
    tagged_docs: list[Document]
    tag_predictions: dict[str, dict[str, bool]]
    sentiment_matrix: LabelMatrix | None


def run_pipeline(
    docs: list[Document],
    tag_manifest: Manifest | None,
    sentiment_manifest: Manifest | None,
    schemas: dict[str, TaskSchema],
    stage1_model: str = "mv",
    threshold: float = 0.5,
    use_gold_tags: bool = False,
    gold_tags: dict[str, dict[str, bool]] | None = None,
    train_config=None,
    seed: int = 0,
) -> PipelineResult:
    """Stage 1: tag rules on raw documents, hardened at the threshold, attached as
    the tags field. Stage 2: sentiment rules on the tagged documents.

    With use_gold_tags, reviewed tag assignments replace model output for the
    documents that have them; the rest keep model output.
    """
    from . import models

    tags_schema = schemas["tags"]
    sentiment_schema = schemas["sentiment"]

    tags_matrix = None
    predictions: dict[str, dict[str, bool]] = {}
    if tag_manifest is not None:
        tags_matrix = apply_lfs(docs, list(tag_manifest.specs), tags_schema)
        probs = models.tag_vote(
            tags_matrix, model=stage1_model, train_config=train_config, seed=seed
        )
        hard = probs >= threshold
        for i, doc_id in enumerate(tags_matrix.doc_ids):
            predictions[doc_id] = {
                label: bool(hard[i, t]) for t, label in enumerate(tags_schema.labels)
            }
    if use_gold_tags and gold_tags:
        for doc_id, assignment in gold_tags.items():
            predictions[doc_id] = {
                label: bool(assignment.get(label, False)) for label in tags_schema.labels
            }

    tagged_docs = attach_stage1_tags(docs, predictions, tags_schema)

    sentiment_matrix = None
    if sentiment_manifest is not None:
        sentiment_matrix = apply_lfs(tagged_docs, list(sentiment_manifest.specs), sentiment_schema)

    return PipelineResult(
        tags_matrix=tags_matrix,
        tagged_docs=tagged_docs,
        tag_predictions=predictions,
        sentiment_matrix=sentiment_matrix,
    )
