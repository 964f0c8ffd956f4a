"""Scoring against gold labels, and the reviewed-gold store itself.

Conventions: a class with no gold support and no predictions scores F1 = 0
and still counts in the macro mean. The pooled ROC curve is integrated with
the trapezoid rule; tags with single-class gold are excluded from the macro
ROC variant (the pooled variant never needs that).
"""

from __future__ import annotations

import datetime as _dt
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .schema import MULTI_CLASS, MULTI_LABEL, TaskSchema

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


class EvaluationError(ValueError):
    pass


class ReviewError(ValueError):
    pass


@dataclass(frozen=True)
class MetricsReport:
    task: str
    n: int
    f1_macro: float
    f1_micro: float
    per_label_f1: dict[str, float]
    accuracy: float | None = None  # single-label tasks only
    roc_auc: float | None = None  # pooled over (doc, tag); multi-label with scores only
    roc_auc_macro: float | None = None  # mean over tags with both gold classes present
    split: str | None = None

    def to_json(self) -> dict:
        return {
            "task": self.task,
            "split": self.split,
            "n": self.n,
            "accuracy": self.accuracy,
            "f1_macro": self.f1_macro,
            "f1_micro": self.f1_micro,
            "roc_auc": self.roc_auc,
            "roc_auc_macro": self.roc_auc_macro,
            "per_label_f1": dict(self.per_label_f1),
        }

    def render_table(self) -> str:
        """Aligned summary, columns in the report style: Acc, F1, R/A, F1-ma, F1-mi."""
        def cell(value):
            return "-" if value is None else f"{value:.4f}"

        headers = ["task", "n", "Acc", "R/A", "F1-ma", "F1-mi"]
        row = [
            self.task + (f" [{self.split}]" if self.split else ""),
            str(self.n),
            cell(self.accuracy),
            cell(self.roc_auc),
            cell(self.f1_macro),
            cell(self.f1_micro),
        ]
        widths = [max(len(h), len(r)) for h, r in zip(headers, row)]
        lines = [
            "  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip(),
            "  ".join("-" * w for w in widths),
            "  ".join(r.ljust(w) for r, w in zip(row, widths)).rstrip(),
            "",
            "per-label F1:",
        ]
        for label in self.per_label_f1:
            lines.append(f"  {label}: {self.per_label_f1[label]:.4f}")
        return "\n".join(lines)


def _f1(tp: int, fp: int, fn: int) -> float:
    # no support and no predictions: define F1 as 0 rather than undefined
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 0.0
    return 2 * tp / denom


def _check_ids(pred_ids, gold_ids) -> None:
    pred_set, gold_set = set(pred_ids), set(gold_ids)
    if pred_set == gold_set:
        return
    only_pred = sorted(pred_set - gold_set)[:10]
    only_gold = sorted(gold_set - pred_set)[:10]
    parts = []
    if only_pred:
        parts.append(f"predicted but not gold: {', '.join(only_pred)}")
    if only_gold:
        parts.append(f"gold but not predicted: {', '.join(only_gold)}")
    raise EvaluationError("prediction and gold ids differ; " + "; ".join(parts))


def evaluate_multiclass(
    predictions: dict[str, str], gold: dict[str, str], schema: TaskSchema, split: str | None = None
) -> MetricsReport:
    """Accuracy plus per-class and averaged F1 for a single-label task."""
    if schema.mode != MULTI_CLASS:
        raise EvaluationError("evaluate_multiclass needs a single-label schema")
    if not gold:
        raise EvaluationError("no gold records to evaluate against")
    _check_ids(predictions.keys(), gold.keys())
    labels = schema.labels
    for doc_id, label in list(predictions.items()) + list(gold.items()):
        if label not in labels:
            raise EvaluationError(f"label '{label}' for doc '{doc_id}' is not in the schema")
    n = len(gold)
    correct = sum(1 for doc_id in gold if predictions[doc_id] == gold[doc_id])
    per_label = {}
    micro_tp = micro_fp = micro_fn = 0
    for label in labels:
        tp = sum(1 for d in gold if gold[d] == label and predictions[d] == label)
        fp = sum(1 for d in gold if gold[d] != label and predictions[d] == label)
        fn = sum(1 for d in gold if gold[d] == label and predictions[d] != label)
        per_label[label] = _f1(tp, fp, fn)
        micro_tp += tp
        micro_fp += fp
        micro_fn += fn
    return MetricsReport(
        task=schema.name,
        split=split,
        n=n,
        accuracy=correct / n,
        f1_macro=sum(per_label.values()) / len(labels),
        f1_micro=_f1(micro_tp, micro_fp, micro_fn),
        per_label_f1=per_label,
    )


def roc_auc_score(scores, labels) -> float | None:
    """Area under the ROC curve by trapezoidal integration, ties handled.

    Returns None when only one class is present (the curve degenerates).
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    pos = int(labels.sum())
    neg = labels.size - pos
    if pos == 0 or neg == 0:
        return None
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    # walk distinct thresholds; accumulate TPR/FPR points
    tps = np.cumsum(sorted_labels)
    fps = np.cumsum(~sorted_labels)
    distinct = np.nonzero(np.diff(sorted_scores))[0]
    idx = np.concatenate([distinct, [scores.size - 1]])
    tpr = np.concatenate([[0.0], tps[idx] / pos])
    fpr = np.concatenate([[0.0], fps[idx] / neg])
    return float(_trapezoid(tpr, fpr))


def evaluate_multilabel(
    pred_probs: dict[str, list[float]],
    gold: dict[str, dict[str, bool]],
    schema: TaskSchema,
    threshold: float = 0.5,
    split: str | None = None,
) -> MetricsReport:
    """Pooled and per-tag scores for a multi-label task, from presence probabilities."""
    if schema.mode != MULTI_LABEL:
        raise EvaluationError("evaluate_multilabel needs a multi-label schema")
    if not gold:
        raise EvaluationError("no gold records to evaluate against")
    _check_ids(pred_probs.keys(), gold.keys())
    labels = schema.labels
    doc_ids = sorted(gold.keys())
    probs = np.zeros((len(doc_ids), len(labels)), dtype=np.float64)
    truth = np.zeros((len(doc_ids), len(labels)), dtype=bool)
    for i, doc_id in enumerate(doc_ids):
        row = pred_probs[doc_id]
        if len(row) != len(labels):
            raise EvaluationError(
                f"doc '{doc_id}' has {len(row)} probabilities, schema has {len(labels)} tags"
            )
        probs[i] = row
        record = gold[doc_id]
        for t, label in enumerate(labels):
            truth[i, t] = bool(record.get(label, False))
    if (probs < 0.0).any() or (probs > 1.0).any():
        bad = doc_ids[int(np.argwhere((probs < 0.0) | (probs > 1.0))[0][0])]
        raise EvaluationError(f"doc '{bad}' has a probability outside [0, 1]")
    hard = probs >= threshold

    per_label = {}
    micro_tp = micro_fp = micro_fn = 0
    macro_aucs = []
    for t, label in enumerate(labels):
        tp = int((hard[:, t] & truth[:, t]).sum())
        fp = int((hard[:, t] & ~truth[:, t]).sum())
        fn = int((~hard[:, t] & truth[:, t]).sum())
        per_label[label] = _f1(tp, fp, fn)
        micro_tp += tp
        micro_fp += fp
        micro_fn += fn
        auc_t = roc_auc_score(probs[:, t], truth[:, t])
        if auc_t is not None:
            macro_aucs.append(auc_t)
    pooled_auc = roc_auc_score(probs.reshape(-1), truth.reshape(-1))
    return MetricsReport(
        task=schema.name,
        split=split,
        n=len(doc_ids),
        accuracy=None,
        f1_macro=sum(per_label.values()) / len(labels),
        f1_micro=_f1(micro_tp, micro_fp, micro_fn),
        roc_auc=pooled_auc,
        roc_auc_macro=(sum(macro_aucs) / len(macro_aucs)) if macro_aucs else None,
        per_label_f1=per_label,
    )


# ---------------------------------------------------------------------------
# Gold store


@dataclass
class GoldRecord:
    doc_id: str
    task: str
    label: object  # str for single-label tasks, {tag: bool} for multi-label
    reviewer: str
    revised_from: object | None
    reviewed_at: str


class GoldStore:
    """Reviewed labels: an append-only audit log plus a materialized state file.

    The materialized file is the source of truth and is written atomically;
    the audit log keeps full history and tolerates a torn final line from a
    crashed append.
    """

    AUDIT = "audit.jsonl"
    STATE = "gold.json"

    def __init__(self, directory, splits: dict[str, str] | None = None):
        self.directory = Path(directory)
        self.splits = splits or {}
        self.records: dict[str, dict[str, GoldRecord]] = {}  # task -> doc_id -> record
        self._load()

    def _load(self) -> None:
        state_path = self.directory / self.STATE
        if not state_path.is_file():
            return
        data = json.loads(state_path.read_text(encoding="utf-8"))
        for task, docs in data.items():
            for doc_id, entry in docs.items():
                self.records.setdefault(task, {})[doc_id] = GoldRecord(
                    doc_id=doc_id,
                    task=task,
                    label=entry["label"],
                    reviewer=entry["reviewer"],
                    revised_from=entry.get("revised_from"),
                    reviewed_at=entry["reviewed_at"],
                )

    def _persist(self) -> None:
        from .project import write_json_atomic

        payload = {
            task: {
                doc_id: {
                    "label": record.label,
                    "reviewer": record.reviewer,
                    "revised_from": record.revised_from,
                    "reviewed_at": record.reviewed_at,
                }
                for doc_id, record in sorted(docs.items())
            }
            for task, docs in sorted(self.records.items())
        }
        self.directory.mkdir(parents=True, exist_ok=True)
        write_json_atomic(self.directory / self.STATE, payload)

    def _append_audit(self, entry: dict) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        with open(self.directory / self.AUDIT, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(entry, ensure_ascii=False, sort_keys=True) + "\n")
            handle.flush()

    def audit_entries(self) -> list[dict]:
        path = self.directory / self.AUDIT
        if not path.is_file():
            return []
        entries = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            try:
                entries.append(json.loads(line))
            except json.JSONDecodeError:
                continue  # torn final line from a crash; state file still authoritative
        return entries

    def get(self, task: str, doc_id: str) -> GoldRecord | None:
        return self.records.get(task, {}).get(doc_id)

    def labels_for(self, task: str) -> dict[str, object]:
        return {doc_id: rec.label for doc_id, rec in self.records.get(task, {}).items()}


def _validate_label(label, schema: TaskSchema):
    if schema.mode == MULTI_CLASS:
        if label not in schema.labels:
            raise ReviewError(f"label '{label}' is not in the {schema.name} schema")
        return label
    if not isinstance(label, dict):
        raise ReviewError(f"a {schema.name} review needs a {{tag: bool}} assignment")
    unknown = sorted(set(label) - set(schema.labels))
    if unknown:
        raise ReviewError(f"unknown tags in review: {', '.join(unknown)}")
    return {tag: bool(label.get(tag, False)) for tag in schema.labels}


def record_review(
    store: GoldStore,
    doc_id: str,
    task: str,
    revised_label,
    reviewer: str,
    schema: TaskSchema,
    predicted=None,
    now: str | None = None,
) -> GoldRecord:
    """Upsert one reviewed label and append to the audit log.

    Only validation and test documents may be reviewed; training documents
    stay model-labeled. revised_from keeps the hard prediction the first
    review replaced, and later revisions preserve it.
    """
    split = store.splits.get(doc_id)
    if split is None:
        raise ReviewError(f"document '{doc_id}' is not in the corpus")
    if split not in ("validation", "test"):
        raise ReviewError(
            f"document '{doc_id}' is in the train split; only validation and test are reviewable"
        )
    label = _validate_label(revised_label, schema)
    existing = store.get(task, doc_id)
    if existing is not None:
        revised_from = existing.revised_from
    else:
        revised_from = _validate_label(predicted, schema) if predicted is not None else None
    record = GoldRecord(
        doc_id=doc_id,
        task=task,
        label=label,
        reviewer=reviewer,
        revised_from=revised_from,
        reviewed_at=now or _dt.datetime.now(_dt.timezone.utc).isoformat(),
    )
    store.records.setdefault(task, {})[doc_id] = record
    store._append_audit(
        {
            "doc_id": doc_id,
            "task": task,
            "label": label,
            "reviewer": reviewer,
            "revised_from": revised_from,
            "reviewed_at": record.reviewed_at,
        }
    )
    store._persist()
    return record
