import json

import numpy as np
import pytest

from weaklabel.evaluation import (
    EvaluationError,
    GoldStore,
    ReviewError,
    evaluate_multiclass,
    evaluate_multilabel,
    record_review,
    roc_auc_score,
)
from weaklabel.schema import MULTI_LABEL, SENTIMENT_SCHEMA, TAGS_SCHEMA

from .helpers import toy_schema
from .oracles import auc_by_pairs, multiclass_metrics, multilabel_metrics


class TestEvaluateMulticlass:
    def test_perfect_predictions(self):
        schema = toy_schema(2)
        gold = {f"d{i}": "c0" if i < 5 else "c1" for i in range(10)}
        report = evaluate_multiclass(dict(gold), gold, schema)
        assert report.accuracy == 1.0
        assert report.f1_macro == 1.0
        assert report.f1_micro == 1.0
        assert report.per_label_f1 == {"c0": 1.0, "c1": 1.0}

    def test_hand_confusion_example(self):
        schema = toy_schema(2)
        gold = {"d0": "c0", "d1": "c0", "d2": "c1", "d3": "c1"}
        pred = {"d0": "c0", "d1": "c1", "d2": "c1", "d3": "c1"}
        report = evaluate_multiclass(pred, gold, schema)
        assert report.accuracy == 0.75
        assert report.per_label_f1["c0"] == pytest.approx(2 / 3)
        assert report.per_label_f1["c1"] == pytest.approx(0.8)
        assert report.f1_macro == pytest.approx((2 / 3 + 0.8) / 2)

    def test_unsupported_class_scores_zero_and_counts(self):
        schema = toy_schema(3)
        gold = {"d0": "c0", "d1": "c1"}
        pred = {"d0": "c0", "d1": "c1"}
        report = evaluate_multiclass(pred, gold, schema)
        assert report.per_label_f1["c2"] == 0.0
        assert report.f1_macro == pytest.approx(2 / 3)

    def test_id_mismatch_lists_difference(self):
        schema = toy_schema(2)
        with pytest.raises(EvaluationError, match="d9"):
            evaluate_multiclass({"d0": "c0", "d9": "c0"}, {"d0": "c0", "d1": "c1"}, schema)

    def test_empty_gold_rejected(self):
        with pytest.raises(EvaluationError, match="no gold"):
            evaluate_multiclass({}, {}, toy_schema(2))

    def test_unknown_label_rejected(self):
        schema = toy_schema(2)
        with pytest.raises(EvaluationError, match="not in the schema"):
            evaluate_multiclass({"d0": "zzz"}, {"d0": "c0"}, schema)

    def test_matches_oracle_on_random_assignments(self):
        rng = np.random.default_rng(31)
        schema = toy_schema(3)
        labels = list(schema.labels)
        for _ in range(50):
            n = int(rng.integers(1, 40))
            gold = {f"d{i}": labels[rng.integers(0, 3)] for i in range(n)}
            pred = {f"d{i}": labels[rng.integers(0, 3)] for i in range(n)}
            report = evaluate_multiclass(pred, gold, schema)
            acc, per, macro, micro = multiclass_metrics(pred, gold, labels)
            assert report.accuracy == pytest.approx(acc, abs=1e-12)
            assert report.f1_macro == pytest.approx(macro, abs=1e-12)
            assert report.f1_micro == pytest.approx(micro, abs=1e-12)
            for label in labels:
                assert report.per_label_f1[label] == pytest.approx(per[label], abs=1e-12)

    def test_multiclass_micro_equals_accuracy(self):
        # with one prediction per doc, pooled F1 reduces to accuracy
        rng = np.random.default_rng(33)
        schema = toy_schema(3)
        labels = list(schema.labels)
        gold = {f"d{i}": labels[rng.integers(0, 3)] for i in range(60)}
        pred = {f"d{i}": labels[rng.integers(0, 3)] for i in range(60)}
        report = evaluate_multiclass(pred, gold, schema)
        assert report.f1_micro == pytest.approx(report.accuracy, abs=1e-12)


class TestRocAuc:
    def test_separable(self):
        assert roc_auc_score([0.9, 0.8, 0.2, 0.4], [True, True, False, False]) == 1.0

    def test_reversed(self):
        assert roc_auc_score([0.1, 0.2, 0.9, 0.8], [True, True, False, False]) == 0.0

    def test_all_tied_is_half(self):
        assert roc_auc_score([0.5, 0.5, 0.5, 0.5], [True, False, True, False]) == pytest.approx(0.5)

    def test_single_class_undefined(self):
        assert roc_auc_score([0.3, 0.7], [True, True]) is None
        assert roc_auc_score([0.3, 0.7], [False, False]) is None

    def test_matches_pair_counting_oracle_with_ties(self):
        rng = np.random.default_rng(35)
        for _ in range(60):
            n = int(rng.integers(2, 60))
            scores = np.round(rng.random(n), 1).tolist()  # coarse grid forces ties
            flags = (rng.random(n) < 0.5).tolist()
            expected = auc_by_pairs(scores, flags)
            got = roc_auc_score(scores, flags)
            if expected is None:
                assert got is None
            else:
                assert got == pytest.approx(expected, abs=1e-12)

    def test_chance_level(self):
        rng = np.random.default_rng(37)
        scores = rng.random(10_000)
        flags = rng.random(10_000) < 0.5
        assert roc_auc_score(scores, flags) == pytest.approx(0.5, abs=0.02)


class TestEvaluateMultilabel:
    def make_gold(self, truth_rows, schema):
        return {
            f"d{i}": {label: bool(row[t]) for t, label in enumerate(schema.labels)}
            for i, row in enumerate(truth_rows)
        }

    def test_perfect_probabilities(self):
        schema = toy_schema(3, mode=MULTI_LABEL)
        truth = [[1, 0, 1], [0, 1, 0], [1, 1, 0]]
        gold = self.make_gold(truth, schema)
        probs = {f"d{i}": [float(v) for v in row] for i, row in enumerate(truth)}
        report = evaluate_multilabel(probs, gold, schema)
        assert report.f1_micro == 1.0
        assert report.f1_macro == 1.0
        assert report.roc_auc == 1.0
        assert report.accuracy is None

    def test_two_by_two_hand_example(self):
        schema = toy_schema(2, mode=MULTI_LABEL)
        gold = self.make_gold([[1, 0], [0, 1]], schema)
        probs = {"d0": [0.9, 0.2], "d1": [0.4, 0.8]}
        report = evaluate_multilabel(probs, gold, schema, threshold=0.5)
        assert report.f1_micro == 1.0
        assert report.roc_auc == 1.0

    def test_zero_support_tag_excluded_from_macro_auc(self):
        schema = toy_schema(2, mode=MULTI_LABEL)
        gold = self.make_gold([[1, 0], [0, 0]], schema)  # tag c1 never true
        probs = {"d0": [0.9, 0.4], "d1": [0.1, 0.6]}
        report = evaluate_multilabel(probs, gold, schema)
        assert report.per_label_f1["c1"] == 0.0
        assert report.roc_auc_macro == pytest.approx(1.0)  # only c0 contributes
        assert report.roc_auc is not None  # pooled variant still defined

    def test_threshold_is_inclusive(self):
        schema = toy_schema(1, mode=MULTI_LABEL)
        gold = self.make_gold([[1]], schema)
        report = evaluate_multilabel({"d0": [0.5]}, gold, schema, threshold=0.5)
        assert report.f1_micro == 1.0

    def test_row_length_mismatch(self):
        schema = toy_schema(3, mode=MULTI_LABEL)
        gold = self.make_gold([[1, 0, 0]], schema)
        with pytest.raises(EvaluationError, match="3 tags"):
            evaluate_multilabel({"d0": [0.9, 0.1]}, gold, schema)

    def test_probability_out_of_range(self):
        schema = toy_schema(2, mode=MULTI_LABEL)
        gold = self.make_gold([[1, 0]], schema)
        with pytest.raises(EvaluationError, match="outside"):
            evaluate_multilabel({"d0": [1.2, 0.1]}, gold, schema)

    def test_matches_oracle(self):
        rng = np.random.default_rng(41)
        schema = toy_schema(4, mode=MULTI_LABEL)
        labels = list(schema.labels)
        for _ in range(25):
            n = int(rng.integers(1, 25))
            truth_rows = (rng.random((n, 4)) < 0.4).astype(int).tolist()
            gold = self.make_gold(truth_rows, schema)
            probs = {f"d{i}": np.round(rng.random(4), 2).tolist() for i in range(n)}
            report = evaluate_multilabel(probs, gold, schema, threshold=0.5)
            hard = {
                doc_id: {label: probs[doc_id][t] >= 0.5 for t, label in enumerate(labels)}
                for doc_id in gold
            }
            truth_map = {doc_id: gold[doc_id] for doc_id in gold}
            per, macro, micro = multilabel_metrics(hard, truth_map, labels)
            assert report.f1_macro == pytest.approx(macro, abs=1e-12)
            assert report.f1_micro == pytest.approx(micro, abs=1e-12)
            pooled_scores = [probs[f"d{i}"][t] for i in range(n) for t in range(4)]
            pooled_flags = [bool(truth_rows[i][t]) for i in range(n) for t in range(4)]
            expected_auc = auc_by_pairs(pooled_scores, pooled_flags)
            if expected_auc is None:
                assert report.roc_auc is None
            else:
                assert report.roc_auc == pytest.approx(expected_auc, abs=1e-12)


class TestMetricsReport:
    def test_render_table(self):
        schema = toy_schema(2)
        gold = {"d0": "c0", "d1": "c1"}
        report = evaluate_multiclass(dict(gold), gold, schema, split="test")
        text = report.render_table()
        assert "Acc" in text and "F1-ma" in text and "R/A" in text
        assert "toy [test]" in text
        assert "c0: 1.0000" in text

    def test_to_json(self):
        schema = toy_schema(2)
        gold = {"d0": "c0"}
        report = evaluate_multiclass(dict(gold), gold, schema)
        data = json.loads(json.dumps(report.to_json()))
        assert data["accuracy"] == 1.0
        assert data["roc_auc"] is None
        assert data["per_label_f1"] == {"c0": 1.0, "c1": 0.0}


# ---------------------------------------------------------------------------
# Gold store and the review policy.


SPLITS = {"v0": "validation", "v1": "validation", "t0": "test", "tr0": "train"}


def store_in(tmp_path):
    return GoldStore(tmp_path / "gold", splits=dict(SPLITS))


class TestRecordReview:
    def test_first_review_keeps_prediction_as_revised_from(self, tmp_path):
        store = store_in(tmp_path)
        record = record_review(
            store, "v0", "sentiment", "negatif", "dina", SENTIMENT_SCHEMA, predicted="netral"
        )
        assert record.label == "negatif"
        assert record.revised_from == "netral"
        assert store.get("sentiment", "v0").label == "negatif"

    def test_second_review_latest_wins_revised_from_preserved(self, tmp_path):
        store = store_in(tmp_path)
        record_review(
            store, "v0", "sentiment", "negatif", "dina", SENTIMENT_SCHEMA, predicted="netral"
        )
        record = record_review(
            store, "v0", "sentiment", "positif", "agus", SENTIMENT_SCHEMA, predicted="negatif"
        )
        assert record.label == "positif"
        assert record.revised_from == "netral"  # the first prediction, not the second
        assert len(store.audit_entries()) == 2

    def test_train_split_rejected(self, tmp_path):
        store = store_in(tmp_path)
        with pytest.raises(ReviewError, match="train split"):
            record_review(store, "tr0", "sentiment", "netral", "dina", SENTIMENT_SCHEMA)

    def test_unknown_doc_rejected(self, tmp_path):
        store = store_in(tmp_path)
        with pytest.raises(ReviewError, match="not in the corpus"):
            record_review(store, "zzz", "sentiment", "netral", "dina", SENTIMENT_SCHEMA)

    def test_label_validated_against_schema(self, tmp_path):
        store = store_in(tmp_path)
        with pytest.raises(ReviewError, match="not in the sentiment schema"):
            record_review(store, "v0", "sentiment", "positive", "dina", SENTIMENT_SCHEMA)

    def test_multilabel_review_normalizes_missing_tags(self, tmp_path):
        store = store_in(tmp_path)
        record = record_review(
            store, "v0", "tags", {"konflik": True}, "dina", TAGS_SCHEMA
        )
        assert record.label["konflik"] is True
        assert record.label["sawit"] is False
        assert set(record.label) == set(TAGS_SCHEMA.labels)

    def test_multilabel_unknown_tag_rejected(self, tmp_path):
        store = store_in(tmp_path)
        with pytest.raises(ReviewError, match="unknown tags"):
            record_review(store, "v0", "tags", {"wrong-tag": True}, "dina", TAGS_SCHEMA)

    def test_multilabel_needs_mapping(self, tmp_path):
        store = store_in(tmp_path)
        with pytest.raises(ReviewError, match="tag: bool"):
            record_review(store, "v0", "tags", "konflik", "dina", TAGS_SCHEMA)


class TestGoldStorePersistence:
    def test_reload_round_trip(self, tmp_path):
        store = store_in(tmp_path)
        record_review(
            store, "v0", "sentiment", "negatif", "dina", SENTIMENT_SCHEMA,
            predicted="netral", now="2024-05-01T00:00:00+00:00",
        )
        record_review(store, "t0", "sentiment", "positif", "agus", SENTIMENT_SCHEMA)
        reloaded = store_in(tmp_path)
        assert reloaded.labels_for("sentiment") == {"v0": "negatif", "t0": "positif"}
        assert reloaded.get("sentiment", "v0").revised_from == "netral"
        assert reloaded.get("sentiment", "v0").reviewed_at == "2024-05-01T00:00:00+00:00"

    def test_torn_audit_line_tolerated(self, tmp_path):
        store = store_in(tmp_path)
        record_review(store, "v0", "sentiment", "negatif", "dina", SENTIMENT_SCHEMA)
        audit = tmp_path / "gold" / GoldStore.AUDIT
        with open(audit, "a", encoding="utf-8") as handle:
            handle.write('{"doc_id": "v1", "task": "sent')  # crash mid-append
        reloaded = store_in(tmp_path)
        assert len(reloaded.audit_entries()) == 1
        assert reloaded.labels_for("sentiment") == {"v0": "negatif"}

    def test_empty_store(self, tmp_path):
        store = store_in(tmp_path)
        assert store.labels_for("sentiment") == {}
        assert store.audit_entries() == []

    def test_audit_keeps_full_history(self, tmp_path):
        store = store_in(tmp_path)
        record_review(store, "v0", "sentiment", "negatif", "dina", SENTIMENT_SCHEMA)
        record_review(store, "v0", "sentiment", "netral", "dina", SENTIMENT_SCHEMA)
        entries = store.audit_entries()
        assert [e["label"] for e in entries] == ["negatif", "netral"]

    def test_records_separated_by_task(self, tmp_path):
        store = store_in(tmp_path)
        record_review(store, "v0", "sentiment", "negatif", "dina", SENTIMENT_SCHEMA)
        record_review(store, "v0", "tags", {"konflik": True}, "dina", TAGS_SCHEMA)
        assert set(store.records) == {"sentiment", "tags"}
