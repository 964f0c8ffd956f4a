import numpy as np
import pytest

from weaklabel.corpus import Document
from weaklabel.dsl import LabelFunctionSpec, Manifest, parse_expr
from weaklabel.runtime import (
    ABSTAIN,
    LabelMatrix,
    MatrixError,
    apply_lfs,
    attach_stage1_tags,
    dumps_matrix,
    loads_matrix,
    run_pipeline,
)
from weaklabel.schema import BUILTIN_SCHEMAS, MULTI_LABEL, SENTIMENT_SCHEMA, TAGS_SCHEMA

from .helpers import toy_matrix, toy_schema


def lf(name, task, label, rule_src):
    return LabelFunctionSpec(name=name, task=task, label=label, rule=parse_expr(rule_src))


class TestLabelMatrixValidation:
    def test_shape_mismatch(self):
        with pytest.raises(MatrixError, match="shape"):
            LabelMatrix(
                doc_ids=("a",),
                lf_names=("x", "y"),
                votes=np.zeros((2, 2), dtype=np.int16),
                schema=toy_schema(2),
            )

    def test_duplicate_doc_ids(self):
        with pytest.raises(MatrixError, match="duplicate document"):
            LabelMatrix(
                doc_ids=("a", "a"),
                lf_names=("x",),
                votes=np.zeros((2, 1), dtype=np.int16),
                schema=toy_schema(2),
            )

    def test_duplicate_lf_names(self):
        with pytest.raises(MatrixError, match="duplicate rule"):
            LabelMatrix(
                doc_ids=("a",),
                lf_names=("x", "x"),
                votes=np.zeros((1, 2), dtype=np.int16),
                schema=toy_schema(2),
            )

    def test_vote_out_of_range(self):
        with pytest.raises(MatrixError, match="outside"):
            toy_matrix([[5]], k=2)
        with pytest.raises(MatrixError, match="outside"):
            toy_matrix([[-2]], k=2)

    def test_multilabel_single_polarity_enforced(self):
        with pytest.raises(MatrixError, match="other than its own target"):
            toy_matrix([[1]], k=2, mode=MULTI_LABEL, targets=[0])

    def test_target_length_checked(self):
        with pytest.raises(MatrixError, match="length"):
            toy_matrix([[0, 0]], k=2, targets=[0])


class TestApplyLfs:
    def test_votes_and_abstains(self):
        docs = [
            Document(id="d0", title="Banjir melanda", text="korban jiwa"),
            Document(id="d1", title="Festival panen", text="warga gembira"),
        ]
        specs = [
            lf("neg-banjir", "sentiment", "negatif", 'keyword_any(title, ["banjir"], nocase)'),
            lf("pos-panen", "sentiment", "positif", 'keyword_any(title, ["panen"], nocase)'),
        ]
        matrix = apply_lfs(docs, specs, SENTIMENT_SCHEMA)
        assert matrix.votes.tolist() == [[0, -1], [-1, 2]]
        assert matrix.lf_names == ("neg-banjir", "pos-panen")
        assert matrix.lf_targets == (0, 2)
        assert matrix.doc_ids == ("d0", "d1")

    def test_task_mismatch_rejected(self):
        docs = [Document(id="d0", title="", text="")]
        spec = lf("t-x", "tags", "konflik", 'keyword_any(text, ["x"], case)')
        with pytest.raises(MatrixError, match="targets task 'tags'"):
            apply_lfs(docs, [spec], SENTIMENT_SCHEMA)

    def test_empty_inputs(self):
        matrix = apply_lfs([], [], SENTIMENT_SCHEMA)
        assert matrix.votes.shape == (0, 0)


class TestMatrixIO:
    def test_round_trip(self):
        matrix = toy_matrix([[0, -1], [1, 1], [-1, 0]], k=2)
        text = dumps_matrix(matrix)
        back = loads_matrix(text, matrix.schema)
        assert back.doc_ids == matrix.doc_ids
        assert back.lf_names == matrix.lf_names
        assert np.array_equal(back.votes, matrix.votes)

    def test_header_shape(self):
        matrix = toy_matrix([[0, 1]], k=2)
        first_line = dumps_matrix(matrix).splitlines()[0]
        assert first_line == "doc_id\tlf0\tlf1"

    def test_bad_header(self):
        with pytest.raises(MatrixError, match="doc_id"):
            loads_matrix("id\tlf0\nd0\t1\n", toy_schema(2))

    def test_ragged_line(self):
        with pytest.raises(MatrixError, match="line 2"):
            loads_matrix("doc_id\tlf0\tlf1\nd0\t1\n", toy_schema(2))

    def test_non_integer_vote(self):
        with pytest.raises(MatrixError, match="non-integer"):
            loads_matrix("doc_id\tlf0\nd0\tx\n", toy_schema(2))

    def test_targets_pass_through(self):
        matrix = toy_matrix([[0, -1]], k=2, mode=MULTI_LABEL, targets=[0, 1], name="toytags")
        back = loads_matrix(dumps_matrix(matrix), matrix.schema, lf_targets=(0, 1))
        assert back.lf_targets == (0, 1)


class TestAttachTags:
    def test_schema_order_comma_joined(self):
        docs = [Document(id="d0", title="t", text="x")]
        predictions = {"d0": {"sawit": True, "konflik": True, "pertanian": False}}
        (tagged,) = attach_stage1_tags(docs, predictions, TAGS_SCHEMA)
        # schema order puts konflik before sawit
        assert tagged.tags == "konflik,sawit"

    def test_no_predictions_empty_tags(self):
        docs = [Document(id="d0", title="t", text="x")]
        (tagged,) = attach_stage1_tags(docs, {}, TAGS_SCHEMA)
        assert tagged.tags == ""

    def test_originals_not_mutated(self):
        docs = [Document(id="d0", title="t", text="x", tags=None)]
        attach_stage1_tags(docs, {"d0": {"sawit": True}}, TAGS_SCHEMA)
        assert docs[0].tags is None


def two_stage_fixture():
    docs = [
        Document(id="d0", title="Konflik lahan memanas", text="warga dan perusahaan bentrok"),
        Document(id="d1", title="Panen raya", text="hasil pertanian melimpah"),
        Document(id="d2", title="Berita biasa", text="tidak ada apa-apa"),
    ]
    tag_specs = (
        lf("t-konflik", "tags", "konflik", 'keyword_any(title_and_text, ["konflik", "bentrok"], nocase)'),
        lf("t-pertanian", "tags", "pertanian", 'keyword_any(text, ["pertanian", "panen"], nocase)'),
    )
    sent_specs = (
        lf("neg-konflik", "sentiment", "negatif", 'tag_in(["konflik"])'),
        lf("pos-pertanian", "sentiment", "positif", 'tag_in(["pertanian"])'),
    )
    tag_manifest = Manifest(name="tags-v0", task="tags", version="0", specs=tag_specs)
    sent_manifest = Manifest(name="sent-v0", task="sentiment", version="0", specs=sent_specs)
    return docs, tag_manifest, sent_manifest


class TestPipeline:
    def test_two_stage_flow(self):
        docs, tag_manifest, sent_manifest = two_stage_fixture()
        result = run_pipeline(docs, tag_manifest, sent_manifest, BUILTIN_SCHEMAS)
        assert result.tags_matrix.votes.shape == (3, 2)
        assert result.tag_predictions["d0"]["konflik"] is True
        assert result.tag_predictions["d1"]["pertanian"] is True
        assert result.tagged_docs[0].tags == "konflik"
        assert result.tagged_docs[1].tags == "pertanian"
        assert result.tagged_docs[2].tags == ""
        # stage 2 sees the attached tags
        assert result.sentiment_matrix.votes.tolist() == [[0, -1], [-1, 2], [-1, -1]]

    def test_gold_tag_overlay(self):
        docs, tag_manifest, sent_manifest = two_stage_fixture()
        gold = {"d2": {"konflik": True}}
        result = run_pipeline(
            docs, tag_manifest, sent_manifest, BUILTIN_SCHEMAS,
            use_gold_tags=True, gold_tags=gold,
        )
        assert result.tagged_docs[2].tags == "konflik"
        assert result.sentiment_matrix.votes[2].tolist() == [0, -1]
        # non-overlaid docs keep model output
        assert result.tagged_docs[0].tags == "konflik"

    def test_overlay_ignored_without_flag(self):
        docs, tag_manifest, sent_manifest = two_stage_fixture()
        result = run_pipeline(
            docs, tag_manifest, sent_manifest, BUILTIN_SCHEMAS,
            use_gold_tags=False, gold_tags={"d2": {"konflik": True}},
        )
        assert result.tagged_docs[2].tags == ""

    def test_sentiment_only(self):
        docs, _, sent_manifest = two_stage_fixture()
        result = run_pipeline(docs, None, sent_manifest, BUILTIN_SCHEMAS)
        assert result.tags_matrix is None
        # no tags attached, so tag_in rules abstain everywhere
        assert result.sentiment_matrix.votes.tolist() == [[-1, -1]] * 3

    def test_tags_only(self):
        docs, tag_manifest, _ = two_stage_fixture()
        result = run_pipeline(docs, tag_manifest, None, BUILTIN_SCHEMAS)
        assert result.sentiment_matrix is None
        assert result.tags_matrix is not None

    def test_deterministic(self):
        docs, tag_manifest, sent_manifest = two_stage_fixture()
        a = run_pipeline(docs, tag_manifest, sent_manifest, BUILTIN_SCHEMAS, seed=3)
        b = run_pipeline(docs, tag_manifest, sent_manifest, BUILTIN_SCHEMAS, seed=3)
        assert np.array_equal(a.sentiment_matrix.votes, b.sentiment_matrix.votes)
        assert a.tag_predictions == b.tag_predictions
