import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weaklabel.corpus import (
    CorpusError,
    Document,
    RawArticle,
    SplitSpec,
    assign_splits,
    chunk_article,
    chunk_corpus,
    document_from_record,
    dumps_corpus,
    load_raw_articles,
    loads_corpus,
    render_input,
    tokenize,
)


def make_article(n_tokens: int, token: str = "kata") -> RawArticle:
    return RawArticle(id="a1", title="Judul Berita", body=" ".join(f"{token}{i}" for i in range(n_tokens)))


class TestChunking:
    def test_worked_example_1030_tokens(self):
        # 1030 tokens at a 512 budget: windows of 512, 512 and 6
        docs = chunk_article(make_article(1030), max_tokens=512)
        assert [len(tokenize(d.text)) for d in docs] == [512, 512, 6]
        assert len(docs) == math.ceil(1030 / 512)

    def test_chunk_count_is_ceiling(self):
        for n, max_tokens in [(1, 512), (512, 512), (513, 512), (1024, 512), (7, 3), (9, 3)]:
            docs = chunk_article(make_article(n), max_tokens=max_tokens)
            assert len(docs) == math.ceil(n / max_tokens)

    def test_empty_body_yields_no_chunks(self):
        assert chunk_article(RawArticle(id="x", title="t", body="   ")) == []

    def test_title_repeats_and_does_not_count(self):
        article = RawArticle(id="a", title="sebuah judul panjang " * 50, body="isi " * 10)
        docs = chunk_article(article, max_tokens=10)
        assert len(docs) == 1
        assert all(d.title == article.title for d in docs)

    def test_ids_carry_raw_id_and_chunk_index(self):
        docs = chunk_article(make_article(1030), max_tokens=512)
        assert [d.id for d in docs] == ["a1#0", "a1#1", "a1#2"]

    def test_join_reconstructs_token_sequence(self):
        article = make_article(100)
        docs = chunk_article(article, max_tokens=7)
        rebuilt = " ".join(d.text for d in docs)
        assert tokenize(rebuilt) == tokenize(article.body)

    @given(st.integers(min_value=0, max_value=300), st.integers(min_value=1, max_value=50))
    @settings(max_examples=60, deadline=None)
    def test_chunk_properties(self, n_tokens, max_tokens):
        article = make_article(n_tokens)
        docs = chunk_article(article, max_tokens=max_tokens)
        assert len(docs) == math.ceil(n_tokens / max_tokens)
        assert all(len(tokenize(d.text)) <= max_tokens for d in docs)
        rebuilt = tokenize(" ".join(d.text for d in docs))
        assert rebuilt == tokenize(article.body)

    def test_extra_fields_ride_along(self):
        article = RawArticle(id="a", title="t", body="a b", extra={"year": 2019})
        (d,) = chunk_article(article)
        assert d.extra == {"year": 2019}

    def test_chunk_corpus_concatenates(self):
        arts = [make_article(5), RawArticle(id="a2", title="t", body="x " * 3)]
        docs = chunk_corpus(arts, max_tokens=2)
        assert [d.id for d in docs] == ["a1#0", "a1#1", "a1#2", "a2#0", "a2#1"]


class TestRenderInput:
    def test_default_joiner(self):
        d = Document(id="x", title="Judul", text="isi artikel")
        assert render_input(d) == "Judul ; isi artikel"

    def test_custom_joiner(self):
        d = Document(id="x", title="Judul", text="isi")
        assert render_input(d, joiner=" | ") == "Judul | isi"


class TestSplits:
    def docs(self, n):
        return [Document(id=f"d{i}", title="t", text="x") for i in range(n)]

    def test_counts_respected_and_deterministic(self):
        docs = self.docs(10)
        spec = SplitSpec(train=7, validation=2, test=1)
        first = assign_splits(docs, spec, seed=13)
        second = assign_splits(docs, spec, seed=13)
        assert [d.split for d in first] == [d.split for d in second]
        counts = {s: sum(1 for d in first if d.split == s) for s in ("train", "validation", "test")}
        assert counts == {"train": 7, "validation": 2, "test": 1}

    def test_different_seed_different_assignment(self):
        docs = self.docs(50)
        spec = SplitSpec(train=30, validation=10, test=10)
        a = [d.split for d in assign_splits(docs, spec, seed=1)]
        b = [d.split for d in assign_splits(docs, spec, seed=2)]
        assert a != b

    def test_order_preserved(self):
        docs = self.docs(5)
        out = assign_splits(docs, SplitSpec(3, 1, 1), seed=0)
        assert [d.id for d in out] == [d.id for d in docs]

    def test_count_mismatch_rejected(self):
        with pytest.raises(CorpusError, match="sum to 4"):
            assign_splits(self.docs(5), SplitSpec(2, 1, 1), seed=0)

    def test_from_ratios(self):
        spec = SplitSpec.from_ratios(100)
        assert (spec.train, spec.validation, spec.test) == (80, 10, 10)
        assert SplitSpec.from_ratios(4896).total == 4896

    @given(st.integers(min_value=1, max_value=60), st.integers(min_value=0, max_value=2**31))
    @settings(max_examples=40, deadline=None)
    def test_every_doc_assigned_exactly_once(self, n, seed):
        docs = self.docs(n)
        spec = SplitSpec.from_ratios(n)
        out = assign_splits(docs, spec, seed=seed)
        assert sum(1 for d in out if d.split == "train") == spec.train
        assert sum(1 for d in out if d.split == "validation") == spec.validation
        assert sum(1 for d in out if d.split == "test") == spec.test


class TestCorpusIO:
    def test_round_trip_preserves_unknown_fields(self):
        docs = [
            Document(id="a#0", title="T", text="isi", split="train", tags="konflik",
                     extra={"year": 2020, "url": "http://x"}),
            Document(id="a#1", title="T", text="lagi", split="test"),
        ]
        text = dumps_corpus(docs)
        back = loads_corpus(text)
        assert back == docs

    def test_duplicate_ids_rejected_with_both_lines(self):
        text = '{"id": "a", "title": "t", "text": "x"}\n{"id": "a", "title": "t", "text": "y"}\n'
        with pytest.raises(CorpusError, match="lines 1 and 2"):
            loads_corpus(text)

    def test_missing_field_names_line_and_field(self):
        with pytest.raises(CorpusError, match="missing field 'text' \\(line 1\\)"):
            loads_corpus('{"id": "a", "title": "t"}\n')

    def test_unknown_split_rejected(self):
        with pytest.raises(CorpusError, match="unknown split 'dev'"):
            document_from_record({"id": "a", "title": "t", "text": "x", "split": "dev"})

    def test_bad_json_names_line(self):
        with pytest.raises(CorpusError, match="line 2"):
            loads_corpus('{"id": "a", "title": "t", "text": "x"}\n{oops\n')

    def test_non_ascii_survives(self):
        docs = [Document(id="a", title="Krisis Ekologi di Rawa", text="debit 1.000 m³ per detik")]
        assert loads_corpus(dumps_corpus(docs)) == docs

    def test_raw_articles_load(self, tmp_path):
        path = tmp_path / "raw.jsonl"
        path.write_text(
            '{"id": "r1", "title": "Judul", "body": "isi badan", "year": 2018}\n', encoding="utf-8"
        )
        (article,) = load_raw_articles(path)
        assert article.id == "r1"
        assert article.extra == {"year": 2018}

    def test_raw_duplicate_rejected(self, tmp_path):
        path = tmp_path / "raw.jsonl"
        path.write_text(
            '{"id": "r1", "title": "a", "body": "x"}\n{"id": "r1", "title": "b", "body": "y"}\n',
            encoding="utf-8",
        )
        with pytest.raises(CorpusError, match="duplicate article id 'r1'"):
            load_raw_articles(path)
