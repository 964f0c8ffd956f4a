"""Document store: chunking of raw articles, split assignment, line-delimited persistence.

Raw articles come in as (id, title, body) records. Long bodies are cut into
fixed-size windows of whitespace tokens so that downstream consumers with a
bounded input length see every part of the article. The title rides along on
every chunk and does not count against the token budget.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field, replace

DEFAULT_MAX_TOKENS = 512
DEFAULT_JOINER = " ; "

SPLITS = ("train", "validation", "test")

CORE_FIELDS = ("id", "title", "text", "split", "tags")


class CorpusError(ValueError):
    """Raised for malformed corpus files or inconsistent split requests."""


@dataclass(frozen=True)
class RawArticle:
    id: str
    title: str
    body: str
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Document:
    """One chunk of an article, the unit that labeling functions see."""

    id: str
    title: str
    text: str
    split: str | None = None
    tags: str | None = None
    extra: dict = field(default_factory=dict)

    def with_split(self, split: str) -> "Document":
        return replace(self, split=split)

    def with_tags(self, tags: str) -> "Document":
        return replace(self, tags=tags)


def tokenize(text: str) -> list[str]:
    """Whitespace tokens. The only tokenization used anywhere in the engine."""
    return text.split()


def chunk_article(article: RawArticle, max_tokens: int = DEFAULT_MAX_TOKENS) -> list[Document]:
    """Cut the body into greedy fixed windows of at most max_tokens tokens.

    Windows do not overlap, so the number of chunks is ceil(tokens / max_tokens)
    and joining the chunk texts with single spaces reproduces the body's token
    sequence. An empty body yields no chunks.
    """
    if max_tokens < 1:
        raise ValueError(f"max_tokens must be positive, got {max_tokens}")
    tokens = tokenize(article.body)
    docs = []
    for start in range(0, len(tokens), max_tokens):
        window = tokens[start : start + max_tokens]
        docs.append(
            Document(
                id=f"{article.id}#{start // max_tokens}",
                title=article.title,
                text=" ".join(window),
                extra=dict(article.extra),
            )
        )
    assert len(docs) == math.ceil(len(tokens) / max_tokens)
    return docs


def chunk_corpus(articles: list[RawArticle], max_tokens: int = DEFAULT_MAX_TOKENS) -> list[Document]:
    docs = []
    for article in articles:
        docs.extend(chunk_article(article, max_tokens))
    return docs


def render_input(doc: Document, joiner: str = DEFAULT_JOINER) -> str:
    """The single string handed to downstream consumers: title, joiner, text."""
    return f"{doc.title}{joiner}{doc.text}"


@dataclass(frozen=True)
class SplitSpec:
    train: int
    validation: int
    test: int

    @property
    def total(self) -> int:
        return self.train + self.validation + self.test

    @classmethod
    def from_ratios(cls, n: int, train: float = 0.8, validation: float = 0.1) -> "SplitSpec":
        n_train = round(n * train)
        n_val = round(n * validation)
        return cls(train=n_train, validation=n_val, test=n - n_train - n_val)


def assign_splits(docs: list[Document], spec: SplitSpec, seed: int) -> list[Document]:
    """Assign train/validation/test by a seeded uniform permutation.

    Document order is preserved; only the split field changes. Counts must
    add up to the corpus size exactly.
    """
    if spec.total != len(docs):
        raise CorpusError(
            f"split counts sum to {spec.total} but corpus has {len(docs)} documents"
        )
    if min(spec.train, spec.validation, spec.test) < 0:
        raise CorpusError("split counts must be non-negative")
    order = list(range(len(docs)))
    random.Random(seed).shuffle(order)
    split_of = {}
    for rank, idx in enumerate(order):
        if rank < spec.train:
            split_of[idx] = "train"
        elif rank < spec.train + spec.validation:
            split_of[idx] = "validation"
        else:
            split_of[idx] = "test"
    return [doc.with_split(split_of[i]) for i, doc in enumerate(docs)]


def document_to_record(doc: Document) -> dict:
    record = {"id": doc.id, "title": doc.title, "text": doc.text}
    if doc.split is not None:
        record["split"] = doc.split
    if doc.tags is not None:
        record["tags"] = doc.tags
    record.update(doc.extra)
    return record


def document_from_record(record: dict, line: int | None = None) -> Document:
    where = f" (line {line})" if line is not None else ""
    for name in ("id", "title", "text"):
        if name not in record:
            raise CorpusError(f"document record missing field '{name}'{where}")
    split = record.get("split")
    if split is not None and split not in SPLITS:
        raise CorpusError(f"unknown split '{split}'{where}; expected one of {SPLITS}")
    extra = {k: v for k, v in record.items() if k not in CORE_FIELDS}
    return Document(
        id=str(record["id"]),
        title=record["title"],
        text=record["text"],
        split=split,
        tags=record.get("tags"),
        extra=extra,
    )


def dumps_corpus(docs: list[Document]) -> str:
    lines = [json.dumps(document_to_record(d), ensure_ascii=False, sort_keys=True) for d in docs]
    return "".join(line + "\n" for line in lines)


def loads_corpus(text: str) -> list[Document]:
    docs = []
    seen: dict[str, int] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"corpus line {line_no} is not valid JSON: {exc}") from None
        if not isinstance(record, dict):
            raise CorpusError(f"corpus line {line_no} is not an object")
        doc = document_from_record(record, line=line_no)
        if doc.id in seen:
            raise CorpusError(
                f"duplicate document id '{doc.id}' at lines {seen[doc.id]} and {line_no}"
            )
        seen[doc.id] = line_no
        docs.append(doc)
    return docs


def save_corpus(docs: list[Document], path) -> None:
    from .project import write_text_atomic

    write_text_atomic(path, dumps_corpus(docs))


def load_corpus(path) -> list[Document]:
    with open(path, encoding="utf-8") as handle:
        return loads_corpus(handle.read())


def raw_article_from_record(record: dict, line: int | None = None) -> RawArticle:
    where = f" (line {line})" if line is not None else ""
    for name in ("id", "title", "body"):
        if name not in record:
            raise CorpusError(f"raw article record missing field '{name}'{where}")
    extra = {k: v for k, v in record.items() if k not in ("id", "title", "body")}
    return RawArticle(id=str(record["id"]), title=record["title"], body=record["body"], extra=extra)


def load_raw_articles(path) -> list[RawArticle]:
    articles = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"raw line {line_no} is not valid JSON: {exc}") from None
            article = raw_article_from_record(record, line=line_no)
            if article.id in seen:
                raise CorpusError(
                    f"duplicate article id '{article.id}' at lines {seen[article.id]} and {line_no}"
                )
            seen[article.id] = line_no
            articles.append(article)
    return articles
