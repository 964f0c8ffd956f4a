"""Expression nodes and their evaluation semantics.

Text predicates read one of four document fields; tag predicates read the
comma-separated tags field that the first pipeline stage attaches. Keyword
matching is plain substring search (no word boundaries); case-insensitive
variants fold both sides with str.casefold. Occurrence counting is
non-overlapping, like str.count.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..corpus import Document, tokenize

# "title_and_text" mirrors how rule authors see an article: headline, a pipe,
# then the chunk text. It is independent of the rendering joiner used for
# export, which is configurable.
TITLE_TEXT_JOINER = " | "

FIELDS = ("title", "text", "title_and_text", "tags_raw")

CMP_OPS = ("lt", "eq", "gt")
COUNT_OPS = ("le", "eq", "ge")


class Expr:
    """Base class, only for isinstance checks and shared repr hooks."""

    __slots__ = ()

    def __str__(self) -> str:
        from .parser import print_expr

        return print_expr(self)


@dataclass(frozen=True)
class AllOf(Expr):
    children: tuple[Expr, ...]


@dataclass(frozen=True)
class AnyOf(Expr):
    children: tuple[Expr, ...]


@dataclass(frozen=True)
class Not(Expr):
    child: Expr


@dataclass(frozen=True)
class KeywordAny(Expr):
    field: str
    keywords: tuple[str, ...]
    case_sensitive: bool


@dataclass(frozen=True)
class RegexAny(Expr):
    field: str
    patterns: tuple[str, ...]
    case_sensitive: bool


@dataclass(frozen=True)
class CountGt(Expr):
    field: str
    keywords: tuple[str, ...]
    threshold: int
    case_sensitive: bool


@dataclass(frozen=True)
class FirstWordIs(Expr):
    field: str
    word: str


@dataclass(frozen=True)
class TagIn(Expr):
    tags: tuple[str, ...]


@dataclass(frozen=True)
class TagsAll(Expr):
    tags: tuple[str, ...]


@dataclass(frozen=True)
class TagCountCmp(Expr):
    group_a: tuple[str, ...]
    group_b: tuple[str, ...]
    op: str  # lt | eq | gt


@dataclass(frozen=True)
class TagCountIs(Expr):
    op: str  # le | eq | ge
    count: int


_BANNED_REGEX = (
    (re.compile(r"\\[1-9]"), "backreferences are not supported"),
    (re.compile(r"\(\?P="), "named backreferences are not supported"),
    (re.compile(r"\(\?<"), "lookbehind is not supported"),
    (re.compile(r"\(\?[=!]"), "lookahead is not supported"),
    (re.compile(r"\(\?\("), "conditional groups are not supported"),
)


def validate_regex(pattern: str) -> str | None:
    """Return an error message if the pattern is outside the dialect, else None.

    The dialect is the portable core: literals, character classes, \\d \\w \\s
    \\b, alternation, grouping, quantifiers and anchors. Backreferences and
    lookaround are rejected even though the host engine knows them, so rules
    stay portable.
    """
    for banned, why in _BANNED_REGEX:
        if banned.search(pattern):
            return why
    try:
        re.compile(pattern)
    except re.error as exc:
        return f"does not compile: {exc}"
    return None


_COMPILED: dict[tuple[str, int], re.Pattern] = {}


def _compiled(pattern: str, case_sensitive: bool) -> re.Pattern:
    flags = 0 if case_sensitive else re.IGNORECASE
    key = (pattern, flags)
    found = _COMPILED.get(key)
    if found is None:
        found = _COMPILED[key] = re.compile(pattern, flags)
    return found


def resolve_field(doc: Document, field: str) -> str:
    if field == "title":
        return doc.title
    if field == "text":
        return doc.text
    if field == "title_and_text":
        return f"{doc.title}{TITLE_TEXT_JOINER}{doc.text}"
    if field == "tags_raw":
        return doc.tags or ""
    raise ValueError(f"unknown field '{field}'")


def parse_tags_field(raw: str | None) -> list[str]:
    """Split the attached tags field into tag names, dropping blanks."""
    if not raw:
        return []
    return [part for part in (piece.strip() for piece in raw.split(",")) if part]


def _contains_any(value: str, keywords: tuple[str, ...], case_sensitive: bool) -> bool:
    if case_sensitive:
        return any(kw in value for kw in keywords)
    folded = value.casefold()
    return any(kw.casefold() in folded for kw in keywords)


def _count_total(value: str, keywords: tuple[str, ...], case_sensitive: bool) -> int:
    if not case_sensitive:
        value = value.casefold()
        keywords = tuple(kw.casefold() for kw in keywords)
    return sum(value.count(kw) for kw in keywords)


def _group_count(tagset: set[str], group: tuple[str, ...]) -> int:
    return sum(1 for tag in group if tag in tagset)


def evaluate(expr: Expr, doc: Document) -> bool:
    """Decide whether the rule holds for the document. Total and side-effect free."""
    if isinstance(expr, AllOf):
        return all(evaluate(child, doc) for child in expr.children)
    if isinstance(expr, AnyOf):
        return any(evaluate(child, doc) for child in expr.children)
    if isinstance(expr, Not):
        return not evaluate(expr.child, doc)
    if isinstance(expr, KeywordAny):
        return _contains_any(resolve_field(doc, expr.field), expr.keywords, expr.case_sensitive)
    if isinstance(expr, RegexAny):
        value = resolve_field(doc, expr.field)
        return any(_compiled(p, expr.case_sensitive).search(value) for p in expr.patterns)
    if isinstance(expr, CountGt):
        value = resolve_field(doc, expr.field)
        return _count_total(value, expr.keywords, expr.case_sensitive) > expr.threshold
    if isinstance(expr, FirstWordIs):
        tokens = tokenize(resolve_field(doc, expr.field))
        return bool(tokens) and tokens[0] == expr.word
    if isinstance(expr, TagIn):
        tagset = set(parse_tags_field(doc.tags))
        return any(tag in tagset for tag in expr.tags)
    if isinstance(expr, TagsAll):
        tagset = set(parse_tags_field(doc.tags))
        return all(tag in tagset for tag in expr.tags)
    if isinstance(expr, TagCountCmp):
        tagset = set(parse_tags_field(doc.tags))
        a = _group_count(tagset, expr.group_a)
        b = _group_count(tagset, expr.group_b)
        if expr.op == "lt":
            return a < b
        if expr.op == "eq":
            return a == b
        return a > b
    if isinstance(expr, TagCountIs):
        n = len(parse_tags_field(doc.tags))
        if expr.op == "le":
            return n <= expr.count
        if expr.op == "eq":
            return n == expr.count
        return n >= expr.count
    raise TypeError(f"not an expression node: {expr!r}")


def uses_tag_primitives(expr: Expr) -> bool:
    """True when the rule reads attached tags anywhere in its tree."""
    if isinstance(expr, (TagIn, TagsAll, TagCountCmp, TagCountIs)):
        return True
    if isinstance(expr, KeywordAny) and expr.field == "tags_raw":
        return True
    if isinstance(expr, RegexAny) and expr.field == "tags_raw":
        return True
    if isinstance(expr, CountGt) and expr.field == "tags_raw":
        return True
    if isinstance(expr, FirstWordIs) and expr.field == "tags_raw":
        return True
    if isinstance(expr, (AllOf, AnyOf)):
        return any(uses_tag_primitives(child) for child in expr.children)
    if isinstance(expr, Not):
        return uses_tag_primitives(expr.child)
    return False


def referenced_tags(expr: Expr) -> set[str]:
    """Every tag name the rule mentions, for schema cross-checks."""
    names: set[str] = set()
    if isinstance(expr, (TagIn, TagsAll)):
        names.update(expr.tags)
    elif isinstance(expr, TagCountCmp):
        names.update(expr.group_a)
        names.update(expr.group_b)
    elif isinstance(expr, (AllOf, AnyOf)):
        for child in expr.children:
            names.update(referenced_tags(child))
    elif isinstance(expr, Not):
        names.update(referenced_tags(expr.child))
    return names
