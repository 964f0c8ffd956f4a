"""Concrete syntax for rule files.

A rule file is three header lines and one rule expression:

    name: negatif-korupsi
    task: sentiment
    label: negatif
    rule: tag_in(["korupsi"])

Headers take the rest of the line verbatim (labels may contain spaces and
slashes). The rule expression may span any number of lines; layout is free.
``#`` starts a comment that runs to the end of the line, except inside
strings. The canonical printer and the parser round-trip:
parse(print(spec)) == spec.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..schema import BUILTIN_SCHEMAS, TaskSchema
from .expr import (
    CMP_OPS,
    COUNT_OPS,
    FIELDS,
    AllOf,
    AnyOf,
    CountGt,
    Expr,
    FirstWordIs,
    KeywordAny,
    Not,
    RegexAny,
    TagCountCmp,
    TagCountIs,
    TagIn,
    TagsAll,
    validate_regex,
)

MAX_WIDTH = 96
INDENT = "    "

HEADER_KEYS = ("name", "task", "label")


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str  # "syntax" | "unknown-field" | "unknown-label" | "bad-regex" | ...
    message: str
    line: int | None = None
    col: int | None = None
    lf_name: str | None = None

    def render(self) -> str:
        where = ""
        if self.line is not None:
            where = f" line {self.line}"
            if self.col is not None:
                where += f" col {self.col}"
        who = f" [{self.lf_name}]" if self.lf_name else ""
        return f"{self.severity}[{self.code}]{who}{where}: {self.message}"

    def to_json(self) -> dict:
        return {
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
            "line": self.line,
            "col": self.col,
            "lf_name": self.lf_name,
        }


class LfParseError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(d.render() for d in diagnostics))


def _fail(code: str, message: str, line: int | None, col: int | None):
    raise LfParseError([Diagnostic("error", code, message, line=line, col=col)])


# ---------------------------------------------------------------------------
# Tokenizer


@dataclass(frozen=True)
class _Token:
    kind: str  # ident str int ( ) [ ] , eof
    value: str | int | None
    line: int
    col: int


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _tokenize(source: str, base_line: int, base_col: int) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = base_line, base_col
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
                col += 1
            continue
        start_line, start_col = line, col
        if ch in "()[],":
            tokens.append(_Token(ch, None, start_line, start_col))
            i += 1
            col += 1
            continue
        if ch == '"':
            value, consumed = _scan_string(source, i, start_line, start_col)
            tokens.append(_Token("str", value, start_line, start_col))
            for c in source[i : i + consumed]:
                if c == "\n":
                    line += 1
                    col = 1
                else:
                    col += 1
            i += consumed
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(_Token("int", int(source[i:j]), start_line, start_col))
            col += j - i
            i = j
            continue
        if _is_ident_start(ch):
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token("ident", source[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        _fail("syntax", f"unexpected character {ch!r}", start_line, start_col)
    tokens.append(_Token("eof", None, line, col))
    return tokens


_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t", "r": "\r"}


def _scan_string(source: str, start: int, line: int, col: int) -> tuple[str, int]:
    out = []
    i = start + 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == '"':
            return "".join(out), i - start + 1
        if ch == "\n":
            break
        if ch == "\\":
            if i + 1 >= n:
                break
            esc = source[i + 1]
            if esc in _ESCAPES:
                out.append(_ESCAPES[esc])
                i += 2
                continue
            if esc == "u" and i + 5 < n:
                try:
                    out.append(chr(int(source[i + 2 : i + 6], 16)))
                except ValueError:
                    _fail("syntax", "bad \\u escape in string", line, col)
                i += 6
                continue
            _fail("syntax", f"unknown escape \\{esc} in string", line, col)
        out.append(ch)
        i += 1
    _fail("syntax", "unterminated string", line, col)
    raise AssertionError  # unreachable


def _quote(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ch == "\r":
            out.append("\\r")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


# ---------------------------------------------------------------------------
# Expression parser


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            _fail("syntax", f"expected {what}, found {self._describe(tok)}", tok.line, tok.col)
        return self.advance()

    @staticmethod
    def _describe(tok: _Token) -> str:
        if tok.kind == "eof":
            return "end of input"
        if tok.kind in ("ident", "str", "int"):
            return f"{tok.kind} {tok.value!r}"
        return f"'{tok.kind}'"

    def parse(self) -> Expr:
        expr = self.parse_call()
        tail = self.peek()
        if tail.kind != "eof":
            _fail("syntax", f"unexpected {self._describe(tail)} after rule", tail.line, tail.col)
        return expr

    def parse_call(self) -> Expr:
        head = self.expect("ident", "a rule name")
        self.expect("(", "'('")
        args: list[tuple[str, object, _Token]] = []
        if self.peek().kind != ")":
            while True:
                args.append(self.parse_arg())
                if self.peek().kind == ",":
                    self.advance()
                    continue
                break
        self.expect(")", "')' or ','")
        return _build(head, args)

    def parse_arg(self) -> tuple[str, object, _Token]:
        tok = self.peek()
        if tok.kind == "ident":
            if self.tokens[self.pos + 1].kind == "(":
                return ("expr", self.parse_call(), tok)
            self.advance()
            return ("word", tok.value, tok)
        if tok.kind == "str":
            self.advance()
            return ("str", tok.value, tok)
        if tok.kind == "int":
            self.advance()
            return ("int", tok.value, tok)
        if tok.kind == "[":
            return self.parse_list()
        _fail("syntax", f"expected an argument, found {self._describe(tok)}", tok.line, tok.col)
        raise AssertionError

    def parse_list(self) -> tuple[str, object, _Token]:
        open_tok = self.expect("[", "'['")
        items: list[str] = []
        if self.peek().kind != "]":
            while True:
                tok = self.expect("str", "a string")
                if tok.value == "":
                    _fail("syntax", "list items must be non-empty strings", tok.line, tok.col)
                items.append(tok.value)
                if self.peek().kind == ",":
                    self.advance()
                    continue
                break
        self.expect("]", "']' or ','")
        return ("list", tuple(items), open_tok)


def _want(args, shapes: str, head: _Token):
    """Check arg count and shapes; shapes is a string like 'expr+' or 'word list word'."""
    names = shapes.split()
    if names and names[-1] == "expr+":
        if len(args) < 1:
            _fail("syntax", f"{head.value} needs at least one child rule", head.line, head.col)
        for kind, _, tok in args:
            if kind != "expr":
                _fail("syntax", f"{head.value} takes child rules only", tok.line, tok.col)
        return
    if len(args) != len(names):
        _fail(
            "syntax",
            f"{head.value} takes {len(names)} argument(s), got {len(args)}",
            head.line,
            head.col,
        )
    for (kind, _, tok), want in zip(args, names):
        if kind != want:
            _fail("syntax", f"{head.value} expected {want} here, found {kind}", tok.line, tok.col)


def _field(arg) -> str:
    _, value, tok = arg
    if value not in FIELDS:
        _fail(
            "unknown-field",
            f"unknown field '{value}'; fields are {', '.join(FIELDS)}",
            tok.line,
            tok.col,
        )
    return value


def _case_flag(arg, head: _Token) -> bool:
    _, value, tok = arg
    if value == "case":
        return True
    if value == "nocase":
        return False
    _fail("syntax", f"{head.value} wants 'case' or 'nocase', found '{value}'", tok.line, tok.col)
    raise AssertionError


def _nonempty(arg, head: _Token) -> tuple[str, ...]:
    _, items, tok = arg
    if not items:
        _fail("syntax", f"{head.value} needs a non-empty list", tok.line, tok.col)
    return items


def _build(head: _Token, args) -> Expr:
    name = head.value
    if name == "all_of":
        _want(args, "expr+", head)
        return AllOf(tuple(a[1] for a in args))
    if name == "any_of":
        _want(args, "expr+", head)
        return AnyOf(tuple(a[1] for a in args))
    if name == "not":
        _want(args, "expr", head)
        return Not(args[0][1])
    if name == "keyword_any":
        _want(args, "word list word", head)
        return KeywordAny(_field(args[0]), _nonempty(args[1], head), _case_flag(args[2], head))
    if name == "regex_any":
        _want(args, "word list word", head)
        patterns = _nonempty(args[1], head)
        tok = args[1][2]
        for pattern in patterns:
            problem = validate_regex(pattern)
            if problem:
                _fail("bad-regex", f"pattern {pattern!r} {problem}", tok.line, tok.col)
        return RegexAny(_field(args[0]), patterns, _case_flag(args[2], head))
    if name == "count_gt":
        _want(args, "word list int word", head)
        threshold = args[2][1]
        return CountGt(
            _field(args[0]), _nonempty(args[1], head), threshold, _case_flag(args[3], head)
        )
    if name == "first_word_is":
        _want(args, "word str", head)
        word = args[1][1]
        if not word or word.split() != [word]:
            tok = args[1][2]
            _fail("syntax", "first_word_is wants a single non-empty word", tok.line, tok.col)
        return FirstWordIs(_field(args[0]), word)
    if name == "tag_in":
        _want(args, "list", head)
        return TagIn(_nonempty(args[0], head))
    if name == "tags_all":
        _want(args, "list", head)
        return TagsAll(_nonempty(args[0], head))
    if name == "tag_count_cmp":
        _want(args, "list list word", head)
        _, op, tok = args[2]
        if op not in CMP_OPS:
            _fail("syntax", f"tag_count_cmp op must be one of {CMP_OPS}", tok.line, tok.col)
        return TagCountCmp(_nonempty(args[0], head), _nonempty(args[1], head), op)
    if name == "tag_count_is":
        _want(args, "word int", head)
        _, op, tok = args[0]
        if op not in COUNT_OPS:
            _fail("syntax", f"tag_count_is op must be one of {COUNT_OPS}", tok.line, tok.col)
        count = args[1][1]
        return TagCountIs(op, count)
    _fail("syntax", f"unknown rule '{name}'", head.line, head.col)
    raise AssertionError


def parse_expr(source: str, base_line: int = 1, base_col: int = 1) -> Expr:
    return _Parser(_tokenize(source, base_line, base_col)).parse()


# ---------------------------------------------------------------------------
# Rule file parsing


def parse_lf_spec(source: str, schemas: dict[str, TaskSchema] | None = None):
    """Parse one rule file into a LabelFunctionSpec.

    Raises LfParseError carrying a positioned diagnostic on the first problem.
    """
    from .spec import LabelFunctionSpec

    if schemas is None:
        schemas = BUILTIN_SCHEMAS
    headers: dict[str, tuple[str, int]] = {}
    rule_source = None
    rule_line = rule_col = 0
    lines = source.split("\n")
    for idx, raw_line in enumerate(lines):
        line_no = idx + 1
        stripped = raw_line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, rest = raw_line.partition(":")
        key = key.strip()
        if not sep:
            _fail("syntax", "expected 'key: value'", line_no, 1)
        if key == "rule":
            offset = raw_line.index(":") + 1
            first = raw_line[offset:]
            rule_source = first + "\n" + "\n".join(lines[idx + 1 :])
            rule_line, rule_col = line_no, offset + 1
            break
        if key not in HEADER_KEYS:
            _fail("syntax", f"unknown header '{key}'", line_no, 1)
        if key in headers:
            _fail("syntax", f"duplicate header '{key}'", line_no, 1)
        headers[key] = (rest.strip(), line_no)
    for key in HEADER_KEYS:
        if key not in headers:
            _fail("syntax", f"missing header '{key}'", len(lines), 1)
        if not headers[key][0]:
            _fail("syntax", f"header '{key}' is empty", headers[key][1], 1)
    if rule_source is None:
        _fail("syntax", "missing 'rule:'", len(lines), 1)

    name = headers["name"][0]
    task, task_line = headers["task"]
    label, label_line = headers["label"]
    if task not in schemas:
        _fail(
            "unknown-task",
            f"unknown task '{task}'; known tasks: {', '.join(sorted(schemas))}",
            task_line,
            1,
        )
    schema = schemas[task]
    if label not in schema.labels:
        _fail(
            "unknown-label",
            f"label '{label}' is not in the {task} schema",
            label_line,
            1,
        )
    rule = parse_expr(rule_source, base_line=rule_line, base_col=rule_col)
    return LabelFunctionSpec(name=name, task=task, label=label, rule=rule)


# ---------------------------------------------------------------------------
# Canonical printer


def _one_line(expr: Expr) -> str:
    if isinstance(expr, AllOf):
        return "all_of(" + ", ".join(_one_line(c) for c in expr.children) + ")"
    if isinstance(expr, AnyOf):
        return "any_of(" + ", ".join(_one_line(c) for c in expr.children) + ")"
    if isinstance(expr, Not):
        return f"not({_one_line(expr.child)})"
    if isinstance(expr, KeywordAny):
        return (
            f"keyword_any({expr.field}, {_list_one_line(expr.keywords)}, "
            f"{_case_word(expr.case_sensitive)})"
        )
    if isinstance(expr, RegexAny):
        return (
            f"regex_any({expr.field}, {_list_one_line(expr.patterns)}, "
            f"{_case_word(expr.case_sensitive)})"
        )
    if isinstance(expr, CountGt):
        return (
            f"count_gt({expr.field}, {_list_one_line(expr.keywords)}, {expr.threshold}, "
            f"{_case_word(expr.case_sensitive)})"
        )
    if isinstance(expr, FirstWordIs):
        return f"first_word_is({expr.field}, {_quote(expr.word)})"
    if isinstance(expr, TagIn):
        return f"tag_in({_list_one_line(expr.tags)})"
    if isinstance(expr, TagsAll):
        return f"tags_all({_list_one_line(expr.tags)})"
    if isinstance(expr, TagCountCmp):
        return (
            f"tag_count_cmp({_list_one_line(expr.group_a)}, "
            f"{_list_one_line(expr.group_b)}, {expr.op})"
        )
    if isinstance(expr, TagCountIs):
        return f"tag_count_is({expr.op}, {expr.count})"
    raise TypeError(f"not an expression node: {expr!r}")


def _case_word(case_sensitive: bool) -> str:
    return "case" if case_sensitive else "nocase"


def _list_one_line(items) -> str:
    return "[" + ", ".join(_quote(item) for item in items) + "]"


def _wrap_list(items, indent: int) -> list[str]:
    pad = " " * indent
    lines = [pad + "["]
    current = pad + INDENT
    first = True
    for item in items:
        piece = _quote(item)
        if first:
            current += piece
            first = False
        elif len(current) + 2 + len(piece) <= MAX_WIDTH:
            current += ", " + piece
        else:
            lines.append(current + ",")
            current = pad + INDENT + piece
    lines.append(current)
    lines.append(pad + "]")
    return lines


def _render(expr: Expr, indent: int) -> list[str]:
    pad = " " * indent
    compact = _one_line(expr)
    if indent + len(compact) <= MAX_WIDTH:
        return [pad + compact]
    if isinstance(expr, (AllOf, AnyOf, Not)):
        name = {"AllOf": "all_of", "AnyOf": "any_of", "Not": "not"}[type(expr).__name__]
        children = expr.children if not isinstance(expr, Not) else (expr.child,)
        lines = [pad + name + "("]
        for i, child in enumerate(children):
            block = _render(child, indent + len(INDENT))
            if i < len(children) - 1:
                block[-1] += ","
            lines.extend(block)
        lines.append(pad + ")")
        return lines
    # A leaf call too long for one line: put each argument on its own line and
    # wrap its keyword list.
    parts: list[tuple[str, object]] = []
    if isinstance(expr, KeywordAny):
        parts = [("word", expr.field), ("list", expr.keywords), ("word", _case_word(expr.case_sensitive))]
        name = "keyword_any"
    elif isinstance(expr, RegexAny):
        parts = [("word", expr.field), ("list", expr.patterns), ("word", _case_word(expr.case_sensitive))]
        name = "regex_any"
    elif isinstance(expr, CountGt):
        parts = [
            ("word", expr.field),
            ("list", expr.keywords),
            ("word", str(expr.threshold)),
            ("word", _case_word(expr.case_sensitive)),
        ]
        name = "count_gt"
    elif isinstance(expr, TagIn):
        parts = [("list", expr.tags)]
        name = "tag_in"
    elif isinstance(expr, TagsAll):
        parts = [("list", expr.tags)]
        name = "tags_all"
    elif isinstance(expr, TagCountCmp):
        parts = [("list", expr.group_a), ("list", expr.group_b), ("word", expr.op)]
        name = "tag_count_cmp"
    else:
        return [pad + compact]
    lines = [pad + name + "("]
    for i, (kind, value) in enumerate(parts):
        if kind == "list":
            block = _wrap_list(value, indent + len(INDENT))
        else:
            block = [" " * (indent + len(INDENT)) + str(value)]
        if i < len(parts) - 1:
            block[-1] += ","
        lines.extend(block)
    lines.append(pad + ")")
    return lines


def print_expr(expr: Expr) -> str:
    return "\n".join(_render(expr, 0))


def print_lf_spec(spec) -> str:
    """Canonical text form of a rule file; parse_lf_spec inverts it exactly."""
    rule_lines = _render(spec.rule, 0)
    rule_text = rule_lines[0] if len(rule_lines) == 1 else "\n".join([""] + rule_lines)
    sep = " " if len(rule_lines) == 1 else ""
    return (
        f"name: {spec.name}\n"
        f"task: {spec.task}\n"
        f"label: {spec.label}\n"
        f"rule:{sep}{rule_text}\n"
    )
