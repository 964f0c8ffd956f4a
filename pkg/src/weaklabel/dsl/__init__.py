"""Closed rule language for labeling functions.

A labeling function is a named boolean rule over a document plus a target
label: when the rule holds the function votes its label, otherwise it
abstains. Rules are closed expressions (no host-language escape hatch) so
they can be parsed, validated, analyzed and round-tripped as data.
"""

from .expr import (
    FIELDS,
    TITLE_TEXT_JOINER,
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
    evaluate,
    parse_tags_field,
    validate_regex,
)
from .parser import Diagnostic, LfParseError, parse_expr, parse_lf_spec, print_expr, print_lf_spec
from .spec import (
    LabelFunctionSpec,
    Manifest,
    ValidationReport,
    check_lf_source,
    load_manifest,
    manifest_from_sources,
    save_manifest,
    validate_project,
)

__all__ = [
    "AllOf",
    "AnyOf",
    "CountGt",
    "Diagnostic",
    "Expr",
    "FIELDS",
    "FirstWordIs",
    "KeywordAny",
    "LabelFunctionSpec",
    "LfParseError",
    "Manifest",
    "Not",
    "RegexAny",
    "TITLE_TEXT_JOINER",
    "TagCountCmp",
    "TagCountIs",
    "TagIn",
    "TagsAll",
    "ValidationReport",
    "check_lf_source",
    "evaluate",
    "load_manifest",
    "manifest_from_sources",
    "parse_expr",
    "parse_lf_spec",
    "parse_tags_field",
    "print_expr",
    "print_lf_spec",
    "save_manifest",
    "validate_project",
    "validate_regex",
]
