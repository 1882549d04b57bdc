"""Sprego: a spreadsheet-formula engine built around a dozen general
purpose functions, array formulas, a linter/rewriter that replaces
problem-specific built-ins with equivalent composites, a differential
tester for those rewrites, and a competency classifier."""

from .competency import ITEMS, CompetencyItem, CompetencyProfile, classify, report
from .criteria import Criteria, criteria_from_value
from .equivalence import (
    ColumnSpec,
    DatasetSchema,
    SchemaError,
    Verdict,
    check_all_rules,
    check_equivalence,
    gen_dataset,
)
from .evaluator import (
    BASELINE_FUNCTIONS,
    CORE_FUNCTIONS,
    EXTENDED_FUNCTIONS,
    EvalContext,
    FunctionSpec,
    evaluate,
    index_select,
    match_position,
    precedents,
    search_position,
)
from .formula import (
    Binary,
    BoolLit,
    Call,
    CellRef,
    Expr,
    Formula,
    FormulaError,
    LexError,
    NameRef,
    NumberLit,
    ParseError,
    RangeRef,
    TextLit,
    Token,
    Unary,
    format,
    parse,
    tokenize,
)
from .rewrite import Diagnostic, DiagnosticCode, RewritePlan, lint, non_sprego_calls, rewrite
from .table import ColumnProfile, CsvError, RangeView, Table, load_csv, profile, resolve
from .values import ErrorKind, Value, format_value

__version__ = "0.1.0"

__all__ = [
    "BASELINE_FUNCTIONS",
    "Binary",
    "BoolLit",
    "Call",
    "CellRef",
    "ColumnProfile",
    "ColumnSpec",
    "CompetencyItem",
    "CompetencyProfile",
    "CORE_FUNCTIONS",
    "Criteria",
    "CsvError",
    "DatasetSchema",
    "Diagnostic",
    "DiagnosticCode",
    "ErrorKind",
    "EvalContext",
    "Expr",
    "EXTENDED_FUNCTIONS",
    "Formula",
    "FormulaError",
    "FunctionSpec",
    "ITEMS",
    "LexError",
    "NameRef",
    "NumberLit",
    "ParseError",
    "RangeRef",
    "RangeView",
    "RewritePlan",
    "SchemaError",
    "Table",
    "TextLit",
    "Token",
    "Unary",
    "Value",
    "Verdict",
    "check_all_rules",
    "check_equivalence",
    "classify",
    "criteria_from_value",
    "evaluate",
    "format",
    "format_value",
    "gen_dataset",
    "index_select",
    "lint",
    "load_csv",
    "match_position",
    "non_sprego_calls",
    "parse",
    "precedents",
    "profile",
    "report",
    "resolve",
    "rewrite",
    "search_position",
    "tokenize",
]
