"""Typed value model: numbers, text, logicals, errors, and blank.

A cell value is represented with plain Python types:

    number   float (finite; never NaN/inf -- arithmetic yields errors instead)
    text     str
    logical  bool
    error    ErrorKind member
    blank    None

``bool`` is checked before ``float``/``int`` everywhere, since Python's
bool subclasses int.
"""

from __future__ import annotations

import enum
import math
import re
from typing import Union


class ErrorKind(enum.Enum):
    """Spreadsheet error values. The enum member itself is used as the value."""

    DIV0 = "#DIV/0!"
    VALUE = "#VALUE!"
    NA = "#N/A"
    REF = "#REF!"
    NAME = "#NAME?"
    NUM = "#NUM!"

    def __str__(self) -> str:
        return self.value


Value = Union[float, str, bool, None, ErrorKind]

# Accepted numerals: optional sign, decimal point, exponent; leading zeros
# allowed. Grouped forms like "1,000" are not numerals.
_NUMERAL_RE = re.compile(r"[+-]?(?:[0-9]+(?:\.[0-9]+)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?\Z")


def parse_number(text: str) -> float | None:
    """Parse a decimal numeral, returning None if *text* is not one."""
    if not _NUMERAL_RE.match(text.strip()):
        return None
    x = float(text)
    if not math.isfinite(x):
        return None
    return x


def is_number(v: Value) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def is_text(v: Value) -> bool:
    return isinstance(v, str)


def is_logical(v: Value) -> bool:
    return isinstance(v, bool)


def is_error(v: Value) -> bool:
    return isinstance(v, ErrorKind)


def is_blank(v: Value) -> bool:
    return v is None


def value_type(v: Value) -> str:
    """One of "number", "text", "logical", "error", "blank"."""
    if v is None:
        return "blank"
    if isinstance(v, bool):
        return "logical"
    if isinstance(v, ErrorKind):
        return "error"
    if isinstance(v, (int, float)):
        return "number"
    return "text"


def number_to_text(x: float) -> str:
    """Canonical text form of a number: no trailing .0 on integral values."""
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(float(x))


def format_value(v: Value) -> str:
    """Display form: TRUE/FALSE, canonical numerals, error codes, "" for blank."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, ErrorKind):
        return v.value
    if isinstance(v, (int, float)):
        return number_to_text(v)
    return v


def finite_or_error(x: float) -> float | ErrorKind:
    if not math.isfinite(x):
        return ErrorKind.NUM
    return float(x)


# ---------------------------------------------------------------------------
# Coercion
# ---------------------------------------------------------------------------


def coerce_number(v: Value) -> float | ErrorKind:
    """Arithmetic coercion: logicals become 1/0, blank becomes 0, numeric
    text parses, other text is a VALUE error."""
    if isinstance(v, ErrorKind):
        return v
    if v is None:
        return 0.0
    if isinstance(v, bool):
        return 1.0 if v else 0.0
    if isinstance(v, (int, float)):
        return float(v)
    x = parse_number(v)
    if x is None:
        return ErrorKind.VALUE
    return x


def coerce_text(v: Value) -> str | ErrorKind:
    """Text coercion for concatenation and the text functions."""
    if isinstance(v, ErrorKind):
        return v
    return format_value(v)


def coerce_logical(v: Value) -> bool | ErrorKind:
    """Condition coercion: numbers are truthy unless 0, blank is FALSE,
    text is a VALUE error."""
    if isinstance(v, ErrorKind):
        return v
    if v is None:
        return False
    if isinstance(v, bool):
        return v
    if isinstance(v, (int, float)):
        return v != 0
    return ErrorKind.VALUE


# ---------------------------------------------------------------------------
# Comparison: a single total order over all non-error values
# ---------------------------------------------------------------------------

# Cross-type rank: every number < every text < every logical.
_TYPE_RANK = {"number": 0, "text": 1, "logical": 2}


def compare_values(a: Value, b: Value) -> int | ErrorKind:
    """Three-way comparison (-1, 0, 1) under the engine's total order.

    Numbers compare numerically; text case-insensitively by code point;
    FALSE < TRUE; mixed types by rank number < text < logical. Blank
    compares as 0 against numbers, "" against text, FALSE against
    logicals, and equal to blank. Errors propagate.
    """
    if isinstance(a, ErrorKind):
        return a
    if isinstance(b, ErrorKind):
        return b
    if a is None and b is None:
        return 0
    if a is None:
        a = _blank_as(b)
    elif b is None:
        b = _blank_as(a)
    ta, tb = value_type(a), value_type(b)
    if ta != tb:
        return -1 if _TYPE_RANK[ta] < _TYPE_RANK[tb] else 1
    if ta == "number":
        return (a > b) - (a < b)
    if ta == "text":
        fa, fb = a.lower(), b.lower()
        return (fa > fb) - (fa < fb)
    # logical: FALSE < TRUE
    return (a > b) - (a < b)


def _blank_as(other: Value) -> Value:
    if isinstance(other, bool):
        return False
    if isinstance(other, (int, float)):
        return 0.0
    return ""


def values_equal(a: Value, b: Value) -> bool | ErrorKind:
    c = compare_values(a, b)
    if isinstance(c, ErrorKind):
        return c
    return c == 0
