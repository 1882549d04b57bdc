"""Formula evaluation with scalar and array semantics.

Two modes, carried on the EvalContext:

    scalar  one value out; vector operands are indexed at current_row
    array   elementwise operators and functions map over ranges, scalars
            broadcast, aggregators collapse ranges to one value

Elementwise shape rules: two vectors combine positionally when their
lengths match, whatever their orientation; a length mismatch makes every
result cell a VALUE error. True matrices must share shapes exactly.

Error values propagate through every operator and elementwise function
(the first error operand wins, argument order then cell order), except
IF (only the condition and the taken branch matter), ISERROR, and
IFERROR. Aggregators propagate the first error they meet in their input,
with one deliberate exception: COUNT ignores error cells, mirroring the
ISERROR guard in its SUM(IF()) replacement.

All failures come back as error values; evaluate never raises for data
reasons.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .criteria import Criteria, criteria_from_value
from .formula import (
    Binary,
    BoolLit,
    Call,
    CellRef,
    Expr,
    Formula,
    NameRef,
    NumberLit,
    RangeRef,
    TextLit,
    Unary,
)
from .table import RangeView, Table, resolve
from .values import (
    ErrorKind,
    Value,
    coerce_logical,
    coerce_number,
    coerce_text,
    compare_values,
    finite_or_error,
    is_number,
    values_equal,
)

# ---------------------------------------------------------------------------
# Function catalog
# ---------------------------------------------------------------------------

CORE_FUNCTIONS = frozenset(
    {"LEN", "LEFT", "RIGHT", "SEARCH", "SUM", "AVERAGE", "MIN", "MAX", "IF", "MATCH", "INDEX", "ISERROR"}
)

EXTENDED_FUNCTIONS = frozenset(
    {"SUBSTITUTE", "SMALL", "LARGE", "AND", "OR", "NOT", "INT", "ROUND", "RAND", "OFFSET", "ROW", "COLUMN"}
)

SPREGO_FUNCTIONS = CORE_FUNCTIONS | EXTENDED_FUNCTIONS

# Consumed by the linter/rewriter, never emitted by it.
BASELINE_FUNCTIONS = frozenset(
    {"COUNT", "COUNTA", "COUNTIF", "COUNTIFS", "SUMIF", "SUMIFS", "AVERAGEIF", "VLOOKUP", "HLOOKUP", "IFERROR"}
)


@dataclass(frozen=True)
class FunctionSpec:
    name: str
    min_args: int
    max_args: int | None  # None = unbounded
    category: str
    lifting: str  # "elementwise" | "aggregating" | "special"


def _spec(name, lo, hi, category, lifting):
    return name, FunctionSpec(name, lo, hi, category, lifting)


FUNCTION_SPECS: dict[str, FunctionSpec] = dict(
    [
        _spec("LEN", 1, 1, "text", "elementwise"),
        _spec("LEFT", 1, 2, "text", "elementwise"),
        _spec("RIGHT", 1, 2, "text", "elementwise"),
        _spec("SEARCH", 2, 3, "text", "elementwise"),
        _spec("SUM", 1, None, "math", "aggregating"),
        _spec("AVERAGE", 1, None, "math", "aggregating"),
        _spec("MIN", 1, None, "math", "aggregating"),
        _spec("MAX", 1, None, "math", "aggregating"),
        _spec("IF", 2, 3, "conditional/array/error", "special"),
        _spec("MATCH", 2, 3, "conditional/array/error", "special"),
        _spec("INDEX", 2, 3, "conditional/array/error", "special"),
        _spec("ISERROR", 1, 1, "conditional/array/error", "elementwise"),
        _spec("SUBSTITUTE", 3, 4, "extended", "elementwise"),
        _spec("SMALL", 2, 2, "extended", "aggregating"),
        _spec("LARGE", 2, 2, "extended", "aggregating"),
        _spec("AND", 1, None, "extended", "aggregating"),
        _spec("OR", 1, None, "extended", "aggregating"),
        _spec("NOT", 1, 1, "extended", "elementwise"),
        _spec("INT", 1, 1, "extended", "elementwise"),
        _spec("ROUND", 1, 2, "extended", "elementwise"),
        _spec("RAND", 0, 0, "extended", "special"),
        _spec("OFFSET", 3, 5, "extended", "special"),
        _spec("ROW", 0, 1, "extended", "special"),
        _spec("COLUMN", 0, 1, "extended", "special"),
        _spec("COUNT", 1, None, "problem-specific-baseline", "aggregating"),
        _spec("COUNTA", 1, None, "problem-specific-baseline", "aggregating"),
        _spec("COUNTIF", 2, 2, "problem-specific-baseline", "aggregating"),
        _spec("COUNTIFS", 2, None, "problem-specific-baseline", "aggregating"),
        _spec("SUMIF", 2, 3, "problem-specific-baseline", "aggregating"),
        _spec("SUMIFS", 3, None, "problem-specific-baseline", "aggregating"),
        _spec("AVERAGEIF", 2, 3, "problem-specific-baseline", "aggregating"),
        _spec("VLOOKUP", 3, 4, "problem-specific-baseline", "special"),
        _spec("HLOOKUP", 3, 4, "problem-specific-baseline", "special"),
        _spec("IFERROR", 2, 2, "problem-specific-baseline", "elementwise"),
    ]
)


# ---------------------------------------------------------------------------
# Evaluation context
# ---------------------------------------------------------------------------


@dataclass
class EvalContext:
    """Evaluation parameters. The random stream is rebuilt from rng_seed
    on every evaluate() call, so equal seeds replay identically."""

    table: Table
    current_row: int | None = None
    rng_seed: int = 0
    mode: str = "array"  # "scalar" | "array"

    def __post_init__(self):
        if self.mode not in ("scalar", "array"):
            raise ValueError(f"mode must be 'scalar' or 'array', got {self.mode!r}")


@dataclass
class _EvalState:
    ctx: EvalContext
    rng: random.Random

    @property
    def scalar(self) -> bool:
        return self.ctx.mode == "scalar"


def evaluate(formula: Formula | Expr, ctx: EvalContext) -> Value | RangeView:
    """Evaluate a parsed formula against ctx.table. Returns a single
    Value in scalar mode, a Value or RangeView in array mode."""
    expr = formula.body if isinstance(formula, Formula) else formula
    st = _EvalState(ctx, random.Random(ctx.rng_seed))
    result = _eval(expr, st)
    if st.scalar:
        result = _scalarize(result, st)
    return result


def _scalarize(v, st: _EvalState) -> Value:
    if not isinstance(v, RangeView):
        return v
    if len(v) == 1:
        return v.cells[0]
    if not v.is_vector:
        return ErrorKind.VALUE
    row = st.ctx.current_row
    if row is None:
        raise ValueError("scalar mode needs current_row to index vector operands")
    if row < 1 or row > len(v):
        return ErrorKind.REF
    return v.element(row)


# ---------------------------------------------------------------------------
# Core recursion
# ---------------------------------------------------------------------------


def _eval(expr: Expr, st: _EvalState):
    if isinstance(expr, NumberLit):
        return finite_or_error(expr.value)
    if isinstance(expr, TextLit):
        return expr.value
    if isinstance(expr, BoolLit):
        return expr.value
    if isinstance(expr, (CellRef, RangeRef, NameRef)):
        return resolve(st.ctx.table, expr)
    if isinstance(expr, Unary):
        operand = _eval(expr.operand, st)
        return _lift(_UNARY_OPS[expr.op], [operand], st)
    if isinstance(expr, Binary):
        left = _eval(expr.left, st)
        right = _eval(expr.right, st)
        return _lift(_BINARY_OPS[expr.op], [left, right], st)
    if isinstance(expr, Call):
        return _call(expr, st)
    raise TypeError(f"not an Expr: {expr!r}")


def _call(expr: Call, st: _EvalState):
    spec = FUNCTION_SPECS.get(expr.func)
    if spec is None:
        return ErrorKind.NAME
    n = len(expr.args)
    if n < spec.min_args or (spec.max_args is not None and n > spec.max_args):
        return ErrorKind.VALUE

    if expr.func == "IF":
        return _fn_if(expr.args, st)
    if expr.func in ("OFFSET", "ROW", "COLUMN"):
        return _REF_FUNCS[expr.func](expr.args, st)
    if expr.func == "RAND":
        return st.rng.random()

    args = [_eval(a, st) for a in expr.args]
    if spec.lifting == "elementwise":
        fn, propagate = _ELEMENTWISE[expr.func]
        return _lift(fn, args, st, propagate=propagate)
    return _AGG_AND_SPECIAL[expr.func](args, st)


# ---------------------------------------------------------------------------
# Elementwise lifting
# ---------------------------------------------------------------------------


def _apply(fn, args, propagate):
    if propagate:
        for a in args:
            if isinstance(a, ErrorKind):
                return a
    return fn(*args)


def _lift(fn, args, st: _EvalState, propagate: bool = True):
    """Apply a scalar function across possibly-ranged arguments."""
    if st.scalar:
        args = [_scalarize(a, st) for a in args]
    views = [a for a in args if isinstance(a, RangeView)]
    if not views:
        return _apply(fn, args, propagate)

    first = views[0]
    if all(v.is_vector for v in views):
        lengths = {len(v) for v in views}
        if len(lengths) == 1:
            size = lengths.pop()
            cells = tuple(
                _apply(fn, [a.element(i) if isinstance(a, RangeView) else a for a in args], propagate)
                for i in range(1, size + 1)
            )
        else:
            size = max(lengths)
            cells = (ErrorKind.VALUE,) * size
        rows, cols = (1, size) if first.rows == 1 and first.cols != 1 else (size, 1)
        return RangeView(rows, cols, cells)

    shapes = {(v.rows, v.cols) for v in views}
    if len(shapes) == 1:
        cells = tuple(
            _apply(fn, [a.cells[i] if isinstance(a, RangeView) else a for a in args], propagate)
            for i in range(len(first))
        )
    else:
        cells = (ErrorKind.VALUE,) * len(first)
    return RangeView(first.rows, first.cols, cells)


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------


def _arith(fn):
    def op(a, b):
        x = coerce_number(a)
        if isinstance(x, ErrorKind):
            return x
        y = coerce_number(b)
        if isinstance(y, ErrorKind):
            return y
        return fn(x, y)

    return op


def _div(x, y):
    if y == 0:
        return ErrorKind.DIV0
    return finite_or_error(x / y)


def _pow(x, y):
    if x == 0 and y == 0:
        return ErrorKind.NUM
    try:
        return finite_or_error(math.pow(x, y))
    except (ValueError, OverflowError):
        return ErrorKind.NUM


def _concat(a, b):
    x = coerce_text(a)
    if isinstance(x, ErrorKind):
        return x
    y = coerce_text(b)
    if isinstance(y, ErrorKind):
        return y
    return x + y


def _compare(op):
    def cmp(a, b):
        c = compare_values(a, b)
        if isinstance(c, ErrorKind):
            return c
        return op(c)

    return cmp


_BINARY_OPS = {
    "+": _arith(lambda x, y: finite_or_error(x + y)),
    "-": _arith(lambda x, y: finite_or_error(x - y)),
    "*": _arith(lambda x, y: finite_or_error(x * y)),
    "/": _arith(_div),
    "^": _arith(_pow),
    "&": _concat,
    "=": _compare(lambda c: c == 0),
    "<>": _compare(lambda c: c != 0),
    "<": _compare(lambda c: c < 0),
    "<=": _compare(lambda c: c <= 0),
    ">": _compare(lambda c: c > 0),
    ">=": _compare(lambda c: c >= 0),
}


def _unary_num(fn):
    def op(a):
        x = coerce_number(a)
        if isinstance(x, ErrorKind):
            return x
        return finite_or_error(fn(x))

    return op


_UNARY_OPS = {
    "-": _unary_num(lambda x: -x),
    "+": _unary_num(lambda x: x),
    "%": _unary_num(lambda x: x / 100.0),
}


# ---------------------------------------------------------------------------
# The three lookup/position primitives
# ---------------------------------------------------------------------------


def match_position(lookup: Value, vec, match_type: int) -> Value:
    """Position of *lookup* in a vector, 1-based.

    match_type 0: first cell equal to lookup (text case-insensitive),
    else NA. match_type 1: the vector is taken as ascending; position of
    the largest value <= lookup, NA if every value is greater.
    match_type -1: descending; position of the smallest value >= lookup,
    NA if every value is smaller. On unsorted input the +-1 scans return
    whatever the sorted assumption yields; never a crash. Cells that do
    not compare (error cells) are skipped.
    """
    view = _as_view(vec)
    if not view.is_vector:
        return ErrorKind.VALUE
    if isinstance(lookup, ErrorKind):
        return lookup

    if match_type == 0:
        for i, v in enumerate(view.cells, 1):
            if values_equal(v, lookup) is True:
                return i
        return ErrorKind.NA

    best: int | None = None
    want = 1 if match_type > 0 else -1
    for i, v in enumerate(view.cells, 1):
        c = compare_values(v, lookup)
        if isinstance(c, ErrorKind):
            continue
        if c * want <= 0:
            best = i
        else:
            break
    return best if best is not None else ErrorKind.NA


def index_select(source, row: int, col: int | None = None) -> Value:
    """Pick one cell from a view: vector form by position, matrix form by
    (row, col). Out-of-bounds or non-positive indexes give REF; a matrix
    without a column gives VALUE."""
    view = _as_view(source)
    if col is None:
        if not view.is_vector:
            return ErrorKind.VALUE
        if row < 1 or row > len(view):
            return ErrorKind.REF
        return view.element(row)
    if row < 1 or col < 1 or row > view.rows or col > view.cols:
        return ErrorKind.REF
    return view.at(row, col)


def search_position(needle: str, haystack: str, start: int = 1) -> Value:
    """1-based position of the first case-insensitive occurrence of
    *needle* at or after *start*; VALUE if absent or start out of range."""
    if start < 1 or start > max(1, len(haystack)):
        return ErrorKind.VALUE
    pos = haystack.lower().find(needle.lower(), start - 1)
    if pos < 0:
        return ErrorKind.VALUE
    return float(pos + 1)


def _as_view(v) -> RangeView:
    if isinstance(v, RangeView):
        return v
    if isinstance(v, (list, tuple)):
        return RangeView(len(v), 1, tuple(v))
    return RangeView(1, 1, (v,))


# ---------------------------------------------------------------------------
# Elementwise functions
# ---------------------------------------------------------------------------


def _text_arg(v):
    return coerce_text(v)


def _fn_len(t):
    s = _text_arg(t)
    if isinstance(s, ErrorKind):
        return s
    return float(len(s))


def _count_arg(v, *, minimum=0):
    x = coerce_number(v)
    if isinstance(x, ErrorKind):
        return x
    k = math.floor(x)
    if k < minimum:
        return ErrorKind.VALUE
    return k


def _fn_left(t, n=1.0):
    s = _text_arg(t)
    if isinstance(s, ErrorKind):
        return s
    k = _count_arg(n)
    if isinstance(k, ErrorKind):
        return k
    return s[:k]


def _fn_right(t, n=1.0):
    s = _text_arg(t)
    if isinstance(s, ErrorKind):
        return s
    k = _count_arg(n)
    if isinstance(k, ErrorKind):
        return k
    return s[len(s) - min(k, len(s)):]


def _fn_search(needle, haystack, start=1.0):
    sn = _text_arg(needle)
    if isinstance(sn, ErrorKind):
        return sn
    sh = _text_arg(haystack)
    if isinstance(sh, ErrorKind):
        return sh
    k = _count_arg(start, minimum=1)
    if isinstance(k, ErrorKind):
        return k
    return search_position(sn, sh, k)


def _fn_substitute(t, old, new, instance=None):
    s = _text_arg(t)
    if isinstance(s, ErrorKind):
        return s
    so = _text_arg(old)
    if isinstance(so, ErrorKind):
        return so
    sn = _text_arg(new)
    if isinstance(sn, ErrorKind):
        return sn
    if so == "":
        return s
    if instance is None:
        return s.replace(so, sn)
    k = _count_arg(instance, minimum=1)
    if isinstance(k, ErrorKind):
        return k
    pos = -1
    for _ in range(k):
        pos = s.find(so, pos + 1)
        if pos < 0:
            return s
    return s[:pos] + sn + s[pos + len(so):]


def _fn_int(x):
    v = coerce_number(x)
    if isinstance(v, ErrorKind):
        return v
    return float(math.floor(v))


def _fn_round(x, digits=0.0):
    v = coerce_number(x)
    if isinstance(v, ErrorKind):
        return v
    d = coerce_number(digits)
    if isinstance(d, ErrorKind):
        return d
    try:
        scale = 10.0 ** int(d)
    except OverflowError:
        return ErrorKind.NUM
    scaled = v * scale
    if not math.isfinite(scaled) or scale == 0:
        return ErrorKind.NUM
    # half away from zero
    rounded = math.copysign(math.floor(abs(scaled) + 0.5), v) / scale
    return finite_or_error(rounded)


def _fn_not(v):
    b = coerce_logical(v)
    if isinstance(b, ErrorKind):
        return b
    return not b


def _fn_iserror(v):
    return isinstance(v, ErrorKind)


def _fn_iferror(x, fallback):
    return fallback if isinstance(x, ErrorKind) else x


_ELEMENTWISE = {
    "LEN": (_fn_len, True),
    "LEFT": (_fn_left, True),
    "RIGHT": (_fn_right, True),
    "SEARCH": (_fn_search, True),
    "SUBSTITUTE": (_fn_substitute, True),
    "INT": (_fn_int, True),
    "ROUND": (_fn_round, True),
    "NOT": (_fn_not, True),
    "ISERROR": (_fn_iserror, False),
    "IFERROR": (_fn_iferror, False),
}


# ---------------------------------------------------------------------------
# IF
# ---------------------------------------------------------------------------


def _fn_if(args: tuple[Expr, ...], st: _EvalState):
    cond = _eval(args[0], st)
    if st.scalar:
        cond = _scalarize(cond, st)

    if isinstance(cond, RangeView):
        then_v = _eval(args[1], st)
        else_v = _eval(args[2], st) if len(args) > 2 else False
        cells = []
        for i in range(len(cond)):
            c = coerce_logical(cond.cells[i])
            if isinstance(c, ErrorKind):
                cells.append(c)
                continue
            branch = then_v if c else else_v
            cells.append(_pick_cell(branch, i, len(cond)))
        return RangeView(cond.rows, cond.cols, tuple(cells))

    c = coerce_logical(cond)
    if isinstance(c, ErrorKind):
        return c
    if c:
        return _eval(args[1], st)
    if len(args) > 2:
        return _eval(args[2], st)
    return False


def _pick_cell(branch, i: int, size: int):
    if isinstance(branch, RangeView):
        if len(branch) != size:
            return ErrorKind.VALUE
        return branch.cells[i]
    return branch


# ---------------------------------------------------------------------------
# Aggregators
# ---------------------------------------------------------------------------


def _iter_cells(args):
    for a in args:
        if isinstance(a, RangeView):
            yield from a.cells
        else:
            yield a


def _fn_sum(args, st):
    total = 0.0
    for v in _iter_cells(args):
        if isinstance(v, ErrorKind):
            return v
        if is_number(v):
            total += v
    return finite_or_error(total)


def _fn_average(args, st):
    total = 0.0
    count = 0
    for v in _iter_cells(args):
        if isinstance(v, ErrorKind):
            return v
        if is_number(v):
            total += v
            count += 1
    if count == 0:
        return ErrorKind.DIV0
    return finite_or_error(total / count)


def _fn_minmax(pick):
    def fn(args, st):
        best = None
        for v in _iter_cells(args):
            if isinstance(v, ErrorKind):
                return v
            if is_number(v):
                best = v if best is None else pick(best, v)
        return 0.0 if best is None else float(best)

    return fn


def _fn_bool_agg(identity, short_circuit):
    def fn(args, st):
        acc = identity
        seen = False
        for v in _iter_cells(args):
            if isinstance(v, ErrorKind):
                return v
            if v is None:
                continue
            b = coerce_logical(v)
            if isinstance(b, ErrorKind):
                return b
            seen = True
            if b == short_circuit:
                acc = short_circuit
        if not seen:
            return ErrorKind.VALUE
        return acc

    return fn


def _fn_small_large(reverse):
    def fn(args, st):
        view = _as_view(args[0])
        k = _scalar_arg(args[1], st)
        if isinstance(k, ErrorKind):
            return k
        numbers = []
        for v in view.cells:
            if isinstance(v, ErrorKind):
                return v
            if is_number(v):
                numbers.append(v)
        kk = coerce_number(k)
        if isinstance(kk, ErrorKind):
            return kk
        kk = math.floor(kk)
        if kk < 1 or kk > len(numbers):
            return ErrorKind.NUM
        return float(sorted(numbers, reverse=reverse)[kk - 1])

    return fn


def _fn_count(args, st):
    # error cells are ignored, not propagated: the SUM(IF(ISERROR(r+0),...))
    # replacement swallows them the same way
    return float(sum(1 for v in _iter_cells(args) if is_number(v)))


def _fn_counta(args, st):
    count = 0
    for v in _iter_cells(args):
        if isinstance(v, ErrorKind):
            return v
        if v is not None:
            count += 1
    return float(count)


def _scalar_arg(v, st: _EvalState):
    """Collapse an argument that must be a single value."""
    if isinstance(v, RangeView):
        if st.scalar:
            return _scalarize(v, st)
        if len(v) == 1:
            return v.cells[0]
        return ErrorKind.VALUE
    return v


def _criteria_arg(v, st: _EvalState) -> Criteria | ErrorKind:
    c = _scalar_arg(v, st)
    if isinstance(c, ErrorKind):
        return c
    return criteria_from_value(c)


def _fn_countif(args, st):
    view = _as_view(args[0])
    crit = _criteria_arg(args[1], st)
    if isinstance(crit, ErrorKind):
        return crit
    count = 0
    for v in view.cells:
        if isinstance(v, ErrorKind):
            return v
        if crit.matches(v) is True:
            count += 1
    return float(count)


def _fn_sumif(args, st):
    view = _as_view(args[0])
    crit = _criteria_arg(args[1], st)
    if isinstance(crit, ErrorKind):
        return crit
    sums = _as_view(args[2]) if len(args) > 2 else view
    if len(sums) != len(view):
        return ErrorKind.VALUE
    total = 0.0
    for i, v in enumerate(view.cells):
        if isinstance(v, ErrorKind):
            return v
        if crit.matches(v) is True:
            s = sums.cells[i]
            if isinstance(s, ErrorKind):
                return s
            if is_number(s):
                total += s
    return finite_or_error(total)


def _fn_averageif(args, st):
    view = _as_view(args[0])
    crit = _criteria_arg(args[1], st)
    if isinstance(crit, ErrorKind):
        return crit
    sums = _as_view(args[2]) if len(args) > 2 else view
    if len(sums) != len(view):
        return ErrorKind.VALUE
    total = 0.0
    matched = 0
    for i, v in enumerate(view.cells):
        if isinstance(v, ErrorKind):
            return v
        if crit.matches(v) is True:
            matched += 1
            s = sums.cells[i]
            if isinstance(s, ErrorKind):
                return s
            if is_number(s):
                total += s
    if matched == 0:
        return ErrorKind.DIV0
    return finite_or_error(total / matched)


def _criteria_pairs(args, st):
    pairs = []
    size = None
    for j in range(0, len(args), 2):
        view = _as_view(args[j])
        crit = _criteria_arg(args[j + 1], st)
        if isinstance(crit, ErrorKind):
            return crit
        if size is None:
            size = len(view)
        elif len(view) != size:
            return ErrorKind.VALUE
        pairs.append((view, crit))
    return pairs


def _fn_countifs(args, st):
    if len(args) % 2 != 0:
        return ErrorKind.VALUE
    pairs = _criteria_pairs(args, st)
    if isinstance(pairs, ErrorKind):
        return pairs
    size = len(pairs[0][0])
    count = 0
    for i in range(size):
        for view, crit in pairs:
            v = view.cells[i]
            if isinstance(v, ErrorKind):
                return v
            if crit.matches(v) is not True:
                break
        else:
            count += 1
    return float(count)


def _fn_sumifs(args, st):
    if len(args) % 2 != 1:
        return ErrorKind.VALUE
    sums = _as_view(args[0])
    pairs = _criteria_pairs(args[1:], st)
    if isinstance(pairs, ErrorKind):
        return pairs
    if len(pairs[0][0]) != len(sums):
        return ErrorKind.VALUE
    total = 0.0
    for i in range(len(sums)):
        for view, crit in pairs:
            v = view.cells[i]
            if isinstance(v, ErrorKind):
                return v
            if crit.matches(v) is not True:
                break
        else:
            s = sums.cells[i]
            if isinstance(s, ErrorKind):
                return s
            if is_number(s):
                total += s
    return finite_or_error(total)


def _fn_match(args, st):
    lookup = _scalar_arg(args[0], st)
    mt = 1
    if len(args) > 2:
        raw = _scalar_arg(args[2], st)
        x = coerce_number(raw)
        if isinstance(x, ErrorKind):
            return x
        mt = 0 if x == 0 else (1 if x > 0 else -1)
    result = match_position(lookup, args[1], mt)
    return float(result) if isinstance(result, int) else result


def _fn_index(args, st):
    row = _index_arg(args[1], st)
    if isinstance(row, ErrorKind):
        return row
    col = None
    if len(args) > 2:
        col = _index_arg(args[2], st)
        if isinstance(col, ErrorKind):
            return col
    return index_select(args[0], row, col)


def _index_arg(v, st):
    x = _scalar_arg(v, st)
    x = coerce_number(x)
    if isinstance(x, ErrorKind):
        return x
    return math.floor(x)


def _fn_vlookup(args, st):
    return _lookup(args, st, by_row=True)


def _fn_hlookup(args, st):
    return _lookup(args, st, by_row=False)


def _lookup(args, st, *, by_row: bool):
    lookup = _scalar_arg(args[0], st)
    if isinstance(lookup, ErrorKind):
        return lookup
    view = _as_view(args[1])
    k = _index_arg(args[2], st)
    if isinstance(k, ErrorKind):
        return k
    approx = True
    if len(args) > 3:
        flag = coerce_logical(_scalar_arg(args[3], st))
        if isinstance(flag, ErrorKind):
            return flag
        approx = flag
    limit = view.cols if by_row else view.rows
    if k < 1 or k > limit:
        return ErrorKind.REF
    key = view.column(1) if by_row else view.row(1)
    pos = match_position(lookup, key, 1 if approx else 0)
    if isinstance(pos, ErrorKind):
        return pos
    return view.at(pos, k) if by_row else view.at(k, pos)


_AGG_AND_SPECIAL = {
    "SUM": _fn_sum,
    "AVERAGE": _fn_average,
    "MIN": _fn_minmax(min),
    "MAX": _fn_minmax(max),
    "AND": _fn_bool_agg(True, False),
    "OR": _fn_bool_agg(False, True),
    "SMALL": _fn_small_large(False),
    "LARGE": _fn_small_large(True),
    "COUNT": _fn_count,
    "COUNTA": _fn_counta,
    "COUNTIF": _fn_countif,
    "COUNTIFS": _fn_countifs,
    "SUMIF": _fn_sumif,
    "SUMIFS": _fn_sumifs,
    "AVERAGEIF": _fn_averageif,
    "MATCH": _fn_match,
    "INDEX": _fn_index,
    "VLOOKUP": _fn_vlookup,
    "HLOOKUP": _fn_hlookup,
}


# ---------------------------------------------------------------------------
# Reference functions: OFFSET / ROW / COLUMN
# ---------------------------------------------------------------------------


def _ref_rect(ref: Expr, table: Table):
    """(row, col, rows, cols) of a reference argument, unchecked."""
    if isinstance(ref, CellRef):
        return ref.row, ref.col, 1, 1
    if isinstance(ref, RangeRef):
        return (
            ref.start.row,
            ref.start.col,
            ref.end.row - ref.start.row + 1,
            ref.end.col - ref.start.col + 1,
        )
    if isinstance(ref, NameRef):
        idx = table.column_index(ref.name)
        if idx is None:
            return ErrorKind.NAME
        return 1, idx, table.row_count, 1
    return ErrorKind.VALUE


def _fn_offset(args: tuple[Expr, ...], st: _EvalState):
    rect = _ref_rect(args[0], st.ctx.table)
    if isinstance(rect, ErrorKind):
        return rect
    row, col, height, width = rect
    dr = _index_arg(_eval(args[1], st), st)
    if isinstance(dr, ErrorKind):
        return dr
    dc = _index_arg(_eval(args[2], st), st)
    if isinstance(dc, ErrorKind):
        return dc
    if len(args) > 3:
        height = _index_arg(_eval(args[3], st), st)
        if isinstance(height, ErrorKind):
            return height
    if len(args) > 4:
        width = _index_arg(_eval(args[4], st), st)
        if isinstance(width, ErrorKind):
            return width
    row += dr
    col += dc
    table = st.ctx.table
    if height < 1 or width < 1:
        return ErrorKind.REF
    if row < 1 or col < 1 or row + height - 1 > table.row_count or col + width - 1 > table.column_count:
        return ErrorKind.REF
    cells = tuple(table.cell(r, c) for r in range(row, row + height) for c in range(col, col + width))
    if len(cells) == 1:
        return cells[0]
    return RangeView(height, width, cells)


def _fn_row(args: tuple[Expr, ...], st: _EvalState):
    if not args:
        if st.scalar:
            return float(st.ctx.current_row) if st.ctx.current_row else ErrorKind.VALUE
        n = st.ctx.table.row_count
        return RangeView(n, 1, tuple(float(i) for i in range(1, n + 1)))
    rect = _ref_rect(args[0], st.ctx.table)
    if isinstance(rect, ErrorKind):
        return rect
    row, _col, height, _width = rect
    if height == 1:
        return float(row)
    return RangeView(height, 1, tuple(float(r) for r in range(row, row + height)))


def _fn_column(args: tuple[Expr, ...], st: _EvalState):
    if not args:
        return ErrorKind.VALUE  # no ambient cell to take a column from
    rect = _ref_rect(args[0], st.ctx.table)
    if isinstance(rect, ErrorKind):
        return rect
    _row, col, _height, width = rect
    if width == 1:
        return float(col)
    return RangeView(1, width, tuple(float(c) for c in range(col, col + width)))


_REF_FUNCS = {"OFFSET": _fn_offset, "ROW": _fn_row, "COLUMN": _fn_column}


# ---------------------------------------------------------------------------
# Precedents
# ---------------------------------------------------------------------------


def precedents(formula: Formula | Expr) -> list[Expr]:
    """The references syntactically present in a formula, deduplicated in
    first-appearance order. Range endpoints are not listed separately."""
    expr = formula.body if isinstance(formula, Formula) else formula
    out: list[Expr] = []

    def visit(node: Expr):
        if isinstance(node, (CellRef, RangeRef, NameRef)):
            if node not in out:
                out.append(node)
            return
        if isinstance(node, Unary):
            visit(node.operand)
        elif isinstance(node, Binary):
            visit(node.left)
            visit(node.right)
        elif isinstance(node, Call):
            for arg in node.args:
                visit(arg)

    visit(expr)
    return out
