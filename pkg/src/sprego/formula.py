"""Formula language: tokenizer, recursive-descent parser, and printer.

Operator precedence, highest to lowest:

    range         :                    (between cell references only)
    unary         -  +                 (unary minus binds tighter than ^,
                                        so =-2^2 is (-2)^2 = 4)
    postfix       %                    (divide by 100)
    power         ^                    (left-associative)
    multiplicative  *  /
    additive      +  -
    concatenation &
    comparison    =  <>  <  <=  >  >=

A formula may start with ``=`` (optional) or be wrapped in ``{= ... }``,
which sets the array-entered flag. String literals use ``"`` with ``""``
as the escape for an embedded quote. The argument separator is ``,`` and
the decimal point is ``.`` (no locale variants).
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field

from .values import number_to_text

Span = tuple[int, int]


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class FormulaError(Exception):
    """Base for positioned formula-source errors."""

    offset: int


class LexError(FormulaError):
    def __init__(self, offset: int, message: str):
        super().__init__(f"lex error at offset {offset}: {message}")
        self.offset = offset
        self.message = message


class ParseError(FormulaError):
    def __init__(self, offset: int, expected: str, found: str):
        super().__init__(f"parse error at offset {offset}: expected {expected}, found {found}")
        self.offset = offset
        self.expected = expected
        self.found = found


# ---------------------------------------------------------------------------
# Tokens
# ---------------------------------------------------------------------------


class TokenKind(enum.Enum):
    NUMBER = "number"
    STRING = "string"
    IDENT = "identifier"
    CELLREF = "cell-ref"
    BOOL = "boolean"
    OP = "operator"
    PUNCT = "punctuation"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    span: Span


_CELLREF_RE = re.compile(r"(\$?)([A-Za-z]+)(\$?)([1-9][0-9]*)")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"(?:[0-9]+(?:\.[0-9]+)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?")
_WS_RE = re.compile(r"[ \t\r\n]+")

_TWO_CHAR_OPS = ("<=", ">=", "<>")
_ONE_CHAR_OPS = "+-*/^&%:=<>"
_PUNCT = "(),{}"

# A cell ref or number must not run straight into more word characters.
_WORD_CHAR = re.compile(r"[A-Za-z0-9_$.]")


def tokenize(source: str) -> list[Token]:
    """Split *source* into tokens. Raises LexError on anything outside
    the grammar; concatenating the lexemes (plus skipped whitespace)
    reproduces the source."""
    tokens: list[Token] = []
    pos = 0
    n = len(source)
    while pos < n:
        m = _WS_RE.match(source, pos)
        if m:
            pos = m.end()
            continue
        ch = source[pos]

        if ch == '"':
            end = pos + 1
            while True:
                if end >= n:
                    raise LexError(pos, "unterminated string literal")
                if source[end] == '"':
                    if end + 1 < n and source[end + 1] == '"':
                        end += 2  # escaped quote
                        continue
                    end += 1
                    break
                end += 1
            tokens.append(Token(TokenKind.STRING, source[pos:end], (pos, end)))
            pos = end
            continue

        if ch.isdigit() or ch == ".":
            m = _NUMBER_RE.match(source, pos)
            if not m or (m.end() < n and _WORD_CHAR.match(source[m.end()])):
                raise LexError(pos, "malformed number")
            tokens.append(Token(TokenKind.NUMBER, m.group(), (pos, m.end())))
            pos = m.end()
            continue

        if ch == "$" or ch.isalpha() or ch == "_":
            m = _CELLREF_RE.match(source, pos)
            if m and not (m.end() < n and _WORD_CHAR.match(source[m.end()])):
                tokens.append(Token(TokenKind.CELLREF, m.group(), (pos, m.end())))
                pos = m.end()
                continue
            if ch == "$":
                raise LexError(pos, "expected cell reference after '$'")
            m = _IDENT_RE.match(source, pos)
            assert m is not None
            kind = TokenKind.BOOL if m.group().upper() in ("TRUE", "FALSE") else TokenKind.IDENT
            tokens.append(Token(kind, m.group(), (pos, m.end())))
            pos = m.end()
            continue

        two = source[pos : pos + 2]
        if two in _TWO_CHAR_OPS:
            tokens.append(Token(TokenKind.OP, two, (pos, pos + 2)))
            pos += 2
            continue
        if ch in _ONE_CHAR_OPS:
            tokens.append(Token(TokenKind.OP, ch, (pos, pos + 1)))
            pos += 1
            continue
        if ch in _PUNCT:
            tokens.append(Token(TokenKind.PUNCT, ch, (pos, pos + 1)))
            pos += 1
            continue

        raise LexError(pos, f"unexpected character {ch!r}")
    return tokens


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Expr:
    """Base node. Spans locate nodes in the source and are excluded from
    structural equality and hashing."""

    span: Span | None = field(default=None, compare=False, kw_only=True)


@dataclass(frozen=True)
class NumberLit(Expr):
    value: float


@dataclass(frozen=True)
class TextLit(Expr):
    value: str


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool


@dataclass(frozen=True)
class CellRef(Expr):
    col_letters: str
    row: int
    col_abs: bool = False
    row_abs: bool = False

    @property
    def col(self) -> int:
        return col_letters_to_index(self.col_letters)


@dataclass(frozen=True)
class RangeRef(Expr):
    start: CellRef
    end: CellRef


@dataclass(frozen=True)
class NameRef(Expr):
    name: str


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # '-', '+', or postfix '%'
    operand: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str  # stored uppercase
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Formula:
    """A parsed formula: the body plus the top-level array-entered flag."""

    body: Expr
    array_entered: bool = False


def col_letters_to_index(letters: str) -> int:
    """Column letters to 1-based index: A=1, Z=26, AA=27."""
    idx = 0
    for ch in letters.upper():
        idx = idx * 26 + (ord(ch) - ord("A") + 1)
    return idx


def index_to_col_letters(index: int) -> str:
    if index < 1:
        raise ValueError(f"column index must be >= 1, got {index}")
    letters = ""
    while index:
        index, rem = divmod(index - 1, 26)
        letters = chr(ord("A") + rem) + letters
    return letters


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_COMPARE_OPS = ("=", "<>", "<", "<=", ">", ">=")


class _Parser:
    def __init__(self, tokens: list[Token], source_len: int):
        self.tokens = tokens
        self.pos = 0
        self.source_len = source_len

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> Token | None:
        tok = self.peek()
        if tok is not None:
            self.pos += 1
        return tok

    def error(self, expected: str) -> ParseError:
        tok = self.peek()
        if tok is None:
            return ParseError(self.source_len, expected, "end of input")
        return ParseError(tok.span[0], expected, repr(tok.lexeme))

    def expect(self, lexeme: str) -> Token:
        tok = self.peek()
        if tok is None or tok.lexeme != lexeme:
            raise self.error(repr(lexeme))
        self.pos += 1
        return tok

    def match(self, *lexemes: str) -> Token | None:
        tok = self.peek()
        if tok is not None and tok.kind in (TokenKind.OP, TokenKind.PUNCT) and tok.lexeme in lexemes:
            self.pos += 1
            return tok
        return None

    # precedence ladder, lowest first

    def comparison(self) -> Expr:
        left = self.concat()
        while (tok := self.match(*_COMPARE_OPS)) is not None:
            right = self.concat()
            left = Binary(tok.lexeme, left, right, span=_join(left, right))
        return left

    def concat(self) -> Expr:
        left = self.additive()
        while (tok := self.match("&")) is not None:
            right = self.additive()
            left = Binary(tok.lexeme, left, right, span=_join(left, right))
        return left

    def additive(self) -> Expr:
        left = self.multiplicative()
        while (tok := self.match("+", "-")) is not None:
            right = self.multiplicative()
            left = Binary(tok.lexeme, left, right, span=_join(left, right))
        return left

    def multiplicative(self) -> Expr:
        left = self.power()
        while (tok := self.match("*", "/")) is not None:
            right = self.power()
            left = Binary(tok.lexeme, left, right, span=_join(left, right))
        return left

    def power(self) -> Expr:
        left = self.postfix()
        while (tok := self.match("^")) is not None:
            right = self.postfix()
            left = Binary(tok.lexeme, left, right, span=_join(left, right))
        return left

    def postfix(self) -> Expr:
        expr = self.unary()
        while (tok := self.match("%")) is not None:
            expr = Unary("%", expr, span=(expr.span[0] if expr.span else tok.span[0], tok.span[1]))
        return expr

    def unary(self) -> Expr:
        tok = self.peek()
        if tok is not None and tok.kind is TokenKind.OP and tok.lexeme in ("-", "+"):
            self.pos += 1
            operand = self.unary()
            end = operand.span[1] if operand.span else tok.span[1]
            return Unary(tok.lexeme, operand, span=(tok.span[0], end))
        return self.primary()

    def primary(self) -> Expr:
        tok = self.peek()
        if tok is None:
            raise self.error("expression")

        if tok.kind is TokenKind.NUMBER:
            self.pos += 1
            return NumberLit(float(tok.lexeme), span=tok.span)

        if tok.kind is TokenKind.STRING:
            self.pos += 1
            inner = tok.lexeme[1:-1].replace('""', '"')
            return TextLit(inner, span=tok.span)

        if tok.kind is TokenKind.BOOL:
            self.pos += 1
            return BoolLit(tok.lexeme.upper() == "TRUE", span=tok.span)

        if tok.kind is TokenKind.CELLREF:
            self.pos += 1
            nxt = self.peek()
            if nxt is not None and nxt.lexeme == "(":
                # a cell-ref-shaped word used as a function name
                return self.call(tok)
            ref = _cellref_from_token(tok)
            if self.match(":") is not None:
                end_tok = self.peek()
                if end_tok is None or end_tok.kind is not TokenKind.CELLREF:
                    raise self.error("cell reference after ':'")
                self.pos += 1
                start, end = _normalize_range(ref, _cellref_from_token(end_tok))
                return RangeRef(start, end, span=(tok.span[0], end_tok.span[1]))
            return ref

        if tok.kind is TokenKind.IDENT:
            self.pos += 1
            nxt = self.peek()
            if nxt is not None and nxt.lexeme == "(":
                return self.call(tok)
            return NameRef(tok.lexeme, span=tok.span)

        if tok.lexeme == "(":
            self.pos += 1
            expr = self.comparison()
            self.expect(")")
            return expr

        raise self.error("expression")

    def call(self, name_tok: Token) -> Expr:
        self.expect("(")
        args: list[Expr] = []
        if self.peek() is not None and self.peek().lexeme != ")":
            args.append(self.comparison())
            while self.match(",") is not None:
                args.append(self.comparison())
        close = self.expect(")")
        return Call(name_tok.lexeme.upper(), tuple(args), span=(name_tok.span[0], close.span[1]))


def _cellref_from_token(tok: Token) -> CellRef:
    m = _CELLREF_RE.fullmatch(tok.lexeme)
    assert m is not None
    return CellRef(
        m.group(2).upper(),
        int(m.group(4)),
        col_abs=m.group(1) == "$",
        row_abs=m.group(3) == "$",
        span=tok.span,
    )


def _normalize_range(a: CellRef, b: CellRef) -> tuple[CellRef, CellRef]:
    """Order endpoints so start <= end on both axes; each axis keeps the
    absolute flag that travelled with it."""
    (c1, ca), (c2, cb) = sorted([(a.col, a.col_abs), (b.col, b.col_abs)])
    (r1, ra), (r2, rb) = sorted([(a.row, a.row_abs), (b.row, b.row_abs)])
    start = CellRef(index_to_col_letters(c1), r1, col_abs=ca, row_abs=ra, span=a.span)
    end = CellRef(index_to_col_letters(c2), r2, col_abs=cb, row_abs=rb, span=b.span)
    return start, end


def _join(left: Expr, right: Expr) -> Span | None:
    if left.span is None or right.span is None:
        return None
    return (left.span[0], right.span[1])


def parse(source: str) -> Formula:
    """Parse a formula. A leading ``{=``sets the array-entered flag; a
    leading ``=`` is optional. Raises LexError or ParseError."""
    tokens = tokenize(source)
    parser = _Parser(tokens, len(source))
    array_entered = False

    tok = parser.peek()
    if tok is not None and tok.lexeme == "{":
        parser.pos += 1
        parser.expect("=")
        array_entered = True
    elif tok is not None and tok.lexeme == "=":
        parser.pos += 1

    body = parser.comparison()
    if array_entered:
        parser.expect("}")
    if parser.peek() is not None:
        raise parser.error("end of formula")
    return Formula(body, array_entered)


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

# Node precedence for parenthesization; atoms never need parens.
_PREC_COMPARE = 1
_PREC_CONCAT = 2
_PREC_ADD = 3
_PREC_MUL = 4
_PREC_POW = 5
_PREC_PERCENT = 6
_PREC_UNARY = 7
_PREC_ATOM = 9

_BINARY_PREC = {
    "=": _PREC_COMPARE, "<>": _PREC_COMPARE, "<": _PREC_COMPARE,
    "<=": _PREC_COMPARE, ">": _PREC_COMPARE, ">=": _PREC_COMPARE,
    "&": _PREC_CONCAT,
    "+": _PREC_ADD, "-": _PREC_ADD,
    "*": _PREC_MUL, "/": _PREC_MUL,
    "^": _PREC_POW,
}


def _prec(expr: Expr) -> int:
    if isinstance(expr, Binary):
        return _BINARY_PREC[expr.op]
    if isinstance(expr, Unary):
        return _PREC_PERCENT if expr.op == "%" else _PREC_UNARY
    return _PREC_ATOM


def _fmt(expr: Expr) -> str:
    if isinstance(expr, NumberLit):
        return number_to_text(expr.value)
    if isinstance(expr, TextLit):
        return '"' + expr.value.replace('"', '""') + '"'
    if isinstance(expr, BoolLit):
        return "TRUE" if expr.value else "FALSE"
    if isinstance(expr, CellRef):
        return ("$" if expr.col_abs else "") + expr.col_letters + ("$" if expr.row_abs else "") + str(expr.row)
    if isinstance(expr, RangeRef):
        return _fmt(expr.start) + ":" + _fmt(expr.end)
    if isinstance(expr, NameRef):
        return expr.name
    if isinstance(expr, Call):
        return expr.func + "(" + ",".join(_fmt(a) for a in expr.args) + ")"
    if isinstance(expr, Unary):
        inner = _fmt_child(expr.operand, _prec(expr))
        return inner + "%" if expr.op == "%" else expr.op + inner
    if isinstance(expr, Binary):
        prec = _prec(expr)
        left = _fmt_child(expr.left, prec)
        # all binary operators are left-associative: same-precedence right
        # children need parens to keep their grouping
        right = _fmt_child(expr.right, prec + 1)
        return left + expr.op + right
    raise TypeError(f"not an Expr: {expr!r}")


def _fmt_child(child: Expr, min_prec: int) -> str:
    text = _fmt(child)
    if _prec(child) < min_prec:
        return "(" + text + ")"
    return text


def format(formula: Formula | Expr) -> str:
    """Canonical text: uppercase function names, no redundant whitespace,
    ``{=...}`` iff array-entered. Output reparses to an equal tree."""
    if isinstance(formula, Formula):
        body = _fmt(formula.body)
        return "{=" + body + "}" if formula.array_entered else "=" + body
    return "=" + _fmt(formula)


def walk(expr: Expr):
    """Yield *expr* and every descendant, pre-order."""
    yield expr
    if isinstance(expr, Unary):
        yield from walk(expr.operand)
    elif isinstance(expr, Binary):
        yield from walk(expr.left)
        yield from walk(expr.right)
    elif isinstance(expr, Call):
        for arg in expr.args:
            yield from walk(arg)
    elif isinstance(expr, RangeRef):
        yield expr.start
        yield expr.end


def expr_to_json(expr: Expr) -> object:
    """Plain-dict rendering of a tree, for --format json output."""
    if isinstance(expr, NumberLit):
        return {"type": "number", "value": expr.value}
    if isinstance(expr, TextLit):
        return {"type": "text", "value": expr.value}
    if isinstance(expr, BoolLit):
        return {"type": "logical", "value": expr.value}
    if isinstance(expr, CellRef):
        return {"type": "cell", "ref": _fmt(expr)}
    if isinstance(expr, RangeRef):
        return {"type": "range", "ref": _fmt(expr)}
    if isinstance(expr, NameRef):
        return {"type": "name", "name": expr.name}
    if isinstance(expr, Unary):
        return {"type": "unary", "op": expr.op, "operand": expr_to_json(expr.operand)}
    if isinstance(expr, Binary):
        return {
            "type": "binary",
            "op": expr.op,
            "left": expr_to_json(expr.left),
            "right": expr_to_json(expr.right),
        }
    if isinstance(expr, Call):
        return {"type": "call", "func": expr.func, "args": [expr_to_json(a) for a in expr.args]}
    raise TypeError(f"not an Expr: {expr!r}")
