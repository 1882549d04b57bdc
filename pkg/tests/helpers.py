"""Shared builders and independent oracles for the test suite."""

from __future__ import annotations

import random

from sprego import Table
from sprego.values import ErrorKind


def make_table(name="t", /, **columns) -> Table:
    cols = {
        k: tuple(float(v) if isinstance(v, int) and not isinstance(v, bool) else v for v in vals)
        for k, vals in columns.items()
    }
    return Table(name, tuple(cols), tuple(cols.values()))


# ---------------------------------------------------------------------------
# Independent MATCH oracles: filter and maximize, no scanning
# ---------------------------------------------------------------------------


def oracle_match_exact(lookup, cells):
    for i, v in enumerate(cells, 1):
        if v == lookup:
            return i
    return None


def oracle_match_ascending(lookup, cells):
    """Largest value <= lookup; last position among equals."""
    candidates = [(v, i) for i, v in enumerate(cells, 1) if v <= lookup]
    if not candidates:
        return None
    best = max(v for v, _ in candidates)
    return max(i for v, i in candidates if v == best)


def oracle_match_descending(lookup, cells):
    """Smallest value >= lookup; last position among equals."""
    candidates = [(v, i) for i, v in enumerate(cells, 1) if v >= lookup]
    if not candidates:
        return None
    best = min(v for v, _ in candidates)
    return max(i for v, i in candidates if v == best)


def oracle_countif(cells, predicate):
    """Brute-force filter-count; error cells surface as the first error."""
    for v in cells:
        if isinstance(v, ErrorKind):
            return v
    return float(sum(1 for v in cells if predicate(v)))


# ---------------------------------------------------------------------------
# Random valid formulas (seeded, for round-trip and acceptance runs)
# ---------------------------------------------------------------------------

_CALL_SHAPES = [
    ("SUM", 1, 2),
    ("AVERAGE", 1, 2),
    ("MIN", 1, 2),
    ("MAX", 1, 2),
    ("LEN", 1, 1),
    ("LEFT", 1, 2),
    ("RIGHT", 1, 2),
    ("SEARCH", 2, 3),
    ("SUBSTITUTE", 3, 4),
    ("IF", 2, 3),
    ("MATCH", 2, 3),
    ("INDEX", 2, 3),
    ("ISERROR", 1, 1),
    ("AND", 1, 3),
    ("OR", 1, 3),
    ("NOT", 1, 1),
    ("INT", 1, 1),
    ("ROUND", 1, 2),
    ("SMALL", 2, 2),
    ("LARGE", 2, 2),
    ("COUNTIF", 2, 2),
    ("SUMIF", 2, 3),
    ("VLOOKUP", 3, 4),
    ("IFERROR", 2, 2),
]

_BINARY = ["+", "-", "*", "/", "^", "&", "=", "<>", "<", "<=", ">", ">="]
_NAMES = ["age", "name", "score", "total_2", "_x"]


def _rand_cellref(rng: random.Random) -> str:
    col = rng.choice("ABCXZ") + (rng.choice("A") if rng.random() < 0.1 else "")
    row = rng.randint(1, 99)
    return ("$" if rng.random() < 0.2 else "") + col + ("$" if rng.random() < 0.2 else "") + str(row)


def _rand_atom(rng: random.Random) -> str:
    k = rng.randrange(6)
    if k == 0:
        return rng.choice(["0", "1", "7", "42", "3.5", "0.125", "1e3", ".5", "2.5e-2", "007"])
    if k == 1:
        inner = rng.choice(["", "abc", "He said \"\"hi\"\"", ">5", "a,b", " spaced "])
        return '"' + inner + '"'
    if k == 2:
        return rng.choice(["TRUE", "FALSE", "true", "False"])
    if k == 3:
        return _rand_cellref(rng)
    if k == 4:
        a = _rand_cellref(rng).replace("$", "")
        b = _rand_cellref(rng).replace("$", "")
        return f"{a}:{b}"
    return rng.choice(_NAMES)


def random_source(rng: random.Random, depth: int = 3) -> str:
    """A random valid formula string, sometimes array-entered."""
    body = _rand_expr(rng, depth)
    if rng.random() < 0.2:
        return "{=" + body + "}"
    if rng.random() < 0.8:
        return "=" + body
    return body


def _rand_expr(rng: random.Random, depth: int) -> str:
    if depth <= 0:
        return _rand_atom(rng)
    k = rng.randrange(8)
    if k < 3:
        return _rand_atom(rng)
    if k == 3:
        return rng.choice(["-", "+"]) + _rand_expr(rng, depth - 1)
    if k == 4:
        return "(" + _rand_expr(rng, depth - 1) + ")"
    if k == 5:
        return _rand_expr(rng, depth - 1) + "%"
    if k == 6:
        op = rng.choice(_BINARY)
        return _rand_expr(rng, depth - 1) + op + _rand_expr(rng, depth - 1)
    name, lo, hi = rng.choice(_CALL_SHAPES)
    args = [_rand_expr(rng, depth - 1) for _ in range(rng.randint(lo, hi))]
    return name + "(" + ",".join(args) + ")"


def malformed_sources(count: int = 100, seed: int = 5) -> list[str]:
    """Valid formulas corrupted so that lexing or parsing must fail."""
    rng = random.Random(seed)
    suffixes = ["(", '"', "+", "*)"]
    out = []
    while len(out) < count:
        base = random_source(rng, depth=2)
        out.append(base + suffixes[len(out) % len(suffixes)])
    return out[:count]


# ---------------------------------------------------------------------------
# Random elementwise formulas over table columns
# ---------------------------------------------------------------------------

_ELEMENTWISE_CALLS = [
    ("LEN", 1),
    ("LEFT", 2),
    ("RIGHT", 2),
    ("INT", 1),
    ("ROUND", 2),
    ("ISERROR", 1),
    ("NOT", 1),
    ("IF", 3),
]


def random_elementwise_source(rng: random.Random, names: list[str], depth: int = 3) -> str:
    """Formula using only elementwise operators/functions over *names*,
    so per-row scalar evaluation and array evaluation must agree."""
    return "=" + _rand_elementwise(rng, names, depth)


def _rand_elementwise(rng: random.Random, names: list[str], depth: int) -> str:
    if depth <= 0 or rng.random() < 0.3:
        k = rng.randrange(4)
        if k == 0:
            return rng.choice(names)
        if k == 1:
            return rng.choice(["0", "1", "2", "5", "3.5"])
        if k == 2:
            return '"' + rng.choice(["a", "bc", "5", ""]) + '"'
        return rng.choice(["TRUE", "FALSE"])
    if rng.random() < 0.5:
        op = rng.choice(_BINARY)
        return "(" + _rand_elementwise(rng, names, depth - 1) + op + _rand_elementwise(rng, names, depth - 1) + ")"
    name, arity = rng.choice(_ELEMENTWISE_CALLS)
    args = [_rand_elementwise(rng, names, depth - 1) for _ in range(arity)]
    return name + "(" + ",".join(args) + ")"
