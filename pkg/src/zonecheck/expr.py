"""Clock-constraint expressions: parsing, rendering, evaluation, compilation.

Grammar::

    expr   := and ('|' and)*
    and    := unary ('&' unary)*
    unary  := '!' unary | '(' expr ')' | atom
    atom   := 'true' | 'false' | NAME
            | NAME ['-' NAME] CMP INT | INT CMP NAME ['-' NAME]
    CMP    := '<' | '<=' | '=' | '==' | '>=' | '>'

A bare NAME is a location atom.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .dbm import Dbm, raw_le, raw_lt
from .federation import Federation


class ExprError(ValueError):
    def __init__(self, message: str, column: int | None = None):
        super().__init__(message if column is None else f"{message} (column {column})")
        self.message = message
        self.column = column


@dataclass(frozen=True)
class Const:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True)
class Loc:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Cmp:
    """``left - right OP value`` (``right`` is ``None`` for a simple bound)."""

    left: str
    right: str | None
    op: str
    value: int

    def __str__(self) -> str:
        lhs = self.left if self.right is None else f"{self.left} - {self.right}"
        return f"{lhs} {self.op} {self.value}"


@dataclass(frozen=True)
class Not:
    arg: "Expr"

    def __str__(self) -> str:
        return f"!{_wrap(self.arg)}"


@dataclass(frozen=True)
class And:
    args: tuple

    def __str__(self) -> str:
        return " & ".join(_wrap(a, Or) for a in self.args)


@dataclass(frozen=True)
class Or:
    args: tuple

    def __str__(self) -> str:
        return " | ".join(str(a) for a in self.args)


Expr = Const | Loc | Cmp | Not | And | Or

TRUE = Const(True)
FALSE = Const(False)


def _wrap(e, *kinds) -> str:
    if isinstance(e, (And, Or)) and (not kinds or isinstance(e, kinds)):
        return f"({e})"
    return str(e)


def conj(*args) -> Expr:
    flat = []
    for a in args:
        if isinstance(a, And):
            flat.extend(a.args)
        elif a == TRUE:
            continue
        else:
            flat.append(a)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*args) -> Expr:
    flat = []
    for a in args:
        if isinstance(a, Or):
            flat.extend(a.args)
        elif a == FALSE:
            continue
        else:
            flat.append(a)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


# parsing ---------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>-?\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op><=|>=|==|<|>|=|&&|\|\||&|\||!|\(|\)|-))"
)

_FLIP = {"<": ">", "<=": ">=", "=": "=", ">=": "<=", ">": "<"}


def tokenize(text: str):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprError(f"unexpected character {text[pos:].strip()[:1]!r}", pos + 1)
        kind = m.lastgroup
        val = m.group(kind)
        if val == "&&":
            val = "&"
        elif val == "||":
            val = "|"
        elif val == "==":
            val = "="
        out.append((kind, val, m.start(kind) + 1))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens, keywords=()):
        self.toks = tokens
        self.i = 0
        self.keywords = set(keywords)

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else (None, None, self.col_end())

    def col_end(self):
        if not self.toks:
            return 1
        return self.toks[-1][2] + len(self.toks[-1][1])

    def take(self, val=None):
        kind, v, col = self.peek()
        if kind is None:
            raise ExprError("unexpected end of expression", col)
        if val is not None and v != val:
            raise ExprError(f"expected {val!r}, found {v!r}", col)
        self.i += 1
        return kind, v, col

    def at_end(self):
        return self.i >= len(self.toks)

    def expr(self):
        args = [self.conj()]
        while self.peek()[1] == "|":
            self.take()
            args.append(self.conj())
        return disj(*args) if len(args) > 1 else args[0]

    def conj(self):
        args = [self.unary()]
        while self.peek()[1] == "&":
            self.take()
            args.append(self.unary())
        return conj(*args) if len(args) > 1 else args[0]

    def unary(self):
        kind, v, col = self.peek()
        if v == "!":
            self.take()
            return Not(self.unary())
        if v == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        return self.atom()

    def _cmp(self):
        kind, v, col = self.peek()
        if v in _FLIP:
            self.take()
            return v
        raise ExprError(f"expected comparison operator, found {v!r}", col)

    def _int(self):
        kind, v, col = self.take()
        if kind != "num":
            raise ExprError(f"expected integer constant, found {v!r}", col)
        return int(v)

    def _name(self):
        kind, v, col = self.take()
        if kind != "name" or v in ("true", "false") or v in self.keywords:
            raise ExprError(f"expected a name, found {v!r}", col)
        return v

    def atom(self):
        kind, v, col = self.peek()
        if kind is None:
            raise ExprError("unexpected end of expression", col)
        if kind == "num":
            c = self._int()
            op = self._cmp()
            left = self._name()
            right = None
            if self.peek()[1] == "-":
                self.take()
                right = self._name()
            return Cmp(left, right, _FLIP[op], c)
        if kind == "name" and v in self.keywords:
            raise ExprError(f"unexpected keyword {v!r}", col)
        if v == "true":
            self.take()
            return TRUE
        if v == "false":
            self.take()
            return FALSE
        if kind != "name":
            raise ExprError(f"unexpected token {v!r}", col)
        name = self._name()
        nxt = self.peek()[1]
        if nxt == "-":
            self.take()
            right = self._name()
            op = self._cmp()
            return Cmp(name, right, op, self._int())
        if nxt in _FLIP:
            op = self._cmp()
            return Cmp(name, None, op, self._int())
        return Loc(name)


def parse_expr(text: str) -> Expr:
    if not isinstance(text, str):
        raise ExprError(f"expression must be a string, got {type(text).__name__}")
    if not text.strip():
        raise ExprError("empty expression", 1)
    p = _Parser(tokenize(text))
    e = p.expr()
    if not p.at_end():
        kind, v, col = p.peek()
        raise ExprError(f"unexpected token {v!r}", col)
    return e


# inspection ------------------------------------------------------------------

def atoms(e: Expr):
    if isinstance(e, (Const, Loc, Cmp)):
        yield e
    elif isinstance(e, Not):
        yield from atoms(e.arg)
    else:
        for a in e.args:
            yield from atoms(a)


def is_closed(e: Expr, positive: bool = True) -> bool:
    """No strict comparison once negations are pushed to the atoms."""
    if isinstance(e, Cmp):
        if positive:
            return e.op not in ("<", ">")
        return False if e.op in ("<=", ">=", "=") else True
    if isinstance(e, Not):
        return is_closed(e.arg, not positive)
    if isinstance(e, (And, Or)):
        return all(is_closed(a, positive) for a in e.args)
    return True


def clock_names(e: Expr) -> set[str]:
    out = set()
    for a in atoms(e):
        if isinstance(a, Cmp):
            out.add(a.left)
            if a.right is not None:
                out.add(a.right)
    return out


def location_names(e: Expr) -> set[str]:
    return {a.name for a in atoms(e) if isinstance(a, Loc)}


def strict_atoms(e: Expr, positive: bool = True):
    if isinstance(e, Cmp):
        if not is_closed(e, positive):
            yield e
    elif isinstance(e, Not):
        yield from strict_atoms(e.arg, not positive)
    elif isinstance(e, (And, Or)):
        for a in e.args:
            yield from strict_atoms(a, positive)


# evaluation on concrete valuations -------------------------------------------

def evaluate(e: Expr, location: str, valuation: Mapping[str, object]) -> bool:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Loc):
        return e.name == location
    if isinstance(e, Cmp):
        lhs = valuation[e.left] - (valuation[e.right] if e.right is not None else 0)
        op = e.op
        if op == "<=":
            return lhs <= e.value
        if op == "<":
            return lhs < e.value
        if op == ">=":
            return lhs >= e.value
        if op == ">":
            return lhs > e.value
        return lhs == e.value
    if isinstance(e, Not):
        return not evaluate(e.arg, location, valuation)
    if isinstance(e, And):
        return all(evaluate(a, location, valuation) for a in e.args)
    return any(evaluate(a, location, valuation) for a in e.args)


# compilation to zones --------------------------------------------------------

def cmp_constraints(a: Cmp, index: Mapping[str, int]) -> list[tuple[int, int, int]]:
    i = index[a.left]
    j = 0 if a.right is None else index[a.right]
    c = a.value
    if a.op == "<=":
        return [(i, j, raw_le(c))]
    if a.op == "<":
        return [(i, j, raw_lt(c))]
    if a.op == ">=":
        return [(j, i, raw_le(-c))]
    if a.op == ">":
        return [(j, i, raw_lt(-c))]
    return [(i, j, raw_le(c)), (j, i, raw_le(-c))]


def compile_expr(e: Expr, location: str, index: Mapping[str, int], dim: int) -> Federation:
    """Zone of valuations satisfying ``e`` at ``location``."""
    flat = _as_conjunction(e, location)
    if flat is not None:
        if flat is False:
            return Federation.empty(dim)
        cons = []
        for a in flat:
            cons.extend(cmp_constraints(a, index))
        return Federation(dim, [Dbm.from_constraints(dim, cons)])
    if isinstance(e, Not):
        return compile_expr(e.arg, location, index, dim).complement()
    if isinstance(e, And):
        acc = Federation.universe(dim)
        for a in e.args:
            acc = acc.intersect(compile_expr(a, location, index, dim))
            if acc.is_empty:
                break
        return acc
    if isinstance(e, Or):
        acc = Federation.empty(dim)
        for a in e.args:
            acc = acc.union(compile_expr(a, location, index, dim))
        return acc
    raise TypeError(f"not an expression: {e!r}")


def _as_conjunction(e: Expr, location: str):
    """Atoms of a negation-free conjunction, ``False`` if trivially empty, else None."""
    if isinstance(e, Const):
        return [] if e.value else False
    if isinstance(e, Loc):
        return [] if e.name == location else False
    if isinstance(e, Cmp):
        return [e]
    if isinstance(e, And):
        out = []
        for a in e.args:
            sub = _as_conjunction(a, location)
            if sub is None:
                return None
            if sub is False:
                return False
            out.extend(sub)
        return out
    return None


def max_constants(exprs: Sequence[Expr]) -> dict[str, int]:
    out: dict[str, int] = {}
    for e in exprs:
        for a in atoms(e):
            if isinstance(a, Cmp) and a.right is None:
                out[a.left] = max(out.get(a.left, 0), abs(a.value))
            elif isinstance(a, Cmp):
                for c in (a.left, a.right):
                    out[c] = max(out.get(c, 0), abs(a.value))
    return out


def rational(x) -> Fraction:
    return Fraction(str(x)) if not isinstance(x, Fraction) else x
