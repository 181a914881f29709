"""PTA and property data model, the JSON model format, and validation."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

from . import expr as E
from .expr import Expr, ExprError
from .federation import Federation


class ModelError(ValueError):
    """One or more problems found while reading a model or property."""

    def __init__(self, issues):
        if isinstance(issues, (str, Issue)):
            issues = [issues]
        self.issues = [i if isinstance(i, Issue) else Issue(str(i)) for i in issues]
        super().__init__("; ".join(str(i) for i in self.issues))


@dataclass(frozen=True)
class Issue:
    message: str
    line: int | None = None
    column: int | None = None
    path: str = ""

    def __str__(self) -> str:
        where = ""
        if self.line is not None:
            where = f"line {self.line}, column {self.column}: "
        if self.path:
            where += f"{self.path}: "
        return where + self.message


@dataclass(frozen=True)
class Branch:
    prob: Fraction
    resets: tuple[str, ...]
    target: str


@dataclass(frozen=True)
class Edge:
    source: str
    action: str
    guard: Expr
    branches: tuple[Branch, ...]


@dataclass(frozen=True)
class Location:
    name: str
    invariant: Expr = E.TRUE


@dataclass(frozen=True)
class Pta:
    clocks: tuple[str, ...]
    locations: tuple[Location, ...]
    initial: str
    edges: tuple[Edge, ...]

    @property
    def dim(self) -> int:
        return len(self.clocks) + 1

    @property
    def index(self) -> dict[str, int]:
        return {c: i + 1 for i, c in enumerate(self.clocks)}

    @property
    def location_names(self) -> tuple[str, ...]:
        return tuple(l.name for l in self.locations)

    def location(self, name: str) -> Location:
        for l in self.locations:
            if l.name == name:
                return l
        raise KeyError(name)

    def invariant(self, name: str) -> Expr:
        return self.location(name).invariant

    def edges_from(self, name: str) -> list[Edge]:
        return [e for e in self.edges if e.source == name]

    def constraint_exprs(self) -> list[Expr]:
        return [l.invariant for l in self.locations] + [e.guard for e in self.edges]

    def max_constant(self) -> int:
        return max(E.max_constants(self.constraint_exprs()).values(), default=0)

    def with_clock(self, name: str) -> "Pta":
        return replace(self, clocks=self.clocks + (name,))


@dataclass(frozen=True)
class TimeBound:
    clock: str
    op: str
    value: int

    def atom(self) -> E.Cmp:
        return E.Cmp(self.clock, None, self.op, self.value)


@dataclass(frozen=True)
class Threshold:
    op: str
    value: Fraction

    def holds(self, p: float) -> bool:
        v = float(self.value)
        return {"<": p < v, "<=": p <= v, ">=": p >= v, ">": p > v}[self.op]


@dataclass(frozen=True)
class Property:
    """``P_opt [ left U right ]`` with an optional time bound and threshold."""

    opt: str
    left: Expr
    right: Expr
    bound: TimeBound | None = None
    threshold: Threshold | None = None

    def __post_init__(self):
        if self.opt not in ("min", "max"):
            raise ModelError(f"optimisation must be 'min' or 'max', got {self.opt!r}")

    @property
    def avoid(self) -> Expr:
        """States that make the until fail (``!left & !right``)."""
        if self.left == E.TRUE:
            return E.FALSE
        return E.Not(self.left)

    def render(self) -> str:
        head = f"P{self.opt}"
        head += "=?" if self.threshold is None else f"{self.threshold.op}{self.threshold.value}"
        if self.bound is not None and self.bound.clock != "z":
            head = f"{self.bound.clock}.{head}"
        b = "" if self.bound is None else f"{self.bound.op}{self.bound.value}"
        if self.left == E.TRUE:
            body = f"F{b} {self.right}"
        else:
            body = f"({self.left}) U{b} ({self.right})"
        return f"{head} [ {body} ]"

    def to_json(self) -> dict:
        out = {"opt": self.opt, "until": {"left": str(self.left), "right": str(self.right)}}
        if self.bound is not None:
            out["bound"] = {"clock": self.bound.clock, "op": self.bound.op, "value": self.bound.value}
        if self.threshold is not None:
            out["threshold"] = {"op": self.threshold.op, "value": str(self.threshold.value)}
        return out


@dataclass(frozen=True)
class EngineConfig:
    c: int | None = None  # None: largest clock constant of the model
    epsilon: float = 1e-6
    vi_cap: int = 1_000_000
    iteration_cap: int = 10_000
    state_cap: int = 200_000
    maxu1: str = "zones"  # prob-1 step of MaxV: "zones" or "mdp" (symbolic MDP graph analysis)
    prune: bool = True  # drop actions of the symbolic MDP that another action dominates

    def __post_init__(self):
        if self.maxu1 not in ("zones", "mdp"):
            raise ValueError("maxu1 must be 'zones' or 'mdp'")
        if self.c is not None and self.c < 1:
            raise ValueError("c must be a positive integer")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    def c_for(self, p: Pta) -> int:
        return self.c if self.c is not None else max(1, p.max_constant())


# predicates ------------------------------------------------------------------

def compile_predicate(pred: Expr, location: str, clocks: Sequence[str] | Pta) -> Federation:
    if isinstance(clocks, Pta):
        clocks = clocks.clocks
    index = {c: i + 1 for i, c in enumerate(clocks)}
    missing = E.clock_names(pred) - set(index)
    if missing:
        raise ModelError(f"unknown clock {sorted(missing)[0]!r}")
    return E.compile_expr(pred, location, index, len(clocks) + 1)


def check_predicate(pred: Expr, p: Pta, what: str = "predicate", extra_clocks=()) -> list[Issue]:
    out = []
    clocks = set(p.clocks) | set(extra_clocks)
    locs = set(p.location_names)
    for name in sorted(E.clock_names(pred) - clocks):
        out.append(Issue(f"{what} refers to undeclared clock {name!r}"))
    for name in sorted(E.location_names(pred) - locs):
        if name in clocks:
            out.append(Issue(f"{what} uses clock {name!r} without a comparison"))
        else:
            out.append(Issue(f"{what} refers to unknown location {name!r}"))
    return out


# model file format -----------------------------------------------------------

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _position(text: str, needle: str, start: int = 0):
    k = text.find(json.dumps(needle), start)
    if k < 0:
        return None, None
    line = text.count("\n", 0, k) + 1
    col = k - (text.rfind("\n", 0, k) + 1) + 2  # inside the opening quote
    return line, col


def parse_model(text: str) -> Pta:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(Issue(exc.msg, exc.lineno, exc.colno)) from None
    return model_from_json(data, text)


def load_model(path) -> Pta:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def model_from_json(data, text: str | None = None) -> Pta:
    issues: list[Issue] = []

    def expr_at(s, path):
        try:
            return E.parse_expr(s)
        except ExprError as exc:
            line = col = None
            if text is not None and isinstance(s, str):
                line, col = _position(text, s)
                if col is not None and exc.column is not None:
                    col += exc.column - 1
            issues.append(Issue(exc.message, line, col, path))
            return E.TRUE

    if not isinstance(data, dict):
        raise ModelError("model must be a JSON object")
    for key in ("clocks", "initial", "locations", "edges"):
        if key not in data:
            issues.append(Issue(f"missing field {key!r}"))
    if issues:
        raise ModelError(issues)

    clocks = data["clocks"]
    if not isinstance(clocks, list) or not all(isinstance(c, str) for c in clocks):
        raise ModelError("'clocks' must be a list of names")
    for c in sorted({c for c in clocks if clocks.count(c) > 1}):
        issues.append(Issue(f"duplicate clock {c!r}", path="clocks"))
    for c in clocks:
        if not _NAME.fullmatch(c) or c in ("true", "false"):
            issues.append(Issue(f"invalid clock name {c!r}", path="clocks"))

    locations = []
    seen = set()
    for k, loc in enumerate(data["locations"]):
        path = f"locations[{k}]"
        if not isinstance(loc, dict) or "name" not in loc:
            issues.append(Issue("location needs a name", path=path))
            continue
        name = loc["name"]
        if name in seen:
            issues.append(Issue(f"duplicate location {name!r}", path=path))
        if name in clocks:
            issues.append(Issue(f"location {name!r} has the same name as a clock", path=path))
        seen.add(name)
        inv = expr_at(loc.get("invariant", "true"), path + ".invariant")
        locations.append(Location(name, inv))

    edges = []
    for k, ed in enumerate(data["edges"]):
        path = f"edges[{k}]"
        if not isinstance(ed, dict):
            issues.append(Issue("edge must be an object", path=path))
            continue
        for key in ("source", "branches"):
            if key not in ed:
                issues.append(Issue(f"missing field {key!r}", path=path))
        if "source" not in ed or "branches" not in ed:
            continue
        guard = expr_at(ed.get("guard", "true"), path + ".guard")
        branches = []
        total = Fraction(0)
        for b_i, br in enumerate(ed["branches"]):
            bpath = f"{path}.branches[{b_i}]"
            try:
                pr = Fraction(str(br.get("prob", "1")))
            except (ValueError, ZeroDivisionError):
                issues.append(Issue(f"bad probability {br.get('prob')!r}", path=bpath))
                continue
            if not 0 < pr <= 1:
                issues.append(Issue(f"probability {pr} outside (0, 1]", path=bpath))
            total += pr
            resets = tuple(br.get("resets", ()))
            for r in resets:
                if r not in clocks:
                    issues.append(Issue(f"reset of undeclared clock {r!r}", path=bpath))
            if "target" not in br:
                issues.append(Issue("branch needs a target", path=bpath))
                continue
            branches.append(Branch(pr, resets, br["target"]))
        if not ed["branches"]:
            issues.append(Issue("edge has no branches", path=path))
        elif total != 1:
            issues.append(Issue(f"probabilities sum to {total}", path=path))
        edges.append(Edge(ed["source"], ed.get("action", f"e{k}"), guard, tuple(branches)))

    if issues:
        raise ModelError(issues)
    p = Pta(tuple(clocks), tuple(locations), data["initial"], tuple(edges))
    problems = structure_issues(p)
    if problems:
        raise ModelError(problems)
    return p


def structure_issues(p: Pta) -> list[Issue]:
    out = []
    names = set(p.location_names)
    if p.initial not in names:
        out.append(Issue(f"unknown initial location {p.initial!r}"))
    for loc in p.locations:
        out.extend(_constraint_issues(loc.invariant, p, f"invariant of {loc.name}"))
    for k, e in enumerate(p.edges):
        if e.source not in names:
            out.append(Issue(f"edge source {e.source!r} is not a location", path=f"edges[{k}]"))
        out.extend(_constraint_issues(e.guard, p, f"guard of edge {k} ({e.action})"))
        for b in e.branches:
            if b.target not in names:
                out.append(Issue(f"branch target {b.target!r} is not a location", path=f"edges[{k}]"))
    return out


def _constraint_issues(e: Expr, p: Pta, what: str) -> list[Issue]:
    out = check_predicate(e, p, what)
    locs = E.location_names(e) & set(p.location_names)
    if locs:
        out.append(Issue(f"{what} mentions location {sorted(locs)[0]!r}"))
    for a in E.atoms(e):
        if isinstance(a, E.Cmp) and a.right is None and a.value < 0:
            out.append(Issue(f"{what}: negative constant in {a}"))
    return out


def model_to_json(p: Pta) -> dict:
    return {
        "clocks": list(p.clocks),
        "initial": p.initial,
        "locations": [{"name": l.name, "invariant": str(l.invariant)} for l in p.locations],
        "edges": [
            {
                "source": e.source,
                "action": e.action,
                "guard": str(e.guard),
                "branches": [
                    {"prob": str(b.prob), "resets": list(b.resets), "target": b.target}
                    for b in e.branches
                ],
            }
            for e in p.edges
        ],
    }


def render_model(p: Pta) -> str:
    return json.dumps(model_to_json(p), indent=2) + "\n"


# validation ------------------------------------------------------------------

@dataclass
class ValidationReport:
    closed: bool
    diagonal_free: bool
    max_constants: dict[str, int]
    initial_ok: bool
    strict: list[str] = field(default_factory=list)
    diagonal: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def fatal(self) -> bool:
        return not self.initial_ok or bool(self.errors)

    @property
    def digitizable(self) -> bool:
        return self.closed and self.diagonal_free


def validate(p: Pta) -> ValidationReport:
    strict, diagonal = [], []
    for e in p.constraint_exprs():
        strict.extend(str(a) for a in E.strict_atoms(e))
        diagonal.extend(str(a) for a in E.atoms(e) if isinstance(a, E.Cmp) and a.right is not None)
    consts = {c: 0 for c in p.clocks}
    consts.update(E.max_constants(p.constraint_exprs()))
    errors = [str(i) for i in structure_issues(p)]
    initial_ok = False
    if p.initial in p.location_names and not errors:
        zero = {c: 0 for c in p.clocks}
        initial_ok = E.evaluate(p.invariant(p.initial), p.initial, zero)
    return ValidationReport(
        closed=not strict,
        diagonal_free=not diagonal,
        max_constants=consts,
        initial_ok=initial_ok,
        strict=strict,
        diagonal=diagonal,
        errors=errors,
    )


# properties ------------------------------------------------------------------

_CMP_OPS = ("<=", ">=", "<", ">")


def parse_property(text, p: Pta | None = None) -> Property:
    """Read a property from its JSON form (object or text) or the compact syntax.

    Compact syntax::

        [clock '.'] 'P' ('min'|'max') ('=?' | OP NUMBER) '[' body ']'
        body := 'F' [BOUND] expr | expr 'U' [BOUND] expr
        BOUND := ('<=' | '<') INT

    The time bound uses clock ``z`` unless another name is given as prefix.
    """
    if isinstance(text, dict):
        prop = property_from_json(text)
    elif text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelError(Issue(exc.msg, exc.lineno, exc.colno)) from None
        prop = property_from_json(data)
    else:
        prop = _parse_compact(text)
    if p is not None:
        issues = []
        extra = (prop.bound.clock,) if prop.bound else ()
        if prop.bound and prop.bound.clock in p.clocks:
            issues.append(Issue(f"property clock {prop.bound.clock!r} clashes with a model clock"))
        issues += check_predicate(prop.left, p, "left operand", extra)
        issues += check_predicate(prop.right, p, "right operand", extra)
        if issues:
            raise ModelError(issues)
    return prop


def property_from_json(d: Mapping) -> Property:
    try:
        opt = d["opt"]
        until = d["until"]
        left = E.parse_expr(until.get("left", "true"))
        right = E.parse_expr(until["right"])
    except KeyError as exc:
        raise ModelError(f"property is missing field {exc.args[0]!r}") from None
    except ExprError as exc:
        raise ModelError(str(exc)) from None
    bound = None
    if d.get("bound") is not None:
        b = d["bound"]
        op = b.get("op", "<=")
        if op not in ("<=", "<"):
            raise ModelError(f"time bound comparator must be <= or <, got {op!r}")
        bound = TimeBound(b.get("clock", "z"), op, int(b["value"]))
        if bound.value < 0:
            raise ModelError("time bound must be non-negative")
    threshold = None
    if d.get("threshold") is not None:
        t = d["threshold"]
        if t.get("op") not in _CMP_OPS:
            raise ModelError(f"threshold comparator must be one of {', '.join(_CMP_OPS)}")
        threshold = Threshold(t["op"], _fraction(t["value"]))
    return Property(opt, left, right, bound, threshold)


def _fraction(v) -> Fraction:
    try:
        f = Fraction(str(v))
    except (ValueError, ZeroDivisionError):
        raise ModelError(f"bad number {v!r}") from None
    if not 0 <= f <= 1:
        raise ModelError(f"threshold {f} outside [0, 1]")
    return f


def _parse_compact(text: str) -> Property:
    s = text.strip()
    clock = "z"
    try:
        lb = s.index("[")
        rb = s.rindex("]")
    except ValueError:
        raise ModelError(f"cannot read property {text!r}: expected 'P..[ ... ]'") from None
    head = s[:lb].replace(" ", "")
    body = s[lb + 1 : rb]
    if s[rb + 1 :].strip():
        raise ModelError(f"trailing text after ']' in {text!r}")
    m = re.match(r"([A-Za-z_][A-Za-z0-9_]*)\.(P.*)", head)
    if m and m.group(1) not in ("Pmin", "Pmax"):
        clock, head = m.group(1), m.group(2)
    if head[:4] not in ("Pmin", "Pmax"):
        raise ModelError(f"property must start with Pmin or Pmax, got {head!r}")
    opt = head[1:4]
    rest = head[4:]
    threshold = None
    if rest != "=?":
        for op in _CMP_OPS:
            if rest.startswith(op):
                threshold = Threshold(op, _fraction(rest[len(op) :]))
                break
        else:
            raise ModelError(f"expected '=?' or a comparison after P{opt}, got {rest!r}")

    try:
        toks = E.tokenize(body)
    except ExprError as exc:
        raise ModelError(str(exc)) from None
    parser = E._Parser(toks, keywords=("U", "F"))

    def read_bound():
        kind, v, col = parser.peek()
        if v in ("<=", "<"):
            parser.take()
            k2, num, c2 = parser.take()
            if k2 != "num" or int(num) < 0:
                raise ModelError(f"time bound must be a non-negative integer (column {c2})")
            return TimeBound(clock, v, int(num))
        return None

    try:
        if parser.peek()[1] == "F":
            parser.take()
            bound = read_bound()
            left, right = E.TRUE, parser.expr()
        else:
            left = parser.expr()
            parser.take("U")
            bound = read_bound()
            right = parser.expr()
        if not parser.at_end():
            raise ExprError(f"unexpected token {parser.peek()[1]!r}", parser.peek()[2])
    except ExprError as exc:
        raise ModelError(f"in property body: {exc}") from None
    return Property(opt, left, right, bound, threshold)


def inject_property_clock(p: Pta, prop: Property) -> tuple[Pta, Property]:
    """Move a time bound into the model as a fresh, never-reset clock."""
    if prop.bound is None:
        return p, prop
    z = prop.bound.clock
    if z in p.clocks:
        raise ModelError(f"property clock {z!r} clashes with a model clock")
    if z in p.location_names:
        raise ModelError(f"property clock {z!r} clashes with a location name")
    right = E.conj(prop.right, prop.bound.atom())
    return p.with_clock(z), replace(prop, right=right, bound=None)
