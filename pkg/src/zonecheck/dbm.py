"""Difference bound matrices over exact integer bounds.

Entry ``(i, j)`` of a matrix bounds ``x_i - x_j``; index 0 is the reference
clock that is always zero, so ``(i, 0)`` is an upper bound on ``x_i`` and
``(0, j)`` is (the negation of) a lower bound on ``x_j``.

Bounds are stored as single integers (see ``kernels``): ``2*d + 1`` encodes
``<= d``, ``2*d`` encodes ``< d``.  The encoding keeps the usual total order
``(d,<) < (d,<=) < (d+1,<)`` and makes addition branch-free.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from . import kernels as K
from .kernels import INF, LE_ZERO

# Checks the constant-growth invariant after closures; switched on by the
# test suite, off by default because it is O(dim^2) per operation.
CHECK_BOUNDS = False


def raw_le(d: int) -> int:
    return 2 * d + 1


def raw_lt(d: int) -> int:
    return 2 * d


def raw_value(r: int) -> int:
    return r >> 1


def raw_strict(r: int) -> bool:
    return not (r & 1)


def raw_negate(r: int) -> int:
    """Complement of ``x_i - x_j ~ d`` as a bound on ``x_j - x_i``."""
    return 1 - r


@dataclass(frozen=True, order=True)
class Bound:
    """One DBM entry; compares in the tight-closure order."""

    raw: int

    @classmethod
    def le(cls, d: int) -> "Bound":
        return cls(raw_le(d))

    @classmethod
    def lt(cls, d: int) -> "Bound":
        return cls(raw_lt(d))

    @classmethod
    def infinity(cls) -> "Bound":
        return cls(INF)

    @property
    def is_infinite(self) -> bool:
        return self.raw >= INF

    @property
    def value(self) -> int | None:
        return None if self.is_infinite else raw_value(self.raw)

    @property
    def strict(self) -> bool | None:
        return None if self.is_infinite else raw_strict(self.raw)

    def __add__(self, other: "Bound") -> "Bound":
        return Bound(K.add(self.raw, other.raw))

    def __repr__(self) -> str:
        if self.is_infinite:
            return "Bound(inf)"
        return f"Bound({'<' if self.strict else '<='}{self.value})"


def _max_const(*mats) -> int:
    k = 0
    for m in mats:
        for r in m:
            if r < INF:
                v = abs(r >> 1)
                if v > k:
                    k = v
    return k


class Dbm:
    """A convex zone.  Instances are immutable; ``m`` is ``None`` when empty."""

    __slots__ = ("dim", "m", "canonical_flag", "_hash")

    def __init__(self, dim: int, m: tuple | None, canonical: bool = True):
        if dim < 1:
            raise ValueError("a DBM needs at least the reference clock (dim >= 1)")
        self.dim = dim
        self.m = m
        self.canonical_flag = canonical or m is None
        self._hash = None

    # construction -------------------------------------------------------

    @classmethod
    def universe(cls, dim: int) -> "Dbm":
        if dim < 1:
            raise ValueError("dim must be >= 1")
        m = [INF] * (dim * dim)
        for i in range(dim):
            m[i * dim + i] = LE_ZERO
            m[i] = LE_ZERO
        return cls(dim, tuple(m))

    @classmethod
    def empty(cls, dim: int) -> "Dbm":
        return cls(dim, None)

    @classmethod
    def from_constraints(cls, dim: int, constraints: Iterable[tuple[int, int, int]]) -> "Dbm":
        """Conjunction of raw constraints ``(i, j, raw)``, closed once at the end."""
        u = cls.universe(dim)
        m = list(u.m)
        for i, j, r in constraints:
            if i == j or not (0 <= i < dim and 0 <= j < dim):
                raise ValueError(f"bad constraint index ({i}, {j}) for dim {dim}")
            if r < m[i * dim + j]:
                m[i * dim + j] = r
        return cls(dim, tuple(m), canonical=False).canonical()

    @classmethod
    def from_matrix(cls, dim: int, entries: Sequence[Sequence[Bound | int]]) -> "Dbm":
        flat = []
        for row in entries:
            for e in row:
                flat.append(e.raw if isinstance(e, Bound) else int(e))
        if len(flat) != dim * dim:
            raise ValueError("matrix shape does not match dim")
        return cls(dim, tuple(flat), canonical=False)

    # basic queries ------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return self.canonical().m is None

    @property
    def clocks(self) -> int:
        return self.dim - 1

    def raw(self, i: int, j: int) -> int:
        return self.m[i * self.dim + j]

    def bound(self, i: int, j: int) -> Bound:
        return Bound(self.raw(i, j))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dbm):
            return NotImplemented
        a, b = self.canonical(), other.canonical()
        return a.dim == b.dim and a.m == b.m

    def __hash__(self) -> int:
        if self._hash is None:
            c = self.canonical()
            self._hash = hash((c.dim, c.m))
        return self._hash

    def __repr__(self) -> str:
        return f"Dbm({self.render()})"

    # operations ---------------------------------------------------------

    def canonical(self) -> "Dbm":
        if self.canonical_flag:
            return self
        out = Dbm(self.dim, K.close(self.m, self.dim))
        if CHECK_BOUNDS:
            _check_growth(out, self)
        return out

    def conjoin(self, i: int, j: int, b: Bound | int) -> "Dbm":
        if i == j or not (0 <= i < self.dim and 0 <= j < self.dim):
            raise ValueError(f"bad constraint index ({i}, {j})")
        r = b.raw if isinstance(b, Bound) else b
        d = self.canonical()
        if d.m is None:
            return d
        out = Dbm(d.dim, K.tighten(d.m, d.dim, i, j, r))
        if CHECK_BOUNDS:
            _check_growth(out, d, extra=abs(r >> 1) if r < INF else 0)
        return out

    def intersect(self, other: "Dbm") -> "Dbm":
        _same_dim(self, other)
        a, b = self.canonical(), other.canonical()
        if a.m is None:
            return a
        if b.m is None:
            return b
        out = Dbm(a.dim, K.intersect(a.m, b.m, a.dim))
        if CHECK_BOUNDS:
            _check_growth(out, a, b)
        return out

    def down(self) -> "Dbm":
        d = self.canonical()
        if d.m is None:
            return d
        return Dbm(d.dim, K.down(d.m, d.dim))

    def up(self) -> "Dbm":
        d = self.canonical()
        if d.m is None:
            return d
        return Dbm(d.dim, K.up(d.m, d.dim))

    def free(self, c: int) -> "Dbm":
        if not 1 <= c < self.dim:
            raise ValueError("only real clocks (index >= 1) can be freed")
        d = self.canonical()
        if d.m is None:
            return d
        return Dbm(d.dim, K.free(d.m, d.dim, c))

    def reset(self, c: int) -> "Dbm":
        """Forward reset ``x_c := 0``."""
        if not 1 <= c < self.dim:
            raise ValueError("only real clocks (index >= 1) can be reset")
        d = self.canonical()
        if d.m is None:
            return d
        return Dbm(d.dim, K.reset(d.m, d.dim, c))

    def backwards_reset(self, clocks: Iterable[int]) -> "Dbm":
        """Valuations ``v`` with ``v[X:=0]`` inside this zone."""
        d = self.canonical()
        clocks = sorted(set(clocks))
        for c in clocks:
            if not 1 <= c < self.dim:
                raise ValueError("reset sets may not contain the reference clock")
        for c in clocks:
            d = d.conjoin(c, 0, LE_ZERO)
            if d.m is None:
                return d
        for c in clocks:
            d = Dbm(d.dim, K.free(d.m, d.dim, c))
        return d

    def includes(self, other: "Dbm") -> bool:
        _same_dim(self, other)
        a, b = self.canonical(), other.canonical()
        if b.m is None:
            return True
        if a.m is None:
            return False
        return K.includes(a.m, b.m)

    def hull(self, other: "Dbm") -> "Dbm":
        """Smallest zone containing both (entrywise max of canonical forms)."""
        _same_dim(self, other)
        a, b = self.canonical(), other.canonical()
        if a.m is None:
            return b
        if b.m is None:
            return a
        return Dbm(a.dim, K.hull(a.m, b.m))

    def contains_valuation(self, v: Sequence) -> bool:
        if len(v) != self.dim - 1:
            raise ValueError(f"valuation has {len(v)} clocks, zone has {self.dim - 1}")
        vals = [Fraction(0)] + [Fraction(x) for x in v]
        if any(x < 0 for x in vals):
            raise ValueError("clock values must be non-negative")
        d = self if self.m is not None else self.canonical()
        if d.m is None:
            return False
        dim = d.dim
        for i in range(dim):
            for j in range(dim):
                r = d.m[i * dim + j]
                if r >= INF:
                    continue
                diff = vals[i] - vals[j]
                lim = r >> 1
                if diff > lim or (diff == lim and not (r & 1)):
                    return False
        return True

    def contains_zero(self) -> bool:
        d = self.canonical()
        if d.m is None:
            return False
        dim = d.dim
        for i in range(1, dim):
            if d.m[i * dim] < LE_ZERO or d.m[i] < LE_ZERO:
                return False
        for i in range(1, dim):
            for j in range(1, dim):
                if d.m[i * dim + j] < LE_ZERO:
                    return False
        return True

    def extend(self, n: int = 1) -> "Dbm":
        """Append ``n`` unconstrained clocks."""
        d = self.canonical()
        nd = d.dim + n
        if d.m is None:
            return Dbm(nd, None)
        m = list(Dbm.universe(nd).m)
        for i in range(d.dim):
            for j in range(d.dim):
                m[i * nd + j] = d.m[i * d.dim + j]
        for c in range(d.dim, nd):
            for i in range(d.dim):
                m[c * nd + i] = INF
                m[i * nd + c] = d.m[i * d.dim]
        return Dbm(nd, tuple(m))

    def project(self, keep: Sequence[int]) -> "Dbm":
        """Existential projection onto the listed clocks (reference clock kept)."""
        d = self.canonical()
        idx = [0] + [c for c in keep]
        nd = len(idx)
        if d.m is None:
            return Dbm(nd, None)
        m = tuple(d.m[i * d.dim + j] for i in idx for j in idx)
        return Dbm(nd, m)

    def max_constant(self) -> int:
        d = self.canonical()
        return 0 if d.m is None else _max_const(d.m)

    def constraints(self) -> list[tuple[int, int, int]]:
        """All finite non-trivial entries ``(i, j, raw)`` of the canonical form."""
        d = self.canonical()
        if d.m is None:
            # x0 - x0 < 0: unsatisfiable
            return [(0, 0, raw_lt(0))]
        out = []
        dim = d.dim
        for i in range(dim):
            for j in range(dim):
                if i == j:
                    continue
                r = d.m[i * dim + j]
                if r >= INF or (i == 0 and r == LE_ZERO):
                    continue
                out.append((i, j, r))
        return out

    def render(self, names: Sequence[str] | None = None) -> str:
        d = self.canonical()
        if names is None:
            names = [f"x{i}" for i in range(1, self.dim)]
        if d.m is None:
            return "false"
        dim = d.dim
        parts = []
        for i in range(1, dim):
            lo, hi = d.m[i], d.m[i * dim]
            nm = names[i - 1]
            if hi < INF and hi & 1 and lo == raw_le(-(hi >> 1)):
                parts.append(f"{nm} = {hi >> 1}")
                continue
            if lo != LE_ZERO:
                op = "<" if raw_strict(lo) else "<="
                parts.append(f"{-(lo >> 1)} {op} {nm}")
            if hi < INF:
                op = "<" if raw_strict(hi) else "<="
                parts.append(f"{nm} {op} {hi >> 1}")
        for i in range(1, dim):
            for j in range(1, dim):
                if i == j:
                    continue
                r = d.m[i * dim + j]
                if r >= INF:
                    continue
                if K.add(d.m[i * dim], d.m[j]) == r:
                    continue
                op = "<" if raw_strict(r) else "<="
                parts.append(f"{names[i - 1]} - {names[j - 1]} {op} {r >> 1}")
        return " & ".join(parts) if parts else "true"


def universe(dim: int) -> Dbm:
    return Dbm.universe(dim)


def canonical(d: Dbm) -> Dbm:
    return d.canonical()


def _same_dim(a: Dbm, b: Dbm) -> None:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")


def _check_growth(out: Dbm, *inputs: Dbm, extra: int = 0) -> None:
    if out.m is None:
        return
    k = max([_max_const(d.m) for d in inputs if d.m is not None] + [extra])
    lim = 2 * max(k, 1) * out.dim
    got = _max_const(out.m)
    assert got <= lim, f"bound growth: constant {got} exceeds {lim}"
