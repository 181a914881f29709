"""Unions of DBMs.

A federation is an ordered list of non-empty canonical DBMs.  There is no
canonical form for such lists, so every equality or inclusion test here is
semantic (via subtraction).
"""

from __future__ import annotations

from typing import Iterable, Sequence

from . import kernels as K
from .dbm import Dbm, raw_negate
from .kernels import INF, LE_ZERO


class Federation:
    __slots__ = ("dim", "dbms", "_hull")

    def __init__(self, dim: int, dbms: Iterable[Dbm] = ()):
        self.dim = dim
        members = []
        for d in dbms:
            if d.dim != dim:
                raise ValueError(f"dimension mismatch: {d.dim} vs {dim}")
            d = d.canonical()
            if d.m is not None:
                members.append(d)
        self.dbms = tuple(members)
        self._hull = None

    @classmethod
    def universe(cls, dim: int) -> "Federation":
        return cls(dim, [Dbm.universe(dim)])

    @classmethod
    def empty(cls, dim: int) -> "Federation":
        return cls(dim, ())

    @classmethod
    def of(cls, *dbms: Dbm) -> "Federation":
        return cls(dbms[0].dim, dbms)

    def __len__(self) -> int:
        return len(self.dbms)

    def __iter__(self):
        return iter(self.dbms)

    def __repr__(self) -> str:
        return f"Federation({self.render()})"

    @property
    def is_empty(self) -> bool:
        return not self.dbms

    def hull(self) -> Dbm:
        if self._hull is None:
            h = Dbm.empty(self.dim)
            for d in self.dbms:
                h = h.hull(d)
            self._hull = h
        return self._hull

    def contains_valuation(self, v: Sequence) -> bool:
        return any(d.contains_valuation(v) for d in self.dbms)

    def contains_zero(self) -> bool:
        return any(d.contains_zero() for d in self.dbms)

    # Boolean structure ----------------------------------------------------

    def union(self, other: "Federation") -> "Federation":
        _same_dim(self, other)
        if not other.dbms:
            return self
        if not self.dbms:
            return other
        return Federation(self.dim, self.dbms + other.dbms).reduce()

    def intersect(self, other: "Federation") -> "Federation":
        _same_dim(self, other)
        out = []
        for a in self.dbms:
            for b in other.dbms:
                m = K.intersect(a.m, b.m, self.dim)
                if m is not None:
                    out.append(Dbm(self.dim, m))
        return Federation(self.dim, out).reduce()

    def intersect_dbm(self, d: Dbm) -> "Federation":
        d = d.canonical()
        if d.m is None:
            return Federation.empty(self.dim)
        out = []
        for a in self.dbms:
            m = K.intersect(a.m, d.m, self.dim)
            if m is not None:
                out.append(Dbm(self.dim, m))
        return Federation(self.dim, out)

    def conjoin(self, i: int, j: int, r: int) -> "Federation":
        return Federation(self.dim, [d.conjoin(i, j, r) for d in self.dbms])

    def subtract(self, other: "Federation") -> "Federation":
        _same_dim(self, other)
        cur = list(self.dbms)
        for b in other.dbms:
            if not cur:
                break
            nxt = []
            for a in cur:
                nxt.extend(_subtract_dbm(a, b))
            cur = nxt
        return Federation(self.dim, cur).reduce()

    def complement(self) -> "Federation":
        return Federation.universe(self.dim).subtract(self)

    def includes_sem(self, other: "Federation") -> bool:
        _same_dim(self, other)
        if not other.dbms:
            return True
        if not self.dbms:
            return False
        if not self.hull().includes(other.hull()):
            return False
        # cheap sufficient check before the semantic one
        if all(any(a.includes(b) for a in self.dbms) for b in other.dbms):
            return True
        return other.subtract(self).is_empty

    def equals_sem(self, other: "Federation") -> bool:
        _same_dim(self, other)
        if not self.dbms or not other.dbms:
            return not self.dbms and not other.dbms
        if self.hull() != other.hull():
            return False
        return self.includes_sem(other) and other.includes_sem(self)

    def reduce(self) -> "Federation":
        kept: list[Dbm] = []
        for d in self.dbms:
            if any(K.includes(k.m, d.m) for k in kept):
                continue
            kept = [k for k in kept if not K.includes(d.m, k.m)]
            kept.append(d)
        if len(kept) == len(self.dbms):
            return self
        return Federation(self.dim, kept)

    # time and reset operators -------------------------------------------

    def down(self) -> "Federation":
        return Federation(self.dim, [d.down() for d in self.dbms]).reduce()

    def up(self) -> "Federation":
        return Federation(self.dim, [d.up() for d in self.dbms]).reduce()

    def free(self, clocks: Iterable[int]) -> "Federation":
        clocks = list(clocks)
        out = []
        for d in self.dbms:
            for c in clocks:
                d = d.free(c)
            out.append(d)
        return Federation(self.dim, out).reduce()

    def backwards_reset(self, clocks: Iterable[int]) -> "Federation":
        clocks = list(clocks)
        if not clocks:
            return self
        return Federation(self.dim, [d.backwards_reset(clocks) for d in self.dbms]).reduce()

    def extend(self, n: int = 1) -> "Federation":
        return Federation(self.dim + n, [d.extend(n) for d in self.dbms])

    def project(self, keep: Sequence[int]) -> "Federation":
        return Federation(len(keep) + 1, [d.project(keep) for d in self.dbms]).reduce()

    def render(self, names: Sequence[str] | None = None) -> str:
        if not self.dbms:
            return "false"
        if len(self.dbms) == 1:
            return self.dbms[0].render(names)
        return " | ".join(f"({d.render(names)})" for d in self.dbms)


def _same_dim(a: Federation, b: Federation) -> None:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")


def _subtract_dbm(a: Dbm, b: Dbm) -> list[Dbm]:
    """Split ``a`` along the facets of ``b``; the pieces are pairwise disjoint."""
    dim = a.dim
    if K.intersect(a.m, b.m, dim) is None:
        return [a]
    out = []
    rest = a.m
    bm = b.m
    for i in range(dim):
        for j in range(dim):
            if i == j:
                continue
            r = bm[i * dim + j]
            if r >= INF or r >= rest[i * dim + j]:
                continue
            piece = K.tighten(rest, dim, j, i, raw_negate(r))
            if piece is not None:
                out.append(Dbm(dim, piece))
            rest = K.tighten(rest, dim, i, j, r)
            if rest is None:
                return out
    return out


def _entered_from_past(b: Dbm) -> Dbm:
    """Points ``w`` with ``w - e`` in ``b`` for every small enough ``e > 0``.

    Upper bounds become non-strict, lower bounds become strict; differences are
    unaffected by delay.
    """
    dim = b.dim
    m = list(b.m)
    for i in range(1, dim):
        r = m[i * dim]
        if r < INF:
            m[i * dim] = r | 1
        m[i] = m[i] & ~1
    return Dbm(dim, tuple(m), canonical=False).canonical()


def _tpre_against(g: Dbm, bad: Dbm, g_down: Dbm) -> Federation:
    """Points reaching ``g`` by delay without touching ``bad`` strictly before."""
    dim = g.dim
    bad_down = bad.down()
    out = Federation(dim, [g_down]).subtract(Federation(dim, [bad_down]))
    near = g.intersect(bad_down)
    if near.m is not None:
        entered = _entered_from_past(bad)
        late = Federation(dim, [near])
        if entered.m is not None:
            late = late.subtract(Federation(dim, [entered]))
        out = Federation(dim, out.dbms + late.down().dbms)
    return out


def tpre_within(stay: Federation, target: Federation, bad: Federation | None = None) -> Federation:
    """Valuations that reach ``target`` by letting time pass while in ``stay``.

    ``v`` is included iff some ``t >= 0`` has ``v + t`` in ``target`` and
    ``v + t'`` in ``stay`` for every ``0 <= t' < t``.  ``bad`` may pass a
    precomputed complement of ``stay``.

    For a convex target member ``G`` and convex forbidden region ``B`` the
    admissible delays form a prefix of the ray, so the forbidden members can
    be handled one at a time and intersected.
    """
    _same_dim(stay, target)
    dim = target.dim
    if target.is_empty:
        return target
    if bad is None:
        bad = stay.complement()
    if bad.is_empty:
        return target.down()
    pieces: list[Dbm] = []
    for g in target.dbms:
        g_down = g.down()
        acc = None
        for b in bad.dbms:
            # a delay path into g never leaves g's past
            if g_down.intersect(b).m is None:
                continue
            s = _tpre_against(g, b, g_down)
            acc = s if acc is None else acc.intersect(s)
            if acc.is_empty:
                break
        pieces.append(g)
        pieces.extend(acc.dbms if acc is not None else (g_down,))
    return Federation(dim, pieces).reduce()


# free-function forms ---------------------------------------------------------

def union(a: Federation, b: Federation) -> Federation:
    return a.union(b)


def intersect(a: Federation, b: Federation) -> Federation:
    return a.intersect(b)


def subtract(a: Federation, b: Federation) -> Federation:
    return a.subtract(b)


def complement(a: Federation) -> Federation:
    return a.complement()


def includes_sem(a: Federation, b: Federation) -> bool:
    return a.includes_sem(b)


def equals_sem(a: Federation, b: Federation) -> bool:
    return a.equals_sem(b)


def reduce(a: Federation) -> Federation:
    return a.reduce()


def down_fed(a: Federation) -> Federation:
    return a.down()


def free_fed(a: Federation, clocks: Iterable[int]) -> Federation:
    return a.free(clocks)


def backwards_reset_fed(a: Federation, clocks: Iterable[int]) -> Federation:
    return a.backwards_reset(clocks)
