"""Backwards reachability for PTA.

``max_u`` explores symbolic states ``(location, zone)`` backwards from the
target and builds a finite MDP whose optimal values are the maximal until
probabilities.  Minimal probabilities go through the dual
``1 - Pmax(!target U G)`` where ``G`` holds the states that can stay out of
the target forever with probability 1 (``max_v_geq1``).

Zones are per-location ``Federation`` values over the model clocks; the
engine itself never looks at expressions.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from . import expr as E
from .dbm import Dbm, raw_le
from .federation import Federation, tpre_within
from .mdp import Mdp, prob1_max, value_iteration
from .model import EngineConfig, ModelError, Property, Pta, compile_predicate, inject_property_clock

Zones = Mapping[str, Federation]


class NonTermination(RuntimeError):
    pass


@dataclass
class SymbolicState:
    index: int
    location: str
    zone: Federation
    role: str  # "seed", "derived" or "combination"


@dataclass
class SymAction:
    edge: int
    assignment: tuple  # per branch: state index or None for the sink
    dist: tuple  # ((state index or BOT, Fraction), ...)


BOT = -1


@dataclass
class SymbolicMdp:
    pta: Pta
    states: list[SymbolicState]
    seeds: list[int]
    actions: dict[int, list[SymAction]]
    tzones: list[Federation]
    stats: dict = field(default_factory=dict)

    @property
    def bot(self) -> int:
        return len(self.states)

    def to_mdp(self) -> Mdp:
        n = len(self.states)
        rows = []
        labels = []
        action_labels = []
        mapped: dict[int, tuple] = {}
        for s in self.states:
            acts = self.actions.get(s.index, [])
            row = []
            for a in acts:
                d = mapped.get(id(a.dist))
                if d is None:
                    d = mapped[id(a.dist)] = tuple((n if t == BOT else t, p) for t, p in a.dist)
                row.append(d)
            rows.append(row)
            action_labels.append([self.pta.edges[a.edge].action for a in acts])
            labels.append(f"s{s.index}")
        rows.append([])
        labels.append("bot")
        action_labels.append(["loop"])
        for i, r in enumerate(rows):
            if not r:
                action_labels[i] = ["loop"]
        return Mdp(rows, labels, action_labels)

    def covering(self, valuation=None) -> list[int]:
        """States at the initial location whose time predecessor holds ``valuation``."""
        init = self.pta.initial
        v = valuation if valuation is not None else [0] * len(self.pta.clocks)
        return [s.index for s in self.states if s.location == init and self.tzones[s.index].contains_valuation(v)]


class _Context:
    """Compiled invariants, guards and per-edge preconditions of one model."""

    def __init__(self, p: Pta):
        self.p = p
        self.dim = p.dim
        self.inv = {l.name: compile_predicate(l.invariant, l.name, p) for l in p.locations}
        self.index = p.index
        self.pre = []  # guard & source invariant & enabling condition
        self.resets = []
        self.into: dict[str, list[tuple[int, int]]] = {l: [] for l in p.location_names}
        for k, e in enumerate(p.edges):
            pre = compile_predicate(e.guard, e.source, p).intersect(self.inv[e.source])
            resets = []
            for b_i, b in enumerate(e.branches):
                xs = [self.index[c] for c in b.resets]
                resets.append(xs)
                pre = pre.intersect(self.inv[b.target].backwards_reset(xs))
                self.into[b.target].append((k, b_i))
            self.pre.append(pre)
            self.resets.append(resets)

    def compile(self, pred) -> dict[str, Federation]:
        return {l: compile_predicate(pred, l, self.p) for l in self.p.location_names}


def tpre_safe(p: Pta, location: str, safe: Zones, zone: Federation, ctx: _Context | None = None) -> Federation:
    """Valuations that reach ``zone`` by delaying inside invariant and ``safe``."""
    ctx = ctx or _Context(p)
    stay = ctx.inv[location].intersect(safe[location])
    return tpre_within(stay, zone)


def dpre(p: Pta, edge: int, branch: int, zone: Federation, ctx: _Context | None = None) -> Federation:
    """Valuations from which ``edge`` is enabled and ``branch`` lands in ``zone``."""
    ctx = ctx or _Context(p)
    return zone.backwards_reset(ctx.resets[edge][branch]).intersect(ctx.pre[edge])


class _StateIndex:
    """Symbolic states per location, found by semantic zone equality."""

    def __init__(self):
        self.by_key: dict[tuple, list[int]] = {}

    @staticmethod
    def key(loc: str, zone: Federation) -> tuple:
        return (loc, zone.hull().m)

    def find(self, states, loc, zone) -> int | None:
        for i in self.by_key.get(self.key(loc, zone), ()):
            if states[i].zone.equals_sem(zone):
                return i
        return None

    def add(self, loc, zone, i):
        self.by_key.setdefault(self.key(loc, zone), []).append(i)


def max_u(
    p: Pta,
    safe: Zones,
    target: Zones,
    cfg: EngineConfig = EngineConfig(),
    ctx: _Context | None = None,
    qualitative: bool = False,
) -> SymbolicMdp:
    """Backwards exploration from ``target`` through ``safe`` states.

    ``safe`` and ``target`` map each location to a federation; both are
    intersected with the location invariant here.  With ``qualitative`` only
    branch assignments without a sink branch are built: those are the only
    actions an almost-sure strategy can use, which is all ``max_v_geq1``
    needs.
    """
    ctx = ctx or _Context(p)
    locs = p.location_names
    safe = {l: ctx.inv[l].intersect(safe[l]) for l in locs}
    bad = {l: safe[l].complement() for l in locs}
    tgt = {l: ctx.inv[l].intersect(target[l]) for l in locs}
    src_ok = [ctx.pre[k].intersect(safe[e.source]) for k, e in enumerate(p.edges)]

    states: list[SymbolicState] = []
    tzones: list[Federation] = []
    index = _StateIndex()
    work: deque[int] = deque()

    def intern(loc, zone, role) -> int:
        found = index.find(states, loc, zone)
        if found is not None:
            return found
        i = len(states)
        if i >= cfg.state_cap:
            raise NonTermination(f"more than {cfg.state_cap} symbolic states")
        states.append(SymbolicState(i, loc, zone, role))
        tzones.append(None)
        index.add(loc, zone, i)
        work.append(i)
        return i

    seeds = []
    for l in locs:
        if not tgt[l].is_empty:
            seeds.append(intern(l, tgt[l], "seed"))
    seed_set = set(seeds)

    # records[(edge, branch)] = [(seq, successor state, dpre zone)]
    records: dict[tuple[int, int], list] = {}
    combos: dict[str, list] = {l: [] for l in locs}
    seq = 0
    pops = 0
    while work:
        pops += 1
        if pops > cfg.iteration_cap * max(1, len(p.edges)):
            raise NonTermination(f"exploration exceeded {pops - 1} steps")
        z = states[work.popleft()]
        tz = tpre_within(safe[z.location], z.zone, bad[z.location])
        tzones[z.index] = tz
        for k, b_i in ctx.into[z.location]:
            d = tz.backwards_reset(ctx.resets[k][b_i]).intersect(src_ok[k])
            if d.is_empty:
                continue
            src = p.edges[k].source
            intern(src, d, "derived")
            seq += 1
            rec = (seq, z.index, d)
            records.setdefault((k, b_i), []).append(rec)
            for assignment, zone in _combinations(p, k, b_i, rec, records, qualitative):
                ci = intern(src, zone, "combination")
                combos[src].append((k, assignment, ci))

    # every combination zone is itself a state, so a combination is usable at
    # s exactly when its state's zone includes that of s
    sup = _superzones(states)
    by_state: dict[int, list] = {}
    for l in locs:
        for pos, (k, assignment, ci) in enumerate(combos[l]):
            by_state.setdefault(ci, []).append((pos, k, assignment))
    actions: dict[int, list[SymAction]] = {}
    dists: dict[tuple, tuple] = {}
    order = _ValueOrder(sup, seed_set) if cfg.prune and not qualitative else None
    for s in states:
        if s.index in seed_set:
            continue
        group = (s.index, *sup[s.index])
        if order is not None:
            # the front of a union is the front of the parts' fronts
            chosen = [(k, a) for _, k, a in order.front([u for t in group for u in order.cached(t, by_state)])]
        else:
            usable = [(k, a) for _, k, a in sorted(u for t in group for u in by_state.get(t, ()))]
            chosen = usable if qualitative else _maximal(usable)
        acts = []
        for k, assignment in chosen:
            key = (k, assignment)
            if key not in dists:
                dists[key] = _distribution(p.edges[k], assignment)
            acts.append(SymAction(k, assignment, dists[key]))
        if acts:
            actions[s.index] = acts
    stats = {
        "states": len(states),
        "seeds": len(seeds),
        "records": seq,
        "combinations": sum(len(v) for v in combos.values()),
        "actions": sum(len(v) for v in actions.values()),
    }
    return SymbolicMdp(p, states, seeds, actions, tzones, stats)


def _combinations(p: Pta, k: int, b_new: int, rec, records, full_only: bool = False):
    """Branch assignments of edge ``k`` whose newest record is ``rec``."""
    nb = len(p.edges[k].branches)
    choice = [None] * nb
    choice[b_new] = rec[1]
    others = [j for j in range(nb) if j != b_new]

    def go(pos, zone):
        if pos == len(others):
            yield tuple(choice), zone
            return
        j = others[pos]
        choice[j] = None
        if not full_only:
            yield from go(pos + 1, zone)
        for seq, succ, d in records.get((k, j), ()):
            if seq >= rec[0]:
                break
            z2 = zone.intersect(d)
            if z2.is_empty:
                continue
            choice[j] = succ
            yield from go(pos + 1, z2)
        choice[j] = None

    yield from go(0, rec[2])


def _extends(big: tuple, small: tuple) -> bool:
    return all(b is None or a == b for a, b in zip(big, small))


def _maximal(usable: list) -> list:
    """Assignments not extended by another usable assignment of the same edge.

    Replacing a sink branch by a real successor never lowers a value, so the
    smaller assignment is never needed.
    """
    order = sorted(set(usable), key=lambda ka: sum(x is not None for x in ka[1]), reverse=True)
    kept: set = set()
    if order and len(order[0][1]) > 12:
        for k, a in order:
            if not any(k2 == k and _extends(a2, a) for k2, a2 in kept):
                kept.add((k, a))
        return [u for u in usable if u in kept]
    # every proper projection of a kept assignment is dominated
    shadows: set = set()
    for k, a in order:
        if (k, a) in shadows:
            continue
        kept.add((k, a))
        defined = [i for i, x in enumerate(a) if x is not None]
        for mask in range((1 << len(defined)) - 1):
            t = list(a)
            for bit, i in enumerate(defined):
                if not mask >> bit & 1:
                    t[i] = None
            shadows.add((k, tuple(t)))
    return [u for u in usable if u in kept]


def _superzones(states) -> list[set]:
    """For each state, the other states at its location whose zone includes its own."""
    sup: list[set] = [set() for _ in states]
    by_loc: dict[str, list] = {}
    for st in states:
        by_loc.setdefault(st.location, []).append(st)
    for group in by_loc.values():
        hulls = np.array([g.zone.hull().m for g in group], dtype=np.int64).reshape(len(group), -1)
        for i, a in enumerate(group):
            for j in np.flatnonzero((hulls >= hulls[i]).all(axis=1)).tolist():
                b = group[j]
                if j != i and b.zone.includes_sem(a.zone):
                    sup[a.index].add(b.index)
    return sup


class _ValueOrder:
    """A preorder on successor states that never contradicts their values.

    A state whose zone lies inside another's at the same location inherits
    every combination usable there, so its maximal value is at least as
    high; a seed is worth 1.  An assignment that is pointwise no better than
    another of the same edge cannot raise any maximum and is dropped.
    """

    def __init__(self, sup: list[set], seeds):
        self.seeds = seeds
        # above[x]: non-seed states with a larger zone, so no higher value than x
        self.above = [{t for t in ts if t not in seeds} for ts in sup]
        n = len(sup)
        self.score = [n + 1 if i in seeds else len(self.above[i]) for i in range(n)]
        self._fronts: dict[int, list] = {}

    def geq(self, x, y) -> bool:
        if y is None or x == y or x in self.seeds:
            return True
        if x is None or y in self.seeds:
            return False
        return y in self.above[x]

    def cached(self, t: int, by_state) -> list:
        got = self._fronts.get(t)
        if got is None:
            got = self._fronts[t] = self.front(by_state.get(t, []))
        return got

    def front(self, items: list) -> list:
        """Undominated ``(position, edge, assignment)`` items, in position order."""
        rank = lambda it: sum(-1 if x is None else self.score[x] for x in it[2])
        kept: dict[int, list] = {}
        out = []
        for it in sorted(set(items), key=lambda it: (-rank(it), it[0])):
            mine = kept.setdefault(it[1], [])
            a = it[2]
            if not any(all(self.geq(x, y) for x, y in zip(b, a)) for b in mine):
                mine.append(a)
                out.append(it)
        return sorted(out)


def _distribution(edge, assignment) -> tuple:
    weights: dict[int, Fraction] = {}
    for b, s in zip(edge.branches, assignment):
        key = BOT if s is None else s
        weights[key] = weights.get(key, Fraction(0)) + b.prob
    return tuple(sorted(weights.items()))


@dataclass
class Solved:
    sym: SymbolicMdp
    values: np.ndarray
    sweeps: int
    prob1: set

    def value(self, i: int) -> float:
        return float(self.values[i])


def solve(sym: SymbolicMdp, cfg: EngineConfig = EngineConfig()) -> Solved:
    m = sym.to_mdp()
    res = value_iteration(m, sym.seeds, "max", cfg.epsilon, cfg.vi_cap)
    return Solved(sym, res.values, res.sweeps, res.prob1)


# zero detection --------------------------------------------------------------

def forward_reachable(p: Pta, target: Zones, horizon: tuple[int, int], ctx: _Context | None = None, cap: int = 20_000):
    """Whether ``target`` meets the forward zone graph, with all runs cut at
    ``clock[horizon[0]] <= horizon[1]`` (a clock that is never reset).

    Returns ``True``/``False``, or ``None`` when the exploration hit ``cap``.
    """
    ctx = ctx or _Context(p)
    zc, bound = horizon
    cut = Federation(p.dim, [Dbm.from_constraints(p.dim, [(zc, 0, raw_le(bound))])])
    start = Federation(p.dim, [Dbm.from_constraints(p.dim, [(i, 0, raw_le(0)) for i in range(1, p.dim)])])
    seen: dict[str, list[Dbm]] = {l: [] for l in p.location_names}
    work = deque()

    def push(loc, fed):
        for d in fed.dbms:
            if any(v.includes(d) for v in seen[loc]):
                continue
            seen[loc] = [v for v in seen[loc] if not d.includes(v)] + [d]
            work.append((loc, d))

    push(p.initial, start.intersect(ctx.inv[p.initial]))
    steps = 0
    while work:
        steps += 1
        if steps > cap:
            return None
        loc, d = work.popleft()
        z = Federation(p.dim, [d.up()]).intersect(ctx.inv[loc]).intersect(cut)
        if not z.intersect(target[loc]).is_empty:
            return True
        for k, e in enumerate(p.edges):
            if e.source != loc:
                continue
            g = z.intersect(ctx.pre[k])
            if g.is_empty:
                continue
            for b_i, b in enumerate(e.branches):
                nxt = g
                for c in ctx.resets[k][b_i]:
                    nxt = Federation(p.dim, [m.reset(c) for m in nxt.dbms])
                push(b.target, nxt.intersect(ctx.inv[b.target]))
    return False


# queries ---------------------------------------------------------------------

@dataclass
class ProbResult:
    probability: float
    verdict: bool | None = None
    stats: dict = field(default_factory=dict)
    exact: Fraction | None = None
    detail: object = None

    def __post_init__(self):
        if not -1e-9 <= self.probability <= 1 + 1e-9:
            raise ValueError(f"probability {self.probability} outside [0, 1]")
        self.probability = min(1.0, max(0.0, self.probability))


def _initial_ok(p: Pta, ctx: _Context) -> None:
    if not ctx.inv[p.initial].contains_zero():
        raise ModelError(f"initial location {p.initial!r} violates its invariant at time 0")


def pmax_zones(p: Pta, safe: Zones, target: Zones, cfg: EngineConfig = EngineConfig(), horizon=None, ctx=None) -> ProbResult:
    """Maximal probability of ``safe U target`` from the initial state."""
    ctx = ctx or _Context(p)
    _initial_ok(p, ctx)
    t0 = time.perf_counter()
    zero = [0] * len(p.clocks)
    tgt = {l: ctx.inv[l].intersect(target[l]) for l in p.location_names}
    seeds = sum(1 for l in p.location_names if not tgt[l].is_empty)
    base = {"states": seeds, "sweeps": 0, "transitions": 0, "prob1_rounds": 0}
    if seeds == 0:
        return ProbResult(0.0, stats=dict(base, time=time.perf_counter() - t0, zero_detected=True), exact=Fraction(0))
    if tgt[p.initial].contains_valuation(zero):
        return ProbResult(1.0, stats=dict(base, time=time.perf_counter() - t0), exact=Fraction(1))
    if horizon is not None and forward_reachable(p, tgt, horizon, ctx) is False:
        return ProbResult(0.0, stats=dict(base, time=time.perf_counter() - t0, zero_detected=True), exact=Fraction(0))
    sym = max_u(p, safe, target, cfg, ctx)
    cover = sym.covering(zero)
    stats = {"states": len(sym.states), "sweeps": 0, "transitions": 0}
    if not cover:
        stats["time"] = time.perf_counter() - t0
        stats["zero_detected"] = True
        return ProbResult(0.0, stats=stats, exact=Fraction(0), detail=sym)
    solved = solve(sym, cfg)
    m_trans = sum(len(a.dist) for acts in sym.actions.values() for a in acts)
    best = max(solved.value(i) for i in cover)
    exact = Fraction(1) if any(i in solved.prob1 for i in cover) else None
    if exact is not None:
        best = 1.0
    stats.update(sweeps=solved.sweeps, transitions=m_trans, time=time.perf_counter() - t0)
    return ProbResult(best, stats=stats, exact=exact, detail=solved)


def _fresh_clock(p: Pta, base: str = "w") -> str:
    name = base
    k = 0
    taken = set(p.clocks) | set(p.location_names)
    while name in taken:
        k += 1
        name = f"{base}{k}"
    return name


def prob1_zones(p: Pta, safe: Zones, target: Zones, cfg: EngineConfig = EngineConfig(), ctx=None):
    """Where ``safe U target`` can be made to hold with probability 1.

    The nested graph fixpoint of finite MDPs, run on zones: the outer loop
    shrinks a candidate set ``X``; the inner loop grows ``Y`` from the target
    by edges whose branches all land in ``X`` and at least one in ``Y``,
    closed under time predecessors inside ``safe``.  Returns the zones per
    location and the number of outer rounds.
    """
    ctx = ctx or _Context(p)
    locs = p.location_names
    safe = {l: ctx.inv[l].intersect(safe[l]) for l in locs}
    bad = {l: safe[l].complement() for l in locs}
    tgt = {l: ctx.inv[l].intersect(target[l]) for l in locs}
    src_ok = [ctx.pre[k].intersect(safe[e.source]) for k, e in enumerate(p.edges)]
    edges = [(k, e) for k, e in enumerate(p.edges) if not src_ok[k].is_empty]

    def back(k, b_i, zones):
        return zones[p.edges[k].branches[b_i].target].backwards_reset(ctx.resets[k][b_i])

    x = {l: tgt[l].union(safe[l]) for l in locs}
    rounds = 0
    while True:
        rounds += 1
        if rounds > cfg.iteration_cap:
            raise NonTermination(f"prob-1 analysis did not stabilise within {cfg.iteration_cap} rounds")
        stay_in_x = {}
        for k, e in edges:
            z = src_ok[k]
            for b_i in range(len(e.branches)):
                z = z.intersect(back(k, b_i, x))
                if z.is_empty:
                    break
            stay_in_x[k] = z
        y = {l: tgt[l].union(Federation.empty(p.dim)) for l in locs}
        y = {l: tpre_within(safe[l], y[l], bad[l]) for l in locs}
        while True:
            grown = {l: [] for l in locs}
            for k, e in edges:
                z = stay_in_x[k]
                if z.is_empty:
                    continue
                hit = Federation.empty(p.dim)
                for b_i in range(len(e.branches)):
                    hit = hit.union(back(k, b_i, y))
                grown[e.source].extend(z.intersect(hit).dbms)
            changed = False
            for l in locs:
                if not grown[l]:
                    continue
                new = Federation(p.dim, grown[l]).subtract(y[l])
                if new.is_empty:
                    continue
                # tpre distributes over union and y is already closed
                y[l] = y[l].union(tpre_within(safe[l], new, bad[l]))
                changed = True
            if not changed:
                break
        if all(y[l].equals_sem(x[l]) for l in locs):
            return y, rounds
        x = y


@dataclass
class MaxVResult:
    zones: dict[str, Federation]
    iterations: int
    maxu1_iterations: int
    states: int


def max_v_geq1(p: Pta, safe: Zones, c: int, cfg: EngineConfig = EngineConfig(), ctx=None) -> MaxVResult:
    """States that can stay in ``safe`` forever with probability 1.

    Each round extends the model with a fresh clock ``w`` (0 at the start of
    the round), keeps the states from which ``X U (X & w >= c)`` can be made
    to hold almost surely, and projects ``w`` away again.
    """
    if c < 1:
        raise ValueError("c must be a positive integer")
    ctx = ctx or _Context(p)
    locs = p.location_names
    w_name = _fresh_clock(p)
    pw = p.with_clock(w_name)
    wctx = _Context(pw)
    wi = pw.dim - 1
    x = {l: ctx.inv[l].intersect(safe[l]) for l in locs}
    w_late = Federation(pw.dim, [Dbm.from_constraints(pw.dim, [(0, wi, raw_le(-c))])])
    w_zero = Dbm.from_constraints(pw.dim, [(wi, 0, raw_le(0))])
    keep = list(range(1, p.dim))
    iterations = 0
    maxu1 = 0
    states = 0
    while True:
        iterations += 1
        if iterations > cfg.iteration_cap:
            raise NonTermination(f"MaxV did not stabilise within {cfg.iteration_cap} iterations")
        xs = {l: x[l].extend(1) for l in locs}
        tg = {l: xs[l].intersect(w_late) for l in locs}
        if all(t.is_empty for t in tg.values()):
            nxt = {l: Federation.empty(p.dim) for l in locs}
        elif cfg.maxu1 == "mdp":
            sym = max_u(pw, xs, tg, cfg, wctx, qualitative=True)
            states = len(sym.states)
            one, rounds = prob1_max(sym.to_mdp(), sym.seeds, return_iterations=True)
            maxu1 += rounds
            acc: dict[str, list] = {l: [] for l in locs}
            for s in sym.states:
                if s.index in one:
                    acc[s.location].extend(sym.tzones[s.index].intersect_dbm(w_zero).dbms)
            nxt = {l: Federation(pw.dim, acc[l]).reduce().project(keep) for l in locs}
        else:
            one, rounds = prob1_zones(pw, xs, tg, cfg, wctx)
            maxu1 += rounds
            nxt = {l: one[l].intersect_dbm(w_zero).project(keep) for l in locs}
        if all(nxt[l].equals_sem(x[l]) for l in locs):
            return MaxVResult(x, iterations, maxu1, states)
        x = nxt


def pmin_zones(p: Pta, avoid: Zones, target: Zones, cfg: EngineConfig = EngineConfig(), horizon=None, ctx=None) -> ProbResult:
    """Minimal probability of ``!avoid U target`` over time-divergent schedulers."""
    ctx = ctx or _Context(p)
    _initial_ok(p, ctx)
    t0 = time.perf_counter()
    locs = p.location_names
    zero = [0] * len(p.clocks)
    tgt = {l: ctx.inv[l].intersect(target[l]) for l in locs}
    seeds = sum(1 for l in locs if not tgt[l].is_empty)
    base = {"states": seeds, "sweeps": 0, "transitions": 0, "iter_maxv": 0, "iter_maxu1": 0}
    if tgt[p.initial].contains_valuation(zero):
        return ProbResult(1.0, stats=dict(base, time=time.perf_counter() - t0), exact=Fraction(1))
    c = cfg.c_for(p)
    if seeds == 0 or (horizon is not None and forward_reachable(p, tgt, horizon, ctx) is False):
        # The target is out of reach, so the minimum is 0 exactly when time
        # can diverge from the initial state.  Under a timelock no divergent
        # run exists and the general formula below gives 1 instead.
        live = max_v_geq1(p, {l: Federation.universe(p.dim) for l in locs}, c, cfg, ctx)
        if live.zones[p.initial].contains_valuation(zero):
            stats = dict(base, iter_maxv=live.iterations, iter_maxu1=live.maxu1_iterations, c=c)
            return ProbResult(0.0, stats=dict(stats, time=time.perf_counter() - t0, zero_detected=True), exact=Fraction(0))
    not_target = {l: target[l].complement() for l in locs}
    g = max_v_geq1(p, not_target, c, cfg, ctx)
    t1 = time.perf_counter()
    escape = {l: avoid[l].intersect(not_target[l]).union(g.zones[l]) for l in locs}
    inner = pmax_zones(p, not_target, escape, cfg, None, ctx)
    prob = 1.0 - inner.probability
    exact = 1 - inner.exact if inner.exact is not None else None
    stats = {
        "states": inner.stats["states"],
        "sweeps": inner.stats["sweeps"],
        "transitions": inner.stats["transitions"],
        "iter_maxv": g.iterations,
        "iter_maxu1": g.maxu1_iterations,
        "maxv_states": g.states,
        "time_graph": t1 - t0,
        "time": time.perf_counter() - t0,
        "c": c,
    }
    return ProbResult(prob, stats=stats, exact=exact, detail=(g, inner))


def pmax_until(p: Pta, avoid, target, cfg: EngineConfig = EngineConfig()) -> ProbResult:
    ctx = _Context(p)
    safe = {l: f.complement() for l, f in ctx.compile(avoid).items()}
    return pmax_zones(p, safe, ctx.compile(target), cfg, ctx=ctx)


def pmin_until(p: Pta, avoid, target, cfg: EngineConfig = EngineConfig()) -> ProbResult:
    ctx = _Context(p)
    return pmin_zones(p, ctx.compile(avoid), ctx.compile(target), cfg, ctx=ctx)


def evaluate_threshold(r: ProbResult, threshold) -> bool:
    """Compare the probability against ``threshold`` and record the verdict."""
    r.verdict = threshold.holds(r.probability)
    return r.verdict


def check(p: Pta, prop: Property, cfg: EngineConfig = EngineConfig()) -> ProbResult:
    """Model check one property with the backwards engine."""
    horizon = None
    if prop.bound is not None:
        p, inner = inject_property_clock(p, prop)
        # z <= D also covers z < D; the cut only needs to over-approximate
        horizon = (p.index[prop.bound.clock], prop.bound.value)
        prop = inner
    ctx = _Context(p)
    avoid = ctx.compile(prop.avoid)
    target = ctx.compile(prop.right)
    if prop.opt == "max":
        safe = {l: f.complement() for l, f in avoid.items()}
        r = pmax_zones(p, safe, target, cfg, horizon, ctx)
    else:
        r = pmin_zones(p, avoid, target, cfg, horizon, ctx)
    if prop.threshold is not None:
        evaluate_threshold(r, prop.threshold)
    return r
