"""Digital-clocks engine: integer clock values, unit time steps.

For closed, diagonal-free models the probabilities of reachability
properties under integer time equal those under dense time.  Clock values
saturate at ``k + 1`` where ``k`` is the largest constant the clock is
compared with, so the explicit MDP is finite.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import expr as E
from .backwards import ProbResult, evaluate_threshold
from .mdp import Mdp, end_components, prob1_max, value_iteration
from .model import EngineConfig, Property, Pta, inject_property_clock, validate


class EngineLimitation(ValueError):
    """The model or property uses something the engine cannot handle."""


def _compile(e: E.Expr, index: dict[str, int]):
    """Python predicate ``f(location, values)`` for a closed expression."""
    if isinstance(e, E.Const):
        v = e.value
        return lambda loc, vals: v
    if isinstance(e, E.Loc):
        name = e.name
        return lambda loc, vals: loc == name
    if isinstance(e, E.Cmp):
        i = index[e.left]
        c = e.value
        op = e.op
        if op == "<=":
            return lambda loc, vals: vals[i] <= c
        if op == ">=":
            return lambda loc, vals: vals[i] >= c
        if op == "=":
            return lambda loc, vals: vals[i] == c
        if op == "<":
            return lambda loc, vals: vals[i] < c
        return lambda loc, vals: vals[i] > c
    if isinstance(e, E.Not):
        f = _compile(e.arg, index)
        return lambda loc, vals: not f(loc, vals)
    fs = [_compile(a, index) for a in e.args]
    if isinstance(e, E.And):
        return lambda loc, vals: all(f(loc, vals) for f in fs)
    return lambda loc, vals: any(f(loc, vals) for f in fs)


def _require_digitizable(p: Pta, prop: Property) -> None:
    rep = validate(p)
    if rep.strict:
        raise EngineLimitation(f"digital clocks need closed constraints; found strict constraint {rep.strict[0]}")
    if rep.diagonal:
        raise EngineLimitation(f"digital clocks need diagonal-free constraints; found {rep.diagonal[0]}")
    for part in (prop.left, prop.right):
        bad = list(E.strict_atoms(part))
        if bad:
            raise EngineLimitation(f"digital clocks need closed predicates; found strict constraint {bad[0]}")
        diag = [a for a in E.atoms(part) if isinstance(a, E.Cmp) and a.right is not None]
        if diag:
            raise EngineLimitation(f"digital clocks need diagonal-free predicates; found {diag[0]}")
    if prop.bound is not None and prop.bound.op == "<":
        raise EngineLimitation(f"digital clocks need closed time bounds; found < {prop.bound.value}")


@dataclass
class DigitalModel:
    pta: Pta
    prop: Property  # with the time bound moved into the model
    mdp: Mdp
    states: list  # (location, clock values)
    target: np.ndarray
    avoid: np.ndarray
    tick: np.ndarray  # per global action: is it a unit delay
    caps: tuple


def digitize(p: Pta, prop: Property) -> DigitalModel:
    """Explicit MDP of the reachable integer states, starting at all clocks 0.

    Edges come first in model order (enabled when the guard holds and every
    branch target's invariant holds after the resets), the unit delay last.
    States without any action get a self-loop.
    """
    _require_digitizable(p, prop)
    p, prop = inject_property_clock(p, prop)
    index = {c: i for i, c in enumerate(p.clocks)}
    consts = E.max_constants(p.constraint_exprs() + [prop.left, prop.right])
    caps = tuple(consts.get(c, 0) + 1 for c in p.clocks)
    inv = {l.name: _compile(l.invariant, index) for l in p.locations}
    edges = []
    for e in p.edges:
        resets = [tuple(index[c] for c in b.resets) for b in e.branches]
        edges.append((e.source, _compile(e.guard, index), e.branches, resets))
    by_source: dict[str, list] = {}
    for ed in edges:
        by_source.setdefault(ed[0], []).append(ed)
    right = _compile(prop.right, index)
    left = _compile(prop.left, index)

    start = (p.initial, tuple(0 for _ in p.clocks))
    if not inv[p.initial](*start):
        raise EngineLimitation(f"initial location {p.initial!r} violates its invariant at time 0")
    ids = {start: 0}
    states = [start]
    rows = []
    is_tick = []
    queue = deque([start])

    def sid(st):
        i = ids.get(st)
        if i is None:
            i = len(states)
            ids[st] = i
            states.append(st)
            queue.append(st)
        return i

    while queue:
        loc, vals = queue.popleft()
        acts = []
        for _, guard, branches, resets in by_source.get(loc, ()):
            if not guard(loc, vals):
                continue
            dist = []
            ok = True
            for b, xs in zip(branches, resets):
                nv = vals
                if xs:
                    nv = tuple(0 if i in xs else v for i, v in enumerate(vals))
                if not inv[b.target](b.target, nv):
                    ok = False
                    break
                dist.append((b.target, nv, b.prob))
            if ok:
                acts.append([(sid((t, nv)), pr) for t, nv, pr in dist])
                is_tick.append(False)
        nv = tuple(v + 1 if v < cap else cap for v, cap in zip(vals, caps))
        if inv[loc](loc, nv):
            acts.append([(sid((loc, nv)), 1)])
            is_tick.append(True)
        if not acts:
            acts.append([(ids[(loc, vals)], 1)])
            is_tick.append(False)
        rows.append(acts)

    n = len(states)
    target = np.array([bool(right(l, v)) for l, v in states], dtype=bool)
    avoid = np.array([not left(l, v) for l, v in states], dtype=bool) & ~target
    return DigitalModel(p, prop, Mdp(rows), states, target, avoid, np.array(is_tick, dtype=bool), caps)


def divergent_escape(dm: DigitalModel) -> set[int]:
    """States that can avoid the target forever, letting time pass, almost surely."""
    m = dm.mdp
    outside = ~dm.target
    keep: set[int] = set()
    for st, acts in end_components(m, outside):
        if any(dm.tick[a] for a in acts):
            keep |= st
    if not keep:
        return set()
    return prob1_max(m, keep, avoid=dm.target)


def check_digital(p: Pta, prop: Property, cfg: EngineConfig = EngineConfig()) -> ProbResult:
    t0 = time.perf_counter()
    dm = digitize(p, prop)
    t1 = time.perf_counter()
    m = dm.mdp
    if prop.opt == "max":
        res = value_iteration(m, dm.target, "max", cfg.epsilon, cfg.vi_cap, avoid=dm.avoid)
        prob = float(res.values[0])
        sweeps = res.sweeps
    else:
        escape = divergent_escape(dm)
        goal = dm.avoid.copy()
        for s in escape:
            goal[s] = True
        res = value_iteration(m, goal, "max", cfg.epsilon, cfg.vi_cap, avoid=dm.target)
        prob = 1.0 - float(res.values[0])
        sweeps = res.sweeps
    stats = {
        "digital_states": m.n,
        "transitions": m.n_transitions,
        "sweeps": sweeps,
        "time_build": t1 - t0,
        "time": time.perf_counter() - t0,
    }
    r = ProbResult(prob, stats=stats, detail=dm)
    if prop.threshold is not None:
        evaluate_threshold(r, prop.threshold)
    return r
