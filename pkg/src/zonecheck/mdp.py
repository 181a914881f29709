"""Finite MDPs: reachability value iteration and qualitative graph analyses."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import kernels as K


class ConvergenceError(RuntimeError):
    def __init__(self, sweeps: int, residual: float):
        super().__init__(f"value iteration did not converge after {sweeps} sweeps (residual {residual:.3g})")
        self.sweeps = sweeps
        self.residual = residual


class Mdp:
    """States ``0 .. n-1``; each state has a list of actions, each action a
    distribution ``[(successor, Fraction)]``.

    States without actions get a self-loop.  ``action_labels[s][k]`` names
    action ``k`` of state ``s`` (used only for export).
    """

    def __init__(self, actions: Sequence[Sequence[Sequence[tuple[int, Fraction]]]], labels=None, action_labels=None):
        n = len(actions)
        self.n = n
        acts = []
        seen: dict[tuple, tuple] = {}  # distributions already checked, shared between states
        for s, lst in enumerate(actions):
            if not lst:
                lst = [[(s, Fraction(1))]]
            row = []
            for dist in lst:
                if isinstance(dist, tuple) and dist in seen:
                    row.append(seen[dist])
                    continue
                merged: dict[int, Fraction] = {}
                for t, p in dist:
                    if not 0 <= t < n:
                        raise ValueError(f"successor {t} of state {s} out of range")
                    p = Fraction(p)
                    if p < 0:
                        raise ValueError(f"negative probability {p} at state {s}")
                    if p:
                        merged[t] = merged.get(t, Fraction(0)) + p
                total = sum(merged.values(), Fraction(0))
                if total != 1:
                    raise ValueError(f"distribution at state {s} sums to {total}")
                canon = tuple(sorted(merged.items()))
                if isinstance(dist, tuple):
                    seen[dist] = canon
                row.append(canon)
            acts.append(tuple(row))
        self.actions = tuple(acts)
        self.labels = list(labels) if labels is not None else [str(s) for s in range(n)]
        self.action_labels = action_labels

        state_start = [0]
        act_start = [0]
        succ, prob, owner = [], [], []
        floats: dict[tuple, list] = {}
        for s, row in enumerate(self.actions):
            for dist in row:
                fl = floats.get(dist)
                if fl is None:
                    fl = floats[dist] = [float(p) for _, p in dist]
                succ.extend(t for t, _ in dist)
                prob.extend(fl)
                act_start.append(len(succ))
                owner.append(s)
            state_start.append(len(act_start) - 1)
        self.state_start = np.asarray(state_start, dtype=np.int64)
        self.act_start = np.asarray(act_start, dtype=np.int64)
        self.succ = np.asarray(succ, dtype=np.int64)
        self.prob = np.asarray(prob, dtype=np.float64)
        self.owner = np.asarray(owner, dtype=np.int64)
        self._pred = None

    @property
    def n_actions(self) -> int:
        return len(self.owner)

    @property
    def n_transitions(self) -> int:
        return len(self.succ)

    def action_succ(self, a: int) -> np.ndarray:
        return self.succ[self.act_start[a] : self.act_start[a + 1]]

    def state_actions(self, s: int) -> range:
        return range(int(self.state_start[s]), int(self.state_start[s + 1]))

    def predecessors(self):
        """For each state, the actions that can move into it."""
        if self._pred is None:
            pred = [[] for _ in range(self.n)]
            for a in range(self.n_actions):
                for t in set(self.action_succ(a).tolist()):
                    pred[t].append(a)
            self._pred = pred
        return self._pred

    def export(self) -> str:
        """One line per transition: ``state action probability successor``."""
        lines = []
        for s, row in enumerate(self.actions):
            for k, dist in enumerate(row):
                name = self.action_labels[s][k] if self.action_labels else str(k)
                for t, p in dist:
                    lines.append(f"{self.labels[s]} {name} {p} {self.labels[t]}")
        return "\n".join(lines) + ("\n" if lines else "")


def _mask(m: Mdp, states) -> np.ndarray:
    out = np.zeros(m.n, dtype=bool)
    if states is None:
        return out
    if isinstance(states, np.ndarray) and states.dtype == bool:
        return states.copy()
    for s in states:
        out[s] = True
    return out


# qualitative analyses --------------------------------------------------------

def _reach_exists(m: Mdp, target: np.ndarray, allowed_act: np.ndarray, within: np.ndarray) -> np.ndarray:
    """States in ``within`` that reach ``target`` via allowed actions (some successor)."""
    y = target.copy()
    stack = list(np.flatnonzero(y))
    pred = m.predecessors()
    while stack:
        t = stack.pop()
        for a in pred[t]:
            if not allowed_act[a]:
                continue
            s = m.owner[a]
            if not y[s] and within[s]:
                y[s] = True
                stack.append(s)
    return y


def _reach_forall(m: Mdp, target: np.ndarray, allowed_act: np.ndarray, within: np.ndarray) -> np.ndarray:
    """States in ``within`` all of whose actions are allowed and hit the set."""
    y = target.copy()
    need = np.zeros(m.n, dtype=np.int64)
    blocked = np.zeros(m.n, dtype=bool)
    for s in range(m.n):
        acts = m.state_actions(s)
        need[s] = len(acts)
        if not all(allowed_act[a] for a in acts):
            blocked[s] = True
    hit = np.zeros(m.n_actions, dtype=bool)
    stack = list(np.flatnonzero(y))
    pred = m.predecessors()
    while stack:
        t = stack.pop()
        for a in pred[t]:
            if hit[a]:
                continue
            hit[a] = True
            s = m.owner[a]
            need[s] -= 1
            if need[s] == 0 and not y[s] and within[s] and not blocked[s]:
                y[s] = True
                stack.append(s)
    return y


def _actions_inside(m: Mdp, x: np.ndarray) -> np.ndarray:
    ok = np.ones(m.n_actions, dtype=bool)
    bad_t = ~x[m.succ]
    if bad_t.any():
        owners = np.repeat(np.arange(m.n_actions), np.diff(m.act_start))
        ok[np.unique(owners[bad_t])] = False
    return ok


def prob0_max(m: Mdp, target, avoid=None) -> set[int]:
    """States where every strategy reaches ``target`` with probability 0."""
    t = _mask(m, target)
    within = ~_mask(m, avoid) | t
    y = _reach_exists(m, t, np.ones(m.n_actions, dtype=bool), within)
    return set(np.flatnonzero(~y).tolist())


def prob0_min(m: Mdp, target, avoid=None) -> set[int]:
    """States where some strategy reaches ``target`` with probability 0."""
    t = _mask(m, target)
    within = ~_mask(m, avoid) | t
    y = _reach_forall(m, t, np.ones(m.n_actions, dtype=bool), within)
    return set(np.flatnonzero(~y).tolist())


def prob1_max(m: Mdp, target, avoid=None, return_iterations: bool = False):
    """States where some strategy reaches ``target`` almost surely.

    Greatest fixpoint over candidate sets ``X``; each round keeps the states
    that can reach ``target`` using only actions that stay inside ``X``.
    """
    t = _mask(m, target)
    within = ~_mask(m, avoid) | t
    x = np.ones(m.n, dtype=bool)
    rounds = 0
    while True:
        rounds += 1
        y = _reach_exists(m, t, _actions_inside(m, x), within & x)
        if np.array_equal(y, x):
            break
        x = y
    out = set(np.flatnonzero(x).tolist())
    return (out, rounds) if return_iterations else out


def prob1_min(m: Mdp, target, avoid=None) -> set[int]:
    """States where every strategy reaches ``target`` almost surely."""
    t = _mask(m, target)
    within = ~_mask(m, avoid) | t
    x = np.ones(m.n, dtype=bool)
    while True:
        y = _reach_forall(m, t, _actions_inside(m, x), within & x)
        if np.array_equal(y, x):
            break
        x = y
    return set(np.flatnonzero(x).tolist())


def end_components(m: Mdp, states=None) -> list[tuple[set[int], set[int]]]:
    """Maximal end components inside ``states`` (all states by default).

    Returns ``(states, actions)`` pairs; actions are global action indices.
    """
    alive = np.ones(m.n, dtype=bool) if states is None else _mask(m, states)
    act_ok = np.ones(m.n_actions, dtype=bool)
    owners_t = np.repeat(np.arange(m.n_actions), np.diff(m.act_start))
    while True:
        act_ok &= alive[m.owner]
        act_ok &= _actions_inside(m, alive)
        # states without any remaining action drop out
        has = np.zeros(m.n, dtype=bool)
        has[m.owner[act_ok]] = True
        alive &= has
        act_ok &= alive[m.owner]
        sel = act_ok[owners_t]
        src = m.owner[owners_t[sel]]
        dst = m.succ[sel]
        g = csr_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(m.n, m.n))
        _, comp = connected_components(g, directed=True, connection="strong")
        # an action survives only if all successors share the owner's component
        same = comp[m.owner[owners_t]] == comp[m.succ]
        leaving = np.zeros(m.n_actions, dtype=bool)
        leaving[np.unique(owners_t[~same])] = True
        new_ok = act_ok & ~leaving
        has = np.zeros(m.n, dtype=bool)
        has[m.owner[new_ok]] = True
        new_alive = alive & has
        if np.array_equal(new_ok, act_ok) and np.array_equal(new_alive, alive):
            break
        act_ok, alive = new_ok, new_alive
    groups: dict[int, tuple[set, set]] = {}
    for s in np.flatnonzero(alive):
        groups.setdefault(int(comp[s]), (set(), set()))[0].add(int(s))
    for a in np.flatnonzero(act_ok):
        groups[int(comp[m.owner[a]])][1].add(int(a))
    return [groups[k] for k in sorted(groups, key=lambda k: min(groups[k][0]))]


# quantitative ----------------------------------------------------------------

@dataclass
class ValueResult:
    values: np.ndarray
    sweeps: int
    residual: float
    prob0: set
    prob1: set


def value_iteration(
    m: Mdp,
    target,
    mode: str = "max",
    epsilon: float = 1e-6,
    cap: int = 1_000_000,
    avoid=None,
) -> ValueResult:
    """Optimal probabilities of reaching ``target`` (avoiding ``avoid``).

    Prob-0 and prob-1 states are fixed first; the rest iterate from below in
    state-index (Gauss-Seidel) order until the largest change is at most
    ``epsilon``.
    """
    if mode not in ("max", "min"):
        raise ValueError(f"mode must be 'max' or 'min', got {mode!r}")
    if mode == "max":
        zero = prob0_max(m, target, avoid)
        one = prob1_max(m, target, avoid)
    else:
        zero = prob0_min(m, target, avoid)
        one = prob1_min(m, target, avoid)
    fixed = np.zeros(m.n, dtype=np.uint8)
    values = np.zeros(m.n, dtype=np.float64)
    for s in zero:
        fixed[s] = 1
    for s in one:
        fixed[s] = 1
        values[s] = 1.0
    for s in np.flatnonzero(_mask(m, avoid) & ~_mask(m, target)):
        fixed[s] = 1
        values[s] = 0.0
    sweeps, residual = 0, 0.0
    if not fixed.all():
        values, sweeps, residual = K.value_iterate(
            m.state_start, m.act_start, m.succ, m.prob, fixed, values, mode == "max", epsilon, cap
        )
        if residual > epsilon:
            raise ConvergenceError(sweeps, residual)
    return ValueResult(values, sweeps, residual, zero, one)


def exact_values(m: Mdp, target, mode: str = "max") -> list[Fraction]:
    """Exact optimal values by backward substitution; acyclic MDPs only."""
    t = _mask(m, target)
    order: list[int] = []
    state = [0] * m.n

    def visit(s):
        if state[s] == 2:
            return
        if state[s] == 1:
            raise ValueError("MDP has a cycle outside the target")
        state[s] = 1
        if not t[s]:
            for dist in m.actions[s]:
                for u, _ in dist:
                    if u != s:
                        visit(u)
        state[s] = 2
        order.append(s)

    for s in range(m.n):
        visit(s)
    val: list[Fraction | None] = [None] * m.n
    pick = max if mode == "max" else min
    for s in order:
        if t[s]:
            val[s] = Fraction(1)
            continue
        opts = []
        for dist in m.actions[s]:
            if any(u == s for u, _ in dist):
                # self-loop: value solves v = p v + rest
                p_self = sum((p for u, p in dist if u == s), Fraction(0))
                rest = sum((p * val[u] for u, p in dist if u != s), Fraction(0))
                opts.append(rest / (1 - p_self) if p_self < 1 else Fraction(0))
            else:
                opts.append(sum((p * val[u] for u, p in dist), Fraction(0)))
        val[s] = pick(opts)
    return val


def reachable(m: Mdp, start: Iterable[int]) -> set[int]:
    seen = set(start)
    stack = list(seen)
    while stack:
        s = stack.pop()
        for dist in m.actions[s]:
            for t, _ in dist:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
    return seen
