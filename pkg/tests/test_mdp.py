from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_values, exact_dag_values, random_mdp
from zonecheck.mdp import (
    ConvergenceError,
    Mdp,
    end_components,
    exact_values,
    prob0_max,
    prob0_min,
    prob1_max,
    prob1_min,
    value_iteration,
)


def retry_mdp():
    """Target 0; 1 and 3 send (0.9 to the target), 2 and 4 retry; 5 is the sink."""
    return Mdp(
        [
            [],
            [[(0, F(9, 10)), (5, F(1, 10))]],
            [[(1, F(1))]],
            [[(0, F(9, 10)), (2, F(1, 10))]],
            [[(3, F(1))]],
            [],
        ]
    )


def test_retry_chain_values(backend):
    r = value_iteration(retry_mdp(), {0}, "max", epsilon=1e-12)
    assert np.allclose(r.values, [1, 0.9, 0.9, 0.99, 0.99, 0], atol=1e-12)
    assert exact_values(retry_mdp(), {0}) == [1, F(9, 10), F(9, 10), F(99, 100), F(99, 100), 0]


def test_trivial_values():
    assert value_iteration(Mdp([[]]), {0}).values[0] == 1.0
    coin = Mdp([[[(1, F(1, 2)), (2, F(1, 2))]], [], []])
    assert value_iteration(coin, {1}).values[0] == pytest.approx(0.5)
    assert value_iteration(coin, set()).values.tolist() == [0, 0, 0]


def test_qualitative_sets():
    m = retry_mdp()
    assert prob1_max(m, {0}) == {0}
    assert 5 in prob0_max(m, {0}) and 0 not in prob0_max(m, {0})
    gadget = Mdp([[[(1, F(1, 2)), (0, F(1, 2))]], []])
    assert prob1_max(gadget, {1}) == {0, 1}
    chain = Mdp([[[(1, F(1))]], [[(2, F(1))]], []])
    assert prob0_max(chain, {2}) == set()


def test_construction_errors():
    with pytest.raises(ValueError, match="sums to"):
        Mdp([[[(0, F(1, 2))]]])
    with pytest.raises(ValueError):
        Mdp([[[(3, F(1))]]])
    with pytest.raises(ValueError):
        value_iteration(retry_mdp(), {0}, "avg")


def test_cap_is_diagnosed():
    slow = Mdp([[[(0, F(999, 1000)), (1, F(1, 2000)), (2, F(1, 2000))]], [], []])
    with pytest.raises(ConvergenceError) as info:
        value_iteration(slow, {1}, epsilon=1e-12, cap=3)
    assert info.value.sweeps == 3 and info.value.residual > 0


def test_avoid_states_fail():
    m = Mdp([[[(1, F(1, 2)), (2, F(1, 2))]], [[(2, F(1))]], []])
    r = value_iteration(m, {2}, avoid={1})
    assert r.values[0] == pytest.approx(0.5)


def test_end_components():
    m = Mdp([[[(1, F(1))], [(2, F(1))]], [[(0, F(1))]], []])
    ecs = end_components(m)
    assert [s for s, _ in ecs] == [{0, 1}, {2}]


def test_export_lists_transitions():
    text = retry_mdp().export()
    assert "9/10" in text and len(text.splitlines()) >= 7


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_qualitative_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    acts = random_mdp(rng, n)
    target = {int(s) for s in range(n) if rng.random() < 0.3}
    m = Mdp(acts)
    hi = brute_force_values(acts, target, "max")
    lo = brute_force_values(acts, target, "min")
    assert prob1_max(m, target) == {s for s in range(n) if hi[s] > 1 - 1e-9}
    assert prob0_max(m, target) == {s for s in range(n) if hi[s] < 1e-9}
    assert prob1_min(m, target) == {s for s in range(n) if lo[s] > 1 - 1e-9}
    assert prob0_min(m, target) == {s for s in range(n) if lo[s] < 1e-9}


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_values_match_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    acts = random_mdp(rng, n)
    target = {int(s) for s in range(n) if rng.random() < 0.3}
    m = Mdp(acts)
    vmax = value_iteration(m, target, "max", epsilon=1e-12).values
    vmin = value_iteration(m, target, "min", epsilon=1e-12).values
    assert (vmax >= vmin - 1e-12).all()
    assert np.allclose(vmax, brute_force_values(acts, target, "max"), atol=1e-8)
    assert np.allclose(vmin, brute_force_values(acts, target, "min"), atol=1e-8)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_acyclic_values_are_exact(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 9))
    acts = random_mdp(rng, n, max_actions=3, acyclic=True)
    target = {int(s) for s in range(n) if rng.random() < 0.3}
    m = Mdp(acts)
    for mode in ("max", "min"):
        want = exact_dag_values(acts, target, mode)
        got = value_iteration(m, target, mode, epsilon=1e-14).values
        assert np.allclose(got, [float(w) for w in want], atol=1e-12, rtol=0)
        assert exact_values(m, target, mode) == want
