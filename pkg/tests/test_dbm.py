from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (
    Z,
    cons,
    down_oracle,
    free_oracle,
    impl_member,
    lattice,
    member,
    random_zone,
    reset_oracle,
    to_dbm,
)
from zonecheck import dbm as dbm_mod
from zonecheck.dbm import Bound, Dbm, raw_le, raw_lt


def same(a: Dbm, b: Dbm) -> bool:
    return a.includes(b) and b.includes(a)


# hand examples -------------------------------------------------------------------

def test_universe(backend):
    u = Dbm.universe(3)
    assert u.contains_valuation((0, 0))
    assert u.includes(Z(2, "1<=x<=2, y<=4"))
    assert Dbm.universe(2).render(["x"]) == "true"
    with pytest.raises(ValueError):
        Dbm.universe(0)


def test_canonical_composes_bounds(backend):
    d = Dbm.from_constraints(3, [(1, 0, raw_le(2)), (2, 1, raw_le(9))])
    assert d.raw(2, 0) == raw_le(11)
    assert d.canonical() == d
    assert Z(1, "x<=1, x>=2").is_empty


def test_conjoin(backend):
    d = Dbm.universe(3).conjoin(2, 0, Bound.le(10)).conjoin(0, 1, Bound.le(-1)).conjoin(1, 0, Bound.le(2))
    assert same(d, Z(2, "1<=x<=2, y<=10"))
    assert Z(1, "x>=1").conjoin(1, 0, Bound.lt(1)).is_empty
    assert Z(2, "x<=2, y>=0").conjoin(2, 1, raw_le(-7)).is_empty
    with pytest.raises(ValueError):
        Dbm.universe(2).conjoin(1, 1, raw_le(0))


def test_intersect(backend):
    z1 = Z(2, "3<=x<=8, 4<=y<=7")
    z2 = Z(2, "x<=4, 1<=y<=6")
    assert same(z1.intersect(z2), Z(2, "3<=x<=4, 4<=y<=6"))
    assert z1.intersect(Dbm.universe(3)) == z1
    assert Z(1, "x<=1").intersect(Z(1, "x>=2")).is_empty
    with pytest.raises(ValueError):
        z1.intersect(Dbm.universe(2))


def test_down(backend):
    got = Z(2, "1<=x<=2, y<=10").down()
    assert same(got, Z(2, "x<=2, y<=10, -2<=y-x<=9"))
    assert Dbm.universe(3).down() == Dbm.universe(3)
    assert Dbm.empty(3).down().is_empty


def test_free(backend):
    assert same(Z(2, "x=0, y<=9").free(1), Z(2, "y<=9"))
    d = Z(2, "y<=3")
    assert same(d.free(1), d)
    assert same(Z(2, "x>=3, y-x<=1").free(1), Dbm.universe(3))
    with pytest.raises(ValueError):
        d.free(0)


def test_backwards_reset(backend):
    d = Z(2, "x<=2, y<=10, y-x<=9")
    assert same(d.backwards_reset([1]), Z(2, "y<=9"))
    assert d.backwards_reset([]) == d
    assert Z(1, "x>=1").backwards_reset([1]).is_empty
    with pytest.raises(ValueError):
        d.backwards_reset([0])


def test_includes(backend):
    assert Z(2, "1<=x<=2, y<=10").includes(Z(2, "1<=x<=2, y-x<=1"))
    d = Z(2, "x<=3")
    assert d.includes(d)
    assert not Z(1, "x<=1").includes(Z(1, "2<=x<=3"))


def test_contains_valuation(backend):
    d = Z(2, "x<=2, y<=24")
    assert d.contains_valuation((F(3, 2), F(239, 10)))
    assert not d.contains_valuation((F(3, 2), F(241, 10)))
    assert not Z(1, "x<2").contains_valuation((2,))
    assert Z(1, "x<=2").contains_valuation((2,))
    with pytest.raises(ValueError):
        d.contains_valuation((-1, 0))


def test_bound_order_and_addition():
    assert Bound.lt(3) < Bound.le(3) < Bound.lt(4) < Bound.infinity()
    assert Bound.le(2) + Bound.lt(3) == Bound.lt(5)
    assert (Bound.le(2) + Bound.infinity()).is_infinite


def test_growth_check_fires(monkeypatch):
    # a matrix whose closure would leave the allowed range trips the runtime check
    monkeypatch.setattr(dbm_mod, "CHECK_BOUNDS", True)
    with pytest.raises(AssertionError):
        dbm_mod._check_growth(Z(1, "x<=50"), Z(1, "x<=1"))


# grid properties -------------------------------------------------------------------

zone_seeds = st.integers(0, 2**32 - 1)


def _zone(seed):
    rng = np.random.default_rng(seed)
    clocks = int(rng.integers(1, 4))
    return rng, clocks, random_zone(rng, clocks)


@settings(max_examples=150, deadline=None)
@given(zone_seeds)
def test_membership_matches_constraints(seed):
    rng, clocks, z = _zone(seed)
    dim = clocks + 1
    grid = lattice(clocks, 7 * dim, 1)
    d = to_dbm(clocks, z)
    want = member(z, grid, dim)
    assert (impl_member(d, grid, dim) == want).all()
    # and through the valuation API on a few points
    for row in grid[rng.integers(0, len(grid), size=20)]:
        v = tuple(F(int(c), dim) for c in row)
        assert d.contains_valuation(v) == bool(member(z, row[None, :], dim)[0])


@settings(max_examples=150, deadline=None)
@given(zone_seeds)
def test_canonical_idempotent_and_exact(seed):
    _, clocks, z = _zone(seed)
    d = to_dbm(clocks, z)
    assert d.canonical() == d
    raw = Dbm(clocks + 1, d.m, canonical=False)
    assert raw.canonical() == d


@settings(max_examples=150, deadline=None)
@given(zone_seeds, zone_seeds)
def test_intersect_is_and(s1, s2):
    _, clocks, a = _zone(s1)
    b = random_zone(np.random.default_rng(s2), clocks)
    dim = clocks + 1
    grid = lattice(clocks, 7 * dim, 1)
    got = impl_member(to_dbm(clocks, a).intersect(to_dbm(clocks, b)), grid, dim)
    assert (got == (member(a, grid, dim) & member(b, grid, dim))).all()


@settings(max_examples=100, deadline=None)
@given(zone_seeds)
def test_down_matches_rays(seed):
    _, clocks, z = _zone(seed)
    grid, want = down_oracle(z, clocks)
    assert (impl_member(to_dbm(clocks, z).down(), grid, clocks + 1) == want).all()


@settings(max_examples=100, deadline=None)
@given(zone_seeds)
def test_free_and_reset_match_witnesses(seed):
    rng, clocks, z = _zone(seed)
    c = int(rng.integers(1, clocks + 1))
    grid, want = free_oracle(z, c, clocks)
    assert (impl_member(to_dbm(clocks, z).free(c), grid, clocks + 1) == want).all()
    xs = [i for i in range(1, clocks + 1) if rng.random() < 0.5]
    grid, want = reset_oracle(z, xs, clocks)
    assert (impl_member(to_dbm(clocks, z).backwards_reset(xs), grid, clocks + 1) == want).all()


@settings(max_examples=150, deadline=None)
@given(zone_seeds, zone_seeds)
def test_includes_matches_grid(s1, s2):
    _, clocks, a = _zone(s1)
    b = random_zone(np.random.default_rng(s2), clocks)
    dim = clocks + 1
    # vertices of zones with constants <= 5 lie below 5 * clocks
    grid = lattice(clocks, (5 * clocks + 2) * dim, 1)
    da, db = to_dbm(clocks, a), to_dbm(clocks, b)
    grid_says = not (member(b, grid, dim) & ~member(a, grid, dim)).any()
    assert da.includes(db) == grid_says


def test_backends_agree_on_random_closures():
    from zonecheck import _dbmpy, kernels

    rng = np.random.default_rng(7)
    for _ in range(300):
        clocks = int(rng.integers(1, 4))
        z = random_zone(rng, clocks, n_max=6)
        dim = clocks + 1
        d = to_dbm(clocks, z)
        m = list(Dbm.universe(dim).m)
        for i, j, s, c in z:
            m[i * dim + j] = min(m[i * dim + j], raw_lt(c) if s else raw_le(c))
        assert _dbmpy.close(tuple(m), dim) == kernels.close(tuple(m), dim)
        if d.m is not None:
            assert _dbmpy.down(d.m, dim) == kernels.down(d.m, dim)
            assert _dbmpy.free(d.m, dim, 1) == kernels.free(d.m, dim, 1)


def test_render_and_constraints_round_trip():
    d = Z(2, "1<=x<=2, y-x<=1")
    assert d.render(["x", "y"]) == "1 <= x & x <= 2 & y <= 3 & y - x <= 1"
    assert Dbm.from_constraints(3, d.constraints()) == d
    assert cons("x<=2") == [(1, 0, False, 2)]
