import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (
    cons,
    fed_member,
    impl_member,
    lattice,
    random_fed,
    reset_oracle,
    to_dbm,
    to_fed,
    tpre_oracle,
)
from zonecheck.dbm import Dbm
from zonecheck.federation import (
    Federation,
    backwards_reset_fed,
    complement,
    down_fed,
    equals_sem,
    free_fed,
    includes_sem,
    intersect,
    reduce,
    subtract,
    tpre_within,
    union,
)


def F2(*texts):
    return to_fed(2, [cons(t) for t in texts])


# the box figures used throughout
ZETA1 = "3<=x<=8, 4<=y<=7"
ZETA2 = "x<=4, 1<=y<=6"
LEFT = ("1<=x<=5, 2<=y<=5", "5<=x<=8, 3<=y<=8", "3<=x<=5, 5<=y<=8")
MIDDLE = ("1<=x<=5, 2<=y<=5", "5<=x<=8, 3<=y<=5", "3<=x<=8, 5<=y<=8")
CROSS = ("0<=x<=4, 0<=y<=1", "1<=x<=5, 1<=y<=4", "3<=x<=7, 4<=y<=6")
ZETA7 = "3<=x<=8, 5<=y<=8"


def test_union_intersect_identities(backend):
    a = F2(*LEFT)
    e = Federation.empty(3)
    assert equals_sem(union(a, e), a)
    assert intersect(a, e).is_empty
    assert equals_sem(intersect(a, Federation.universe(3)), a)
    assert equals_sem(intersect(F2(ZETA1), F2(ZETA2)), F2("3<=x<=4, 4<=y<=6"))
    with pytest.raises(ValueError):
        union(a, Federation.empty(2))


def test_subtract(backend):
    got = subtract(to_fed(1, [cons("x<=2")]), to_fed(1, [cons("1<=x<=2")]))
    assert equals_sem(got, to_fed(1, [cons("x<1")]))
    a = F2(*LEFT)
    assert subtract(a, a).is_empty
    assert subtract(F2(*LEFT), F2(*MIDDLE)).is_empty
    assert subtract(F2(*MIDDLE), F2(*LEFT)).is_empty


def test_non_canonical_lists_are_equal(backend):
    left, middle = F2(*LEFT), F2(*MIDDLE)
    assert left.render(["x", "y"]) != middle.render(["x", "y"])
    assert equals_sem(left, middle)
    assert equals_sem(left, union(left, left))
    assert not includes_sem(to_fed(1, [cons("x<=2")]), to_fed(1, [cons("x<=3")]))


def test_complement(backend):
    assert equals_sem(complement(to_fed(1, [cons("x<1")])), to_fed(1, [cons("x>=1")]))
    assert complement(Federation.universe(3)).is_empty
    assert equals_sem(complement(Federation.empty(3)), Federation.universe(3))


def test_reduce(backend):
    r = reduce(to_fed(1, [cons("x<=2"), cons("x<=1")]))
    assert len(r) == 1 and r.dbms[0] == to_dbm(1, cons("x<=2"))
    left = F2(*LEFT)
    assert equals_sem(reduce(left), left)
    assert reduce(reduce(left)).dbms == reduce(left).dbms


def test_memberwise_lifts(backend):
    d = to_dbm(2, cons("1<=x<=2, y<=10"))
    assert equals_sem(down_fed(Federation.of(d)), Federation.of(d.down()))
    got = backwards_reset_fed(F2("x<=2, y<=10, y-x<=9"), [1])
    assert len(got) == 1 and equals_sem(got, F2("y<=9"))
    assert free_fed(Federation.empty(3), [1]).is_empty


def test_tpre_figure_middle_panel(backend):
    got = tpre_within(F2(ZETA2), F2(ZETA1))
    want = union(F2(ZETA1), intersect(F2(ZETA2), F2("0<=y-x<=3")))
    assert equals_sem(got, want)
    grid, ok = tpre_oracle([cons(ZETA2)], [cons(ZETA1)], 2, hi=10)
    assert (impl_member(got, grid, 3) == ok).all()


def test_tpre_empty_stay_keeps_target(backend):
    t = F2(ZETA1)
    assert equals_sem(tpre_within(Federation.empty(3), t), t)


def test_tpre_through_non_convex_stay(backend):
    got = tpre_within(F2(*CROSS), F2(ZETA7))
    # the wedge below the target, worked out by hand and confirmed by the oracle
    zeta9 = F2(
        "0<=x<=4, 0<=y<=1, -1<=y-x<=0",
        "1<=x<=5, 1<=y<=4, -1<=y-x<=1",
        "3<=x<=7, 4<=y<=5, -2<=y-x<=2",
    )
    assert equals_sem(got, union(F2(ZETA7), zeta9))
    grid, ok = tpre_oracle([cons(t) for t in CROSS], [cons(ZETA7)], 2, hi=10)
    assert (impl_member(got, grid, 3) == ok).all()


def test_stay_interval_is_half_open():
    # entering the target exactly when the stay zone ends is allowed
    got = tpre_within(to_fed(1, [cons("x<1")]), to_fed(1, [cons("x>=1")]))
    assert equals_sem(got, Federation.universe(2))


def test_oracle_has_teeth():
    # the ray oracle must tell tpre apart from the cruder down(target) & (stay | target)
    stay, target = [cons(ZETA2)], [cons(ZETA1)]
    grid, ok = tpre_oracle(stay, target, 2, hi=10)
    crude = intersect(to_fed(2, target).down(), union(to_fed(2, stay), to_fed(2, target)))
    assert (impl_member(crude, grid, 3) != ok).any()


# random federations -----------------------------------------------------------------

seeds = st.integers(0, 2**32 - 1)


def _pair(seed):
    rng = np.random.default_rng(seed)
    clocks = int(rng.integers(1, 4))
    return clocks, random_fed(rng, clocks), random_fed(rng, clocks)


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_boolean_homomorphisms(seed):
    clocks, a, b = _pair(seed)
    dim = clocks + 1
    grid = lattice(clocks, 7 * dim, 1)
    fa, fb = to_fed(clocks, a), to_fed(clocks, b)
    ma, mb = fed_member(a, grid, dim), fed_member(b, grid, dim)
    assert (impl_member(union(fa, fb), grid, dim) == (ma | mb)).all()
    assert (impl_member(intersect(fa, fb), grid, dim) == (ma & mb)).all()
    assert (impl_member(subtract(fa, fb), grid, dim) == (ma & ~mb)).all()
    assert (impl_member(complement(fa), grid, dim) == ~ma).all()
    assert equals_sem(complement(complement(fa)), fa)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_equals_sem_is_an_equivalence(seed):
    clocks, a, b = _pair(seed)
    rng = np.random.default_rng(seed + 1)
    fa = to_fed(clocks, a)
    shuffled = Federation(clocks + 1, [fa.dbms[i] for i in rng.permutation(len(fa.dbms))] + list(fa.dbms[:1]))
    assert equals_sem(fa, fa)
    assert equals_sem(fa, shuffled) and equals_sem(shuffled, fa)
    assert equals_sem(reduce(shuffled), fa)
    fb = to_fed(clocks, b)
    via = union(fa, fb)
    if equals_sem(fa, via) and equals_sem(via, fb):
        assert equals_sem(fa, fb)
    assert equals_sem(fa, fb) == equals_sem(fb, fa)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_tpre_matches_rays(seed):
    clocks, stay, target = _pair(seed)
    grid, ok = tpre_oracle(stay, target, clocks, hi=7 if clocks < 3 else 5)
    got = tpre_within(to_fed(clocks, stay), to_fed(clocks, target))
    assert (impl_member(got, grid, clocks + 1) == ok).all()


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_tpre_bounds_and_monotonicity(seed):
    clocks, stay, target = _pair(seed)
    rng = np.random.default_rng(seed + 2)
    fs, ft = to_fed(clocks, stay), to_fed(clocks, target)
    got = tpre_within(fs, ft)
    assert includes_sem(got, ft)
    assert includes_sem(union(ft, fs), got)
    more_stay = union(fs, to_fed(clocks, random_fed(rng, clocks, max_members=1)))
    more_target = union(ft, to_fed(clocks, random_fed(rng, clocks, max_members=1)))
    assert includes_sem(tpre_within(more_stay, ft), got)
    assert includes_sem(tpre_within(fs, more_target), got)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_reset_fed_matches_pointwise(seed):
    clocks, a, _ = _pair(seed)
    xs = [1]
    got = backwards_reset_fed(to_fed(clocks, a), xs)
    want = np.zeros(0, dtype=bool)
    for z in a:
        grid, ok = reset_oracle(z, xs, clocks)
        want = ok if want.size == 0 else want | ok
    if not a:
        grid = lattice(clocks, 7 * (clocks + 1), 1)
        want = np.zeros(len(grid), dtype=bool)
    assert (impl_member(got, grid, clocks + 1) == want).all()


def test_render_is_a_disjunction():
    f = F2("x<=1", "y<=2")
    assert f.render(["x", "y"]) == "(x <= 1) | (y <= 2)"
    assert Federation.empty(3).render(["x", "y"]) == "false"
    assert Dbm.universe(3) in Federation.universe(3).dbms
