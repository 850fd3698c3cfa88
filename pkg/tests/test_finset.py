import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdiff.finset import (
    EMPTY,
    STAR,
    Atom,
    Cls,
    FinFun,
    FinSet,
    GroupAction,
    Tag,
    Tuple,
    all_functions,
    all_subgroups,
    card,
    compose,
    cyclic,
    enumerate_monos,
    extend,
    fresh_points,
    identity,
    image_factorize,
    inclusion,
    inverse_image,
    min_over_group,
    orbits,
    perm_compose,
    perm_from_cycles,
    perm_inverse,
    point,
    points,
    stabilizer,
    stirling2,
    subsets,
    surjection_tuples,
    symmetric,
    trivial,
    tuple_action,
)


def test_finset_sorts_and_dedupes():
    X = FinSet([Atom(2), Atom(0), Atom(2)])
    assert X.elems == (Atom(0), Atom(2))
    assert len(X) == 2 and Atom(2) in X


def test_element_order_is_total_across_variants():
    elems = [Cls(Atom(0)), Tag("a", Atom(1)), Tuple([Atom(0)]), STAR, Atom(5)]
    assert sorted(elems)[0] == Atom(5)
    assert sorted(elems)[-1] == Cls(Atom(0))


def test_extend_twice_equals_extend_two():
    X = card(3)
    assert extend(extend(X)) == extend(X, 2)
    assert len(extend(X, 4)) == 7


def test_fresh_points_skip_existing():
    X = FinSet([point(0), Atom(0)])
    assert fresh_points(X, 2) == [point(1), point(2)]
    assert len(points(3)) == 3 and points(0) == EMPTY


def test_points_are_ordered_by_index():
    assert list(points(4).elems) == [point(i) for i in range(4)]


def test_finfun_rejects_values_outside_codomain():
    with pytest.raises(ValueError):
        FinFun(card(1), card(1), {Atom(0): Atom(3)})


def test_inverse_image_requires_a_subset():
    f = identity(card(2))
    with pytest.raises(ValueError):
        inverse_image(f, FinSet([Atom(7)]))


@pytest.mark.parametrize("m,n", [(0, 0), (1, 3), (3, 2), (4, 3), (2, 0)])
def test_function_count(m, n):
    assert sum(1 for _ in all_functions(card(m), card(n))) == n**m


@pytest.mark.parametrize("m,n", [(3, 2), (4, 2), (4, 3), (5, 3), (3, 3), (0, 0)])
def test_surjection_count_matches_stirling(m, n):
    # brute force: filter all n^m tuples
    brute = sum(1 for t in itertools.product(range(n), repeat=m) if set(t) == set(range(n)))
    assert len(surjection_tuples(m, n)) == brute == stirling2(m, n) * math.factorial(n)


def test_stirling_frozen_values():
    assert [stirling2(4, k) for k in range(5)] == [0, 1, 7, 6, 1]


def test_subsets_and_monos():
    assert sum(1 for _ in subsets(card(4))) == 16
    assert len(enumerate_monos(2, card(4))) == 12


def test_image_factorization():
    f = FinFun(card(3), card(3), [Atom(1), Atom(1), Atom(0)])
    e, m = image_factorize(f)
    assert e.is_epi() and m.is_mono()
    assert compose(m, e) == f


def test_group_orders():
    assert len(symmetric(4).elements) == 24
    assert len(cyclic(5).elements) == 5
    assert len(trivial(3).elements) == 1


def test_subgroup_counts_of_small_symmetric_groups():
    # S_3 has 6 subgroups and S_4 has 30
    assert len(all_subgroups(3)) == 6
    assert len(all_subgroups(4)) == 30


def test_perm_from_cycles():
    assert perm_from_cycles(4, [(0, 1, 2)]) == (1, 2, 0, 3)


def test_orbit_stabilizer_on_pairs():
    G = symmetric(3)
    A = tuple_action(G, card(2))
    orbs = orbits(A)
    # orbits of S_3 on {0,1}^3 are classified by the number of ones
    assert len(orbs) == 4
    for rep, orb in orbs:
        assert len(orb) * len(stabilizer(A, rep)) == 6


perms4 = st.permutations(list(range(4))).map(tuple)


@given(perms4, perms4, perms4)
def test_perm_compose_associative(p, q, r):
    assert perm_compose(p, perm_compose(q, r)) == perm_compose(perm_compose(p, q), r)


@given(perms4)
def test_perm_inverse(p):
    assert perm_compose(p, perm_inverse(p)) == (0, 1, 2, 3)


@given(st.lists(st.integers(0, 3), min_size=3, max_size=3), perms4.map(lambda p: p[:3]))
def test_canonical_form_is_orbit_invariant(xs, _):
    G = cyclic(3)
    t = tuple(xs)
    for g in G:
        moved = tuple(t[g[i]] for i in range(3))
        assert min_over_group(G, moved) == min_over_group(G, t)


@given(st.integers(0, 3), st.integers(1, 3), st.data())
def test_composition_of_random_maps(a, b, data):
    X, Y, Z = card(a), card(b), card(b)
    f = FinFun(X, Y, [Atom(data.draw(st.integers(0, b - 1))) for _ in range(a)])
    g = FinFun(Y, Z, [Atom(data.draw(st.integers(0, b - 1))) for _ in range(b)])
    gf = compose(g, f)
    for x in X:
        assert gf(x) == g(f(x))
    assert compose(identity(Y), f) == f


def test_inclusion_is_mono():
    sub = FinSet([Atom(0), Atom(2)])
    assert inclusion(sub, card(3)).is_mono()


def test_group_action_check_catches_bad_action():
    G = symmetric(2)
    bad = GroupAction(G, card(2), lambda g, x: Atom(0))
    with pytest.raises(ValueError):
        bad.check()
