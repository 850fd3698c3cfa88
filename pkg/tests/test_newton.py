import json
import math
import random
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdiff.classes import SpeciesSpec, coset_action, divided_power, power, regular_action, trivial_action
from fdiff.finset import TUPLE, cyclic, symmetric, trivial
from fdiff.functor import check_natural, constant
from fdiff.newton import (
    SoftSpecies,
    SpeciesMap,
    adjunction_factorization_check,
    cardinality_formula,
    delta_star,
    factorization_instances,
    load_species,
    newton_roundtrip,
    newton_sum,
    newton_sum_transf,
    random_soft_species,
    representable_quotient,
    scompose,
    soften,
    softened_vs_analytic,
    surjections,
    target,
    truncated_constant,
    truncation_contrast,
    unit_iso_check,
)


def stirling_surj(m, n):
    """Number of surjections m ->> n by brute force."""
    return sum(1 for f in product(range(n), repeat=m) if set(f) == set(range(n)))


def test_surjections_count():
    assert len(surjections(3)) == sum(stirling_surj(m, n) for m in range(4) for n in range(m + 1))
    assert scompose((1, 0), (0, 1, 1)) == (1, 0, 0)
    assert target((0, 1, 1)) == 2


@pytest.mark.parametrize(
    "F,sizes",
    [(power(2), [0, 1, 2, 0]), (divided_power(2), [0, 1, 1, 0]), (constant(2), [2, 0, 0, 0]), (power(3), [0, 1, 6, 6])],
    ids=["X^2", "X^[2]", "2", "X^3"],
)
def test_delta_star_sizes(F, sizes):
    assert delta_star(F, 3).sizes() == sizes


def test_delta_star_of_a_power_counts_surjections():
    assert delta_star(power(4), 4).sizes() == [stirling_surj(4, n) for n in range(5)]


def test_newton_sum_of_square_counts_k_squared():
    G = delta_star(power(2), 2)
    T = newton_sum(G)
    assert [T.size(k) for k in range(5)] == [k * k for k in range(5)]
    assert [cardinality_formula(G, k) for k in range(5)] == [k * k for k in range(5)]


@pytest.mark.parametrize("F", [power(2), power(3), divided_power(2), divided_power(3)], ids=lambda F: F.name)
def test_newton_roundtrip(F):
    rep = newton_roundtrip(F, 3, 3)
    assert rep.passed


def test_truncation_undercounts():
    rows = truncation_contrast(power(4), 3, 4)
    assert rows[4] == [4, 256, sum(math.comb(4, n) * stirling_surj(4, n) for n in range(4))]
    assert rows[4][2] == 232
    assert all(r[1] == r[2] for r in rows[:4])


def test_representable_quotient_sizes():
    G = representable_quotient(3, cyclic(3), 3)
    assert G.sizes() == [0, 1, stirling_surj(3, 2) // 3, 2]


@given(st.integers(0, 2**32 - 1))
def test_unit_is_an_iso_on_random_species(seed):
    G = random_soft_species(random.Random(seed), 3, 4)
    assert unit_iso_check(G).passed
    T = newton_sum(G)
    assert [T.size(k) for k in range(4)] == [cardinality_formula(G, k) for k in range(4)]


def test_load_species_round_trips_through_json():
    G = delta_star(power(2), 2)
    H = load_species(json.dumps(G.to_json()))
    assert H.sizes() == G.sizes()
    assert H.to_json() == G.to_json()


def test_load_species_fills_in_composites():
    # degree 2 swap and the fold; the other surjections follow by composition
    H = load_species({"N": 2, "G": [0, 1, 2], "actions": {"2->2:1,0": [1, 0], "2->1:0,0": [0, 0]}})
    assert H.act((1, 0), H(2).elems[0]) == H(2).elems[1]


@pytest.mark.parametrize(
    "obj",
    [
        {"N": 2, "G": [0, 1], "actions": {}},
        {"N": 2, "G": [0, 1, 2], "actions": {"2->1:0,1": [0, 0]}},
        {"N": 2, "G": [0, 1, 2], "actions": {"2->2:1,0": [1, 0]}},
        {"N": 2, "G": [0, 1, 2], "actions": {"2->2:1,0": [0, 0], "2->1:0,0": [0, 0]}},
        {"N": 1, "G": [0, 1], "actions": {"1->1:0": [5]}},
    ],
    ids=["sizes", "not-onto", "missing", "not-invertible", "out-of-range"],
)
def test_load_species_rejects_bad_input(obj):
    with pytest.raises(ValueError):
        load_species(obj)


def test_soft_species_checks_functoriality():
    # the identity of 2 swapping the two points is not an action
    with pytest.raises(ValueError):
        SoftSpecies(2, {1: [(0, 0)], 2: [(0, 0), (0, 1)]}, lambda s, a: (0, 1 - a[1]) if len(s) == target(s) == 2 else (0, 0))


def test_soften_sizes():
    # free coefficient actions: |Surj(m, n)| |C| / m!
    spec = SpeciesSpec({2: regular_action(2), 3: regular_action(3)})
    G = soften(spec, 3)
    assert G.sizes() == [0, 2, stirling_surj(2, 2) + stirling_surj(3, 2), stirling_surj(3, 3)]


def test_soften_needs_enough_degrees():
    with pytest.raises(ValueError):
        soften(SpeciesSpec({3: regular_action(3)}), 2)


@pytest.mark.parametrize(
    "coeffs",
    [{2: regular_action(2)}, {2: trivial_action(2, 1)}, {3: coset_action(3, cyclic(3))}, {0: trivial_action(0, 2), 1: trivial_action(1, 1)}],
    ids=["X^2", "X^[2]", "X^3/C3", "2+X"],
)
def test_softened_species_recovers_analytic_functor(coeffs):
    assert softened_vs_analytic(SpeciesSpec(coeffs), 3, 3).passed


def test_newton_sum_of_a_species_map():
    S2 = representable_quotient(2, trivial(2), 2)
    Q2 = representable_quotient(2, symmetric(2), 2)

    def collapse(n, a):
        return (TUPLE, min(a[1], a[1][::-1]))

    t = newton_sum_transf(SpeciesMap(S2, Q2, collapse, "collapse"))
    assert check_natural(t, 3).passed
    assert [t.dst.size(k) for k in range(4)] == [math.comb(k + 1, 2) for k in range(4)]


def test_species_map_must_be_natural():
    S2 = representable_quotient(2, trivial(2), 2)
    with pytest.raises(ValueError):
        SpeciesMap(S2, S2, lambda n, a: (TUPLE, a[1][::-1]) if a[1][0] != a[1][1] and n == 2 and a[1][0][1] == 0 else a, "bad")


def test_truncated_constant():
    assert truncated_constant(1, 3).sizes() == [1, 1, 0, 0]


def test_factorization_instances():
    instances = factorization_instances()
    assert len(instances) >= 10
    assert sum(1 for *_, lands in instances if not lands) >= 2
    for name, G, F, u, lands in instances:
        rep = adjunction_factorization_check(G, F, u, 2, name)
        assert rep.passed, name
        assert rep.details["lands_in_delta_star"] is lands
        assert rep.details["mate_taut"] is lands
