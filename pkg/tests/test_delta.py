import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdiff.classes import (
    DirichletSpec,
    FilterFunctor,
    FullExpSpec,
    PolyFunctor,
    PolySpec,
    QuotPowerSpec,
    SpeciesSpec,
    chain,
    coset_action,
    divided_power,
    n_star,
    power,
    product_lattice,
    regular_action,
)
from fdiff.delta import (
    MonadSpec,
    chain_delta_check,
    chain_delta_coefficients,
    colimit_commutation_check,
    connected_limit_commutation_check,
    counting_law,
    delta,
    finite_product_rule_check,
    iterate_vs_pointed,
    iterated,
    product_rule_check,
    verify_symbolic,
)
from fdiff.diagram import cospan, cyclic_group, parallel_pair, span
from fdiff.finset import TUPLE, card, cyclic, symmetric
from fdiff.functor import FreeModule, Identity, NatTransf, NotTautError, Product, constant, identity_transf

X = Identity()
XX = Product([X, X])
swap = NatTransf(XX, XX, lambda Y, e: (TUPLE, (e[1][1], e[1][0])), "swap")
diag = NatTransf(X, XX, lambda Y, x: (TUPLE, (x, x)), "diag")


def test_delta_of_a_power_counts_by_binomials():
    D = delta(power(3))
    assert [D.size(k) for k in range(5)] == [(k + 1) ** 3 - k**3 for k in range(5)]


def test_delta_of_constant_is_empty():
    assert delta(constant(3)).size(2) == 0


def test_delta_refuses_non_taut_functors():
    with pytest.raises(NotTautError):
        delta(FreeModule(2))


@pytest.mark.parametrize("F", [power(2), divided_power(3), FilterFunctor(), constant(2)], ids=lambda F: F.name)
def test_counting_law(F):
    rep = counting_law(F, 4)
    assert rep.passed
    assert [r[3] for r in rep.details["rows"]] == [F.size(k + 1) - F.size(k) for k in range(5)]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_iterated_delta_matches_pointed_delta(n):
    assert iterate_vs_pointed(power(3), n, 2).passed
    assert iterate_vs_pointed(divided_power(3), n, 2).passed


def test_third_delta_of_cube_is_six():
    D3 = iterated(power(3), 3)
    assert [D3.size(k) for k in range(3)] == [6, 6, 6]


@pytest.mark.parametrize(
    "spec",
    [
        PolySpec((0, 1, 3)),
        QuotPowerSpec(((3, cyclic(3)), (2, symmetric(2)))),
        SpeciesSpec({2: regular_action(2), 3: coset_action(3, cyclic(3))}),
        DirichletSpec([(card(1), chain(3)), (card(2), product_lattice(chain(2), chain(2)))]),
        FullExpSpec(card(1), chain(3)),
        MonadSpec("F"),
        MonadSpec("F'"),
        MonadSpec("P"),
        MonadSpec("beta"),
    ],
    ids=str,
)
def test_closed_forms(spec):
    rep = verify_symbolic(spec, K=3)
    assert rep.passed, rep.failures[:1]


def test_closed_form_for_n_star():
    assert verify_symbolic(DirichletSpec([(card(1), n_star(6))]), K=3).passed


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_chain_delta(n):
    rep = chain_delta_check(n, K=3)
    assert rep.passed
    assert chain_delta_coefficients(n) == ({k: 1 for k in range(1, n)} | ({n: n - 1} if n > 1 else {}))


def test_product_rule_binary():
    rep = product_rule_check(power(2), divided_power(2), 3)
    assert rep.passed and rep.details["summands"] == 3


def test_product_rule_ternary():
    rep = finite_product_rule_check([X, power(2), divided_power(2)], 2)
    assert rep.passed and rep.details["summands"] == 7


def test_delta_commutes_with_orbit_colimit():
    # X^2 modulo the swap is X^[2]
    C = cyclic_group(2)
    rep = colimit_commutation_check(C, {0: XX}, {"g0": identity_transf(XX), "g1": swap}, 3)
    assert rep.passed


def test_delta_commutes_with_cospan_colimit():
    rep = colimit_commutation_check(cospan(), {0: XX, 1: X, 2: X}, {"b1": diag, "b2": diag}, 3)
    assert rep.passed


def test_non_confluent_colimit_is_refused():
    with pytest.raises(ValueError):
        colimit_commutation_check(span(), {0: X, 1: XX, 2: XX}, {"a1": diag, "a2": diag}, 2)


def test_delta_commutes_with_equalizer():
    rep = connected_limit_commutation_check(parallel_pair(), {0: XX, 1: XX}, {"s": identity_transf(XX), "t": swap}, 3)
    assert rep.passed


def test_delta_commutes_with_pullback():
    rep = connected_limit_commutation_check(cospan(), {0: XX, 1: X, 2: XX},
                                            {"b1": diag, "b2": swap}, 3)
    assert rep.passed


@given(st.lists(st.integers(0, 4), min_size=1, max_size=4))
def test_polynomial_delta_sizes(exps):
    spec = PolySpec(tuple(exps))
    D = delta(PolyFunctor(spec), 2)
    assert [D.size(k) for k in range(3)] == [
        sum(math.comb(a, j) * k**j for a in exps for j in range(a)) for k in range(3)
    ]
    assert verify_symbolic(spec, K=2).passed
