import pytest

from fdiff.chain import (
    Gamma,
    chain_rule_comparison,
    count_table,
    d_monad,
    fit_polynomial,
    gamma,
    gamma_associativity_check,
    gamma_grid,
    gamma_naturality_check,
    gamma_report,
    gamma_unit_checks,
    splitting_search,
    tangent_D,
    tangent_monoidal_check,
)
from fdiff.classes import divided_power, filter_monad, power, powerset_monad
from fdiff.finset import TUPLE, card
from fdiff.functor import FreeModule, Identity, NatTransf, NotTautError, Product

X = Identity()
XX = Product([X, X])
diag = NatTransf(X, XX, lambda Y, x: (TUPLE, (x, x)), "diag")
swap = NatTransf(XX, XX, lambda Y, e: (TUPLE, (e[1][1], e[1][0])), "swap")


@pytest.mark.parametrize("F,G", gamma_grid()[:5], ids=lambda T: T.name)
def test_gamma_grid(F, G):
    assert gamma_report(F, G, 3).passed


def test_gamma_grid_composite_pair():
    F, G = gamma_grid()[5]
    assert gamma_report(F, G, 2).passed


def test_gamma_refuses_non_taut():
    with pytest.raises(NotTautError):
        gamma(FreeModule(2), X)


def test_count_oracle_square_of_square():
    rows = count_table(power(2), power(2), 4)
    assert [r[1] for r in rows] == [(2 * k * k + 1) * (2 * k + 1) for k in range(5)]
    assert [r[2] for r in rows] == [(k + 1) ** 4 - k**4 for k in range(5)]


def test_chain_rule_comparison_square_of_square():
    rep = chain_rule_comparison(power(2), power(2), 5, 2)
    assert rep.passed
    assert rep.details["source_poly"] == [4, 2, 2, 1]
    assert rep.details["target_poly"] == [4, 6, 4, 1]
    assert rep.details["graded_target"] == [(3, 32), (2, 24), (1, 8), (0, 1)]
    assert rep.details["graded_image"] == [(3, 32), (2, 12), (0, 1)]
    assert rep.details["surjective"] is False


def test_chain_rule_for_identity_is_onto():
    rep = chain_rule_comparison(X, power(3), 4, 2)
    assert rep.details["surjective"] is True
    assert rep.details["source_poly"] == rep.details["target_poly"] == [3, 3, 1]


def test_fit_polynomial():
    assert fit_polynomial([1, 3, 7, 13]) == [1, 1, 1]
    assert fit_polynomial([5, 5, 5]) == [5]
    with pytest.raises(ValueError):
        fit_polynomial([0, 1, 3])


def test_gamma_associativity():
    rep = gamma_associativity_check(X, power(2), divided_power(2), 2)
    assert rep.passed and rep.details["checked"]


def test_gamma_associativity_records_skipped_sizes():
    rep = gamma_associativity_check(power(2), power(2), power(2), 2, cap=10)
    assert rep.passed and rep.details["skipped_sizes"]


@pytest.mark.parametrize("F", [power(2), divided_power(2), power(3)], ids=lambda F: F.name)
def test_gamma_units(F):
    assert gamma_unit_checks(F, 2).passed


def test_gamma_naturality():
    assert gamma_naturality_check(diag, swap, 2).passed
    assert gamma_naturality_check(swap, diag, 2).passed


def test_gamma_is_monic_on_pairs():
    g = Gamma(power(2), power(2))
    Y = card(2)
    images = [g(Y, e) for e in g.src(Y)]
    assert len(set(images)) == len(images)


def test_splitting_search():
    rep = splitting_search(2)
    assert rep.details["retractions_per_power"] == {1: 1, 2: 2, 3: 3}
    assert rep.details["canonical"] == 24
    assert rep.details["splittings_of_cube_summand"] == 648
    assert rep.details["s3_invariant"] == 0


def test_tangent_functor_shape():
    D = tangent_D(power(2))
    FA, second = D.obj(card(2), card(3))
    assert len(FA) == 4 and len(second) == 5 * 3


def test_tangent_monoidal():
    assert tangent_monoidal_check(power(2), divided_power(2), 1).passed


@pytest.mark.parametrize("M", [powerset_monad(), filter_monad()], ids=lambda M: M.name)
def test_d_monad_small(M):
    D, rep = d_monad(M, K=1)
    assert rep.passed
    # the unit point of Delta T(0) is eta of the adjoined point
    assert D.h(card(0)) in D.DT(card(0))
