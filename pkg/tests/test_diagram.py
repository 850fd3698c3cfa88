import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fdiff.diagram import (
    Diagram,
    FinCat,
    check_colimit_commutes_with_inverse_images,
    colimit,
    colimit_by_search,
    confluence_witness,
    confluent_by_representables,
    is_confluent,
    one_step_related,
    parallel_pair,
    representable_counterexample,
    representable_sum,
    shape_library,
    span,
)
from fdiff.finset import Atom, FinFun, card

# worked out by hand from the composition tables
CONFLUENT = {
    "discrete1": True,
    "discrete2": True,
    "span": False,
    "cospan": True,
    "parallel": False,
    "chain2": True,
    "chain3": True,
    "Z/2": True,
    "Z/3": True,
    "square": True,
}


@pytest.mark.parametrize("C", shape_library(), ids=lambda C: C.name)
def test_confluence_against_hand_table(C):
    assert is_confluent(C) == CONFLUENT[C.name]
    assert confluent_by_representables(C) == CONFLUENT[C.name]


def test_shape_library_is_complete():
    assert {C.name for C in shape_library()} == set(CONFLUENT)


def test_bad_composition_table_is_rejected():
    with pytest.raises(ValueError):
        FinCat("broken", [0, 1], {"f": (0, 1), "g": (1, 0)}, {})


@pytest.mark.parametrize("C", shape_library(), ids=lambda C: C.name)
def test_colimits_commute_with_inverse_images_exactly_on_confluent_shapes(C):
    rep = check_colimit_commutes_with_inverse_images(C, trials=30)
    assert rep.passed, rep.witnesses


def test_span_counterexample_numbers():
    C = span()
    ce = representable_counterexample(C, *confluence_witness(C))
    assert ce["colim_Phi0"] == 0
    assert ce["pullback_of_colimits"] == 1
    assert ce["defect"] is not None


def test_parallel_pair_counterexample_fires():
    C = parallel_pair()
    ce = representable_counterexample(C, *confluence_witness(C))
    assert ce["defect"] is not None


@given(st.integers(0, 10_000))
def test_union_find_colimit_matches_search(seed):
    rng = random.Random(seed)
    C = rng.choice(shape_library())
    D = representable_sum(C, [rng.choice(C.objects) for _ in range(rng.randint(1, 3))])
    L, cocone = colimit(D)
    classes = colimit_by_search(D)
    assert len(L) == len(classes)
    for cls in classes:
        images = set()
        for node in cls:
            o = C.objects[node[1][0][1]]
            images.add(cocone[o](node[1][1]))
        assert len(images) == 1


def test_one_step_relation_on_a_parallel_pair():
    C = parallel_pair()
    X, Y = card(2), card(1)
    D = Diagram(C, {0: X, 1: Y}, {"s": FinFun(X, Y, [Atom(0)] * 2), "t": FinFun(X, Y, [Atom(0)] * 2)})
    assert len(colimit(D)[0]) == 1
    assert one_step_related(D, 1, Atom(0), 0, Atom(1))
