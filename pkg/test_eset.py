import asyncio
import random

import pytest
from hypothesis import given, settings

from congruence import RelationFamily, congruence_closure
from core_structures import Poset, category_from_functions, poset_to_category
from errors import SizeGuardError, StructureError
from eset import (BRUTE_FORCE_LIMIT, ESet, ESetMorphism, brute_force_limit, coproduct, generated_subeset,
                  hom_functor, is_compatible, limit, limit_concurrent, limit_image, product_eset, quotient,
                  search_order, trivial_eset, union_hom)
from strategies import esets, random_eset

CORPUS = 500


def swap_category():
    return category_from_functions({"A": 2}, {"g": ("A", "A", (1, 0))})


def swap_eset(fixed: bool = True) -> ESet:
    E = swap_category()
    carrier = ("a", "b", "c") if fixed else ("a", "b")
    action = {"a": "b", "b": "a", "c": "c"} if fixed else {"a": "b", "b": "a"}
    return ESet.build(E, {"A": carrier}, {"g": action})


def test_build_fills_identity_actions():
    X = swap_eset()
    assert X.act(X.category.identity("A"), "a") == "a"
    assert X.size() == 3
    assert X.elements() == [("A", "a"), ("A", "b"), ("A", "c")]


def test_build_reports_partial_action():
    with pytest.raises(StructureError) as excinfo:
        ESet.build(swap_category(), {"A": ("a", "b")}, {"g": {"a": "b"}})
    assert excinfo.value.location == "actions.g"
    assert "undefined on 'b'" in str(excinfo.value)


def test_build_reports_non_functorial_action():
    with pytest.raises(StructureError, match="differs"):
        ESet.build(swap_category(), {"A": ("a", "b")}, {"g": {"a": "b", "b": "b"}})


def test_build_rejects_unknown_carrier_object():
    with pytest.raises(StructureError) as excinfo:
        ESet.build(swap_category(), {"A": (), "Z": ()}, {"g": {}})
    assert excinfo.value.location == "carriers"


def test_limit_of_group_action_is_fixed_points():
    assert limit(swap_eset()) == [("c",)]
    assert limit(swap_eset(fixed=False)) == []


def test_limit_of_trivial_eset_is_a_singleton():
    E = poset_to_category(Poset.build(["x", "y", "z"], [("x", "y")]))
    assert limit(trivial_eset(E)) == [("*", "*", "*")]


def test_limit_over_poset_with_bottom_is_its_carrier():
    # with a least object every compatible tuple is fixed by its bottom coordinate
    J = Poset.build(["0", "1", "2"], [("0", "1"), ("0", "2")])
    E = poset_to_category(J)
    H = union_hom(E, ["0"])
    assert len(limit(H)) == len(H.carriers["0"]) == 1


def test_limit_of_union_hom_over_two_bottoms_is_empty():
    J = Poset.build(["0a", "0b", "1"], [("0a", "1"), ("0b", "1")])
    H = union_hom(poset_to_category(J), ["0a", "0b"])
    # the two bottom coordinates have different images at 1
    assert limit(H) == []


def test_search_order_prefers_objects_with_more_constraints():
    J = Poset.build(["t", "m", "b"], [("b", "m"), ("m", "t")])
    assert search_order(trivial_eset(poset_to_category(J)))[0] == "b"


@settings(max_examples=CORPUS, deadline=None)
@given(esets())
def test_limit_matches_filtered_product(X):
    assert limit(X) == brute_force_limit(X)


def test_limit_matches_filtered_product_on_seeded_corpus():
    for seed in range(CORPUS):
        X = random_eset(random.Random(seed))
        result = limit(X)
        assert result == brute_force_limit(X), seed
        assert all(is_compatible(X, t) for t in result)


def test_concurrent_limit_matches_sequential():
    for seed in range(50):
        X = random_eset(random.Random(seed))
        assert asyncio.run(limit_concurrent(X, workers=3)) == limit(X), seed


def test_brute_force_limit_guard():
    E = category_from_functions({"A": 1, "B": 1, "C": 1, "D": 1}, {})
    big = tuple(range(32))
    X = ESet.build(E, {obj: big for obj in "ABCD"}, {})
    assert 32 ** 4 > BRUTE_FORCE_LIMIT
    with pytest.raises(SizeGuardError):
        brute_force_limit(X)


def test_hom_functor_acts_by_post_composition():
    E = poset_to_category(Poset.build(["0", "1"], [("0", "1")]))
    H = hom_functor(E, "0")
    step = E.morphism("0->1")
    assert H.act(step, E.identity("0")) == step
    assert limit(H) == [(E.identity("0"), step)]


def test_union_hom_rejects_bad_sources():
    E = swap_category()
    with pytest.raises(StructureError):
        union_hom(E, [])
    with pytest.raises(StructureError):
        union_hom(E, ["Z"])


def test_quotient_projection_is_natural_and_surjective():
    X = swap_eset()
    Q, projection = quotient(X, congruence_closure(X, RelationFamily.build(X, {"A": [("a", "c")]})))
    # a~c forces b~c, one class remains
    assert Q.carriers["A"] == ("a",)
    assert projection.is_natural()
    assert projection.is_surjective()
    assert limit_image(projection, ("c",)) == ("a",)


def test_morphism_composition():
    X = swap_eset()
    Q, projection = quotient(X, congruence_closure(X, RelationFamily.build(X, {"A": [("a", "b")]})))
    composite = ESetMorphism.identity(X).then(projection)
    assert composite.components == projection.components
    assert composite.target is Q


def test_generated_subeset_closes_under_actions():
    S = generated_subeset(swap_eset(), {"A": ["a"]})
    assert S.carriers["A"] == ("a", "b")
    with pytest.raises(StructureError):
        generated_subeset(swap_eset(), {"A": ["z"]})


@settings(deadline=None)
@given(esets())
def test_limit_of_coproduct_and_product(X):
    Y = trivial_eset(X.category)
    base = limit(X)
    # one object-set per coordinate, so limits of the product pair up
    assert {tuple(zip(s, t)) for s in base for t in limit(Y)} == set(limit(product_eset(X, Y)))
    tagged = limit(coproduct(X, Y))
    assert {tuple(y for _, y in t) for t in tagged if all(tag == 0 for tag, _ in t)} == set(base)
