import random

import pytest
from hypothesis import given

from core_structures import (FiniteCategory, FiniteGroup, FiniteMonoid, Poset, category_from_functions,
                             category_generators, discrete_category, lambda_name, monoid_to_category,
                             opposite_monoid, poset_to_category, preorder_quotient, transformation_monoid)
from errors import StructureError
from strategies import posets, random_function_category, random_monoid, seeds


def arrow_category() -> FiniteCategory:
    return FiniteCategory.build(("E", "F"), {("E", "E"): ["1E"], ("F", "F"): ["1F"], ("E", "F"): ["a"]},
                                {"E": "1E", "F": "1F"})


def test_build_fills_identity_composites():
    E = arrow_category()
    a = E.morphism("a")
    assert E.compose(E.identity("F"), a) == a
    assert E.compose(a, E.identity("E")) == a
    assert E.hom("F", "E") == ()


def test_build_reports_missing_identity():
    with pytest.raises(StructureError) as excinfo:
        FiniteCategory.build(("E",), {("E", "E"): ["1E"]}, {})
    assert excinfo.value.location == "identities.E"


def test_build_reports_missing_composite():
    homs = {("E", "E"): ["1E", "e"]}
    with pytest.raises(StructureError, match="missing"):
        FiniteCategory.build(("E",), homs, {"E": "1E"}, {})


def test_build_rejects_nonassociative_composition():
    # f∘(e∘f) = f but (f∘e)∘f = e
    homs = {("E", "E"): ["1", "e", "f"]}
    compose = {("e", "e"): "e", ("e", "f"): "e", ("f", "e"): "f", ("f", "f"): "e"}
    with pytest.raises(StructureError, match="associative"):
        FiniteCategory.build(("E",), homs, {"E": "1"}, compose)


def test_build_checks_associativity_on_late_triples():
    # null semigroup on x0..x59 with zero x0, broken only at (x57∘x57)∘x59
    names = ["1"] + [f"x{i}" for i in range(60)]
    compose = {(a, b): "x0" for a in names[1:] for b in names[1:]}
    compose[("x57", "x57")] = "x58"
    compose[("x58", "x59")] = "x1"
    with pytest.raises(StructureError, match=r"not associative on \(x57, x57, x59\)"):
        FiniteCategory.build(("*",), {("*", "*"): names}, {"*": "1"}, compose)
    compose[("x58", "x59")] = "x0"
    assert len(FiniteCategory.build(("*",), {("*", "*"): names}, {"*": "1"}, compose).morphisms) == 61


def assert_associative(E: FiniteCategory):
    for b in E.morphisms:
        for a in E.outgoing[b.target]:
            for c in E.outgoing[a.target]:
                assert E.compose(c, E.compose(a, b)) == E.compose(E.compose(c, a), b), (c, a, b)


@given(seeds)
def test_random_function_categories_are_associative(seed):
    E, _, _ = random_function_category(random.Random(seed))
    assert_associative(E)


@given(seeds)
def test_random_monoid_categories_are_associative(seed):
    assert_associative(monoid_to_category(random_monoid(random.Random(seed))))


def test_build_rejects_shared_morphism_names():
    homs = {("E", "E"): ["1E"], ("F", "F"): ["1E"]}
    with pytest.raises(StructureError, match="two hom-sets"):
        FiniteCategory.build(("E", "F"), homs, {"E": "1E", "F": "1E"})


def test_category_from_functions_names_composites_by_shortest_words():
    E = category_from_functions({"A": 3}, {"r": ("A", "A", (1, 2, 0))})
    assert [m.name for m in E.hom("A", "A")] == ["id_A", "r", "r.r"]
    r = E.morphism("r")
    assert E.compose(r, E.morphism("r.r")) == E.identity("A")


def test_category_from_functions_rejects_non_functions():
    with pytest.raises(StructureError) as excinfo:
        category_from_functions({"A": 2, "B": 1}, {"f": ("A", "B", (0, 1))})
    assert excinfo.value.location == "generators.f"


def test_discrete_category_has_only_identities():
    E = discrete_category(["x", "y"])
    assert len(E.morphisms) == 2
    assert category_generators(E) == ()


def test_poset_category_has_one_morphism_per_relation():
    J = Poset.build(["0", "1", "2"], [("0", "1"), ("1", "2")])
    E = poset_to_category(J)
    assert len(E.morphisms) == 6
    assert E.compose(E.morphism(lambda_name("1", "2")), E.morphism(lambda_name("0", "1"))) \
        == E.morphism(lambda_name("0", "2"))
    assert [m.name for m in category_generators(E)] == ["0->1", "1->2"]


def test_poset_rejects_cycles():
    with pytest.raises(StructureError, match="below each other"):
        Poset.build(["a", "b"], [("a", "b"), ("b", "a")])


def test_poset_queries():
    J = Poset.build(["b1", "b2", "m", "t"], [("b1", "m"), ("b2", "m"), ("m", "t")])
    assert J.minimal_elements() == ("b1", "b2")
    assert J.top() == "t"
    assert J.is_directed()
    assert J.down("m") == ("b1", "b2", "m")
    assert set(J.hasse_graph().edges) == {("b1", "m"), ("b2", "m"), ("m", "t")}


@given(posets())
def test_poset_order_is_reflexive_and_transitive(J):
    for x in J.elements:
        assert J.le(x, x)
    for x, y in J.leq:
        for z in J.up(y):
            assert J.le(x, z)


def test_preorder_quotient_collapses_isomorphic_objects():
    E = category_from_functions({"A": 2, "B": 2, "C": 1},
                                {"f": ("A", "B", (1, 0)), "g": ("B", "A", (0, 1)), "h": ("B", "C", (0, 0))})
    J, labels = preorder_quotient(E)
    assert labels == {"A": "A", "B": "A", "C": "C"}
    assert J.elements == ("A", "C")
    assert J.le("A", "C")


def test_monoid_build_from_rows_and_validation():
    M = FiniteMonoid.build([0, 1], [[0, 1], [1, 0]], 0)
    assert M.mult(1, 1) == 0
    assert M.product([1, 1, 1]) == 1
    with pytest.raises(StructureError) as excinfo:
        FiniteMonoid.build([0, 1], [[0, 1]], 0)
    assert excinfo.value.location == "table"
    with pytest.raises(StructureError, match="neutral"):
        FiniteMonoid.build([0, 1], [[0, 0], [0, 1]], 0)


def test_group_inverses():
    G = FiniteGroup.build([0, 1, 2], {(a, b): (a + b) % 3 for a in range(3) for b in range(3)}, 0)
    assert G.inverse == {0: 0, 1: 2, 2: 1}


def test_transformation_monoid_of_symmetric_group():
    M = transformation_monoid(3, [(1, 2, 0), (1, 0, 2)])
    assert len(M) == 6
    # ab applies b first
    assert M.mult((1, 2, 0), (1, 0, 2)) == (2, 1, 0)


def test_opposite_monoid_reverses_products():
    M = transformation_monoid(2, [(0, 0), (1, 0)])
    op = opposite_monoid(M)
    for a in M.elements:
        for b in M.elements:
            assert op.mult(a, b) == M.mult(b, a)


def test_monoid_to_category():
    M = transformation_monoid(2, [(1, 0)])
    E = monoid_to_category(M)
    assert E.objects == ("*",)
    assert len(E.morphisms) == 2
    swap = E.morphism(str((1, 0)))
    assert E.compose(swap, swap) == E.identity("*")
