import random

import pytest
from hypothesis import given, settings

from congruence import (CongruenceFamily, RelationFamily, brute_force_closure, candidate_pairs, congruence_closure,
                        discrete_congruence, enumerate_congruences, improper_congruence, is_congruence, is_improper,
                        minimal_improper_generator_objects, minimal_improper_generators,
                        trivial_eset_finitely_presented)
from core_structures import category_from_functions, lambda_name, poset_to_category
from errors import SizeGuardError, StructureError
from eset import ESet, quotient, union_hom
from gallery import two_bottom_chain
from strategies import eset_relations, fixpoint_closure, partition_sets, random_eset, random_relation

CORPUS = 500


def swap_eset() -> ESet:
    E = category_from_functions({"A": 2}, {"g": ("A", "A", (1, 0))})
    return ESet.build(E, {"A": ("a", "b", "c")}, {"g": {"a": "b", "b": "a", "c": "c"}})


def two_bottoms_hom(k: int):
    J = two_bottom_chain(k)
    category = poset_to_category(J)
    return category, union_hom(category, J.minimal_elements())


def test_relation_family_checks_carriers():
    X = swap_eset()
    with pytest.raises(StructureError) as excinfo:
        RelationFamily.build(X, {"A": [("a", "z")]})
    assert excinfo.value.location == "relation.A[0]"
    with pytest.raises(StructureError):
        RelationFamily.build(X, {"B": []})


def test_closure_propagates_along_actions():
    X = swap_eset()
    closed = congruence_closure(X, RelationFamily.build(X, {"A": [("a", "c")]}))
    assert closed.partition("A") == (("a", "b", "c"),)
    assert closed.merges == 2


def test_closure_of_empty_relation_is_discrete():
    X = swap_eset()
    assert congruence_closure(X, RelationFamily({})) == discrete_congruence(X)


def test_closure_matches_fixpoint_oracle():
    for seed in range(CORPUS):
        rng = random.Random(seed)
        X = random_eset(rng)
        relation = random_relation(rng, X)
        closed = congruence_closure(X, relation)
        assert partition_sets(closed) == fixpoint_closure(X, relation), seed
        assert is_congruence(X, closed)
        assert closed.merges == X.size() - closed.class_count()


@settings(max_examples=100, deadline=None)
@given(eset_relations())
def test_closure_ignores_worklist_order(case):
    X, relation = case
    expected = congruence_closure(X, relation)
    for shuffle_seed in range(3):
        assert congruence_closure(X, relation, shuffle_seed=shuffle_seed) == expected


def test_closure_matches_enumeration_on_tiny_esets():
    X = swap_eset()
    for pair in [("a", "b"), ("a", "c"), ("b", "b")]:
        relation = RelationFamily.build(X, {"A": [pair]})
        assert brute_force_closure(X, relation) == congruence_closure(X, relation)


def test_enumerate_congruences_of_swap_action():
    found = enumerate_congruences(swap_eset())
    assert sorted(len(C.partition("A")) for C in found) == [1, 2, 3]


def test_enumeration_guard():
    E = category_from_functions({"A": 1, "B": 1}, {})
    big = tuple(range(9))
    X = ESet.build(E, {"A": big, "B": big}, {})
    with pytest.raises(SizeGuardError):
        enumerate_congruences(X)


def test_partition_validation():
    X = swap_eset()
    with pytest.raises(StructureError):
        CongruenceFamily.from_blocks(X, {"A": [["a", "b"], ["b", "c"]]})
    not_closed = CongruenceFamily.from_blocks(X, {"A": [["a", "c"], ["b"]]})
    assert not is_congruence(X, not_closed)
    with pytest.raises(StructureError, match="not closed"):
        quotient(X, not_closed)


def test_improper_and_discrete_families():
    X = swap_eset()
    assert is_improper(improper_congruence(X))
    assert not is_improper(discrete_congruence(X))
    assert improper_congruence(X).class_count() == 1


@pytest.mark.parametrize("k", range(1, 7))
def test_two_bottoms_generated_by_one_pair(k):
    category, H = two_bottoms_hom(k)
    result = minimal_improper_generators(H)
    assert result.exact
    assert result.size == 1
    assert result.witness == (("1", category.morphism(lambda_name("0_1", "1")),
                               category.morphism(lambda_name("0_2", "1"))),)


def test_candidate_pairs_follow_object_order():
    _, H = two_bottoms_hom(2)
    assert [obj for obj, _, _ in candidate_pairs(H)] == ["1", "2"]


def test_generator_objects_for_two_bottoms():
    _, H = two_bottoms_hom(4)
    result = minimal_improper_generator_objects(H)
    assert result.witness == ("1",)


def test_budget_exhaustion_falls_back_to_greedy():
    _, H = two_bottoms_hom(3)
    result = minimal_improper_generators(H, budget=0)
    assert result.found
    assert not result.exact
    assert result.exhausted_budget
    assert result.greedy_upper_bound == 1


def test_trivial_eset_presentation_over_two_bottoms():
    category, _ = two_bottoms_hom(3)
    presentation = trivial_eset_finitely_presented(category)
    assert presentation.sources == ("0_1", "0_2")
    assert presentation.relations.size == 1


def test_trivial_eset_presentation_collapses_isomorphic_objects():
    E = category_from_functions({"A": 1, "B": 1}, {"f": ("A", "B", (0,)), "g": ("B", "A", (0,))})
    presentation = trivial_eset_finitely_presented(E)
    assert presentation.sources == ("A",)
    # H_A is already trivial here
    assert presentation.relations.size == 0
