import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from congruence import RelationFamily, congruence_closure, is_improper, minimal_improper_generator_objects
from core_structures import Poset, poset_to_category
from errors import SizeGuardError, StructureError
from eset import union_hom
from gallery import diamond, punctured_two_bottom_chain, two_bottom_chain
from poset_analysis import (CAPNE_SIZE_GUARD, GatherQuery, abovefin_check, capne_oracle, critical_elements,
                            downset, gathering_congruence_generators, gathers, gathers_everywhere,
                            horizon_instability_probe, minimal_elements, minimal_gathering_set, tgath_check, to_dot,
                            upset)
from strategies import all_small_posets, posets, random_poset

CORPUS = 500
MAX_MINIMAL = 3


def test_downsets_and_upsets():
    J = two_bottom_chain(3)
    assert minimal_elements(J) == ("0_1", "0_2")
    assert downset(J, "1") == ("0_1", "0_2", "1")
    assert upset(J, "2") == ("2", "3")


def test_gathering_under_an_element():
    J = two_bottom_chain(2)
    A = ("0_1", "0_2")
    assert gathers(GatherQuery(J, A, ("1",), "2")).gathers
    missing = gathers(GatherQuery(J, A, (), "2"))
    assert not missing.gathers
    assert missing.classes == [["0_1"], ["0_2"]]
    # a single element of A below E gathers vacuously
    assert gathers(GatherQuery(J, A, (), "0_1")).gathers


def test_gather_query_validates_subsets():
    J = two_bottom_chain(2)
    with pytest.raises(StructureError) as excinfo:
        GatherQuery(J, ("0_1", "x"), (), "1")
    assert excinfo.value.location == "A"
    with pytest.raises(StructureError):
        GatherQuery(J, (), (), "x")


@pytest.mark.parametrize("k", range(1, 7))
def test_two_bottoms_critical_set(k):
    J = two_bottom_chain(k)
    assert critical_elements(J, minimal_elements(J)) == ("1",)
    assert minimal_gathering_set(J, minimal_elements(J)).witness == ("1",)


def test_diamond_needs_both_middles():
    J = diamond()
    A = minimal_elements(J)
    assert critical_elements(J, A) == ("m1", "m2")
    result = minimal_gathering_set(J, A)
    assert result.witness == ("m1", "m2")
    assert not gathers_everywhere(J, A, ("top",))


def test_critical_sets_gather_on_random_posets():
    for seed in range(CORPUS):
        rng = random.Random(seed)
        J = random_poset(rng)
        A = tuple(x for x in J.elements if rng.random() < 0.5) or J.minimal_elements()
        critical = critical_elements(J, A)
        assert gathers_everywhere(J, A, critical), seed
        found = minimal_gathering_set(J, A)
        assert set(critical) <= set(found.witness), seed
        assert found.witness == critical, seed
        # every gathering set holds the critical elements
        extra = tuple(x for x in J.elements if rng.random() < 0.5)
        if gathers_everywhere(J, A, extra):
            assert set(critical) <= set(extra), seed


@settings(max_examples=CORPUS, deadline=None)
@given(posets(), st.data())
def test_random_subsets_never_beat_the_critical_set(J, data):
    A = J.minimal_elements()
    B = data.draw(st.lists(st.sampled_from(J.elements), unique=True))
    if gathers_everywhere(J, A, B):
        assert set(critical_elements(J, A)) <= set(B)


def _bridge_holds(J: Poset) -> bool:
    A = J.minimal_elements()
    gathering = minimal_gathering_set(J, A)
    generators = minimal_improper_generator_objects(union_hom(poset_to_category(J), A))
    return gathering.size == generators.size


@pytest.mark.parametrize("n, count", [(1, 1), (2, 2), (3, 5), (4, 16), (5, 63), (6, 318), (7, 2045)])
def test_small_posets_cover_every_isomorphism_class(n, count):
    assert len(all_small_posets(n)) == count


@pytest.mark.parametrize("n", range(1, 8))
def test_gathering_matches_generator_objects_exhaustively(n):
    for J in all_small_posets(n):
        if len(J.minimal_elements()) <= MAX_MINIMAL:
            assert _bridge_holds(J), sorted(J.leq)


def test_gathering_pairs_generate_the_improper_congruence():
    J = two_bottom_chain(4)
    category = poset_to_category(J)
    A = minimal_elements(J)
    H = union_hom(category, A)
    triples = gathering_congruence_generators(category, J, A, ("1",))
    assert [(e, str(s), str(t)) for e, s, t in triples] == [("1", "0_1->1", "0_2->1")]
    assert is_improper(congruence_closure(H, RelationFamily.from_triples(H, triples)))


def test_tgath_report():
    report = tgath_check(poset_to_category(diamond()))
    assert report.holds
    assert report.critical == ("m1", "m2")
    assert all(c.gathers for c in report.certificates.values())


def test_abovefin_and_capne_hold_on_finite_posets():
    for seed in range(50):
        J = random_poset(random.Random(seed), max_elements=6)
        assert abovefin_check(J).holds
        report = capne_oracle(J)
        assert report.holds
        assert report.counterexample is None


def test_capne_is_exhaustive_on_chains():
    chain = Poset.build(range(3), [(0, 1), (1, 2)])
    report = capne_oracle(chain)
    assert report.exhaustive
    assert report.families_checked > 0


def test_capne_guard():
    big = Poset.build(range(CAPNE_SIZE_GUARD + 1))
    with pytest.raises(SizeGuardError):
        capne_oracle(big)


def test_probe_is_stable_on_two_bottom_chains():
    probe = horizon_instability_probe(lambda k: (two_bottom_chain(k), ("0_1", "0_2")), range(1, 6))
    assert not probe.drifting
    assert probe.stable_from == 1


def test_probe_drifts_on_punctured_chains():
    probe = horizon_instability_probe(lambda k: (punctured_two_bottom_chain(k), ("0_1", "0_2")), range(2, 7))
    assert probe.drifting
    assert probe.stable_from is None
    assert [row.gathering for row in probe.rows][-1] == ("1+1/6",)


def test_dot_export_marks_elements():
    J = two_bottom_chain(2)
    dot = to_dot(J, minimal=minimal_elements(J), critical=("1",), gathering=("1",))
    assert dot.startswith('digraph "poset" {')
    assert '"0_1" -> "1";' in dot
    assert '"1" -> "2";' in dot
    assert '"0_1" -> "2";' not in dot
    assert '"1" [style=filled fillcolor="salmon" peripheries=2];' in dot
    assert '"0_2" [style=filled fillcolor="lightblue"];' in dot
