import json
from fractions import Fraction

import pytest

import codec
from congruence import congruence_closure
from core_structures import Poset, poset_to_category
from dirsys import Outcome, Verdict, iota
from errors import StructureError
from gallery import field_mult, two_bottom_chain

SWAP_CATEGORY = {"objects": ["*"], "sets": {"*": 2},
                 "functions": {"g": {"source": "*", "target": "*", "images": [1, 0]}}}
SWAP_MEMBER = {"carriers": {"*": ["a", "b"]}, "actions": {"g": ["b", "a"]}}
FIXED_MEMBER = {"carriers": {"*": ["c"]}, "actions": {"g": ["c"]}}

DIRECTED_DOC = {
    "category": SWAP_CATEGORY,
    "index": {"elements": [0, 1], "leq": [[0, 1]]},
    "members": {"0": SWAP_MEMBER, "1": FIXED_MEMBER},
    "connect": [{"source": 0, "target": 1, "components": {"*": ["c", "c"]}}],
}

STAGED_DOC = {"category": SWAP_CATEGORY, "stages": [SWAP_MEMBER, FIXED_MEMBER], "steps": [{"*": ["c", "c"]}]}


def location_of(call, *args) -> str:
    with pytest.raises(StructureError) as excinfo:
        call(*args)
    return excinfo.value.location


# --- Categories ---
def test_explicit_category():
    doc = {"objects": ["E", "F"],
           "homs": [{"source": "E", "target": "E", "morphisms": ["1E"]},
                    {"source": "F", "target": "F", "morphisms": ["1F"]},
                    {"source": "E", "target": "F", "morphisms": ["a", "b"]}],
           "identities": {"E": "1E", "F": "1F"}}
    E = codec.parse_category(doc)
    assert [m.name for m in E.hom("E", "F")] == ["a", "b"]


def test_category_from_sets_and_functions():
    E = codec.parse_category({"objects": ["A"], "sets": {"A": 3},
                              "functions": {"r": {"source": "A", "target": "A", "images": [1, 2, 0]}}})
    assert [m.name for m in E.morphisms] == ["id_A", "r", "r.r"]


def test_category_errors_are_located():
    assert location_of(codec.parse_category, {"objects": ["A"], "sets": {"A": 1}, "identities": {"A": "x"}}) \
        == "document"
    assert location_of(codec.parse_category, {"objects": ["A"], "bogus": 1}) == "bogus"
    assert location_of(codec.parse_category, {"objects": ["A"], "homs": [{"source": "A", "target": "A",
                                                                           "morphisms": "x"}]}) \
        == "homs[0].morphisms"
    assert location_of(codec.parse_category, {"objects": ["A"], "identities": {"A": "1"},
                                              "homs": [{"source": "A", "target": "A", "morphisms": ["1"]},
                                                       {"source": "A", "target": "A", "morphisms": ["2"]}]}) \
        == "homs[1]"
    assert location_of(codec.parse_category, {"objects": ["A"], "homs": [], "identities": {"A": "1"}}) \
        == "identities.A"


def test_category_round_trip():
    E = poset_to_category(Poset.build(["0", "1", "2"], [("0", "1"), ("1", "2")]))
    doc = codec.category_to_json(E)
    assert doc["compose"] == [["1->2", "0->1", "0->2"]]
    parsed = codec.parse_category(json.loads(json.dumps(doc)))
    assert [m.name for m in parsed.morphisms] == [m.name for m in E.morphisms]
    assert {(a.name, b.name): c.name for (a, b), c in parsed.table.items()} \
        == {(a.name, b.name): c.name for (a, b), c in E.table.items()}


def test_malformed_json():
    assert location_of(codec.load_json, '{"objects": [') == "line 1 column 14"


# --- Posets and monoids ---
def test_poset_with_subset():
    J, A = codec.parse_poset({"elements": ["a", "b", "c"], "leq": [["a", "c"], ["b", "c"]], "A": ["a", "b"]})
    assert J.le("a", "c")
    assert A == ("a", "b")
    assert location_of(codec.parse_poset, {"elements": ["a"], "A": ["z"]}) == "A"
    assert location_of(codec.parse_poset, {"elements": ["a", "b"], "leq": [["a", "b"], ["b", "a"]]}) == "leq"


def test_poset_emits_hasse_edges():
    doc = codec.poset_to_json(two_bottom_chain(2), A=("0_1", "0_2"))
    assert doc["leq"] == [["0_1", "1"], ["0_2", "1"], ["1", "2"]]
    J, A = codec.parse_poset(doc)
    assert J.leq == two_bottom_chain(2).leq
    assert A == ("0_1", "0_2")


def test_monoid_round_trip():
    M = field_mult(5)
    parsed = codec.parse_monoid(codec.monoid_to_json(M))
    assert parsed.table == M.table
    assert location_of(codec.parse_monoid, {"elements": [0, 1], "table": [[0, 1]], "one": 0}) == "table"
    assert location_of(codec.parse_monoid, {"elements": [0, 1], "table": [[0, 1.5], [1, 0]], "one": 0}) \
        .startswith("table[0][1]")


# --- E-sets and relations ---
def test_eset_and_relation():
    X, relation = codec.parse_relation({"eset": {"category": SWAP_CATEGORY, **SWAP_MEMBER},
                                        "pairs": {"*": [["a", "b"]]}})
    closed = congruence_closure(X, relation)
    doc = codec.congruence_to_json(closed)
    assert doc == {"blocks": {"*": [["a", "b"]]}, "classes": 1, "merges": 1}
    assert codec.parse_eset(codec.eset_to_json(X)).carriers == X.carriers


def test_eset_errors_are_located():
    bad_action = {"category": SWAP_CATEGORY, "carriers": {"*": ["a", "b"]}, "actions": {"g": ["b", "b"]}}
    with pytest.raises(StructureError, match="differs") as excinfo:
        codec.parse_eset(bad_action)
    assert excinfo.value.location.startswith("eset.actions.")
    short = {"category": SWAP_CATEGORY, "carriers": {"*": ["a", "b"]}, "actions": {"g": ["b"]}}
    assert location_of(codec.parse_eset, short) == "eset.actions.g"
    extra = {"category": SWAP_CATEGORY, "carriers": {"*": ["a"], "Z": []}, "actions": {"g": ["a"]}}
    assert location_of(codec.parse_eset, extra) == "eset.carriers.Z"
    assert location_of(codec.parse_relation, {"eset": {"category": SWAP_CATEGORY, **SWAP_MEMBER},
                                              "pairs": {"*": [["a", "q"]]}}) == "relation.*[0]"


# --- Systems ---
def test_directed_system_round_trip():
    system = codec.parse_system(DIRECTED_DOC)
    assert iota(system).bijective
    again = codec.parse_directed_system(json.loads(codec.dumps(codec.directed_system_to_json(system))))
    assert again.index.leq == system.index.leq
    assert again.connect[(0, 1)].components == system.connect[(0, 1)].components


def test_directed_system_errors():
    missing = dict(DIRECTED_DOC, members={"0": SWAP_MEMBER})
    assert location_of(codec.parse_directed_system, missing) == "members.1"
    wrong = dict(DIRECTED_DOC, connect=[{"source": 0, "target": 1, "components": {"*": ["c"]}}])
    assert location_of(codec.parse_directed_system, wrong) == "connect[0].components.*"


def test_staged_system_repeats_its_last_stage():
    system = codec.parse_system(STAGED_DOC)
    assert system.constant_from == 1
    assert system.stage(5).carriers["*"] == ("c",)
    report = iota(system, 2)
    assert report.bijective
    assert report.injective.stage == 1


def test_staged_system_needs_one_step_per_gap():
    doc = dict(STAGED_DOC, steps=[])
    assert location_of(codec.parse_staged_system, doc) == "document"


# --- Reports ---
def test_plain_and_dumps():
    E = poset_to_category(Poset.build(["0", "1"], [("0", "1")]))
    report = {"verdict": Verdict.proven(3), ("a", 1): Fraction(1, 4), "m": E.morphism("0->1"),
              "set": frozenset({2, 1})}
    doc = codec.plain(report)
    assert doc["verdict"]["outcome"] == Outcome.PROVEN.value
    assert doc["a,1"] == "1/4"
    assert doc["m"] == "0->1"
    assert doc["set"] == [1, 2]
    assert codec.dumps(report) == codec.dumps(dict(reversed(list(report.items()))))
