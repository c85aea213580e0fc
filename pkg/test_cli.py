import json

import pytest
from click.testing import CliRunner

from cli import EXIT_INPUT_ERROR, EXIT_OK, EXIT_REFUTED, main, parse_params, run
from errors import StructureError

SWAP_CATEGORY = {"objects": ["*"], "sets": {"*": 2},
                 "functions": {"g": {"source": "*", "target": "*", "images": [1, 0]}}}
SWAP_ESET = {"category": SWAP_CATEGORY, "carriers": {"*": ["a", "b", "c"]}, "actions": {"g": ["b", "a", "c"]}}


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(main, list(args))


def write_json(tmp_path, doc, name="input.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_parse_params():
    assert parse_params(("k=3", "h=10")) == {"k": 3, "h": 10}
    with pytest.raises(StructureError) as excinfo:
        parse_params(("k=three",))
    assert excinfo.value.location == "param.k"
    with pytest.raises(StructureError):
        parse_params(("k",))


# --- poset ---
def test_critical_set_as_json(runner):
    result = invoke(runner, "poset", "critical", "--gallery", "two_bottom_chain", "--param", "k=3", "--json")
    assert result.exit_code == EXIT_OK, result.output
    assert json.loads(result.output) == {"critical": ["1"]}


def test_gather_exit_codes(runner):
    result = invoke(runner, "poset", "gather", "--gallery", "two_bottom_chain", "--element", "2", "--json")
    assert result.exit_code == EXIT_REFUTED
    assert json.loads(result.output) == {"gathers": False, "classes": [["0_1"], ["0_2"]]}
    result = invoke(runner, "poset", "gather", "--gallery", "two_bottom_chain", "--element", "2", "--b", "1")
    assert result.exit_code == EXIT_OK
    assert "gathers: true" in result.output


def test_poset_from_file(runner, tmp_path):
    path = write_json(tmp_path, {"elements": ["a", "b", "m", "t"], "leq": [["a", "m"], ["b", "m"], ["m", "t"]]})
    result = invoke(runner, "poset", "analyze", "--file", path, "--json")
    assert result.exit_code == EXIT_OK, result.output
    report = json.loads(result.output)
    assert report["critical"] == ["m"]
    assert report["gathering"]["witness"] == ["m"]
    assert report["abovefin"] and report["tgath"]


def test_dot_output(runner):
    result = invoke(runner, "poset", "dot", "--gallery", "diamond")
    assert result.exit_code == EXIT_OK
    assert result.output.startswith('digraph "poset" {')


# --- input errors ---
def test_input_errors_exit_with_two(runner, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text('{"elements": [')
    result = invoke(runner, "poset", "critical", "--file", str(broken))
    assert result.exit_code == EXIT_INPUT_ERROR
    assert "line 1" in result.output

    result = invoke(runner, "poset", "critical")
    assert result.exit_code == EXIT_INPUT_ERROR
    assert "exactly one of --file and --gallery" in result.output

    result = invoke(runner, "poset", "critical", "--gallery", "diamond", "--param", "k=2")
    assert result.exit_code == EXIT_INPUT_ERROR

    result = invoke(runner, "monoid", "battery", "--gallery", "two_bottom_chain")
    assert result.exit_code == EXIT_INPUT_ERROR
    assert "not a monoid" in result.output


# --- monoid, eset, congruence ---
def test_monoid_congruences(runner):
    result = invoke(runner, "monoid", "congruences", "--gallery", "maxchain_monoid", "--param", "k=2", "--json")
    assert result.exit_code == EXIT_OK
    assert json.loads(result.output)["count"] == 4


def test_union_hom_limit_over_two_bottoms_is_empty(runner):
    result = invoke(runner, "eset", "limit", "--gallery", "two_bottom_chain", "--json")
    assert result.exit_code == EXIT_OK
    assert json.loads(result.output) == {"size": 0, "limit": []}


def test_congruence_close_from_file(runner, tmp_path):
    path = write_json(tmp_path, {"eset": SWAP_ESET, "pairs": {"*": [["a", "c"]]}})
    result = invoke(runner, "congruence", "close", "--file", path, "--seed", "5", "--json")
    assert result.exit_code == EXIT_OK, result.output
    report = json.loads(result.output)
    assert report["improper"]
    assert report["congruence"]["blocks"] == {"*": [["a", "b", "c"]]}


def test_eset_quotient(runner, tmp_path):
    path = write_json(tmp_path, {"eset": SWAP_ESET, "pairs": {"*": [["a", "b"]]}})
    result = invoke(runner, "eset", "quotient", "--file", path, "--json")
    assert result.exit_code == EXIT_OK, result.output
    assert json.loads(result.output)["quotient"]["carriers"] == {"*": ["a", "c"]}


# --- dirsys ---
def test_iota_bijective_after_collapse(runner):
    result = invoke(runner, "dirsys", "iota", "--gallery", "c2_collapse", "--horizon", "5", "--json")
    assert result.exit_code == EXIT_OK, result.output
    assert json.loads(result.output)["bijective"] is True


def test_iota_refuted_exits_with_one(runner):
    result = invoke(runner, "dirsys", "iota", "--gallery", "pinje_plusminus", "--horizon", "3", "--json")
    assert result.exit_code == EXIT_REFUTED
    report = json.loads(result.output)
    assert report["iota"]["injective"]["outcome"] == "refuted_within_horizon"


def test_iota_uses_the_gallery_horizon(runner):
    result = invoke(runner, "dirsys", "iota", "--gallery", "pinje_plusminus", "--param", "h=3", "--json")
    assert result.exit_code == EXIT_REFUTED
    report = json.loads(result.output)
    assert report["iota"]["horizon"] == 3
    assert report["iota"]["injective"]["horizon"] == 3


def test_iota_on_finite_system_file(runner, tmp_path):
    doc = {"category": SWAP_CATEGORY, "index": {"elements": [0, 1], "leq": [[0, 1]]},
           "members": {"0": {"carriers": {"*": ["a", "b"]}, "actions": {"g": ["b", "a"]}},
                       "1": {"carriers": {"*": ["c"]}, "actions": {"g": ["c"]}}},
           "connect": [{"source": 0, "target": 1, "components": {"*": ["c", "c"]}}]}
    result = invoke(runner, "dirsys", "iota", "--file", write_json(tmp_path, doc), "--json")
    assert result.exit_code == EXIT_OK, result.output
    assert json.loads(result.output)["bijective"] is True
    result = invoke(runner, "dirsys", "stabilize", "--file", write_json(tmp_path, doc, "again.json"))
    assert result.exit_code == EXIT_INPUT_ERROR


# --- gallery ---
def test_gallery_list(runner):
    result = invoke(runner, "gallery", "list", "--json")
    assert result.exit_code == EXIT_OK
    names = [item["name"] for item in json.loads(result.output)["items"]]
    assert "two_bottom_chain" in names and "c2_collapse" in names


def test_gallery_run(runner):
    result = invoke(runner, "gallery", "run", "diamond", "--json")
    assert result.exit_code == EXIT_OK, result.output
    assert json.loads(result.output)["runs"][0]["passed"] is True
    assert invoke(runner, "gallery", "run").exit_code == EXIT_INPUT_ERROR
    assert invoke(runner, "gallery", "run", "nope").exit_code == EXIT_INPUT_ERROR


def test_run_returns_exit_codes():
    assert run(["poset", "critical", "--gallery", "diamond"]) == EXIT_OK
    assert run(["poset", "gather", "--gallery", "diamond", "--element", "top"]) == EXIT_REFUTED
    assert run(["gallery", "run", "nope"]) == EXIT_INPUT_ERROR
    assert run(["poset", "critical", "--bogus"]) == EXIT_INPUT_ERROR


def test_help_names_the_seeded_commands(runner):
    result = invoke(runner, "--help")
    assert result.exit_code == EXIT_OK
    assert "deterministic" in result.output and "--seed" in result.output
    assert "synthetic" in invoke(runner, "bench", "closure", "--help").output
