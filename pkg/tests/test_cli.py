"""End-to-end tests of the dtsat command line."""
import json

import pytest

from main import main
from models.automaton_file import AutomatonFile
from models.machine_file import MachineFile
from models.tree_file import TreeFile
from services.atra import empty_automaton
from services.trees import tree_from_labels
from tests.conftest import AB, only_a
from tests.test_xpath_eval import DOC


def run(capsys, *argv):
    code = main(list(argv))
    return code, json.loads(capsys.readouterr().out)


def write(tmp_path, name: str, payload) -> str:
    path = tmp_path / name
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
    return str(path)


@pytest.fixture
def only_a_file(tmp_path):
    return write(tmp_path, "only_a.json", AutomatonFile.from_atra(only_a()).model_dump(by_alias=True))


#####################
# atra
#####################


def test_generated_bk_is_nonempty(capsys, tmp_path):
    target = str(tmp_path / "b1.json")
    code, printed = run(capsys, "atra", "gen-bk", "--k", "1", "--out", target)
    assert code == 0
    assert (printed["result"], printed["value"]) == ("OK", target)

    code, printed = run(capsys, "atra", "nonempty-fin", target)
    assert code == 0
    assert printed["result"] == "SAT"
    assert TreeFile.model_validate(printed["witness"]).to_tree().letter("") == "b1"


def test_gen_bk_prints_the_automaton(capsys):
    code, printed = run(capsys, "atra", "gen-bk", "--k", "1")
    assert code == 0
    assert AutomatonFile.model_validate(printed).to_atra().alphabet == {"b1", "*"}


def test_inclusion_is_reflexive(capsys, only_a_file):
    code, printed = run(capsys, "atra", "inclusion", only_a_file, only_a_file)
    assert (code, printed["result"]) == (0, "HOLDS")


def test_membership_modes(capsys, tmp_path, only_a_file):
    tree = tree_from_labels(["a", "b"], {"": ("a", 0), "0": ("a", 1)})
    tree_file = write(tmp_path, "tree.json", TreeFile.from_tree(tree).model_dump(by_alias=True))
    code, printed = run(capsys, "atra", "member", only_a_file, tree_file)
    assert (code, printed["result"]) == (0, "ACCEPTED")
    assert printed["witness"][""] == [["q", 0]]

    other = tree_from_labels(["a", "b"], {"": ("a", 0), "1": ("b", 1)})
    other_file = write(tmp_path, "other.json", TreeFile.from_tree(other).model_dump(by_alias=True))
    code, printed = run(capsys, "atra", "member", "--mode", "saf", only_a_file, other_file)
    assert (code, printed["result"]) == (1, "REJECTED")


def test_fin_and_saf_membership_agree_on_finite_trees(capsys, tmp_path):
    b1 = str(tmp_path / "b1.json")
    run(capsys, "atra", "gen-bk", "--k", "1", "--out", b1)
    root_only = tree_from_labels(["b1", "*"], {"": ("b1", 0)})
    tree_file = write(tmp_path, "root.json", TreeFile.from_tree(root_only).model_dump(by_alias=True))
    verdicts = [run(capsys, "atra", "member", "--mode", mode, b1, tree_file) for mode in ("fin", "saf")]
    assert verdicts[0] == verdicts[1]
    assert verdicts[0][0] == 1
    assert verdicts[0][1]["result"] == "REJECTED"


def test_as_prefix_reads_leaves_as_continuations(capsys, tmp_path):
    b1 = str(tmp_path / "b1.json")
    run(capsys, "atra", "gen-bk", "--k", "1", "--out", b1)
    root_only = tree_from_labels(["b1", "*"], {"": ("b1", 0)})
    tree_file = write(tmp_path, "root.json", TreeFile.from_tree(root_only).model_dump(by_alias=True))
    code, printed = run(capsys, "atra", "member", "--as-prefix", b1, tree_file)
    assert (code, printed["result"]) == (0, "ACCEPTED")


def test_nonempty_safety_verdicts(capsys, tmp_path, only_a_file):
    code, printed = run(capsys, "atra", "nonempty-saf", only_a_file)
    assert (code, printed["result"]) == (0, "NONEMPTY")
    empty = write(tmp_path, "empty.json", AutomatonFile.from_atra(empty_automaton(AB)).model_dump(by_alias=True))
    code, printed = run(capsys, "atra", "nonempty-saf", empty)
    assert (code, printed["result"]) == (1, "EMPTY")


#####################
# itca
#####################


def test_itca_verdicts(capsys, tmp_path, dead_machine, final_machine):
    dead = write(tmp_path, "dead.json", MachineFile.from_machine(dead_machine).model_dump(by_alias=True))
    code, printed = run(capsys, "itca", "nonempty", dead)
    assert (code, printed["result"]) == (1, "UNSAT")

    code, printed = run(capsys, "itca", "nonempty", "--budget-levels", "1", dead)
    assert (code, printed["result"]) == (3, "BUDGET")
    assert printed["stats"]["retained"] == 2

    final = write(tmp_path, "final.json", MachineFile.from_machine(final_machine).model_dump(by_alias=True))
    code, printed = run(capsys, "itca", "nonempty", final)
    assert (code, printed["result"]) == (0, "SAT")


#####################
# xpath
#####################


def test_classify_and_parse(capsys):
    code, printed = run(capsys, "xpath", "classify", "e[!( rs*/c*[@a1 = (c/c*)/@a2] ?)]")
    assert (code, printed["value"]) == (0, "safety")
    code, printed = run(capsys, "xpath", "parse", "c | rs")
    assert printed["value"] == "(c|rs)"


def test_eval_lists_encoded_pairs(capsys, tmp_path):
    doc = write(tmp_path, "doc.json", [node.model_dump(by_alias=True) for node in DOC])
    code, printed = run(capsys, "xpath", "eval", "--doc", doc, "c")
    assert code == 0
    assert printed["value"] == [["", "00"], ["", "0001"], ["0001", "000100"]]


def test_sat_verdicts(capsys):
    code, printed = run(capsys, "xpath", "sat-fin", "a & b")
    assert (code, printed["result"]) == (1, "UNSAT")
    code, printed = run(capsys, "xpath", "sat-fin", "--types", "a", "c")
    assert (code, printed["result"]) == (0, "SAT")
    assert printed["witness"][0]["children"]
    code, printed = run(capsys, "xpath", "sat-saf", "e[!(c?)]", "--types", "a")
    assert (code, printed["result"]) == (0, "SAT")


#####################
# ERRORS
#####################


@pytest.mark.parametrize(
    "argv",
    [
        ("xpath", "parse", "c/"),
        ("xpath", "parse", "p/c"),
        ("xpath", "sat-fin", "c"),
        ("xpath", "sat-saf", "--types", "a", "c"),
        ("atra", "gen-bk", "--k", "0"),
    ],
)
def test_bad_input_exits_with_two(capsys, argv):
    code, printed = run(capsys, *argv)
    assert (code, printed["result"]) == (2, "ERROR")
    assert printed["message"]


def test_unreadable_files_exit_with_two(capsys, tmp_path):
    broken = write(tmp_path, "broken.json", "{not json")
    assert run(capsys, "atra", "dual", broken)[0] == 2
    assert run(capsys, "atra", "dual", str(tmp_path / "missing.json"))[0] == 2
    malformed = write(tmp_path, "malformed.json", {"alphabet": ["a"]})
    assert run(capsys, "atra", "dual", malformed)[0] == 2
