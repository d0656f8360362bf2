import pytest

from services.atra import Atra, empty_automaton, universal_automaton
from services.bk import make_b1
from services.counter_machines import ExplicitMachine, Ifz, Inc, Transition
from services.formulas import FALSE, TRUE, conj, disj, keep, store
from services.trees import tree_from_labels

AB = ("a", "b")


def _both(letters, state, formula):
    return {(state, x, p): formula for x in letters for p in (True, False)}


def only_a() -> Atra:
    """Every nonleaf node is labelled a."""
    return Atra.build(AB, ["q"], "q", ["q"], _both(["a"], "q", conj(keep("q", 0), keep("q", 1))))


def root_datum_repeats() -> Atra:
    """Some node below the root carries the root's datum."""
    rules = _both(AB, "r", disj(keep("f", 0), keep("f", 1)))
    for x in AB:
        rules[("f", x, True)] = TRUE
        rules[("f", x, False)] = disj(keep("f", 0), keep("f", 1))
    return Atra.build(AB, ["r", "f"], "r", [], rules)


def left_leaf() -> Atra:
    """The root's left child is a leaf."""
    return Atra.build(AB, ["r", "l", "any"], "r", ["l", "any"], {
        **_both(AB, "r", conj(keep("l", 0), keep("any", 1))),
        **_both(AB, "any", conj(keep("any", 0), keep("any", 1))),
    })


def parent_datum_differs() -> Atra:
    """Some node's datum differs from its parent's."""
    step = disj(store("p", 0), store("p", 1), store("r", 0), store("r", 1))
    rules = {**_both(AB, "r", step)}
    for x in AB:
        rules[("p", x, False)] = TRUE
        rules[("p", x, True)] = FALSE
    return Atra.build(AB, ["r", "p"], "r", [], rules)


CORPUS = {
    "only_a": only_a,
    "root_datum_repeats": root_datum_repeats,
    "left_leaf": left_leaf,
    "parent_datum_differs": parent_datum_differs,
    "universal": lambda: universal_automaton(AB),
    "empty": lambda: empty_automaton(AB),
}


@pytest.fixture(params=sorted(CORPUS))
def corpus_automaton(request) -> Atra:
    return CORPUS[request.param]()


@pytest.fixture
def b1() -> Atra:
    return make_b1()


@pytest.fixture
def b1_witness():
    return tree_from_labels(["b1", "*"], {"": ("b1", 0), "0": ("b1", 0)})


@pytest.fixture
def final_machine() -> ExplicitMachine:
    """Accepts the one-node trees labelled a."""
    return ExplicitMachine(["a"], ["r", "f"], "r", ["f"], 1, [("r", Transition("a", Inc(1), ("f", "f")))])


@pytest.fixture
def dead_machine() -> ExplicitMachine:
    """Increments, then needs the counter to be zero: accepts nothing."""
    return ExplicitMachine(
        ["a"],
        ["r", "s", "f"],
        "r",
        ["f"],
        1,
        [
            ("r", Transition(None, Inc(1), ("s",))),
            ("s", Transition("a", Ifz(1), ("f", "f"))),
        ],
    )
