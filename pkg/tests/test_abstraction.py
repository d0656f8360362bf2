"""Tests for the data-erasing abstraction and the finite-tree compilation."""
import itertools

import pytest

from services.abstraction import (
    AbstractConfiguration,
    CertificationError,
    abstract,
    abstract_successors,
    atra_nonempty_finite,
    bundle_choices,
    bundles,
    compile_finite,
    lift_witness,
    restricted_growth,
)
from services.atra import Atra, Thread, has_final_run, step, successor_pairs, universal_automaton
from services.formulas import HOLE, Quadruple
from services.level_solver import Budget, BudgetExceeded, itca_accepts
from services.trees import tree_from_labels
from tests.conftest import AB, CORPUS
from tests.strategies import all_trees

ALL = frozenset(["all"])

#####################
# ABSTRACT CONFIGURATIONS
#####################


def test_bundles_group_states_by_datum():
    g = frozenset([Thread("p", 0), Thread("q", 0), Thread("p", 1)])
    assert bundles(g) == {0: frozenset(["p", "q"]), 1: frozenset(["p"])}
    assert abstract(g) == AbstractConfiguration({frozenset(["p", "q"]): 1, frozenset(["p"]): 1})


def test_bundle_choices_union_models():
    u = universal_automaton(AB)
    assert bundle_choices(u, ALL, "a", False) == [Quadruple(keep0=ALL, keep1=ALL)]


@pytest.mark.parametrize("q_eq", [ALL, frozenset()])
def test_abstract_successors_of_universal_automaton(q_eq):
    u = universal_automaton(AB)
    v = AbstractConfiguration({ALL: 2})
    expected = AbstractConfiguration({ALL: 2})
    assert abstract_successors(u, v, "a", q_eq) == {(expected, expected)}


def test_abstract_successors_need_the_equal_bundle():
    with pytest.raises(ValueError):
        abstract_successors(universal_automaton(AB), AbstractConfiguration({ALL: 1}), "a", frozenset(["x"]))


def test_restricted_growth_enumerates_partitions():
    assert list(restricted_growth(3)) == [(0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1), (0, 1, 2)]
    assert list(restricted_growth(0)) == [()]


#####################
# CONCRETE AND ABSTRACT STEPS
#####################


def _embeds(lower: AbstractConfiguration, upper: AbstractConfiguration) -> bool:
    """Each abstract datum of lower maps to a distinct one of upper with a larger bundle."""
    small = [part for part, n in lower.items() for _ in range(n)]
    large = [part for part, n in upper.items() for _ in range(n)]
    return any(
        all(s <= l for s, l in zip(small, chosen)) for chosen in itertools.permutations(large, len(small))
    )


def _pair_below(lower, upper) -> bool:
    return _embeds(lower[0], upper[0]) and _embeds(lower[1], upper[1])


def _small_steps(a: Atra):
    """Configurations of at most three threads over data 0..2, with every letter and node datum 3 for a new one."""
    threads = [Thread(q, d) for q in sorted(a.states) for d in range(3)]
    for size in range(4):
        for g in itertools.combinations(threads, size):
            g = frozenset(g)
            for letter in sorted(a.alphabet):
                for datum in range(4):
                    yield g, letter, datum


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_concrete_steps_are_matched_by_abstract_steps(name):
    a = CORPUS[name]()
    for g, letter, datum in _small_steps(a):
        q_eq = bundles(g).get(datum, frozenset())
        abstract_pairs = abstract_successors(a, abstract(g), letter, q_eq)
        for h0, h1 in successor_pairs(a, g, letter, datum, minimal=False):
            concrete = (abstract(h0), abstract(h1))
            assert any(_pair_below(w, concrete) for w in abstract_pairs), (g, letter, datum)


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_abstract_steps_are_realised_by_concrete_steps(name):
    a = CORPUS[name]()
    for g, letter, datum in _small_steps(a):
        q_eq = bundles(g).get(datum, frozenset())
        concrete = [(abstract(h0), abstract(h1)) for h0, h1 in step(a, g, letter, datum)]
        for w in abstract_successors(a, abstract(g), letter, q_eq):
            assert any(_pair_below(h, w) for h in concrete), (g, letter, datum, w)


#####################
# COMPILED MACHINE
#####################


def _some_labelling_accepted(a, tree) -> bool:
    nonleaves = tree.nonleaves
    return any(
        has_final_run(a, tree.with_data(dict(zip(nonleaves, labels))))
        for labels in restricted_growth(len(nonleaves))
    )


SHAPES = list(all_trees(AB, max_nonleaves=4, data=(0,)))


@pytest.mark.parametrize("name", ["only_a", "root_datum_repeats", "left_leaf", "parent_datum_differs"])
def test_compiled_machine_accepts_shapes_with_some_data(name):
    """The machine accepts a shape iff some data labelling of it is accepted."""
    a = CORPUS[name]()
    machine = compile_finite(a)
    mismatches = [
        tree.nonleaves
        for tree in SHAPES
        if itca_accepts(machine, tree, block_bound=256) != _some_labelling_accepted(a, tree)
    ]
    assert not mismatches


def test_compile_finite_refuses_holes():
    a = Atra.build(AB, ["q"], "q", [], {("q", "a", True): HOLE})
    with pytest.raises(ValueError):
        compile_finite(a)


#####################
# NONEMPTINESS
#####################


@pytest.mark.parametrize("name", ["only_a", "root_datum_repeats", "left_leaf", "parent_datum_differs", "universal"])
def test_nonempty_finite_certifies_witnesses(name):
    a = CORPUS[name]()
    result = atra_nonempty_finite(a, Budget(max_levels=20_000))
    assert result.nonempty
    assert has_final_run(a, result.witness)


def test_b1_is_nonempty(b1):
    result = atra_nonempty_finite(b1)
    assert result.nonempty
    assert result.witness.nonleaves == ["", "0"]


def test_empty_automaton_is_empty():
    result = atra_nonempty_finite(CORPUS["empty"]())
    assert not result.nonempty
    assert result.witness is None


def test_lift_witness_gives_up_without_labelling():
    tree = tree_from_labels(AB, {"": ("a", 0)})
    with pytest.raises(CertificationError):
        lift_witness(CORPUS["parent_datum_differs"](), tree)
    with pytest.raises(BudgetExceeded):
        lift_witness(CORPUS["universal"](), tree, budget=Budget(lift_candidates=0))


def test_lift_witness_finds_repeated_data():
    tree = tree_from_labels(AB, {"": ("a", 0), "0": ("a", 1)})
    lifted = lift_witness(CORPUS["root_datum_repeats"](), tree)
    assert lifted.datum("") == lifted.datum("0")
