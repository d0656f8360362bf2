"""Tests for automaton membership, successor steps and the Boolean operations."""
import itertools

import pytest
from hypothesis import given, settings

from services.atra import (
    AutomatonError,
    Thread,
    dualize,
    find_final_run,
    has_final_run,
    has_prefix_run,
    intersect,
    is_final_run,
    step,
    union_,
    universal_automaton,
)
from services.bk import make_b1
from services.trees import ROOT, tree_from_labels
from tests.conftest import AB, CORPUS
from tests.strategies import all_trees, small_trees

#####################
# MEMBERSHIP
#####################


def _nonroot_children(tree):
    return [n + b for n in tree.nonleaves for b in "01" if not tree.is_leaf(n + b)]


ORACLES = {
    "only_a": lambda t: all(t.letter(n) == "a" for n in t.nonleaves),
    "root_datum_repeats": lambda t: any(t.datum(n) == t.datum(ROOT) for n in t.nonleaves if n),
    "left_leaf": lambda t: t.is_leaf("0"),
    "parent_datum_differs": lambda t: any(t.datum(c) != t.datum(c[:-1]) for c in _nonroot_children(t)),
    "universal": lambda t: True,
    "empty": lambda t: False,
}


@settings(max_examples=80)
@pytest.mark.parametrize("name", sorted(ORACLES))
@given(tree=small_trees())
def test_membership_matches_oracle(name, tree):
    assert has_final_run(CORPUS[name](), tree) == ORACLES[name](tree)


def test_b1_accepts_its_witness(b1, b1_witness):
    assert has_final_run(b1, b1_witness)


def test_b1_rejects_three_chain(b1):
    chain = tree_from_labels(["b1", "*"], {"": ("b1", 0), "0": ("b1", 0), "00": ("b1", 0)})
    assert not has_final_run(b1, chain)


def test_prefix_run_reads_leaves_as_open(b1):
    root_only = tree_from_labels(["b1", "*"], {"": ("b1", 0)})
    assert not has_final_run(b1, root_only)
    assert has_prefix_run(b1, root_only)


@given(small_trees())
def test_found_runs_validate(tree):
    for build in CORPUS.values():
        a = build()
        run = find_final_run(a, tree)
        if run is not None:
            assert is_final_run(a, tree, run)


def test_alphabet_mismatch_is_an_error(b1):
    tree = tree_from_labels(AB, {"": ("a", 0)})
    with pytest.raises(AutomatonError):
        has_final_run(b1, tree)


#####################
# STEPS
#####################


def test_step_keeps_the_register():
    u = universal_automaton(AB)
    assert step(u, frozenset([Thread("all", 0)]), "a", 5) == {
        (frozenset([Thread("all", 0)]), frozenset([Thread("all", 0)]))
    }


def test_step_returns_one_pair_per_branch():
    a = CORPUS["root_datum_repeats"]()
    pairs = step(a, frozenset([Thread("r", 0)]), "a", 0)
    assert pairs == {
        (frozenset([Thread("f", 0)]), frozenset()),
        (frozenset(), frozenset([Thread("f", 0)])),
    }


def test_step_rejects_unknown_letters():
    with pytest.raises(AutomatonError):
        step(universal_automaton(AB), frozenset(), "z", 0)


#####################
# BOOLEAN CLOSURE
#####################

PAIRS = list(itertools.combinations(sorted(CORPUS), 2))

# every tree with at most seven nodes over two letters and two data
TREES = list(all_trees(AB, max_nonleaves=3, data=(0, 1)))


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_dual_complements(name):
    a = CORPUS[name]()
    dual = dualize(a)
    mismatches = [t for t in TREES if has_final_run(dual, t) == has_final_run(a, t)]
    assert not mismatches


@pytest.mark.parametrize(("first", "second"), PAIRS)
def test_intersection_and_union(first, second):
    a1, a2 = CORPUS[first](), CORPUS[second]()
    both, either = intersect(a1, a2), union_(a1, a2)
    for tree in TREES:
        in1, in2 = has_final_run(a1, tree), has_final_run(a2, tree)
        assert has_final_run(both, tree) == (in1 and in2)
        assert has_final_run(either, tree) == (in1 or in2)


def test_enumeration_covers_every_small_tree():
    assert len(TREES) == 4 + 2 * 4**2 + 5 * 4**3


def test_intersect_requires_one_alphabet():
    with pytest.raises(AutomatonError):
        intersect(make_b1(), universal_automaton(AB))
