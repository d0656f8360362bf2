"""Tests for data trees, prefixes, the distance and the XML encoding."""
from fractions import Fraction

import pytest
from hypothesis import given, settings

from models.document import DocumentNode
from services.trees import (
    TreeValidationError,
    XmlEncodingError,
    check_xml,
    decode_xml,
    distance,
    encode_xml,
    l_prefix,
    tree_from_labels,
    validate_tree,
)
from tests.strategies import documents, small_trees

#####################
# VALIDATION
#####################


@pytest.mark.parametrize(
    ("entries", "message"),
    [
        ([("", "a", 0), ("2", None, None)], "bit-string"),
        ([("", "a", 0), ("", "a", 0)], "twice"),
        ([("0", None, None), ("1", None, None)], "root"),
        ([("", "a", 0), ("0", "a", 0), ("1", None, None), ("000", None, None)], "prefix-closed"),
        ([("", None, None)], "more than one node"),
        ([("", "a", 0), ("0", None, None)], "exactly one child"),
        ([("", "a", 0), ("0", "a", 1), ("1", None, None)], "carries a label"),
        ([("", "a", None), ("0", None, None), ("1", None, None)], "missing its letter"),
        ([("", "z", 0), ("0", None, None), ("1", None, None)], "not in the alphabet"),
    ],
)
def test_validate_tree_reports_first_violation(entries, message):
    """Each broken tree names the invariant it violates."""
    with pytest.raises(TreeValidationError, match=message):
        validate_tree(["a"], entries)


def test_tree_from_labels_adds_leaves():
    tree = tree_from_labels(["a"], {"": ("a", 3), "1": ("a", 4)})
    assert tree.nonleaves == ["", "1"]
    assert tree.leaves == ["0", "10", "11"]
    assert tree.datum("1") == 4


def test_subtree_reroots():
    tree = tree_from_labels(["a", "b"], {"": ("a", 0), "1": ("b", 1), "10": ("a", 2)})
    sub = tree.subtree("1")
    assert sub.letter("") == "b"
    assert sub.datum("0") == 2
    with pytest.raises(TreeValidationError):
        tree.subtree("0")


#####################
# PREFIXES AND DISTANCE
#####################


def test_l_prefix_truncates_deep_nonleaves():
    tree = tree_from_labels(["a"], {"": ("a", 0), "0": ("a", 1), "00": ("a", 2)})
    prefix = l_prefix(tree, 1)
    assert prefix.nonleaves == [""]
    assert prefix.truncated == frozenset(["0"])
    with pytest.raises(ValueError):
        l_prefix(tree, 0)


def test_distance_of_trees_differing_below_root():
    first = tree_from_labels(["a", "b"], {"": ("a", 0), "0": ("a", 0)})
    second = tree_from_labels(["a", "b"], {"": ("a", 0), "0": ("b", 0)})
    assert distance(first, second) == Fraction(1, 2)
    assert distance(first, first) == 0


@given(small_trees())
def test_l_prefix_is_idempotent(tree):
    for l in range(1, tree.depth + 1):
        once = l_prefix(tree, l)
        assert l_prefix(once, l) == once


@settings(max_examples=60)
@given(small_trees(), small_trees(), small_trees())
def test_distance_is_an_ultrametric(x, y, z):
    assert distance(x, y) == distance(y, x)
    assert (distance(x, y) == 0) == (x == y)
    assert distance(x, z) <= max(distance(x, y), distance(y, z))


#####################
# XML ENCODING
#####################

DOC = [
    DocumentNode(
        type="a",
        atts={"y": 2, "x": 1},
        children=[DocumentNode(type="b", atts={"x": 1}), DocumentNode(type="a")],
    ),
    DocumentNode(type="b"),
]


def test_encode_xml_chains_sorted_attributes():
    tree = encode_xml(DOC, ["a", "b"], ["x", "y"])
    assert tree.letter("") == "a"
    assert (tree.letter("0"), tree.letter("00")) == ("x", "y")
    assert tree.letter("000") == "b"
    # the root's younger sibling hangs right of its chain end
    assert tree.letter("001") == "b"
    assert tree.datum("") not in {1, 2}


def test_decode_xml_inverts_encode():
    tree = encode_xml(DOC, ["a", "b"], ["x", "y"])
    assert decode_xml(tree, ["a", "b"], ["x", "y"]) == DOC


@pytest.mark.parametrize(
    "document",
    [DocumentNode(type="c"), DocumentNode(type="a", atts={"z": 0})],
)
def test_encode_xml_rejects_unknown_names(document):
    with pytest.raises(XmlEncodingError):
        encode_xml(document, ["a"], ["x"])


def test_check_xml_rejects_attribute_root():
    tree = tree_from_labels(["a", "x"], {"": ("x", 0)})
    with pytest.raises(XmlEncodingError):
        check_xml(tree, ["a"], ["x"])


@given(documents())
def test_encoded_documents_decode_back(roots):
    tree = encode_xml(roots, ["a", "b"], ["x", "y"])
    view = check_xml(tree, ["a", "b"], ["x", "y"])
    assert len(view.elements) == sum(1 for _ in _walk(roots))
    assert decode_xml(tree, ["a", "b"], ["x", "y"]) == roots


def _walk(nodes):
    for node in nodes:
        yield node
        yield from _walk(node.children)
