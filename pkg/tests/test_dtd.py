"""Tests for DTDs, their JSON form and the product with counter machines."""
import pytest
from hypothesis import given, settings

from models.document import DocumentNode
from models.dtd_file import DtdFile
from services.atra import AutomatonError
from services.counter_machines import MachineError
from services.dtd import Dtd, ProductStates, product_with_dtd, universal_dtd, xml_shape_dtd
from services.level_solver import nonempty_finite
from services.trees import encode_xml, tree_from_labels
from tests.strategies import documents, small_trees

TYPES, ATTS = ("a", "b"), ("x", "y")


def a_with_b_children() -> Dtd:
    """An a root whose children are attribute-free b leaves, with no root siblings."""
    return DtdFile(
        types=["a", "b"],
        attributes=["x", "y"],
        states=["root", "kid", "none"],
        initial="root",
        finals=["kid", "none"],
        rules=[
            {"state": "root", "letter": "a", "left": "kid", "right": "none"},
            {"state": "kid", "letter": "b", "left": "none", "right": "kid"},
        ],
    ).to_dtd()


@settings(max_examples=50, deadline=None)
@given(tree=small_trees(alphabet=TYPES + ATTS))
def test_universal_dtd_accepts_everything(tree):
    assert universal_dtd(TYPES, ATTS).accepts(tree)


@settings(max_examples=50, deadline=None)
@given(roots=documents(TYPES, ATTS))
def test_shape_dtd_accepts_encoded_documents(roots):
    assert xml_shape_dtd(TYPES, ATTS).accepts(encode_xml(roots, TYPES, ATTS))


@pytest.mark.parametrize(
    "labels",
    [
        {"": ("x", 0)},
        {"": ("a", 0), "0": ("y", 1), "00": ("x", 2)},
        {"": ("a", 0), "0": ("x", 1), "00": ("x", 2)},
        {"": ("a", 0), "0": ("x", 1), "1": ("b", 2)},
    ],
)
def test_shape_dtd_rejects_broken_chains(labels):
    assert not xml_shape_dtd(TYPES, ATTS).accepts(tree_from_labels(TYPES + ATTS, labels))


def test_user_dtd():
    dtd = a_with_b_children()
    good = [DocumentNode(type="a", children=[DocumentNode(type="b"), DocumentNode(type="b")])]
    assert dtd.accepts(encode_xml(good, TYPES, ATTS))
    assert not dtd.accepts(encode_xml([DocumentNode(type="b")], TYPES, ATTS))
    nested = [DocumentNode(type="a", children=[DocumentNode(type="b", children=[DocumentNode(type="b")])])]
    assert not dtd.accepts(encode_xml(nested, TYPES, ATTS))
    sibling = [DocumentNode(type="a"), DocumentNode(type="a")]
    assert not dtd.accepts(encode_xml(sibling, TYPES, ATTS))


def test_intersect_is_conjunction():
    both = a_with_b_children().intersect(xml_shape_dtd(TYPES, ATTS))
    good = encode_xml([DocumentNode(type="a", children=[DocumentNode(type="b")])], TYPES, ATTS)
    assert both.accepts(good)
    attributed = encode_xml([DocumentNode(type="a", atts={"x": 1})], TYPES, ATTS)
    assert xml_shape_dtd(TYPES, ATTS).accepts(attributed)
    assert not both.accepts(attributed)


def test_intersect_needs_the_same_names():
    with pytest.raises(AutomatonError):
        universal_dtd(TYPES, ATTS).intersect(universal_dtd(TYPES, ["x"]))


@pytest.mark.parametrize(
    "rule",
    [("s", "z", "s", "s"), ("s", "a", "s", "t")],
)
def test_rules_must_use_declared_names(rule):
    with pytest.raises(AutomatonError):
        Dtd(frozenset(TYPES), frozenset(), frozenset(["s"]), "s", frozenset(), frozenset([rule]))


def test_dtd_file_round_trip():
    dtd = a_with_b_children()
    assert DtdFile.from_dtd(dtd).to_dtd() == dtd


#####################
# PRODUCT WITH A MACHINE
#####################


def test_product_needs_matching_alphabets(final_machine):
    with pytest.raises(MachineError):
        product_with_dtd(final_machine, universal_dtd(["a", "b"], []))


def test_product_keeps_what_the_dtd_allows(final_machine):
    assert nonempty_finite(product_with_dtd(final_machine, universal_dtd(["a"], []))).nonempty
    refusing = Dtd(frozenset(["a"]), frozenset(), frozenset(["s"]), "s", frozenset(["s"]), frozenset())
    assert not nonempty_finite(product_with_dtd(final_machine, refusing)).nonempty


def test_product_states_lift_membership():
    lifted = ProductStates({"p"})
    assert ("p", "any") in lifted
    assert ("q", "any") not in lifted
