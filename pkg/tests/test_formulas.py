"""Tests for positive Boolean formulas, their minimal models and the s-expression form."""
import pytest
from hypothesis import given

from services.formulas import (
    EMPTY_QUADRUPLE,
    FALSE,
    HOLE,
    TRUE,
    And,
    FormulaError,
    Or,
    Quadruple,
    conj,
    disj,
    dual,
    fill_hole,
    format_formula,
    has_hole,
    keep,
    minimal_models,
    parse_formula,
    satisfies,
    store,
)
from tests.strategies import ATOMS, formulas


def quadruple_of(chosen) -> Quadruple:
    sets = [set(), set(), set(), set()]
    for atom in chosen:
        sets[2 * atom.direction + (atom.update.value == "keep")].add(atom.state)
    return Quadruple(*map(frozenset, sets))


#####################
# MINIMAL MODELS
#####################


def test_minimal_models_of_constants():
    assert minimal_models(TRUE) == {EMPTY_QUADRUPLE}
    assert minimal_models(FALSE) == frozenset()


def test_minimal_models_drop_supersets():
    formula = And(keep("q", 0), Or(store("p", 1), TRUE))
    assert minimal_models(formula) == {Quadruple(keep0=frozenset(["q"]))}


def test_disjunction_has_one_model_per_branch():
    models = minimal_models(disj(keep("q", 0), store("q", 1)))
    assert models == {Quadruple(keep0=frozenset(["q"])), Quadruple(store1=frozenset(["q"]))}


def test_hole_has_no_models():
    with pytest.raises(FormulaError):
        minimal_models(And(HOLE, TRUE))


def test_conj_and_disj_fold_constants():
    assert conj() == TRUE
    assert conj(TRUE, FALSE, keep("q", 0)) == FALSE
    assert disj(FALSE, keep("q", 0)) == keep("q", 0)
    assert disj(keep("q", 0), TRUE) == TRUE


@given(formulas)
def test_every_minimal_model_satisfies(formula):
    for model in minimal_models(formula):
        assert satisfies(model, formula)


@given(formulas)
def test_dual_evaluates_the_complement(formula):
    """The dual holds on a set of atoms iff the formula fails on the complementary set."""
    for mask in range(2 ** len(ATOMS)):
        chosen = [a for i, a in enumerate(ATOMS) if mask >> i & 1]
        rest = [a for a in ATOMS if a not in chosen]
        assert satisfies(quadruple_of(chosen), dual(formula)) != satisfies(quadruple_of(rest), formula)


#####################
# HOLES
#####################


def test_fill_hole_replaces_every_hole():
    formula = Or(HOLE, And(keep("q", 0), HOLE))
    assert has_hole(formula)
    filled = fill_hole(formula, TRUE)
    assert not has_hole(filled)
    assert minimal_models(filled) == {EMPTY_QUADRUPLE}


def test_dual_rejects_holes():
    with pytest.raises(FormulaError):
        dual(Or(HOLE, TRUE))


#####################
# S-EXPRESSIONS
#####################


def test_parse_formula_reads_nested_connectives():
    text = "(and (atom q 0 keep) (or true (atom p 1 store)))"
    formula = parse_formula(text)
    assert formula == And(keep("q", 0), Or(TRUE, store("p", 1)))
    assert format_formula(formula) == text


@pytest.mark.parametrize(
    "text",
    ["(and true)", "(atom q 2 keep)", "(atom q 0 copy)", "(xor true true)", "true false", "(or true", ""],
)
def test_parse_formula_rejects_malformed_text(text):
    with pytest.raises(FormulaError):
        parse_formula(text)
