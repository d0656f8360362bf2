# services/xpath_sat.py
import logging
from dataclasses import dataclass
from typing import List, Optional

from models.document import DocumentNode
from services.abstraction import CertificationError, compile_finite, lift_witness
from services.atra import empty_automaton
from services.dtd import Dtd, ProductStates, product_with_dtd, xml_shape_dtd
from services.level_solver import Budget, SearchStats, exists_infinite_with_P, nonempty_finite
from services.safety import compile_inclusion, product_safety
from services.trees import DataTree, check_xml, decode_xml
from services.xpath_ast import ClassificationError, Exists, Fragment, classify
from services.xpath_compile import compile_qualifier
from services.xpath_eval import satisfies


@dataclass
class SatResult:
    satisfiable: bool
    stats: SearchStats
    document: Optional[List[DocumentNode]] = None
    tree: Optional[DataTree] = None


def _constraints(dtd: Dtd) -> Dtd:
    return dtd.intersect(xml_shape_dtd(dtd.types, dtd.attributes))


def xpath_sat_finite(query, dtd: Dtd, budget: Optional[Budget] = None) -> SatResult:
    """Decides whether some finite document valid for dtd satisfies query, with a certified witness."""
    budget = budget or Budget()
    automaton = compile_qualifier(Exists(query), dtd.types, dtd.attributes)
    machine = product_with_dtd(compile_finite(automaton), _constraints(dtd))
    result = nonempty_finite(machine, budget)
    if not result.nonempty:
        return SatResult(False, result.stats)
    shape = result.witness
    attribute_nodes = [n for n in shape.nonleaves if shape.letter(n) in dtd.attributes]
    tree = lift_witness(automaton, shape, attribute_nodes, budget)
    view = check_xml(tree, dtd.types, dtd.attributes)
    if not satisfies(view, query):
        raise CertificationError("the witness document does not satisfy the query")
    if not dtd.accepts(tree):
        raise CertificationError("the witness document is not valid for the DTD")
    logging.info(f"Certified a witness document with {len(view.elements)} elements")
    return SatResult(True, result.stats, decode_xml(tree, dtd.types, dtd.attributes), tree)


def xpath_sat_safety(query, dtd: Dtd, budget: Optional[Budget] = None) -> SatResult:
    """Decides satisfiability over finite or infinite documents, for queries in the safety fragment."""
    fragment = classify(query)
    if fragment not in (Fragment.SAFETY, Fragment.BOTH):
        raise ClassificationError(f"query is {fragment.value}, not safety")
    automaton = compile_qualifier(Exists(query), dtd.types, dtd.attributes)
    machine, prop_states = compile_inclusion(
        product_safety(automaton, empty_automaton(automaton.alphabet))
    )
    product = product_with_dtd(machine, _constraints(dtd))
    stats = SearchStats()
    satisfiable = exists_infinite_with_P(product, ProductStates(prop_states), budget, stats)
    return SatResult(satisfiable, stats)
