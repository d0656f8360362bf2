# services/xpath_compile.py
import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Set

from services.atra import Atra, AutomatonError, Key, describe, dualize, has_final_run, intersect, rename, union_
from services.formulas import (
    FALSE,
    HOLE,
    TRUE,
    Formula,
    Update,
    atoms,
    disj,
    fill_hole,
    has_hole,
    keep,
    store,
)
from services.trees import DataTree
from services.xpath_ast import (
    And,
    AttrCmp,
    Child,
    ChildStar,
    ChildThen,
    Concat,
    Exists,
    Filter,
    NextSib,
    NextSibStar,
    NextSibThen,
    Not,
    SelfStep,
    TypeTest,
    Union,
)


class HoleReachabilityError(ValueError):
    """A state with a hole can be reached through a register update."""


@dataclass(frozen=True)
class QueryAutomaton(Atra):
    """
    An automaton whose formulas may contain the hole. No state with a hole is
    reachable from the initial state along a path that updates the register.
    """

    __hash__ = None

    def __post_init__(self):
        super().__post_init__()
        holed = {q for (q, _, _), f in self.delta.items() if has_hole(f)}
        tainted = _reachable_after_update(self)
        if holed & tainted:
            raise HoleReachabilityError(
                f"states {sorted(holed & tainted)} hold a hole but follow a register update"
            )

    @classmethod
    def of(cls, a: Atra) -> "QueryAutomaton":
        return cls(a.alphabet, a.states, a.initial, a.finals, dict(a.delta))


def _reachable_after_update(a: Atra) -> Set[str]:
    edges: Dict[str, Set[tuple]] = {q: set() for q in a.states}
    for (q, _, _), formula in a.delta.items():
        for atom in atoms(formula):
            edges[q].add((atom.state, atom.update == Update.STORE))
    reached, pending = {a.initial}, [a.initial]
    while pending:
        q = pending.pop()
        for target, _ in edges[q]:
            if target not in reached:
                reached.add(target)
                pending.append(target)
    tainted = {t for q in reached for t, updates in edges[q] if updates}
    pending = list(tainted)
    while pending:
        q = pending.pop()
        for target, _ in edges[q]:
            if target not in tainted:
                tainted.add(target)
                pending.append(target)
    return tainted


# --- Building blocks ---


class Alphabet:
    """Element types and attribute names of one compilation."""

    def __init__(self, types: Iterable[str], attributes: Iterable[str]):
        self.types = frozenset(types)
        self.attributes = frozenset(attributes)
        if self.types & self.attributes:
            raise AutomatonError(f"names used as both type and attribute: {sorted(self.types & self.attributes)}")
        self.letters = self.types | self.attributes

    def attribute(self, name: str) -> str:
        if name not in self.attributes:
            raise AutomatonError(f"attribute {name!r} is not declared")
        return name


class Rules:
    """Collects transitions that ignore the register unless told otherwise."""

    def __init__(self):
        self.table: Dict[Key, Formula] = {}

    def on(self, state: str, letters: Iterable[str], formula: Formula, eq=None):
        for letter in letters:
            for p in (True, False) if eq is None else (eq,):
                self.table[(state, letter, p)] = formula
        return self


def base_automaton(step, sigma: Alphabet) -> QueryAutomaton:
    """The automata for the single navigation steps; all states are nonfinal."""
    types, attributes = sigma.types, sigma.attributes
    rules = Rules()
    if isinstance(step, SelfStep):
        rules.on("self", types, HOLE)
        states = ["self"]
    elif isinstance(step, Child):
        # down the chain to the first child, then along its siblings
        rules.on("self", types, keep("down", 0))
        rules.on("down", attributes, keep("down", 0))
        for q in ("down", "along"):
            rules.on(q, types, disj(HOLE, keep("along", 1), keep("skip", 0)))
        rules.on("skip", attributes, disj(keep("skip", 0), keep("along", 1)))
        states = ["self", "down", "along", "skip"]
    elif isinstance(step, NextSib):
        rules.on("self", types, disj(keep("next", 1), keep("skip", 0)))
        rules.on("skip", attributes, disj(keep("skip", 0), keep("next", 1)))
        rules.on("next", types, HOLE)
        states = ["self", "skip", "next"]
    elif isinstance(step, ChildStar):
        rules.on("self", types, disj(HOLE, keep("down", 0)))
        rules.on("down", attributes, keep("down", 0))
        for q in ("down", "along"):
            rules.on(q, types, disj(HOLE, keep("down", 0), keep("along", 1), keep("skip", 0)))
        rules.on("skip", attributes, disj(keep("skip", 0), keep("along", 1)))
        states = ["self", "down", "along", "skip"]
    elif isinstance(step, NextSibStar):
        rules.on("self", types, disj(HOLE, keep("self", 1), keep("skip", 0)))
        rules.on("skip", attributes, disj(keep("skip", 0), keep("self", 1)))
        states = ["self", "skip"]
    else:
        raise TypeError(f"not a navigation step: {step!r}")
    return QueryAutomaton.build(sigma.letters, states, "self", [], rules.table)


def substitute(b: Atra, a: Atra) -> Atra:
    """
    Replaces every hole in b's δ(q, x, p) by a's initial δ(q_I, x, p); the
    result starts where b starts.
    """
    if b.alphabet != a.alphabet:
        raise AutomatonError("cannot substitute across different alphabets")
    outer, inner = rename(b, "o."), rename(a, "i.")
    delta = dict(inner.delta)
    for (q, letter, p), formula in outer.delta.items():
        delta[(q, letter, p)] = fill_hole(formula, inner.transition(inner.initial, letter, p))
    return Atra.build(
        b.alphabet,
        outer.states | inner.states,
        outer.initial,
        outer.finals | inner.finals,
        delta,
    )


def fill_holes(b: Atra, formula: Formula) -> Atra:
    return Atra.build(
        b.alphabet,
        b.states,
        b.initial,
        b.finals,
        {key: fill_hole(f, formula) for key, f in b.delta.items()},
    )


# --- Compilation ---


def compile_query(query, types: Iterable[str], attributes: Iterable[str]) -> QueryAutomaton:
    """An automaton accepting a subtree w.r.t. targets iff query reaches a target from its root."""
    return QueryAutomaton.of(_query(query, Alphabet(types, attributes)))


def compile_qualifier(qualifier, types: Iterable[str], attributes: Iterable[str]) -> Atra:
    """An automaton accepting a subtree iff qualifier holds at its root."""
    result = _qualifier(qualifier, Alphabet(types, attributes))
    logging.debug(f"Compiled a qualifier: {describe(result)}")
    return result


def _query(query, sigma: Alphabet) -> Atra:
    if isinstance(query, (SelfStep, Child, NextSib, ChildStar, NextSibStar)):
        return base_automaton(query, sigma)
    if isinstance(query, Concat):
        return substitute(_query(query.first, sigma), _query(query.second, sigma))
    if isinstance(query, Union):
        return union_(_query(query.first, sigma), _query(query.second, sigma))
    if isinstance(query, Filter):
        guard = intersect(base_automaton(SelfStep(), sigma), _qualifier(query.qualifier, sigma))
        return substitute(_query(query.query, sigma), guard)
    raise TypeError(f"not a query: {query!r}")


def _qualifier(qualifier, sigma: Alphabet) -> Atra:
    if isinstance(qualifier, Not):
        return dualize(_qualifier(qualifier.qualifier, sigma))
    if isinstance(qualifier, And):
        return intersect(_qualifier(qualifier.first, sigma), _qualifier(qualifier.second, sigma))
    if isinstance(qualifier, Exists):
        return fill_holes(_query(qualifier.query, sigma), TRUE)
    if isinstance(qualifier, TypeTest):
        if qualifier.name not in sigma.types:
            raise AutomatonError(f"element type {qualifier.name!r} is not declared")
        rules = Rules().on("type", [qualifier.name], TRUE)
        return Atra.build(sigma.letters, ["type"], "type", [], rules.table)
    if isinstance(qualifier, AttrCmp):
        return _comparison(qualifier, sigma)
    raise TypeError(f"not a qualifier: {qualifier!r}")


def _comparison(cmp: AttrCmp, sigma: Alphabet) -> Atra:
    first, second = sigma.attribute(cmp.first), sigma.attribute(cmp.second)
    equal = cmp.relation == "="
    types, attributes = sigma.types, sigma.attributes
    if not isinstance(cmp.path, (ChildThen, NextSibThen)):
        return _self_comparison(first, second, equal, sigma)
    rules = Rules()
    rules.on("start", types, keep("find", 0))
    rules.on("find", attributes - {first}, keep("find", 0))
    if isinstance(cmp.path, ChildThen):
        # the stored datum travels to each child of the context node
        rules.on("find", [first], store("kids", 0))
        rules.on("kids", attributes, keep("kids", 0))
        rules.on("kids", types, disj(HOLE, keep("chain", 0), keep("kids", 1)))
        rules.on("chain", attributes, disj(keep("chain", 0), keep("kids", 1)))
        states = ["start", "find", "kids", "chain"]
    else:
        rules.on("find", [first], disj(store("walk", 0), store("next", 1)))
        rules.on("walk", attributes, disj(keep("walk", 0), keep("next", 1)))
        rules.on("next", types, HOLE)
        states = ["start", "find", "walk", "next"]
    navigate = Atra.build(sigma.letters, states, "start", [], rules.table)
    lookup = Rules()
    lookup.on("start", types, keep("find", 0))
    lookup.on("find", attributes - {second}, keep("find", 0))
    lookup.on("find", [second], TRUE, eq=equal)
    target = Atra.build(sigma.letters, ["start", "find"], "start", [], lookup.table)
    return substitute(navigate, substitute(_query(cmp.path.query, sigma), target))


def _self_comparison(first: str, second: str, equal: bool, sigma: Alphabet) -> Atra:
    """Both attributes sit on the context node's own chain, in either order."""
    types, attributes = sigma.types, sigma.attributes
    rules = Rules()
    rules.on("start", types, keep("find", 0))
    if first == second:
        rules.on("find", attributes - {first}, keep("find", 0))
        rules.on("find", [first], TRUE if equal else FALSE)
        return Atra.build(sigma.letters, ["start", "find"], "start", [], rules.table)
    rules.on("find", attributes - {first, second}, keep("find", 0))
    rules.on("find", [first], store("want2", 0))
    rules.on("find", [second], store("want1", 0))
    for state, wanted in (("want1", first), ("want2", second)):
        rules.on(state, attributes - {wanted}, keep(state, 0))
        rules.on(state, [wanted], TRUE, eq=equal)
    return Atra.build(sigma.letters, ["start", "find", "want1", "want2"], "start", [], rules.table)


def accepts_at(a: Atra, tree: DataTree, node: str, targets: Iterable[str] = ()) -> bool:
    """Whether a accepts the subtree at node, holes holding exactly at the given targets."""
    cut = len(node)
    shifted: FrozenSet[str] = frozenset(t[cut:] for t in targets if t.startswith(node))
    return has_final_run(a, tree.subtree(node), shifted)
