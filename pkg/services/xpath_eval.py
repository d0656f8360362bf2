# services/xpath_eval.py
from typing import Dict, FrozenSet, Set, Tuple

from services.trees import ROOT, XmlView
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

Pair = Tuple[str, str]


def _closure(view: XmlView, step) -> Set[Pair]:
    """Reflexive-transitive closure of a functional-or-listed step relation."""
    pairs = set()
    for start in view.elements:
        pending, seen = [start], {start}
        while pending:
            node = pending.pop()
            pairs.add((start, node))
            for following in step(node):
                if following not in seen:
                    seen.add(following)
                    pending.append(following)
    return pairs


def _next(view: XmlView, node: str):
    sibling = view.next_sibling(node)
    return [] if sibling is None else [sibling]


def eval(view: XmlView, query) -> FrozenSet[Pair]:
    """The pairs of element nodes related by query."""
    if isinstance(query, SelfStep):
        return frozenset((n, n) for n in view.elements)
    if isinstance(query, Child):
        return frozenset((n, c) for n in view.elements for c in view.children(n))
    if isinstance(query, NextSib):
        return frozenset((n, s) for n in view.elements for s in _next(view, n))
    if isinstance(query, ChildStar):
        return frozenset(_closure(view, view.children))
    if isinstance(query, NextSibStar):
        return frozenset(_closure(view, lambda n: _next(view, n)))
    if isinstance(query, Concat):
        second: Dict[str, Set[str]] = {}
        for middle, target in eval(view, query.second):
            second.setdefault(middle, set()).add(target)
        return frozenset(
            (start, target)
            for start, middle in eval(view, query.first)
            for target in second.get(middle, ())
        )
    if isinstance(query, Union):
        return eval(view, query.first) | eval(view, query.second)
    if isinstance(query, Filter):
        holding = eval_qual(view, query.qualifier)
        return frozenset(p for p in eval(view, query.query) if p[1] in holding)
    raise TypeError(f"not a query: {query!r}")


def eval_qual(view: XmlView, qualifier) -> FrozenSet[str]:
    """The element nodes at which qualifier holds."""
    if isinstance(qualifier, Not):
        return frozenset(view.elements) - eval_qual(view, qualifier.qualifier)
    if isinstance(qualifier, And):
        return eval_qual(view, qualifier.first) & eval_qual(view, qualifier.second)
    if isinstance(qualifier, Exists):
        return frozenset(start for start, _ in eval(view, qualifier.query))
    if isinstance(qualifier, TypeTest):
        return frozenset(n for n in view.elements if view.type_of(n) == qualifier.name)
    if isinstance(qualifier, AttrCmp):
        return _comparison(view, qualifier)
    raise TypeError(f"not a qualifier: {qualifier!r}")


def _comparison(view: XmlView, cmp: AttrCmp) -> FrozenSet[str]:
    if isinstance(cmp.path, ChildThen):
        right = eval(view, Concat(Child(), cmp.path.query))
    elif isinstance(cmp.path, NextSibThen):
        right = eval(view, Concat(NextSib(), cmp.path.query))
    else:
        right = eval(view, SelfStep())
    holding = set()
    for start, target in right:
        mine, theirs = view.atts[start], view.atts[target]
        if cmp.first not in mine or cmp.second not in theirs:
            continue
        equal = mine[cmp.first] == theirs[cmp.second]
        if equal == (cmp.relation == "="):
            holding.add(start)
    return frozenset(holding)


def satisfies(view: XmlView, query) -> bool:
    """Whether some node is reached from the root by query."""
    return ROOT in eval_qual(view, Exists(query))
