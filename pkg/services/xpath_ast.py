# services/xpath_ast.py
import typing
from dataclasses import dataclass
from enum import Enum


class ForwardnessError(ValueError):
    """Raised for an axis or comparison shape outside the forward fragment."""


class ClassificationError(ValueError):
    """Raised when a procedure needs a fragment the query is not in."""


# --- Queries ---


@dataclass(frozen=True)
class SelfStep:
    pass


@dataclass(frozen=True)
class Child:
    pass


@dataclass(frozen=True)
class NextSib:
    pass


@dataclass(frozen=True)
class ChildStar:
    pass


@dataclass(frozen=True)
class NextSibStar:
    pass


@dataclass(frozen=True)
class Concat:
    first: "Query"
    second: "Query"


@dataclass(frozen=True)
class Union:
    first: "Query"
    second: "Query"


@dataclass(frozen=True)
class Filter:
    query: "Query"
    qualifier: "Qualifier"


# --- Qualifiers ---


@dataclass(frozen=True)
class Not:
    qualifier: "Qualifier"


@dataclass(frozen=True)
class And:
    first: "Qualifier"
    second: "Qualifier"


@dataclass(frozen=True)
class Exists:
    query: "Query"


@dataclass(frozen=True)
class TypeTest:
    name: str


@dataclass(frozen=True)
class Self:
    """The right path of a comparison that stays at the context node."""


@dataclass(frozen=True)
class ChildThen:
    query: "Query"


@dataclass(frozen=True)
class NextSibThen:
    query: "Query"


@dataclass(frozen=True)
class AttrCmp:
    """@first relation path/@second, the left path being the context node."""

    first: str
    relation: str
    path: "ComparisonPath"
    second: str

    def __post_init__(self):
        if self.relation not in ("=", "!="):
            raise ValueError(f"unknown comparison {self.relation!r}")


Query = typing.Union[SelfStep, Child, NextSib, ChildStar, NextSibStar, Concat, Union, Filter]
Qualifier = typing.Union[Not, And, Exists, TypeTest, AttrCmp]
ComparisonPath = typing.Union[Self, ChildThen, NextSibThen]

# queries that may need a node unboundedly far away
FAR_REACHING = (Child, ChildStar, NextSibStar)


class Fragment(str, Enum):
    SAFETY = "safety"
    CO_SAFETY = "co-safety"
    NEITHER = "neither"
    BOTH = "both"


def _parities(node, negations: int = 0) -> typing.Iterator[int]:
    """The negation parity above every far-reaching step."""
    if isinstance(node, FAR_REACHING):
        yield negations % 2
    elif isinstance(node, (Concat, Union, And)):
        yield from _parities(node.first, negations)
        yield from _parities(node.second, negations)
    elif isinstance(node, Filter):
        yield from _parities(node.query, negations)
        yield from _parities(node.qualifier, negations)
    elif isinstance(node, Not):
        yield from _parities(node.qualifier, negations + 1)
    elif isinstance(node, Exists):
        yield from _parities(node.query, negations)
    elif isinstance(node, AttrCmp):
        if isinstance(node.path, ChildThen):
            yield negations % 2
        if isinstance(node.path, (ChildThen, NextSibThen)):
            yield from _parities(node.path.query, negations)


def classify(node) -> Fragment:
    parities = set(_parities(node))
    if not parities:
        return Fragment.BOTH
    if parities == {1}:
        return Fragment.SAFETY
    if parities == {0}:
        return Fragment.CO_SAFETY
    return Fragment.NEITHER


def format_query(node) -> str:
    """Renders a query or qualifier in the concrete syntax, fully parenthesised where needed."""
    if isinstance(node, SelfStep):
        return "e"
    if isinstance(node, Child):
        return "c"
    if isinstance(node, NextSib):
        return "rs"
    if isinstance(node, ChildStar):
        return "c*"
    if isinstance(node, NextSibStar):
        return "rs*"
    if isinstance(node, Concat):
        return f"{_step(node.first)}/{_step(node.second)}"
    if isinstance(node, Union):
        return f"({format_query(node.first)}|{format_query(node.second)})"
    if isinstance(node, Filter):
        return f"{_step(node.query)}[{format_query(node.qualifier)}]"
    if isinstance(node, Not):
        return f"!({format_query(node.qualifier)})"
    if isinstance(node, And):
        return f"({format_query(node.first)} & {format_query(node.second)})"
    if isinstance(node, Exists):
        return f"({format_query(node.query)})?"
    if isinstance(node, TypeTest):
        return node.name
    if isinstance(node, AttrCmp):
        if isinstance(node.path, Self):
            path = "e"
        else:
            head = "c" if isinstance(node.path, ChildThen) else "rs"
            path = f"{head}/{_step(node.path.query)}"
        return f"@{node.first} {node.relation} {path}/@{node.second}"
    raise TypeError(f"not a query or qualifier: {node!r}")


def _step(query) -> str:
    text = format_query(query)
    return f"({text})" if isinstance(query, Concat) else text


def subterms(node) -> typing.Iterator[object]:
    """Every query and qualifier inside node, node included."""
    yield node
    if isinstance(node, (Concat, Union, And)):
        yield from subterms(node.first)
        yield from subterms(node.second)
    elif isinstance(node, Filter):
        yield from subterms(node.query)
        yield from subterms(node.qualifier)
    elif isinstance(node, Not):
        yield from subterms(node.qualifier)
    elif isinstance(node, Exists):
        yield from subterms(node.query)
    elif isinstance(node, AttrCmp) and isinstance(node.path, (ChildThen, NextSibThen)):
        yield from subterms(node.path.query)


def names(node) -> typing.Tuple[typing.FrozenSet[str], typing.FrozenSet[str]]:
    """The element types and attribute names a query mentions."""
    types, attributes = set(), set()
    for term in subterms(node):
        if isinstance(term, TypeTest):
            types.add(term.name)
        if isinstance(term, AttrCmp):
            attributes |= {term.first, term.second}
    return frozenset(types), frozenset(attributes)
