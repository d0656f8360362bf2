# services/formulas.py
import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache, reduce
from typing import Callable, FrozenSet, Iterator, NamedTuple, Union


class FormulaError(ValueError):
    """Raised for malformed formulas, or a hole where none is allowed."""


class Update(str, Enum):
    STORE = "store"
    KEEP = "keep"


@dataclass(frozen=True)
class Atom:
    state: str
    direction: int
    update: Update

    def __post_init__(self):
        if self.direction not in (0, 1):
            raise FormulaError(f"atom direction must be 0 or 1, got {self.direction}")


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Hole:
    pass


Formula = Union[Atom, Top, Bottom, And, Or, Hole]

TRUE = Top()
FALSE = Bottom()
HOLE = Hole()


def keep(state: str, direction: int) -> Atom:
    return Atom(state, direction, Update.KEEP)


def store(state: str, direction: int) -> Atom:
    return Atom(state, direction, Update.STORE)


def conj(*formulas: Formula) -> Formula:
    """Conjunction with the unit and zero folded away."""
    parts = [f for f in formulas if f != TRUE]
    if any(f == FALSE for f in parts):
        return FALSE
    if not parts:
        return TRUE
    return reduce(And, parts)


def disj(*formulas: Formula) -> Formula:
    """Disjunction with the unit and zero folded away."""
    parts = [f for f in formulas if f != FALSE]
    if any(f == TRUE for f in parts):
        return TRUE
    if not parts:
        return FALSE
    return reduce(Or, parts)


class Quadruple(NamedTuple):
    """The states sent to each child, split by whether the register is reloaded."""

    store0: FrozenSet[str] = frozenset()
    keep0: FrozenSet[str] = frozenset()
    store1: FrozenSet[str] = frozenset()
    keep1: FrozenSet[str] = frozenset()

    def stored(self, direction: int) -> FrozenSet[str]:
        return self.store1 if direction else self.store0

    def kept(self, direction: int) -> FrozenSet[str]:
        return self.keep1 if direction else self.keep0

    def union(self, other: "Quadruple") -> "Quadruple":
        return Quadruple(*(mine | theirs for mine, theirs in zip(self, other)))

    def issubset(self, other: "Quadruple") -> bool:
        return all(mine <= theirs for mine, theirs in zip(self, other))

    def is_empty(self) -> bool:
        return not any(self)


EMPTY_QUADRUPLE = Quadruple()


def quadruple_key(quadruple: Quadruple) -> tuple:
    """A total order on quadruples, stable across runs."""
    return tuple(tuple(sorted(part)) for part in quadruple)


def minimize_quadruples(quadruples) -> FrozenSet[Quadruple]:
    """Keeps the componentwise-minimal quadruples."""
    candidates = sorted(set(quadruples), key=lambda r: (sum(map(len, r)), quadruple_key(r)))
    kept: list[Quadruple] = []
    for candidate in candidates:
        if not any(smaller.issubset(candidate) for smaller in kept):
            kept.append(candidate)
    return frozenset(kept)


@lru_cache(maxsize=None)
def minimal_models(formula: Formula) -> FrozenSet[Quadruple]:
    """
    Returns the ⊆-minimal quadruples satisfying a positive Boolean formula.
    An unsatisfiable formula has no models.
    """
    if isinstance(formula, Top):
        return frozenset([EMPTY_QUADRUPLE])
    if isinstance(formula, Bottom):
        return frozenset()
    if isinstance(formula, Atom):
        sets = [set(), set(), set(), set()]
        slot = 2 * formula.direction + (formula.update == Update.KEEP)
        sets[slot].add(formula.state)
        return frozenset([Quadruple(*map(frozenset, sets))])
    if isinstance(formula, And):
        left = minimal_models(formula.left)
        right = minimal_models(formula.right)
        return minimize_quadruples(r.union(s) for r in left for s in right)
    if isinstance(formula, Or):
        return minimize_quadruples(
            minimal_models(formula.left) | minimal_models(formula.right)
        )
    if isinstance(formula, Hole):
        raise FormulaError("a formula with a hole has no models")
    raise FormulaError(f"not a formula: {formula!r}")


def satisfies(quadruple: Quadruple, formula: Formula) -> bool:
    return any(model.issubset(quadruple) for model in minimal_models(formula))


def dual(formula: Formula) -> Formula:
    """Swaps ⊤/⊥ and ∧/∨, leaving atoms alone."""
    if isinstance(formula, Top):
        return FALSE
    if isinstance(formula, Bottom):
        return TRUE
    if isinstance(formula, Atom):
        return formula
    if isinstance(formula, And):
        return Or(dual(formula.left), dual(formula.right))
    if isinstance(formula, Or):
        return And(dual(formula.left), dual(formula.right))
    raise FormulaError("cannot dualize a formula containing a hole")


def atoms(formula: Formula) -> Iterator[Atom]:
    if isinstance(formula, Atom):
        yield formula
    elif isinstance(formula, (And, Or)):
        yield from atoms(formula.left)
        yield from atoms(formula.right)


def has_hole(formula: Formula) -> bool:
    if isinstance(formula, Hole):
        return True
    if isinstance(formula, (And, Or)):
        return has_hole(formula.left) or has_hole(formula.right)
    return False


def map_atoms(formula: Formula, fn: Callable[[Atom], Formula]) -> Formula:
    if isinstance(formula, Atom):
        return fn(formula)
    if isinstance(formula, And):
        return And(map_atoms(formula.left, fn), map_atoms(formula.right, fn))
    if isinstance(formula, Or):
        return Or(map_atoms(formula.left, fn), map_atoms(formula.right, fn))
    return formula


def fill_hole(formula: Formula, replacement: Formula) -> Formula:
    if isinstance(formula, Hole):
        return replacement
    if isinstance(formula, And):
        return And(fill_hole(formula.left, replacement), fill_hole(formula.right, replacement))
    if isinstance(formula, Or):
        return Or(fill_hole(formula.left, replacement), fill_hole(formula.right, replacement))
    return formula


# --- S-expression text form ---

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def format_formula(formula: Formula) -> str:
    if isinstance(formula, Top):
        return "true"
    if isinstance(formula, Bottom):
        return "false"
    if isinstance(formula, Hole):
        return "hole"
    if isinstance(formula, Atom):
        return f"(atom {formula.state} {formula.direction} {formula.update.value})"
    if isinstance(formula, And):
        return f"(and {format_formula(formula.left)} {format_formula(formula.right)})"
    if isinstance(formula, Or):
        return f"(or {format_formula(formula.left)} {format_formula(formula.right)})"
    raise FormulaError(f"not a formula: {formula!r}")


def parse_formula(text: str) -> Formula:
    tokens = _TOKEN.findall(text)
    formula, position = _parse_tokens(tokens, 0)
    if position != len(tokens):
        raise FormulaError(f"trailing input after formula: {' '.join(tokens[position:])}")
    return formula


def _parse_tokens(tokens: list[str], position: int) -> tuple[Formula, int]:
    if position >= len(tokens):
        raise FormulaError("unexpected end of formula")
    token = tokens[position]
    if token == "true":
        return TRUE, position + 1
    if token == "false":
        return FALSE, position + 1
    if token == "hole":
        return HOLE, position + 1
    if token != "(":
        raise FormulaError(f"unexpected token {token!r} at {position}")
    if position + 1 >= len(tokens):
        raise FormulaError("unexpected end of formula")
    head = tokens[position + 1]
    if head in ("and", "or"):
        left, position = _parse_tokens(tokens, position + 2)
        right, position = _parse_tokens(tokens, position)
        node = And(left, right) if head == "and" else Or(left, right)
    elif head == "atom":
        try:
            state, direction, update = tokens[position + 2 : position + 5]
            node = Atom(state, int(direction), Update(update))
        except ValueError as exc:
            raise FormulaError(f"malformed atom at token {position}: {exc}") from exc
        position += 5
    else:
        raise FormulaError(f"unknown connective {head!r}")
    if position >= len(tokens) or tokens[position] != ")":
        raise FormulaError(f"expected ')' at token {position}")
    return node, position + 1
