# services/dtd.py
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Container, Dict, FrozenSet, Hashable, Iterable, List, Tuple

from services.atra import AutomatonError
from services.counter_machines import Machine, MachineError, Transition
from services.trees import ROOT, DataTree

Rule = Tuple[Hashable, str, Hashable, Hashable]


@dataclass(frozen=True)
class Dtd:
    """
    A nondeterministic top-down tree automaton over element types and
    attribute names. A leaf is accepted in a final state.
    """

    types: FrozenSet[str]
    attributes: FrozenSet[str]
    states: FrozenSet[Hashable]
    initial: Hashable
    finals: FrozenSet[Hashable]
    rules: FrozenSet[Rule]
    _index: Dict[Tuple[Hashable, str], List[Tuple[Hashable, Hashable]]] = field(
        default=None, compare=False, repr=False
    )

    def __post_init__(self):
        letters = self.types | self.attributes
        if self.initial not in self.states:
            raise AutomatonError(f"initial DTD state {self.initial!r} is not a state")
        if not self.finals <= self.states:
            raise AutomatonError("final DTD states must be states")
        index = defaultdict(list)
        for state, letter, left, right in sorted(self.rules, key=repr):
            if letter not in letters:
                raise AutomatonError(f"DTD rule on unknown letter {letter!r}")
            for s in (state, left, right):
                if s not in self.states:
                    raise AutomatonError(f"DTD rule names unknown state {s!r}")
            index[(state, letter)].append((left, right))
        object.__setattr__(self, "_index", dict(index))

    @property
    def letters(self) -> FrozenSet[str]:
        return self.types | self.attributes

    def successors(self, state: Hashable, letter: str) -> List[Tuple[Hashable, Hashable]]:
        return self._index.get((state, letter), [])

    def accepts(self, tree: DataTree) -> bool:
        """Bottom-up: the states from which each subtree is accepted."""
        accepting: Dict[str, FrozenSet[Hashable]] = {}
        for node in sorted(tree.nodes, key=lambda n: -len(n)):
            if tree.is_leaf(node):
                accepting[node] = self.finals
                continue
            letter = tree.letter(node)
            accepting[node] = frozenset(
                state
                for state, x, left, right in self.rules
                if x == letter and left in accepting[node + "0"] and right in accepting[node + "1"]
            )
        return self.initial in accepting[ROOT]

    def intersect(self, other: "Dtd") -> "Dtd":
        if self.types != other.types or self.attributes != other.attributes:
            raise AutomatonError("DTDs over different names cannot be intersected")
        pairs = [(s, t) for s in self.states for t in other.states]
        rules = frozenset(
            ((s, t), letter, (s0, t0), (s1, t1))
            for s, t in pairs
            for letter in self.letters
            for s0, s1 in self.successors(s, letter)
            for t0, t1 in other.successors(t, letter)
        )
        return Dtd(
            types=self.types,
            attributes=self.attributes,
            states=frozenset(pairs),
            initial=(self.initial, other.initial),
            finals=frozenset((s, t) for s in self.finals for t in other.finals),
            rules=rules,
        )


def universal_dtd(types: Iterable[str], attributes: Iterable[str]) -> Dtd:
    types, attributes = frozenset(types), frozenset(attributes)
    return Dtd(
        types=types,
        attributes=attributes,
        states=frozenset(["any"]),
        initial="any",
        finals=frozenset(["any"]),
        rules=frozenset(("any", x, "any", "any") for x in types | attributes),
    )


def xml_shape_dtd(types: Iterable[str], attributes: Iterable[str]) -> Dtd:
    """
    The trees that encode documents: every element is followed by a chain of
    distinct attributes in increasing name order, whose last node holds the
    first child on the left and the next sibling on the right.
    """
    types, attributes = frozenset(types), frozenset(attributes)
    names = [""] + sorted(attributes)
    rules = set()
    for a in types:
        rules.add(("elem", a, "elem", "elem"))
        rules.add(("elem", a, "attr:", "leaf"))
    for last in names:
        for x in attributes:
            if x > last:
                rules.add((f"attr:{last}", x, f"attr:{x}", "leaf"))
                rules.add((f"attr:{last}", x, "elem", "elem"))
    return Dtd(
        types=types,
        attributes=attributes,
        states=frozenset(["elem", "leaf"] + [f"attr:{name}" for name in names]),
        initial="elem",
        finals=frozenset(["elem", "leaf"]),
        rules=frozenset(rules),
    )


class DtdProduct(Machine):
    """Runs a counter machine and a DTD in lockstep; silent moves leave the DTD state alone."""

    def __init__(self, machine: Machine, dtd: Dtd):
        if machine.alphabet != dtd.letters:
            raise MachineError(
                f"machine alphabet {sorted(machine.alphabet)} differs from DTD names {sorted(dtd.letters)}"
            )
        self.machine = machine
        self.dtd = dtd
        self.alphabet = machine.alphabet
        self.kind = machine.kind
        self.initial = (machine.initial, dtd.initial)

    def is_final(self, state) -> bool:
        inner, s = state
        return self.machine.is_final(inner) and s in self.dtd.finals

    def transitions(self, state) -> List[Transition]:
        inner, s = state
        found = []
        for transition in self.machine.transitions(inner):
            if transition.letter is None:
                found.append(Transition(None, transition.instruction, ((transition.targets[0], s),)))
                continue
            left, right = transition.targets
            for s0, s1 in self.dtd.successors(s, transition.letter):
                found.append(Transition(transition.letter, transition.instruction, ((left, s0), (right, s1))))
        return found


class ProductStates:
    """Lifts a set of machine states to the product with a DTD."""

    def __init__(self, states: Container):
        self.states = states

    def __contains__(self, state) -> bool:
        return state[0] in self.states


def product_with_dtd(machine: Machine, dtd: Dtd) -> DtdProduct:
    return DtdProduct(machine, dtd)
