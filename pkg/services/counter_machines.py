# services/counter_machines.py
import itertools
from abc import ABC, abstractmethod
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import (
    Dict,
    FrozenSet,
    Hashable,
    Iterable,
    Iterator,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

from utils.antichains import leq_matrix

Counter = Hashable
State = Hashable


class MachineError(ValueError):
    """Raised for an ill-formed counter machine."""


class Valuation(Mapping):
    """
    An immutable sparse counter valuation: absent counters are 0 and only
    positive values are stored.
    """

    __slots__ = ("_values", "_hash")

    def __init__(self, values: Optional[Mapping[Counter, int]] = None):
        cleaned = {}
        for counter, count in (values or {}).items():
            if count < 0:
                raise MachineError(f"counter {counter!r} cannot hold {count}")
            if count:
                cleaned[counter] = count
        self._values = cleaned
        self._hash = hash(frozenset(cleaned.items()))

    def __getitem__(self, counter: Counter) -> int:
        return self._values[counter]

    def __iter__(self):
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if isinstance(other, Valuation):
            return self._hash == other._hash and self._values == other._values
        return NotImplemented

    def __repr__(self) -> str:
        inside = ", ".join(f"{c!r}: {n}" for c, n in self._values.items())
        return f"Valuation({{{inside}}})"

    def count(self, counter: Counter) -> int:
        return self._values.get(counter, 0)

    def with_count(self, counter: Counter, count: int) -> "Valuation":
        values = dict(self._values)
        values[counter] = count
        return Valuation(values)

    def plus(self, counter: Counter, amount: int = 1) -> "Valuation":
        return self.with_count(counter, self.count(counter) + amount)

    def minus(self, counter: Counter) -> "Valuation":
        """Decrements, clipping at 0."""
        return self.with_count(counter, max(self.count(counter) - 1, 0))

    def total(self) -> int:
        return sum(self._values.values())

    def leq(self, other: "Valuation") -> bool:
        return all(count <= other.count(c) for c, count in self._values.items())

    def join(self, other: "Valuation") -> "Valuation":
        values = dict(self._values)
        for counter, count in other.items():
            values[counter] = max(values.get(counter, 0), count)
        return Valuation(values)


ZERO = Valuation()


# --- Instructions ---


@dataclass(frozen=True)
class Inc:
    counter: Counter


@dataclass(frozen=True)
class Dec:
    counter: Counter


@dataclass(frozen=True)
class Ifz:
    counter: Counter


@dataclass(frozen=True)
class Transfer:
    """Moves the whole value of counter, split in any way among targets."""

    counter: Counter
    targets: FrozenSet[Counter] = frozenset()

    def __post_init__(self):
        if self.counter in self.targets:
            raise MachineError(f"transfer of {self.counter!r} lists itself as a target")


Instruction = Union[Inc, Dec, Ifz, Transfer]


def as_transfer(instruction: Instruction) -> Instruction:
    """A zero test is a transfer to no counter."""
    if isinstance(instruction, Ifz):
        return Transfer(instruction.counter, frozenset())
    return instruction


def splits(amount: int, targets: Sequence[Counter]) -> Iterator[Dict[Counter, int]]:
    """All ways of distributing amount units over the targets."""
    if not targets:
        if amount == 0:
            yield {}
        return
    head, rest = targets[0], targets[1:]
    if not rest:
        yield {head: amount}
        return
    for share in range(amount + 1):
        for remainder in splits(amount - share, rest):
            yield {head: share, **remainder}


def exact_step(v: Valuation, instruction: Instruction) -> FrozenSet[Valuation]:
    c = instruction.counter
    if isinstance(instruction, Inc):
        return frozenset([v.plus(c)])
    if isinstance(instruction, Dec):
        return frozenset([v.with_count(c, v.count(c) - 1)]) if v.count(c) else frozenset()
    if isinstance(instruction, Ifz):
        return frozenset([v]) if v.count(c) == 0 else frozenset()
    if isinstance(instruction, Transfer):
        base = v.with_count(c, 0)
        results = set()
        for share in splits(v.count(c), sorted(instruction.targets, key=repr)):
            values = dict(base)
            for target, amount in share.items():
                values[target] = values.get(target, 0) + amount
            results.add(Valuation(values))
        return frozenset(results)
    raise MachineError(f"unknown instruction {instruction!r}")


def lazy_step(v: Valuation, instruction: Instruction) -> FrozenSet[Valuation]:
    """Error-free steps, plus decrementing 0 to 0."""
    if isinstance(instruction, Dec) and v.count(instruction.counter) == 0:
        return frozenset([v])
    return exact_step(v, instruction)


# --- Machines ---


class MachineKind(str, Enum):
    ITCA = "itca"
    ITCANT = "itcant"


class Transition(NamedTuple):
    letter: Optional[str]
    instruction: Instruction
    targets: Tuple[State, ...]


class Machine(ABC):
    """A counter machine on binary trees, explored one control state at a time."""

    alphabet: FrozenSet[str]
    initial: State
    kind: MachineKind

    @abstractmethod
    def is_final(self, state: State) -> bool:
        ...

    @abstractmethod
    def transitions(self, state: State) -> Iterable[Transition]:
        ...


class ExplicitMachine(Machine):
    """A table-backed machine with counters 1..k."""

    def __init__(
        self,
        alphabet: Iterable[str],
        states: Iterable[State],
        initial: State,
        finals: Iterable[State],
        counters: int,
        transitions: Iterable[Tuple[State, Transition]],
    ):
        self.alphabet = frozenset(alphabet)
        self.states = frozenset(states)
        self.initial = initial
        self.finals = frozenset(finals)
        self.counters = counters
        self._table: Dict[State, List[Transition]] = defaultdict(list)
        if initial not in self.states:
            raise MachineError(f"initial state {initial!r} is not a state")
        if not self.finals <= self.states:
            raise MachineError("final states must be states")
        kinds = set()
        for source, transition in transitions:
            self._check(source, transition)
            if isinstance(transition.instruction, Ifz):
                kinds.add(MachineKind.ITCA)
            if isinstance(transition.instruction, Transfer):
                kinds.add(MachineKind.ITCANT)
            self._table[source].append(transition)
        if len(kinds) > 1:
            raise MachineError("a machine may use zero tests or transfers, not both")
        self.kind = kinds.pop() if kinds else MachineKind.ITCA

    def _check(self, source: State, transition: Transition):
        if source not in self.states:
            raise MachineError(f"transition from unknown state {source!r}")
        expected = 1 if transition.letter is None else 2
        if len(transition.targets) != expected:
            raise MachineError(
                f"a {'letter' if expected == 2 else 'silent'} transition needs "
                f"{expected} target(s), got {len(transition.targets)}"
            )
        if transition.letter is not None and transition.letter not in self.alphabet:
            raise MachineError(f"unknown letter {transition.letter!r}")
        for target in transition.targets:
            if target not in self.states:
                raise MachineError(f"transition to unknown state {target!r}")
        instruction = transition.instruction
        used = [instruction.counter]
        if isinstance(instruction, Transfer):
            used += list(instruction.targets)
        for counter in used:
            if not isinstance(counter, int) or not 1 <= counter <= self.counters:
                raise MachineError(f"counter {counter!r} is outside 1..{self.counters}")

    def is_final(self, state: State) -> bool:
        return state in self.finals

    def transitions(self, state: State) -> List[Transition]:
        return list(self._table.get(state, ()))

    @property
    def epsilon_cycle_free(self) -> bool:
        return not has_epsilon_cycle(self, self.states)


def control_graph(machine: Machine, roots: Iterable[State]) -> Dict[State, List[Transition]]:
    """The control states reachable from roots, ignoring counters."""
    graph: Dict[State, List[Transition]] = {}
    pending = list(roots)
    while pending:
        state = pending.pop()
        if state in graph:
            continue
        graph[state] = list(machine.transitions(state))
        for transition in graph[state]:
            pending.extend(t for t in transition.targets if t not in graph)
    return graph


def has_epsilon_cycle(machine: Machine, roots: Iterable[State]) -> bool:
    graph = control_graph(machine, roots)
    colour: Dict[State, int] = {}
    for start in graph:
        if start in colour:
            continue
        colour[start] = 1
        stack = [(start, iter(graph[start]))]
        while stack:
            state, edges = stack[-1]
            for transition in edges:
                if transition.letter is not None:
                    continue
                target = transition.targets[0]
                if colour.get(target) == 1:
                    return True
                if target not in colour:
                    colour[target] = 1
                    stack.append((target, iter(graph[target])))
                    break
            else:
                colour[state] = 2
                stack.pop()
    return False


# --- Levels ---


class Config(NamedTuple):
    state: State
    valuation: Valuation


Level = FrozenSet[Config]


class Move(NamedTuple):
    """How one configuration advanced: a letter (or None) and its children."""

    letter: Optional[str]
    children: Tuple[Config, ...]


def initial_level(machine: Machine) -> Level:
    return frozenset([Config(machine.initial, ZERO)])


def config_options(machine: Machine, config: Config) -> List[Move]:
    """Each child of a letter transition takes its own lazy result of the instruction."""
    options = []
    for transition in machine.transitions(config.state):
        results = sorted(lazy_step(config.valuation, transition.instruction), key=repr)
        per_child = [results] * len(transition.targets)
        for chosen in itertools.product(*per_child):
            children = tuple(
                Config(target, result) for target, result in zip(transition.targets, chosen)
            )
            options.append(Move(transition.letter, children))
    return options


def level_moves(machine: Machine, level: Level) -> Iterator[Tuple[Level, Dict[Config, Move]]]:
    """
    Every successor level together with the move chosen for each of its
    nonfinal configurations. Final configurations are dropped; a nonfinal
    configuration without moves blocks the level.
    """
    active = sorted(
        (c for c in level if not machine.is_final(c.state)), key=lambda c: repr(c)
    )
    options = [config_options(machine, config) for config in active]
    seen = set()
    for combination in itertools.product(*options):
        successor = frozenset(child for move in combination for child in move.children)
        if successor in seen:
            continue
        seen.add(successor)
        yield successor, dict(zip(active, combination))


def level_successors(machine: Machine, level: Level) -> FrozenSet[Level]:
    return frozenset(successor for successor, _ in level_moves(machine, level))


def level_leq(lower: Level, upper: Level) -> bool:
    """True iff every configuration of lower is pointwise below one of upper in the same state."""
    if not lower:
        return True
    by_state: Dict[State, List[Valuation]] = defaultdict(list)
    for config in upper:
        by_state[config.state].append(config.valuation)
    grouped: Dict[State, List[Valuation]] = defaultdict(list)
    for config in lower:
        if config.state not in by_state:
            return False
        grouped[config.state].append(config.valuation)
    return all(
        leq_matrix(valuations, by_state[state]).any(axis=1).all()
        for state, valuations in grouped.items()
    )


def level_states(level: Level) -> FrozenSet[State]:
    return frozenset(config.state for config in level)


def level_sum(level: Level) -> int:
    return max((config.valuation.total() for config in level), default=0)


def describe_level(level: Level) -> str:
    return "{" + ", ".join(
        f"({c.state!r}, {dict(c.valuation)})" for c in sorted(level, key=repr)
    ) + "}"
