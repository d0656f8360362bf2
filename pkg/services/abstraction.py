# services/abstraction.py
import itertools
import logging
from collections import defaultdict
from functools import reduce
from typing import Dict, FrozenSet, Iterable, Iterator, List, NamedTuple, Optional, Tuple

from services.atra import Atra, Configuration, has_final_run
from services.counter_machines import (
    Dec,
    Ifz,
    Inc,
    Machine,
    MachineKind,
    Transition,
    Valuation,
)
from services.formulas import (
    EMPTY_QUADRUPLE,
    Quadruple,
    minimal_models,
    minimize_quadruples,
    quadruple_key,
)
from services.level_solver import Budget, BudgetExceeded, SolverResult, nonempty_finite
from services.trees import DataTree
from utils.antichains import minimize

StateSet = FrozenSet[str]
EMPTY: StateSet = frozenset()


class CertificationError(RuntimeError):
    """A witness failed its re-check; this is a bug, not an answer."""


class AbstractConfiguration(Valuation):
    """Counts, per nonempty set of states, the data whose bundle is that set."""

    def __repr__(self) -> str:
        inside = ", ".join(
            f"{{{', '.join(sorted(part))}}}: {n}" for part, n in sorted(self.items(), key=lambda i: set_key(i[0]))
        )
        return f"AbstractConfiguration({{{inside}}})"


def set_key(states: StateSet) -> tuple:
    return (len(states), tuple(sorted(states)))


def bundles(g: Configuration) -> Dict[int, StateSet]:
    """The bundle of each datum: the states it is paired with."""
    grouped: Dict[int, set] = defaultdict(set)
    for thread in g:
        grouped[thread.datum].add(thread.state)
    return {datum: frozenset(states) for datum, states in grouped.items()}


def abstract(g: Configuration) -> AbstractConfiguration:
    counts: Dict[StateSet, int] = defaultdict(int)
    for bundle in bundles(g).values():
        counts[bundle] += 1
    return AbstractConfiguration(counts)


def bundle_choices(a: Atra, states: StateSet, letter: str, eq: bool) -> List[Quadruple]:
    """
    The minimal quadruples covering one minimal model of δ(q, letter, eq) for
    every q in states. Empty when some state has no model.
    """
    options = [
        sorted(minimal_models(a.transition(q, letter, eq)), key=quadruple_key)
        for q in sorted(states)
    ]
    unions = (reduce(Quadruple.union, combo, EMPTY_QUADRUPLE) for combo in itertools.product(*options))
    return sorted(minimize_quadruples(unions), key=quadruple_key)


def _successor_cells(
    d: int, e_choice: Optional[Quadruple], chosen: Iterable[Quadruple]
) -> AbstractConfiguration:
    chosen = list(chosen)
    counts: Dict[StateSet, int] = defaultdict(int)
    current = EMPTY if e_choice is None else e_choice.stored(d) | e_choice.kept(d)
    for choice in chosen:
        current |= choice.stored(d)
    if current:
        counts[current] += 1
    for choice in chosen:
        if choice.kept(d):
            counts[choice.kept(d)] += 1
    return AbstractConfiguration(counts)


def abstract_successors(
    a: Atra, v: AbstractConfiguration, letter: str, q_eq: StateSet
) -> FrozenSet[Tuple[AbstractConfiguration, AbstractConfiguration]]:
    """
    The ⪯-minimal successor pairs of v on letter, where q_eq is the bundle of
    the node's datum (empty when the datum is new). Each abstract datum picks
    one minimal bundle choice.
    """
    if q_eq and v.count(q_eq) == 0:
        raise ValueError(f"no abstract datum has bundle {sorted(q_eq)}")
    cells = sorted(v, key=set_key)
    groups = []
    for part in cells:
        units = v.count(part) - (1 if part == q_eq else 0)
        ff = bundle_choices(a, part, letter, False)
        groups.append(list(itertools.combinations_with_replacement(ff, units)))
    e_options = bundle_choices(a, q_eq, letter, True) if q_eq else [None]
    candidates = []
    for e_choice in e_options:
        for combo in itertools.product(*groups):
            chosen = [choice for group in combo for choice in group]
            pair = tuple(_successor_cells(d, e_choice, chosen) for d in (0, 1))
            flat = Valuation({(d, part): n for d in (0, 1) for part, n in pair[d].items()})
            candidates.append((flat, pair))
    lookup = {flat: pair for flat, pair in candidates}
    return frozenset(lookup[flat] for flat in minimize(lookup))


# --- The compiled counter machine ---

START, CHOOSE, DRAIN, SETTLE, MOVE, TESTING, PROP, CHECK, FINAL = (
    "start",
    "choose",
    "drain",
    "settle",
    "move",
    "zero",
    "prop",
    "check",
    "final",
)

IDLE = ("idle",)


def cell(states: StateSet) -> tuple:
    return ("c", states)


def primed(choice: Quadruple) -> tuple:
    return ("c'", choice)


class Ctrl(NamedTuple):
    """A control state of a compiled machine; unused registers keep their defaults."""

    phase: str
    root: bool = False
    prop: bool = False
    # cells that may be positive
    live: FrozenSet[StateSet] = frozenset()
    letter: Optional[str] = None
    todo: Tuple[StateSet, ...] = ()
    base: Tuple[StateSet, StateSet] = (EMPTY, EMPTY)
    touched: FrozenSet[Quadruple] = frozenset()
    pending: Optional[Quadruple] = None
    d: int = 0
    queue: Tuple[Quadruple, ...] = ()
    carrying: bool = False
    cells: Tuple[tuple, ...] = ()
    after: Optional["Ctrl"] = None


class CompiledMachine(Machine):
    """Shared plumbing: choice caches and the opening of every round."""

    def __init__(self, a: Atra):
        self.automaton = a
        self.alphabet = a.alphabet
        self.initial = Ctrl(START)
        self._choices: Dict[Tuple[StateSet, str, bool], List[Quadruple]] = {}

    def choices(self, states: StateSet, letter: str, eq: bool) -> List[Quadruple]:
        key = (states, letter, eq)
        if key not in self._choices:
            self._choices[key] = bundle_choices(self.automaton, states, letter, eq)
        return self._choices[key]

    def is_final(self, ctrl: Ctrl) -> bool:
        return ctrl.phase == FINAL

    def _start(self, ctrl: Ctrl) -> List[Transition]:
        first = frozenset([self.automaton.initial])
        return [Transition(None, Inc(cell(first)), (Ctrl(CHOOSE, root=True, live=frozenset([first])),))]

    def _choose(self, ctrl: Ctrl, no_op) -> List[Transition]:
        """Picks the letter and the bundle of the node's datum, draining that datum at once."""
        todo = tuple(sorted(ctrl.live, key=set_key))
        if ctrl.root:
            options = [c for c in todo if self.automaton.initial in c]
        else:
            options = [EMPTY, *todo]
        found = []
        for letter in sorted(self.alphabet):
            drain = Ctrl(DRAIN, prop=ctrl.prop, letter=letter, todo=todo)
            for q_eq in options:
                if not q_eq:
                    found.append(Transition(None, no_op, (drain,)))
                    continue
                for choice in self.choices(q_eq, letter, True):
                    base = tuple(choice.stored(d) | choice.kept(d) for d in (0, 1))
                    found.append(Transition(None, Dec(cell(q_eq)), (drain._replace(base=base),)))
        return found

    def settling(self, ctrl: Ctrl, d: int) -> Ctrl:
        return Ctrl(SETTLE, prop=ctrl.prop, d=d, base=ctrl.base, touched=ctrl.touched)

    def _fork(self, ctrl: Ctrl, instruction) -> Transition:
        children = tuple(self.settling(ctrl, d) for d in (0, 1))
        return Transition(ctrl.letter, instruction, children)

    def settled_cell(self, ctrl: Ctrl, included: Iterable[Quadruple]) -> StateSet:
        current = ctrl.base[ctrl.d]
        for choice in included:
            current |= choice.stored(ctrl.d)
        return current


class FiniteCompilation(CompiledMachine):
    """
    The ITCA simulating an automaton on finite trees through abstract
    configurations: c[S] counts data with bundle S, c'[R'] counts data that
    picked the bundle choice R' at the current node.

    The round does not keep the per-cell loop registers S, q, R and the
    datum index. The node's own datum is drained once in CHOOSE, with a
    whole bundle choice for its cell. DRAIN then moves every other datum
    of a cell straight to the c' counter of one minimal bundle choice, and
    the zero test that ends a cell stands in for the loop's exit. SETTLE
    adds the node datum's new bundle before MOVE empties c' into c. Data
    left behind in a cell only add junk threads, which cannot help a run
    accept.
    """

    kind = MachineKind.ITCA
    no_op = Ifz(IDLE)

    def transitions(self, ctrl: Ctrl) -> List[Transition]:
        if ctrl.phase == START:
            return self._start(ctrl)
        if ctrl.phase == CHOOSE:
            return self._choose(ctrl, self.no_op)
        if ctrl.phase == DRAIN:
            return self._drain(ctrl)
        if ctrl.phase == SETTLE:
            return self._settle(ctrl)
        if ctrl.phase == MOVE:
            return self._move(ctrl)
        return []

    def _drain(self, ctrl: Ctrl) -> List[Transition]:
        if ctrl.pending is not None:
            after = ctrl._replace(pending=None, touched=ctrl.touched | {ctrl.pending})
            return [Transition(None, Inc(primed(ctrl.pending)), (after,))]
        if not ctrl.todo:
            return [self._fork(ctrl, self.no_op)]
        current, rest = ctrl.todo[0], ctrl.todo[1:]
        found = [
            Transition(None, Dec(cell(current)), (ctrl._replace(pending=choice),))
            for choice in self.choices(current, ctrl.letter, False)
        ]
        if rest:
            found.append(Transition(None, Ifz(cell(current)), (ctrl._replace(todo=rest),)))
        else:
            found.append(self._fork(ctrl, Ifz(cell(current))))
        return found

    def _settle(self, ctrl: Ctrl) -> List[Transition]:
        settled = self.settled_cell(ctrl, ctrl.touched)
        moving = Ctrl(
            MOVE,
            d=ctrl.d,
            queue=tuple(sorted(ctrl.touched, key=quadruple_key)),
            live=frozenset([settled]) if settled else frozenset(),
        )
        instruction = Inc(cell(settled)) if settled else self.no_op
        return [Transition(None, instruction, (moving,))]

    def _move(self, ctrl: Ctrl) -> List[Transition]:
        if not ctrl.queue:
            return self._close(ctrl)
        head, rest = ctrl.queue[0], ctrl.queue[1:]
        keep = head.kept(ctrl.d)
        if ctrl.carrying:
            return [Transition(None, Inc(cell(keep)), (ctrl._replace(carrying=False),))]
        live = ctrl.live | {keep} if keep else ctrl.live
        return [
            Transition(None, Dec(primed(head)), (ctrl._replace(carrying=bool(keep)),)),
            Transition(None, Ifz(primed(head)), (ctrl._replace(queue=rest, live=live),)),
        ]

    def _close(self, ctrl: Ctrl) -> List[Transition]:
        found = [Transition(None, self.no_op, (Ctrl(CHOOSE, live=ctrl.live),))]
        if all(c <= self.automaton.finals for c in ctrl.live):
            found.append(Transition(None, self.no_op, (Ctrl(FINAL),)))
        return found


def compile_finite(a: Atra) -> FiniteCompilation:
    if a.has_holes:
        raise ValueError("cannot compile an automaton that still has holes")
    return FiniteCompilation(a)


# --- Lifting shapes to data trees ---


def restricted_growth(length: int) -> Iterator[Tuple[int, ...]]:
    """Every labelling of length positions up to renaming, in lexicographic order."""

    def extend(prefix: Tuple[int, ...], top: int):
        if len(prefix) == length:
            yield prefix
            return
        for label in range(top + 2):
            yield from extend(prefix + (label,), max(top, label))

    yield from extend((), -1)


def lift_witness(
    a: Atra,
    tree: DataTree,
    free_nodes: Optional[Iterable[str]] = None,
    budget: Optional[Budget] = None,
) -> DataTree:
    """
    Finds data for a tree shape so that a accepts it. Nodes outside free_nodes
    get pairwise-fresh data; labellings of the free nodes are tried up to
    renaming.
    """
    budget = budget or Budget()
    nonleaves = tree.nonleaves
    chosen = set(nonleaves if free_nodes is None else free_nodes)
    free = [n for n in nonleaves if n in chosen]
    fixed = [n for n in nonleaves if n not in chosen]
    for tried, labels in enumerate(restricted_growth(len(free))):
        if tried >= budget.lift_candidates:
            raise BudgetExceeded(f"tried {tried} data labellings without an accepted one")
        data = dict(zip(free, labels))
        data.update({n: len(free) + i for i, n in enumerate(fixed)})
        candidate = tree.with_data(data)
        if has_final_run(a, candidate):
            logging.info(f"Lifted the witness after {tried + 1} labellings")
            return candidate
    raise CertificationError("no data labelling of the witness shape is accepted")


def atra_nonempty_finite(a: Atra, budget: Optional[Budget] = None) -> SolverResult:
    """Decides whether a accepts some finite data tree, returning a certified witness."""
    budget = budget or Budget()
    machine = compile_finite(a)
    result = nonempty_finite(machine, budget)
    if not result.nonempty:
        return result
    lifted = lift_witness(a, result.witness, budget=budget)
    if not has_final_run(a, lifted):
        raise CertificationError("the lifted witness is rejected")
    return SolverResult(True, lifted, result.stats)
