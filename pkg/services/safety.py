# services/safety.py
import logging
from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Tuple

from services.abstraction import (
    CHECK,
    CHOOSE,
    DRAIN,
    FINAL,
    IDLE,
    MOVE,
    PROP,
    SETTLE,
    START,
    TESTING,
    CompiledMachine,
    Ctrl,
    cell,
    primed,
    set_key,
)
from services.atra import Atra, dualize, empty_automaton, intersect
from services.counter_machines import Inc, MachineKind, Transfer, Transition
from services.formulas import quadruple_key
from services.level_solver import Budget, SearchStats, SolverResult, exists_infinite_with_P

SINK = ("sink",)


@dataclass(frozen=True)
class ProductAtra:
    """The product automaton with its states split by origin."""

    automaton: Atra
    first: FrozenSet[str]
    second: FrozenSet[str]


@dataclass
class InclusionResult:
    holds: bool
    stats: SearchStats


def product_safety(a1: Atra, a2: Atra) -> ProductAtra:
    """
    Runs a1 alongside the dual of a2: a tree is safety-accepted by a1 and
    rejected by a2 iff the product has a final run in which threads of the
    second part die out.
    """
    automaton = intersect(a1, dualize(a2))
    return ProductAtra(
        automaton=automaton,
        first=frozenset(q for q in automaton.states if q.startswith("1.")),
        second=frozenset(q for q in automaton.states if q.startswith("2.")),
    )


class PropStates:
    """The control states in which the second part is known to have died out."""

    def __contains__(self, ctrl) -> bool:
        return ctrl.prop


class InclusionCompilation(CompiledMachine):
    """
    The transfer-based counterpart of the finite compilation. Every loop of
    the finite machine becomes one atomic transfer, so there are no cycles of
    silent moves; resets move counts to a sink that is never read.
    """

    kind = MachineKind.ITCANT
    no_op = Transfer(IDLE, frozenset())

    def __init__(self, product: ProductAtra):
        super().__init__(product.automaton)
        self.second = product.second

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
        if ctrl.phase == TESTING:
            return [self._zero_chain(ctrl.cells, ctrl.after, ctrl.prop)]
        if ctrl.phase == PROP:
            return self._prop(ctrl)
        if ctrl.phase == CHECK:
            return self._check(ctrl)
        return []

    def _zero_chain(self, cells: Tuple[tuple, ...], after: Ctrl, prop: bool) -> Transition:
        """One zero test, then either the rest of the chain or after. prop holds until after."""
        if not cells:
            return Transition(None, self.no_op, (after,))
        head, rest = cells[0], cells[1:]
        following = Ctrl(TESTING, prop=prop, cells=rest, after=after) if rest else after
        return Transition(None, Transfer(head, frozenset()), (following,))

    def _drain(self, ctrl: Ctrl) -> List[Transition]:
        if not ctrl.todo:
            return [self._fork(ctrl, self.no_op)]
        current, rest = ctrl.todo[0], ctrl.todo[1:]
        options = self.choices(current, ctrl.letter, False)
        instruction = Transfer(cell(current), frozenset(primed(choice) for choice in options))
        after = ctrl._replace(todo=rest, touched=ctrl.touched | frozenset(options))
        return [Transition(None, instruction, (after,))]

    def settling(self, ctrl: Ctrl, d: int) -> Ctrl:
        storing = tuple(
            choice for choice in sorted(ctrl.touched, key=quadruple_key) if choice.stored(d)
        )
        return Ctrl(
            SETTLE, prop=ctrl.prop, d=d, base=ctrl.base, touched=ctrl.touched, queue=storing
        )

    def _settle(self, ctrl: Ctrl) -> List[Transition]:
        """Each storing choice either joins the node's datum or is shown to be unused."""
        d = ctrl.d
        if ctrl.queue:
            head, rest = ctrl.queue[0], ctrl.queue[1:]
            grown = list(ctrl.base)
            grown[d] = grown[d] | head.stored(d)
            return [
                Transition(None, self.no_op, (ctrl._replace(queue=rest, base=tuple(grown)),)),
                Transition(None, Transfer(primed(head), frozenset()), (ctrl._replace(queue=rest),)),
            ]
        settled = ctrl.base[d]
        moving = Ctrl(
            MOVE,
            prop=ctrl.prop,
            d=d,
            queue=tuple(sorted(ctrl.touched, key=quadruple_key)),
            live=frozenset([settled]) if settled else frozenset(),
        )
        instruction = Inc(cell(settled)) if settled else self.no_op
        return [Transition(None, instruction, (moving,))]

    def _move(self, ctrl: Ctrl) -> List[Transition]:
        if not ctrl.queue:
            return [Transition(None, self.no_op, (Ctrl(PROP, prop=ctrl.prop, live=ctrl.live),))]
        head, rest = ctrl.queue[0], ctrl.queue[1:]
        keep = head.kept(ctrl.d)
        target = cell(keep) if keep else SINK
        live = ctrl.live | {keep} if keep else ctrl.live
        return [
            Transition(None, Transfer(primed(head), frozenset([target])), (ctrl._replace(queue=rest, live=live),))
        ]

    def _prop(self, ctrl: Ctrl) -> List[Transition]:
        checking = Ctrl(CHECK, prop=ctrl.prop, live=ctrl.live)
        if ctrl.prop:
            return [Transition(None, self.no_op, (checking,))]
        second = tuple(
            cell(part) for part in sorted(ctrl.live, key=set_key) if part & self.second
        )
        return [
            Transition(None, self.no_op, (checking,)),
            self._zero_chain(second, checking._replace(prop=True), False),
        ]

    def _check(self, ctrl: Ctrl) -> List[Transition]:
        nonfinal = tuple(
            cell(part)
            for part in sorted(ctrl.live, key=set_key)
            if not part <= self.automaton.finals
        )
        return [
            Transition(None, self.no_op, (Ctrl(CHOOSE, prop=ctrl.prop, live=ctrl.live),)),
            self._zero_chain(nonfinal, Ctrl(FINAL, prop=ctrl.prop), ctrl.prop),
        ]


def compile_inclusion(product: ProductAtra) -> Tuple[InclusionCompilation, PropStates]:
    if product.automaton.has_holes:
        raise ValueError("cannot compile an automaton that still has holes")
    return InclusionCompilation(product), PropStates()


def atra_inclusion_safety(a1: Atra, a2: Atra, budget: Optional[Budget] = None) -> InclusionResult:
    """Decides whether every tree safety-accepted by a1 is safety-accepted by a2."""
    machine, prop_states = compile_inclusion(product_safety(a1, a2))
    stats = SearchStats()
    counterexample = exists_infinite_with_P(machine, prop_states, budget, stats)
    logging.info(f"Safety inclusion {'fails' if counterexample else 'holds'}")
    return InclusionResult(holds=not counterexample, stats=stats)


def atra_nonempty_safety(a: Atra, budget: Optional[Budget] = None) -> SolverResult:
    """Nonempty iff inclusion in the empty automaton fails."""
    result = atra_inclusion_safety(a, empty_automaton(a.alphabet), budget)
    return SolverResult(not result.holds, None, result.stats)

