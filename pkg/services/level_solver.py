# services/level_solver.py
import heapq
import itertools
import logging
import time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Container, Dict, FrozenSet, Iterable, List, Optional, Tuple

import config
from services.counter_machines import (
    ZERO,
    Config,
    Dec,
    Ifz,
    Inc,
    Instruction,
    Level,
    Machine,
    Move,
    State,
    Transfer,
    Transition,
    Valuation,
    control_graph,
    initial_level,
    lazy_step,
    level_leq,
    level_moves,
    level_states,
    level_successors,
    level_sum,
    splits,
)
from services.trees import ROOT, DataTree, validate_tree
from utils.antichains import is_covered, minimize


@dataclass(frozen=True)
class Budget:
    """Caps shared by every solver; defaults come from config."""

    max_levels: int = field(default_factory=lambda: config.BUDGET_LEVELS)
    max_valsum: int = field(default_factory=lambda: config.BUDGET_VALSUM)
    fixpoint_rounds: int = field(default_factory=lambda: config.FIXPOINT_ROUNDS)
    lift_candidates: int = field(default_factory=lambda: config.LIFT_CANDIDATES)


@dataclass
class SearchStats:
    levels: int = 0
    retained: int = 0
    max_valuation_sum: int = 0
    wall_time: float = 0.0


class BudgetExceeded(Exception):
    """A solver cap was hit before an answer was found."""

    def __init__(self, message: str, stats: Optional[SearchStats] = None):
        super().__init__(message)
        self.stats = stats or SearchStats()


@dataclass
class SolverResult:
    nonempty: bool
    witness: Optional[DataTree]
    stats: SearchStats


# --- Forward exploration ---


class Exploration:
    """
    Best-first forward search over levels. A new level is dropped when some
    retained level is ⪯ it; retained levels are indexed by their state sets.
    """

    def __init__(self, machine: Machine, budget: Budget, stats: Optional[SearchStats] = None):
        self.machine = machine
        self.budget = budget
        self.stats = stats if stats is not None else SearchStats()
        self.retained: List[Level] = []
        self.parent: Dict[Level, Tuple[Level, Dict[Config, Move]]] = {}
        self._by_states: Dict[FrozenSet[State], List[Level]] = defaultdict(list)
        self._frontier: list = []
        self._tick = itertools.count()

    def covered(self, level: Level) -> bool:
        states = level_states(level)
        return any(
            level_leq(older, level)
            for key, group in self._by_states.items()
            if key <= states
            for older in group
        )

    def _retain(self, level: Level):
        self.retained.append(level)
        self._by_states[level_states(level)].append(level)
        total = level_sum(level)
        self.stats.retained = len(self.retained)
        self.stats.max_valuation_sum = max(self.stats.max_valuation_sum, total)
        if len(self.retained) > self.budget.max_levels:
            raise BudgetExceeded(
                f"retained more than {self.budget.max_levels} levels", self.stats
            )
        if total > self.budget.max_valsum:
            raise BudgetExceeded(
                f"a retained level has valuation sum {total} > {self.budget.max_valsum}",
                self.stats,
            )
        heapq.heappush(self._frontier, (len(level), total, next(self._tick), level))

    def run(self, stop: Callable[[Level], bool] = lambda level: False) -> Optional[Level]:
        """Explores until a level satisfying stop appears; returns it, or None when exhausted."""
        started = time.perf_counter()
        try:
            start = initial_level(self.machine)
            self._retain(start)
            if stop(start):
                return start
            while self._frontier:
                *_, level = heapq.heappop(self._frontier)
                self.stats.levels += 1
                for successor, moves in level_moves(self.machine, level):
                    if successor in self.parent or self.covered(successor):
                        continue
                    self.parent[successor] = (level, moves)
                    if stop(successor):
                        return successor
                    self._retain(successor)
            return None
        finally:
            self.stats.wall_time += time.perf_counter() - started

    def path_to(self, level: Level) -> List[Tuple[Level, Dict[Config, Move]]]:
        """The levels leading to level, each with the moves taken from it."""
        path = []
        while level in self.parent:
            previous, moves = self.parent[level]
            path.append((previous, moves))
            level = previous
        return path[::-1]


class _RootGuard(Machine):
    """
    Keeps the initial configuration pending, and never final, until its
    first letter transition, so that witnesses have a nonleaf root.
    """

    def __init__(self, inner: Machine):
        self.inner = inner
        self.alphabet = inner.alphabet
        self.kind = inner.kind
        self.initial = ("root", inner.initial)

    def is_final(self, state) -> bool:
        phase, inner_state = state
        return phase == "run" and self.inner.is_final(inner_state)

    def transitions(self, state) -> List[Transition]:
        phase, inner_state = state
        guarded = []
        for transition in self.inner.transitions(inner_state):
            if transition.letter is None and phase == "root":
                targets = (("root", transition.targets[0]),)
            else:
                targets = tuple(("run", target) for target in transition.targets)
            guarded.append(Transition(transition.letter, transition.instruction, targets))
        return guarded


def _rebuild_witness(machine: Machine, path) -> DataTree:
    """Turns the moves of a path ending in ∅ into a tree; nonleaf data are all 0."""
    entries = []

    def place(step: int, config: Config, node: str):
        while True:
            if machine.is_final(config.state):
                entries.append((node, None, None))
                return
            move = path[step][1][config]
            step += 1
            if move.letter is None:
                config = move.children[0]
                continue
            entries.append((node, move.letter, 0))
            for direction, child in enumerate(move.children):
                place(step, child, node + str(direction))
            return

    (start,) = path[0][0]
    place(0, start, ROOT)
    return validate_tree(machine.alphabet, entries)


def nonempty_finite(machine: Machine, budget: Optional[Budget] = None) -> SolverResult:
    """Decides whether the empty level is reachable, rebuilding an accepted tree if so."""
    budget = budget or Budget()
    guarded = _RootGuard(machine)
    exploration = Exploration(guarded, budget)
    logging.info("Searching for a finite accepted tree")
    empty = exploration.run(stop=lambda level: not level)
    stats = exploration.stats
    if empty is None:
        logging.info(f"No finite tree: {stats.retained} levels retained, {stats.levels} expanded")
        return SolverResult(False, None, stats)
    witness = _rebuild_witness(guarded, exploration.path_to(empty))
    logging.info(
        f"Found a witness with {len(witness.nonleaves)} nonleaf nodes "
        f"after {stats.levels} expansions"
    )
    return SolverResult(True, witness, stats)


def itca_accepts(machine: Machine, tree: DataTree, block_bound: Optional[int] = None) -> bool:
    """
    Bounded acceptance check under lazy steps: each node's block has at most
    block_bound configurations. Sound for acceptance, complete up to the bound.
    """
    block_bound = config.BLOCK_BOUND if block_bound is None else block_bound
    if block_bound < 1:
        raise ValueError(f"block bound must be at least 1, got {block_bound}")
    memo: Dict[Tuple[str, Config], bool] = {}

    def block(start: Config) -> List[Config]:
        seen: Dict[State, List[Valuation]] = defaultdict(list)
        seen[start.state].append(start.valuation)
        layer, reached = [start], [start]
        for _ in range(block_bound - 1):
            following = []
            for current in layer:
                for transition in machine.transitions(current.state):
                    if transition.letter is not None:
                        continue
                    for result in lazy_step(current.valuation, transition.instruction):
                        target = transition.targets[0]
                        if is_covered(result, seen[target]):
                            continue
                        seen[target].append(result)
                        following.append(Config(target, result))
            if not following:
                break
            reached.extend(following)
            layer = following
        return reached

    def accepted(node: str, start: Config) -> bool:
        key = (node, start)
        if key in memo:
            return memo[key]
        if tree.is_leaf(node):
            result = any(machine.is_final(c.state) for c in block(start))
        else:
            result = any(fires(node, c) for c in block(start))
        memo[key] = result
        return result

    def fires(node: str, current: Config) -> bool:
        for transition in machine.transitions(current.state):
            if transition.letter != tree.letter(node):
                continue
            results = lazy_step(current.valuation, transition.instruction)
            left, right = transition.targets
            if any(accepted(node + "0", Config(left, w)) for w in results) and any(
                accepted(node + "1", Config(right, w)) for w in results
            ):
                return True
        return False

    return accepted(ROOT, Config(machine.initial, ZERO))


def reach_basis(machine: Machine, budget: Optional[Budget] = None) -> List[Level]:
    """A finite basis of the upward closure of the reachable levels."""
    exploration = Exploration(machine, budget or Budget())
    exploration.run()
    return list(exploration.retained)


# --- Backward analysis ---


def bound_k(basis: Iterable[Level]) -> int:
    return 1 + max(
        (c.valuation.total() for level in basis for c in level), default=0
    )


def _meet(first: List[Valuation], second: List[Valuation]) -> List[Valuation]:
    """A basis of the intersection of two upward-closed sets."""
    return minimize(a.join(b) for a in first for b in second)


def _subtract(vector: Valuation, amounts: Dict) -> Valuation:
    return Valuation({c: max(n - amounts.get(c, 0), 0) for c, n in vector.items()})


def _pre_instruction(instruction: Instruction, upper: List[Valuation], k: int) -> List[Valuation]:
    """A basis of the valuations all of whose lazy results lie above upper."""
    c = instruction.counter
    if isinstance(instruction, Inc):
        return minimize(u.minus(c) for u in upper)
    if isinstance(instruction, Dec):
        return minimize(u.plus(c) if u.count(c) else u for u in upper)
    zeroed = [u for u in upper if u.count(c) == 0]
    if isinstance(instruction, Ifz) or not instruction.targets:
        return minimize([ZERO.plus(c), *zeroed])
    targets = sorted(instruction.targets, key=repr)
    found = []
    for amount in range(k + 1):
        rest = [ZERO]
        for share in splits(amount, targets):
            rest = _meet(rest, minimize(_subtract(u, share) for u in zeroed))
            if not rest:
                break
        found.extend(r.with_count(c, amount) for r in rest)
    return minimize(found)


def _forced(machine: Machine, state: State, table: Dict[State, List[Valuation]], k: int) -> List[Valuation]:
    """Valuations at state from which every move yields a configuration above table."""
    if machine.is_final(state):
        return []
    result = [ZERO]
    for transition in machine.transitions(state):
        pre = []
        for target in transition.targets:
            pre.extend(_pre_instruction(transition.instruction, table.get(target, []), k))
        result = _meet(result, minimize(pre))
        if not result:
            break
    return result


def _as_table(levels: Iterable[Level]) -> Dict[State, List[Valuation]]:
    table: Dict[State, List[Valuation]] = defaultdict(list)
    for level in levels:
        for c in level:
            table[c.state].append(c.valuation)
    return {state: minimize(vs) for state, vs in table.items()}


def _counters_of(graph: Dict[State, List[Transition]], basis: List[Level]) -> List:
    found = set()
    for transitions in graph.values():
        for transition in transitions:
            found.add(transition.instruction.counter)
            if isinstance(transition.instruction, Transfer):
                found.update(transition.instruction.targets)
    found.update(counter for level in basis for c in level for counter in c.valuation)
    return sorted(found, key=repr)


def pred_forall_by_enumeration(
    machine: Machine,
    basis: Iterable[Level],
    states: Optional[Iterable[State]] = None,
    budget: Optional[Budget] = None,
) -> List[Level]:
    """
    Brute-force Pred_∀: tries every level over configurations whose counters
    are at most bound_k(basis), smallest first, and keeps the ⪯-minimal ones
    whose successors all lie above basis. Deadlocked levels qualify.
    """
    budget = budget or Budget()
    basis = list(basis)
    if any(not level for level in basis):
        return [frozenset()]
    graph = control_graph(machine, [machine.initial, *(c.state for level in basis for c in level)])
    states = sorted(graph if states is None else states, key=repr)
    counters = _counters_of(graph, basis)
    k = bound_k(basis)
    configs = [
        Config(state, Valuation(dict(zip(counters, values))))
        for state in states
        for values in itertools.product(range(k + 1), repeat=len(counters))
    ]
    found: List[Level] = []
    examined = 0
    for size in range(1, len(configs) + 1):
        for members in itertools.combinations(configs, size):
            level = frozenset(members)
            if any(level_leq(g, level) for g in found):
                continue
            examined += 1
            if examined > budget.max_levels:
                raise BudgetExceeded(f"enumerated more than {budget.max_levels} candidate levels")
            successors = level_successors(machine, level)
            if all(any(level_leq(b, h) for b in basis) for h in successors):
                found = [g for g in found if not level_leq(level, g)] + [level]
    logging.debug(f"Enumerated {examined} levels under K = {k}, {len(found)} minimal")
    return found


def pred_forall_basis(
    machine: Machine,
    basis: Iterable[Level],
    states: Optional[Iterable[State]] = None,
    budget: Optional[Budget] = None,
) -> List[Level]:
    """
    A basis of the levels all of whose successors lie above basis.

    When every basis level is a singleton, a level is forced above basis iff
    one of its configurations is, so the answer is computed per state and
    is again made of singletons. Other bases go through
    pred_forall_by_enumeration.
    """
    basis = list(basis)
    if any(not level for level in basis):
        return [frozenset()]
    if any(len(level) != 1 for level in basis):
        return pred_forall_by_enumeration(machine, basis, states, budget)
    table = _as_table(basis)
    if states is None:
        states = control_graph(machine, [machine.initial, *table])
    k = bound_k(basis)
    return [
        frozenset([Config(state, v)])
        for state in sorted(states, key=repr)
        for v in _forced(machine, state, table, k)
    ]


def doomed_basis(
    machine: Machine, states: Iterable[State], budget: Optional[Budget] = None
) -> List[Level]:
    """A basis of the levels from which every sequence of level transitions is finite."""
    budget = budget or Budget()
    states = list(states)
    basis: List[Level] = []
    for round_number in range(budget.fixpoint_rounds):
        found = pred_forall_basis(machine, basis, states)
        fresh = [h for h in found if not any(level_leq(g, h) for g in basis)]
        if not fresh:
            logging.debug(f"Doomed basis settled after {round_number + 1} rounds")
            return basis
        table = _as_table(basis + fresh)
        basis = [frozenset([Config(q, v)]) for q, vs in table.items() for v in vs]
    raise BudgetExceeded(
        f"the doomed-level fixed point did not settle in {budget.fixpoint_rounds} rounds"
    )


def exists_infinite_with_P(
    machine: Machine,
    P: Container,
    budget: Optional[Budget] = None,
    stats: Optional[SearchStats] = None,
) -> bool:
    """
    Whether some infinite sequence of level transitions from the initial
    level passes through a level whose states all lie in P. Reaching ∅
    answers yes at once, since ∅ steps to itself forever.
    """
    budget = budget or Budget()
    exploration = Exploration(machine, budget, stats)
    logging.info("Exploring reachable levels")
    if exploration.run(stop=lambda level: not level) is not None:
        logging.info("The empty level is reachable")
        return True
    p_only = [g for g in exploration.retained if all(c.state in P for c in g)]
    logging.info(
        f"Reach basis has {len(exploration.retained)} levels, {len(p_only)} inside P"
    )
    if not p_only:
        return False
    roots = {c.state for g in p_only for c in g}
    doomed = _as_table(doomed_basis(machine, control_graph(machine, roots), budget))
    for level in p_only:
        if not any(is_covered(c.valuation, doomed.get(c.state, [])) for c in level):
            logging.info("A reachable level inside P has an infinite continuation")
            return True
    return False
