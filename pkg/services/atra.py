# services/atra.py
import itertools
import logging
from dataclasses import dataclass
from typing import Container, Dict, FrozenSet, Iterable, Iterator, Mapping, NamedTuple, Optional, Tuple

from services.formulas import (
    FALSE,
    TRUE,
    Atom,
    Formula,
    FormulaError,
    Quadruple,
    Update,
    atoms,
    conj,
    disj,
    dual,
    fill_hole,
    has_hole,
    keep,
    map_atoms,
    minimal_models,
    quadruple_key,
)
from services.trees import ROOT, DataTree, show


class AutomatonError(ValueError):
    """Raised for an ill-formed automaton or mismatched alphabets."""


class Thread(NamedTuple):
    state: str
    datum: int


Configuration = FrozenSet[Thread]
Key = Tuple[str, str, bool]


@dataclass(frozen=True)
class Atra:
    """
    A forward alternating tree automaton with one register. delta maps
    (state, letter, register == datum) to a positive Boolean formula and is
    total: missing entries read as ⊥.
    """

    alphabet: FrozenSet[str]
    states: FrozenSet[str]
    initial: str
    finals: FrozenSet[str]
    delta: Mapping[Key, Formula]

    __hash__ = None

    def __post_init__(self):
        if self.initial not in self.states:
            raise AutomatonError(f"initial state {self.initial!r} is not a state")
        if not self.finals <= self.states:
            raise AutomatonError(f"final states {sorted(self.finals - self.states)} are not states")
        for (state, letter, _), formula in self.delta.items():
            if state not in self.states:
                raise AutomatonError(f"transition from unknown state {state!r}")
            if letter not in self.alphabet:
                raise AutomatonError(f"transition on unknown letter {letter!r}")
            for atom in atoms(formula):
                if atom.state not in self.states:
                    raise FormulaError(f"atom names unknown state {atom.state!r}")

    @classmethod
    def build(
        cls,
        alphabet: Iterable[str],
        states: Iterable[str],
        initial: str,
        finals: Iterable[str],
        rules: Mapping[Key, Formula],
    ) -> "Atra":
        """Fills the unspecified part of delta with ⊥ and drops ⊥ entries."""
        return cls(
            alphabet=frozenset(alphabet),
            states=frozenset(states),
            initial=initial,
            finals=frozenset(finals),
            delta={key: f for key, f in rules.items() if f != FALSE},
        )

    def transition(self, state: str, letter: str, eq: bool) -> Formula:
        return self.delta.get((state, letter, eq), FALSE)

    @property
    def has_holes(self) -> bool:
        return any(has_hole(f) for f in self.delta.values())

    def table(self) -> Iterator[Tuple[Key, Formula]]:
        """The whole of delta, ⊥ entries included, in a stable order."""
        for state in sorted(self.states):
            for letter in sorted(self.alphabet):
                for eq in (True, False):
                    yield (state, letter, eq), self.transition(state, letter, eq)


def induced_threads(
    model: Quadruple, direction: int, node_datum: int, register: int
) -> FrozenSet[Thread]:
    return frozenset(
        [Thread(r, node_datum) for r in model.stored(direction)]
        + [Thread(r, register) for r in model.kept(direction)]
    )


def successor_pairs(
    a: Atra, config: Configuration, letter: str, datum: int, minimal: bool = True
) -> FrozenSet[Tuple[Configuration, Configuration]]:
    """
    Every pair of child configurations obtained by picking one minimal model
    per thread; with minimal=True, only the ⊆-minimal pairs.
    """
    threads = sorted(config)
    choices = [
        sorted(
            minimal_models(a.transition(t.state, letter, t.datum == datum)),
            key=quadruple_key,
        )
        for t in threads
    ]
    pairs = set()
    for combination in itertools.product(*choices):
        left, right = set(), set()
        for thread, model in zip(threads, combination):
            left |= induced_threads(model, 0, datum, thread.datum)
            right |= induced_threads(model, 1, datum, thread.datum)
        pairs.add((frozenset(left), frozenset(right)))
    if not minimal:
        return frozenset(pairs)
    return frozenset(
        p
        for p in pairs
        if not any(o != p and o[0] <= p[0] and o[1] <= p[1] for o in pairs)
    )


def step(
    a: Atra, config: Configuration, letter: str, datum: int
) -> FrozenSet[Tuple[Configuration, Configuration]]:
    if letter not in a.alphabet:
        raise AutomatonError(f"letter {letter!r} is not in the alphabet")
    return successor_pairs(a, config, letter, datum)


# --- Membership on finite trees ---


def find_final_run(
    a: Atra, tree: DataTree, targets: Optional[Container[str]] = None
) -> Optional[Dict[str, Configuration]]:
    """
    Searches for a final run, deciding each thread separately: a thread is
    accepted at a node iff some minimal model of its formula has all induced
    threads accepted at the children. Truncated leaves accept every thread.
    With targets given, a hole reads as ⊤ at the target nodes and ⊥ elsewhere.
    Returns the run as a node to configuration map, or None.
    """
    if tree.alphabet != a.alphabet:
        raise AutomatonError("automaton and tree alphabets differ")
    choice: Dict[Tuple[str, Thread], Optional[Quadruple]] = {}

    def accepted(node: str, thread: Thread) -> bool:
        key = (node, thread)
        if key in choice:
            return choice[key] is not None
        if node in tree.truncated:
            choice[key] = Quadruple()
            return True
        if tree.is_leaf(node):
            ok = thread.state in a.finals
            choice[key] = Quadruple() if ok else None
            return ok
        datum = tree.datum(node)
        formula = a.transition(thread.state, tree.letter(node), thread.datum == datum)
        if targets is not None:
            formula = fill_hole(formula, TRUE if node in targets else FALSE)
        choice[key] = None
        for model in sorted(minimal_models(formula), key=quadruple_key):
            if all(
                accepted(node + str(d), child)
                for d in (0, 1)
                for child in induced_threads(model, d, datum, thread.datum)
            ):
                choice[key] = model
                return True
        return False

    initial = Thread(a.initial, tree.datum(ROOT))
    if not accepted(ROOT, initial):
        return None
    run: Dict[str, set] = {n: set() for n in tree.nodes}
    pending = [(ROOT, initial)]
    while pending:
        node, thread = pending.pop()
        if thread in run[node]:
            continue
        run[node].add(thread)
        if tree.is_leaf(node) or node in tree.truncated:
            continue
        model = choice[(node, thread)]
        for d in (0, 1):
            for child in induced_threads(model, d, tree.datum(node), thread.datum):
                pending.append((node + str(d), child))
    return {n: frozenset(g) for n, g in run.items()}


def has_final_run(a: Atra, tree: DataTree, targets: Optional[Container[str]] = None) -> bool:
    return find_final_run(a, tree, targets) is not None


def has_prefix_run(a: Atra, tree: DataTree) -> bool:
    """Safety reading of a finite tree: every leaf is an unexplored continuation."""
    prefix = DataTree(
        tree.alphabet, tree.nodes, tree.letters, tree.data, frozenset(tree.leaves)
    )
    return has_final_run(a, prefix)


def is_run(a: Atra, tree: DataTree, run: Mapping[str, Configuration]) -> bool:
    """
    Checks the run relation as lower bounds: every thread's formula needs some
    model whose induced threads are present at the children; extra threads
    are allowed below the root.
    """
    if set(run) != set(tree.nodes):
        return False
    if run[ROOT] != {Thread(a.initial, tree.datum(ROOT))}:
        return False
    for node in tree.nodes:
        if tree.is_leaf(node) or node in tree.truncated:
            continue
        datum = tree.datum(node)
        for thread in run[node]:
            formula = a.transition(thread.state, tree.letter(node), thread.datum == datum)
            if not any(
                induced_threads(model, 0, datum, thread.datum) <= run[node + "0"]
                and induced_threads(model, 1, datum, thread.datum) <= run[node + "1"]
                for model in minimal_models(formula)
            ):
                return False
    return True


def is_final_run(a: Atra, tree: DataTree, run: Mapping[str, Configuration]) -> bool:
    return is_run(a, tree, run) and all(
        thread.state in a.finals
        for node in tree.leaves
        if node not in tree.truncated
        for thread in run[node]
    )


# --- Boolean closure ---


def dualize(a: Atra) -> Atra:
    """Complements the finals and dualizes every formula, ⊥ entries included."""
    delta = {key: dual(formula) for key, formula in a.table()}
    return Atra.build(a.alphabet, a.states, a.initial, a.states - a.finals, delta)


def rename(a: Atra, prefix: str) -> Atra:
    def tag(atom: Atom) -> Atom:
        return Atom(prefix + atom.state, atom.direction, atom.update)

    return Atra(
        alphabet=a.alphabet,
        states=frozenset(prefix + q for q in a.states),
        initial=prefix + a.initial,
        finals=frozenset(prefix + q for q in a.finals),
        delta={
            (prefix + q, letter, eq): map_atoms(f, tag)
            for (q, letter, eq), f in a.delta.items()
        },
    )


def _combine(a1: Atra, a2: Atra, connective, initial: str) -> Atra:
    if a1.alphabet != a2.alphabet:
        raise AutomatonError(
            f"alphabets differ: {sorted(a1.alphabet)} vs {sorted(a2.alphabet)}"
        )
    left, right = rename(a1, "1."), rename(a2, "2.")
    delta = {**left.delta, **right.delta}
    for letter in a1.alphabet:
        start = connective(
            left.transition(left.initial, letter, True),
            right.transition(right.initial, letter, True),
        )
        # the initial thread's register always holds the root datum
        delta[(initial, letter, True)] = start
        delta[(initial, letter, False)] = start
    return Atra.build(
        a1.alphabet,
        left.states | right.states | {initial},
        initial,
        left.finals | right.finals,
        delta,
    )


def intersect(a1: Atra, a2: Atra) -> Atra:
    return _combine(a1, a2, conj, "and")


def union_(a1: Atra, a2: Atra) -> Atra:
    return _combine(a1, a2, disj, "or")


def empty_automaton(alphabet: Iterable[str]) -> Atra:
    """One nonfinal state whose transitions are all ⊥."""
    return Atra.build(alphabet, ["empty"], "empty", [], {})


def universal_automaton(alphabet: Iterable[str]) -> Atra:
    alphabet = frozenset(alphabet)
    both = conj(keep("all", 0), keep("all", 1))
    rules = {("all", letter, eq): both for letter in alphabet for eq in (True, False)}
    return Atra.build(alphabet, ["all"], "all", ["all"], rules)


def rooted_entry(a: Atra, entry: str) -> Dict[Key, Formula]:
    """
    Rules for a fresh state that starts a at the node it reaches, with that
    node's datum as the initial register: keep atoms of the initial formula
    become store atoms.
    """

    def reload(atom: Atom) -> Atom:
        return Atom(atom.state, atom.direction, Update.STORE)

    rules = {}
    for letter in a.alphabet:
        formula = map_atoms(a.transition(a.initial, letter, True), reload)
        rules[(entry, letter, True)] = formula
        rules[(entry, letter, False)] = formula
    return rules


def describe(a: Atra) -> str:
    return (
        f"{len(a.states)} states, {len(a.finals)} final, "
        f"{len(a.delta)} non-⊥ transitions over {len(a.alphabet)} letters"
    )


def log_size(label: str, a: Atra):
    logging.info(f"{label}: {describe(a)}")
