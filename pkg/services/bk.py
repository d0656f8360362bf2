# services/bk.py
import logging
from typing import Dict, Optional

from services.atra import Atra, intersect, rename, rooted_entry
from services.formulas import TRUE, Formula, conj, disj, keep, store

STAR = "*"


def letter(i: int) -> str:
    return f"b{i}"


def bk_alphabet(m: int) -> frozenset:
    return frozenset([letter(i) for i in range(1, m + 1)] + [STAR])


def _both(eq_free: Dict, state: str, symbol: str, formula: Formula):
    eq_free[(state, symbol, True)] = formula
    eq_free[(state, symbol, False)] = formula


def make_b1(m: int = 1) -> Atra:
    """Accepts exactly the trees whose only nonleaf nodes are a b1 root and its b1 left child."""
    rules: Dict = {}
    b1 = letter(1)
    _both(rules, "q", b1, conj(keep("q'", 0), keep("q''", 1)))
    _both(rules, "q'", b1, conj(keep("q''", 0), keep("q''", 1)))
    return Atra.build(bk_alphabet(m), ["q", "q'", "q''"], "q", ["q''"], rules)


def _shape_of_root(k: int, m: int) -> Atra:
    """The root and its left child are b_{k+1}; the root's right child is a leaf."""
    top = letter(k + 1)
    rules: Dict = {}
    _both(rules, "root", top, conj(keep("left", 0), keep("leaf", 1)))
    _both(rules, "left", top, TRUE)
    return Atra.build(bk_alphabet(m), ["root", "left", "leaf"], "root", ["leaf"], rules)


def _shape_below(lower: Atra, k: int, m: int) -> Atra:
    """
    Every non-root b_{k+1} node has a left child that is a leaf or a '*' with
    two b_{k+1} children, and a right subtree accepted by the lower automaton.
    """
    top = letter(k + 1)
    inner = rename(lower, "low.")
    rules: Dict = dict(inner.delta)
    rules.update(rooted_entry(inner, "enter"))
    everywhere = conj(keep("scan", 0), keep("scan", 1))
    for symbol in bk_alphabet(m):
        _both(rules, "top", symbol, everywhere)
        _both(rules, "scan", symbol, everywhere)
    _both(
        rules,
        "scan",
        top,
        conj(everywhere, keep("fork", 0), keep("enter", 1)),
    )
    _both(rules, "fork", STAR, conj(keep("next", 0), keep("next", 1)))
    _both(rules, "next", top, TRUE)
    states = inner.states | {"top", "scan", "fork", "next", "enter"}
    finals = inner.finals | {"scan", "fork"}
    return Atra.build(bk_alphabet(m), states, "top", finals, rules)


def _distinct_and_witnessed(k: int, m: int) -> Atra:
    """
    Data of b_{k+1} nodes below the root are distinct along every downward
    path, and each reappears on a non-root b_k node right of every later one.

    The search enters the right subtree through q3r, which steps past the
    subtree's root. A right subtree accepted by B_k then holds 2⇑k - 1 such
    nodes, so every b_{k+1}-chain from the root's left child has at most
    2⇑k nodes.
    """
    top, lower = letter(k + 1), letter(k)
    rules: Dict = {}
    for symbol in bk_alphabet(m):
        _both(rules, "q0", symbol, keep("q1", 0))
    _both(rules, "q1", STAR, conj(keep("q1", 0), keep("q1", 1)))
    _both(rules, "q1", top, conj(keep("q1", 0), store("q2", 0)))
    _both(rules, "q2", STAR, conj(keep("q2", 0), keep("q2", 1)))
    rules[("q2", top, False)] = conj(keep("q2", 0), keep("q3r", 1))
    _both(rules, "q3r", lower, keep("q3", 0))
    _both(rules, "q3", STAR, disj(keep("q3", 0), keep("q3", 1)))
    rules[("q3", lower, True)] = TRUE
    rules[("q3", lower, False)] = keep("q3", 0)
    states = ["q0", "q1", "q2", "q3r", "q3"]
    return Atra.build(bk_alphabet(m), states, "q0", ["q1", "q2"], rules)


def make_bk(k: int, m: Optional[int] = None) -> Atra:
    """The automaton B_k over {b1, ..., bm, *}, m defaulting to k."""
    m = k if m is None else m
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if m < k:
        raise ValueError(f"the alphabet b1..b{m} cannot hold b{k}")
    if k == 1:
        return make_b1(m)
    lower = make_bk(k - 1, m)
    automaton = intersect(
        intersect(_shape_of_root(k - 1, m), _shape_below(lower, k - 1, m)),
        _distinct_and_witnessed(k - 1, m),
    )
    logging.info(f"Built B_{k} over {m} letters with {len(automaton.states)} states")
    return automaton
