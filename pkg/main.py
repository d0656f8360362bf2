# main.py
import argparse
import json
import logging
import sys
from typing import Callable, List, Optional, Union

from pydantic import BaseModel, TypeAdapter, ValidationError

import config
from models.automaton_file import AutomatonFile
from models.document import DocumentNode
from models.dtd_file import DtdFile
from models.machine_file import MachineFile
from models.outcome import Outcome, Stats, Verdict
from models.tree_file import TreeFile
from services.abstraction import CertificationError, atra_nonempty_finite
from services.atra import Atra, dualize, find_final_run, has_final_run, has_prefix_run, intersect, is_final_run, union_
from services.bk import make_bk
from services.dtd import Dtd, universal_dtd
from services.level_solver import Budget, BudgetExceeded, itca_accepts, nonempty_finite
from services.safety import atra_inclusion_safety, atra_nonempty_safety
from services.trees import check_xml, encode_xml
from services.xpath_ast import classify, format_query, names
from services.xpath_eval import eval as eval_query
from services.xpath_parser import parse_query
from services.xpath_sat import xpath_sat_finite, xpath_sat_safety

Document = Union[DocumentNode, List[DocumentNode]]


# --- Input ---


def read_json(path: str):
    if path == "-":
        return json.loads(sys.stdin.read())
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def load_automaton(path: str) -> Atra:
    return AutomatonFile.model_validate(read_json(path)).to_atra()


def load_document(path: str) -> List[DocumentNode]:
    document = TypeAdapter(Document).validate_python(read_json(path))
    return document if isinstance(document, list) else [document]


def budget_of(args) -> Budget:
    return Budget(max_levels=args.budget_levels, max_valsum=args.budget_valsum)


def split_names(text: Optional[str]) -> List[str]:
    return [name for name in (text or "").split(",") if name]


def dtd_for(args, query) -> Dtd:
    if args.dtd:
        return DtdFile.model_validate(read_json(args.dtd)).to_dtd()
    types, attributes = names(query)
    types = types | set(split_names(args.types))
    if not types:
        raise ValueError("the query names no element type; pass --types or --dtd")
    return universal_dtd(types, attributes | set(split_names(args.atts)))


def verdict(positive: bool, yes: Verdict, no: Verdict) -> Verdict:
    return yes if positive else no


# --- atra ---


def atra_member(args) -> Outcome:
    a, tree = load_automaton(args.automaton), TreeFile.model_validate(read_json(args.tree)).to_tree()
    if args.as_prefix:
        accepted = has_prefix_run(a, tree)
        return Outcome(result=verdict(accepted, Verdict.ACCEPTED, Verdict.REJECTED))
    # fin and saf coincide on finite trees
    run = find_final_run(a, tree)
    if run is None:
        return Outcome(result=Verdict.REJECTED)
    if not is_final_run(a, tree, run):
        raise CertificationError("the accepting run found does not validate")
    witness = {node: sorted([t.state, t.datum] for t in threads) for node, threads in sorted(run.items())}
    return Outcome(result=Verdict.ACCEPTED, witness=witness)


def atra_nonempty_fin(args) -> Outcome:
    a = load_automaton(args.automaton)
    result = atra_nonempty_finite(a, budget_of(args))
    if not result.nonempty:
        return Outcome(result=Verdict.UNSAT, stats=Stats.of(result.stats))
    if not has_final_run(a, result.witness):
        raise CertificationError("the witness tree is not accepted")
    return Outcome(
        result=Verdict.SAT,
        witness=TreeFile.from_tree(result.witness).model_dump(by_alias=True),
        stats=Stats.of(result.stats),
    )


def atra_nonempty_saf(args) -> Outcome:
    result = atra_nonempty_safety(load_automaton(args.automaton), budget_of(args))
    return Outcome(result=verdict(result.nonempty, Verdict.NONEMPTY, Verdict.EMPTY), stats=Stats.of(result.stats))


def atra_inclusion(args) -> Outcome:
    result = atra_inclusion_safety(load_automaton(args.first), load_automaton(args.second), budget_of(args))
    return Outcome(result=verdict(result.holds, Verdict.HOLDS, Verdict.FAILS), stats=Stats.of(result.stats))


def emit_automaton(args, a: Atra):
    encoded = AutomatonFile.from_atra(a)
    if not args.out:
        return encoded
    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write(encoded.model_dump_json(by_alias=True))
    logging.info(f"Wrote an automaton with {len(a.states)} states to {args.out}")
    return Outcome(result=Verdict.OK, value=args.out)


def atra_dual(args):
    return emit_automaton(args, dualize(load_automaton(args.automaton)))


def atra_and(args):
    return emit_automaton(args, intersect(load_automaton(args.first), load_automaton(args.second)))


def atra_or(args):
    return emit_automaton(args, union_(load_automaton(args.first), load_automaton(args.second)))


def atra_gen_bk(args):
    return emit_automaton(args, make_bk(args.k, args.m))


# --- itca ---


def itca_nonempty(args) -> Outcome:
    machine = MachineFile.model_validate(read_json(args.machine)).to_machine()
    result = nonempty_finite(machine, budget_of(args))
    if not result.nonempty:
        return Outcome(result=Verdict.UNSAT, stats=Stats.of(result.stats))
    if not itca_accepts(machine, result.witness, args.block_bound):
        raise CertificationError("the witness tree is not accepted by the machine")
    return Outcome(
        result=Verdict.SAT,
        witness=TreeFile.from_tree(result.witness).model_dump(by_alias=True),
        stats=Stats.of(result.stats),
    )


def itca_member(args) -> Outcome:
    machine = MachineFile.model_validate(read_json(args.machine)).to_machine()
    tree = TreeFile.model_validate(read_json(args.tree)).to_tree()
    accepted = itca_accepts(machine, tree, args.block_bound)
    return Outcome(result=verdict(accepted, Verdict.ACCEPTED, Verdict.REJECTED))


# --- xpath ---


def query_of(args):
    return parse_query(args.query, split_names(args.types) or None, split_names(args.atts) or None)


def xpath_parse(args) -> Outcome:
    return Outcome(result=Verdict.OK, value=format_query(query_of(args)))


def xpath_classify(args) -> Outcome:
    return Outcome(result=Verdict.OK, value=classify(query_of(args)).value)


def xpath_eval(args) -> Outcome:
    query = query_of(args)
    roots = load_document(args.doc)
    types = {node.type for node in _elements(roots)} | set(split_names(args.types))
    attributes = {name for node in _elements(roots) for name in node.atts} | set(split_names(args.atts))
    view = check_xml(encode_xml(roots, types, attributes), types, attributes)
    pairs = sorted(eval_query(view, query), key=lambda p: (len(p[0]), p[0], len(p[1]), p[1]))
    return Outcome(result=Verdict.OK, value=[list(p) for p in pairs])


def _elements(nodes: List[DocumentNode]):
    for node in nodes:
        yield node
        yield from _elements(node.children)


def xpath_sat_fin(args) -> Outcome:
    query = query_of(args)
    result = xpath_sat_finite(query, dtd_for(args, query), budget_of(args))
    if not result.satisfiable:
        return Outcome(result=Verdict.UNSAT, stats=Stats.of(result.stats))
    return Outcome(
        result=Verdict.SAT,
        witness=[node.model_dump(by_alias=True) for node in result.document],
        stats=Stats.of(result.stats),
    )


def xpath_sat_saf(args) -> Outcome:
    query = query_of(args)
    result = xpath_sat_safety(query, dtd_for(args, query), budget_of(args))
    return Outcome(result=verdict(result.satisfiable, Verdict.SAT, Verdict.UNSAT), stats=Stats.of(result.stats))


# --- Parser ---


def build_parser() -> argparse.ArgumentParser:
    budget = argparse.ArgumentParser(add_help=False)
    budget.add_argument("--budget-levels", type=int, default=config.BUDGET_LEVELS, help="max retained levels")
    budget.add_argument("--budget-valsum", type=int, default=config.BUDGET_VALSUM, help="max valuation sum")
    vocabulary = argparse.ArgumentParser(add_help=False)
    vocabulary.add_argument("--types", help="comma-separated element types")
    vocabulary.add_argument("--atts", help="comma-separated attribute names")
    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--out", help="write the automaton JSON here instead of stdout")
    defaults = argparse.ArgumentDefaultsHelpFormatter

    parser = argparse.ArgumentParser(prog="dtsat", description="Decision procedures for data trees.")
    families = parser.add_subparsers(dest="family", required=True)

    def command(group, name: str, handler: Callable, parents=(), help_text: str = ""):
        sub = group.add_parser(name, parents=list(parents), formatter_class=defaults, help=help_text)
        sub.set_defaults(handler=handler)
        return sub

    atra = families.add_parser("atra", help="alternating tree register automata").add_subparsers(
        dest="command", required=True
    )
    sub = command(atra, "member", atra_member, help_text="is the tree accepted?")
    sub.add_argument("--mode", choices=["fin", "saf"], default="fin", help="acceptance mode")
    sub.add_argument(
        "--as-prefix", action="store_true", help="read every leaf as an unexplored continuation"
    )
    sub.add_argument("automaton")
    sub.add_argument("tree")
    command(atra, "nonempty-fin", atra_nonempty_fin, [budget], "is some finite tree accepted?").add_argument("automaton")
    command(atra, "nonempty-saf", atra_nonempty_saf, [budget], "is some tree accepted under safety?").add_argument(
        "automaton"
    )
    for name, handler, parents in (
        ("inclusion", atra_inclusion, [budget]),
        ("and", atra_and, [out]),
        ("or", atra_or, [out]),
    ):
        sub = command(atra, name, handler, parents)
        sub.add_argument("first")
        sub.add_argument("second")
    command(atra, "dual", atra_dual, [out]).add_argument("automaton")
    sub = command(atra, "gen-bk", atra_gen_bk, [out], "the B_k family")
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--m", type=int, default=None, help="alphabet size, at least k")

    itca = families.add_parser("itca", help="counter machines on trees").add_subparsers(
        dest="command", required=True
    )
    block = argparse.ArgumentParser(add_help=False)
    block.add_argument("--block-bound", type=int, default=config.BLOCK_BOUND, help="silent moves per node")
    command(itca, "nonempty", itca_nonempty, [budget, block]).add_argument("machine")
    sub = command(itca, "member", itca_member, [block])
    sub.add_argument("machine")
    sub.add_argument("tree")

    xpath = families.add_parser("xpath", help="forward XPath").add_subparsers(dest="command", required=True)
    command(xpath, "parse", xpath_parse, [vocabulary]).add_argument("query")
    command(xpath, "classify", xpath_classify, [vocabulary]).add_argument("query")
    sub = command(xpath, "eval", xpath_eval, [vocabulary])
    sub.add_argument("--doc", required=True, help="document JSON")
    sub.add_argument("query")
    for name, handler in (("sat-fin", xpath_sat_fin), ("sat-saf", xpath_sat_saf)):
        sub = command(xpath, name, handler, [budget, vocabulary])
        sub.add_argument("--dtd", help="DTD JSON; the universal DTD over the query's names by default")
        sub.add_argument("query")
    return parser


def emit(model: BaseModel):
    print(model.model_dump_json(by_alias=True, exclude_none=True))


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=config.LOG_LEVEL, format=config.LOG_FORMAT, stream=sys.stderr)
    try:
        result = args.handler(args)
    except BudgetExceeded as e:
        logging.warning(f"Budget exceeded: {e}")
        result = Outcome(result=Verdict.BUDGET, message=str(e), stats=Stats.of(e.stats))
    except CertificationError as e:
        logging.error(f"Certification failed: {e}")
        emit(Outcome(result=Verdict.ERROR, message=str(e)))
        return 4
    except (ValidationError, ValueError, OSError) as e:
        logging.error(f"{type(e).__name__}: {e}")
        result = Outcome(result=Verdict.ERROR, message=str(e))
    emit(result)
    return result.exit_code if isinstance(result, Outcome) else 0


if __name__ == "__main__":
    sys.exit(main())
