# services/trees.py
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from models.document import DocumentNode

ROOT = ""


class TreeValidationError(ValueError):
    """Raised with the first tree invariant that a description violates."""


class XmlEncodingError(ValueError):
    """Raised when a document or tree does not fit the attribute-chain encoding."""


def show(node: str) -> str:
    return node or "ε"


@dataclass(frozen=True, eq=True)
class DataTree:
    """
    A finite binary tree whose nonleaf nodes carry a letter and a datum.
    Nodes are bit-strings; the root is the empty string.
    """

    alphabet: FrozenSet[str]
    nodes: FrozenSet[str]
    letters: Mapping[str, str]
    data: Mapping[str, int]
    # nonleaf nodes cut off by l_prefix; they read as leaves
    truncated: FrozenSet[str] = field(default=frozenset(), compare=False)

    __hash__ = None

    def is_leaf(self, node: str) -> bool:
        return node not in self.letters

    def letter(self, node: str) -> str:
        return self.letters[node]

    def datum(self, node: str) -> int:
        return self.data[node]

    @property
    def nonleaves(self) -> List[str]:
        return sorted(self.letters, key=lambda n: (len(n), n))

    @property
    def leaves(self) -> List[str]:
        return sorted((n for n in self.nodes if n not in self.letters), key=lambda n: (len(n), n))

    @property
    def depth(self) -> int:
        return max(len(n) for n in self.nodes)

    def subtree(self, node: str) -> "DataTree":
        """The tree rooted at a nonleaf node, re-rooted to ε."""
        if self.is_leaf(node):
            raise TreeValidationError(f"the subtree at leaf {show(node)} is not a tree")
        cut = len(node)
        return DataTree(
            alphabet=self.alphabet,
            nodes=frozenset(n[cut:] for n in self.nodes if n.startswith(node)),
            letters={n[cut:]: a for n, a in self.letters.items() if n.startswith(node)},
            data={n[cut:]: d for n, d in self.data.items() if n.startswith(node)},
            truncated=frozenset(n[cut:] for n in self.truncated if n.startswith(node)),
        )

    def with_data(self, data: Mapping[str, int]) -> "DataTree":
        """Same shape and letters, new data on the nonleaf nodes."""
        missing = set(self.letters) - set(data)
        if missing:
            raise TreeValidationError(f"no datum given for {show(min(missing))}")
        return DataTree(
            self.alphabet,
            self.nodes,
            dict(self.letters),
            {n: data[n] for n in self.letters},
            self.truncated,
        )

    def relabel_data(self, renaming: Mapping[int, int]) -> "DataTree":
        return self.with_data({n: renaming.get(d, d) for n, d in self.data.items()})

    def entries(self) -> List[Tuple[str, Optional[str], Optional[int]]]:
        return [
            (n, self.letters.get(n), self.data.get(n))
            for n in sorted(self.nodes, key=lambda n: (len(n), n))
        ]


def validate_tree(
    alphabet: Iterable[str],
    entries: Iterable[Tuple[str, Optional[str], Optional[int]]],
) -> DataTree:
    """
    Builds a DataTree from (path, letter, datum) entries, reporting the first
    violated invariant.
    """
    alphabet = frozenset(alphabet)
    entries = list(entries)
    nodes: Dict[str, Tuple[Optional[str], Optional[int]]] = {}
    for path, letter, datum in entries:
        if any(bit not in "01" for bit in path):
            raise TreeValidationError(f"path {path!r} is not a bit-string")
        if path in nodes:
            raise TreeValidationError(f"node {show(path)} is listed twice")
        nodes[path] = (letter, datum)
    if ROOT not in nodes:
        raise TreeValidationError("the root ε is missing")
    for path in nodes:
        if path and path[:-1] not in nodes:
            raise TreeValidationError(
                f"node set is not prefix-closed: {show(path)} has no parent"
            )
    if len(nodes) <= 1:
        raise TreeValidationError("a tree needs more than one node")
    for path in sorted(nodes, key=lambda n: (len(n), n)):
        count = (path + "0" in nodes) + (path + "1" in nodes)
        if count == 1:
            raise TreeValidationError(f"node {show(path)} has exactly one child")
    for path in sorted(nodes, key=lambda n: (len(n), n)):
        letter, datum = nodes[path]
        leaf = path + "0" not in nodes
        if leaf and (letter is not None or datum is not None):
            raise TreeValidationError(f"leaf {show(path)} carries a label")
        if not leaf and (letter is None or datum is None):
            raise TreeValidationError(f"nonleaf {show(path)} is missing its letter or datum")
        if not leaf and letter not in alphabet:
            raise TreeValidationError(f"letter {letter!r} at {show(path)} is not in the alphabet")
        if not leaf and (not isinstance(datum, int) or datum < 0):
            raise TreeValidationError(f"datum at {show(path)} must be a non-negative integer")
    return DataTree(
        alphabet=alphabet,
        nodes=frozenset(nodes),
        letters={p: l for p, (l, _) in nodes.items() if l is not None},
        data={p: d for p, (_, d) in nodes.items() if d is not None},
    )


def tree_from_labels(alphabet: Iterable[str], labels: Mapping[str, Tuple[str, int]]) -> DataTree:
    """Shorthand: the labelled nodes are the nonleaves, their missing children are leaves."""
    entries = [(path, letter, datum) for path, (letter, datum) in labels.items()]
    for path in labels:
        for child in (path + "0", path + "1"):
            if child not in labels:
                entries.append((child, None, None))
    return validate_tree(alphabet, entries)


def l_prefix(tree: DataTree, l: int) -> DataTree:
    if l < 1:
        raise ValueError(f"prefix length must be at least 1, got {l}")
    kept = frozenset(n for n in tree.nodes if len(n) <= l)
    cut = frozenset(n for n in kept if len(n) == l and not tree.is_leaf(n))
    return DataTree(
        alphabet=tree.alphabet,
        nodes=kept,
        letters={n: a for n, a in tree.letters.items() if len(n) < l},
        data={n: d for n, d in tree.data.items() if len(n) < l},
        truncated=cut | frozenset(n for n in tree.truncated if len(n) <= l),
    )


def distance(first: DataTree, second: DataTree) -> Fraction:
    """0 for equal trees, otherwise 1/l for the least l whose l-prefixes differ."""
    if first.alphabet != second.alphabet:
        raise ValueError("distance is only defined between trees over one alphabet")
    if first == second:
        return Fraction(0)
    for l in range(1, max(first.depth, second.depth) + 2):
        if l_prefix(first, l) != l_prefix(second, l):
            return Fraction(1, l)
    raise AssertionError("unequal trees must differ in some prefix")


# --- XML trees ---


def encode_xml(
    document: "DocumentNode | Sequence[DocumentNode]",
    types: Iterable[str],
    attributes: Iterable[str],
) -> DataTree:
    """
    Encodes a document (a root, optionally followed by its younger siblings) as
    an XML tree: each element becomes its type node followed by a left-going
    chain of attribute nodes, the last of which holds the first child on the
    left and the next sibling on the right.
    """
    types, attributes = frozenset(types), frozenset(attributes)
    if types & attributes:
        raise XmlEncodingError(f"names used as both type and attribute: {sorted(types & attributes)}")
    roots = [document] if isinstance(document, DocumentNode) else list(document)
    if not roots:
        raise XmlEncodingError("a document needs at least one element")
    attribute_data = [d for node in _walk(roots) for d in node.atts.values()]
    fresh = max(attribute_data, default=-1) + 1
    letters: Dict[str, str] = {}
    data: Dict[str, int] = {}

    def place(siblings: List[DocumentNode], path: str):
        nonlocal fresh
        node, rest = siblings[0], siblings[1:]
        if node.type not in types:
            raise XmlEncodingError(f"unknown element type {node.type!r}")
        letters[path], data[path] = node.type, fresh
        fresh += 1
        last = path
        for name in sorted(node.atts):
            if name not in attributes:
                raise XmlEncodingError(f"unknown attribute name {name!r}")
            last = last + "0"
            letters[last], data[last] = name, node.atts[name]
        if node.children:
            place(list(node.children), last + "0")
        if rest:
            place(rest, last + "1")

    place(roots, ROOT)
    entries = [(p, letters[p], data[p]) for p in letters]
    for path in letters:
        for child in (path + "0", path + "1"):
            if child not in letters:
                entries.append((child, None, None))
    return validate_tree(types | attributes, entries)


def _walk(nodes: Iterable[DocumentNode]):
    for node in nodes:
        yield node
        yield from _walk(node.children)


class XmlView:
    """Read-only navigation over the elements of an XML tree."""

    def __init__(self, tree: DataTree, types: Iterable[str], attributes: Iterable[str]):
        self.tree = tree
        self.types = frozenset(types)
        self.attributes = frozenset(attributes)
        self.chain_end: Dict[str, str] = {}
        self.atts: Dict[str, Dict[str, int]] = {}
        self.elements: List[str] = []
        self._check()

    def _check(self):
        tree = self.tree
        if tree.is_leaf(ROOT) or tree.letter(ROOT) not in self.types:
            raise XmlEncodingError("the root of an XML tree must be an element node")
        pending = [ROOT]
        seen = set()
        while pending:
            node = pending.pop()
            self.elements.append(node)
            names: Dict[str, int] = {}
            last = node
            while not tree.is_leaf(last + "0") and tree.letter(last + "0") in self.attributes:
                if not tree.is_leaf(last + "1"):
                    raise XmlEncodingError(
                        f"attribute chain at {show(node)} continues below {show(last)}, "
                        "whose right child must then be a leaf"
                    )
                last = last + "0"
                name = tree.letter(last)
                if name in names:
                    raise XmlEncodingError(f"attribute {name!r} repeats at {show(node)}")
                names[name] = tree.datum(last)
                seen.add(last)
            self.chain_end[node], self.atts[node] = last, names
            seen.add(node)
            for child in (last + "1", last + "0"):
                if tree.is_leaf(child):
                    continue
                if tree.letter(child) not in self.types:
                    raise XmlEncodingError(f"node {show(child)} should be an element node")
                pending.append(child)
        self.elements.sort(key=lambda n: (len(n), n))
        stray = set(tree.letters) - seen
        if stray:
            raise XmlEncodingError(f"node {show(min(stray))} is outside every attribute chain")

    def first_child(self, node: str) -> Optional[str]:
        child = self.chain_end[node] + "0"
        return None if self.tree.is_leaf(child) else child

    def next_sibling(self, node: str) -> Optional[str]:
        sibling = self.chain_end[node] + "1"
        return None if self.tree.is_leaf(sibling) else sibling

    def children(self, node: str) -> List[str]:
        result = []
        child = self.first_child(node)
        while child is not None:
            result.append(child)
            child = self.next_sibling(child)
        return result

    def type_of(self, node: str) -> str:
        return self.tree.letter(node)

    def attribute_nodes(self, node: str) -> List[str]:
        """The chain positions 1.. |atts(node)| below an element node."""
        end = self.chain_end[node]
        return [end[: len(node) + k] for k in range(1, len(end) - len(node) + 1)]


def check_xml(tree: DataTree, types: Iterable[str], attributes: Iterable[str]) -> XmlView:
    return XmlView(tree, types, attributes)


def decode_xml(tree: DataTree, types: Iterable[str], attributes: Iterable[str]) -> List[DocumentNode]:
    """Inverts encode_xml up to the data on element nodes."""
    view = XmlView(tree, types, attributes)

    def build(node: str) -> DocumentNode:
        return DocumentNode(
            type=view.type_of(node),
            atts=dict(view.atts[node]),
            children=[build(child) for child in view.children(node)],
        )

    roots = [ROOT]
    while (sibling := view.next_sibling(roots[-1])) is not None:
        roots.append(sibling)
    logging.debug(f"Decoded {len(view.elements)} elements from an XML tree")
    return [build(root) for root in roots]
