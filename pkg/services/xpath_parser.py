# services/xpath_parser.py
import re
from typing import Iterable, List, NamedTuple, Optional

from services.xpath_ast import (
    And,
    AttrCmp,
    Child,
    ChildStar,
    ChildThen,
    Concat,
    Exists,
    Filter,
    ForwardnessError,
    NextSib,
    NextSibStar,
    NextSibThen,
    Not,
    Self,
    SelfStep,
    TypeTest,
    Union,
)

STEPS = {
    "e": SelfStep,
    "c": Child,
    "rs": NextSib,
    "c*": ChildStar,
    "cs*": ChildStar,
    "rs*": NextSibStar,
}
BACKWARD = {"p", "p*", "ls", "ls*"}
RESERVED = {"e", "c", "rs", "p", "ls"}

TOKEN = re.compile(r"\s*(?:(!=|[=|&!/\[\]()?@])|([A-Za-z_][\w'.-]*\*?))")


class QuerySyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class Token(NamedTuple):
    text: str
    position: int
    is_name: bool


def tokenize(text: str) -> List[Token]:
    tokens, position = [], 0
    while position < len(text):
        if text[position:].strip() == "":
            break
        match = TOKEN.match(text, position)
        if match is None:
            start = len(text) - len(text[position:].lstrip())
            raise QuerySyntaxError(f"unexpected character {text[start]!r}", start)
        symbol, name = match.groups()
        start = match.start(1) if symbol else match.start(2)
        tokens.append(Token(symbol or name, start, name is not None))
        position = match.end()
    return tokens


class Parser:
    """Recursive descent over the token list; qualifier atoms backtrack."""

    def __init__(self, text: str, types: Optional[Iterable[str]], attributes: Optional[Iterable[str]]):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0
        self.types = None if types is None else frozenset(types)
        self.attributes = None if attributes is None else frozenset(attributes)

    # --- token helpers ---

    def peek(self, offset: int = 0) -> Optional[Token]:
        at = self.index + offset
        return self.tokens[at] if at < len(self.tokens) else None

    def position(self) -> int:
        token = self.peek()
        return token.position if token else len(self.text)

    def accept(self, text: str) -> bool:
        token = self.peek()
        if token is not None and not token.is_name and token.text == text:
            self.index += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            found = self.peek()
            raise QuerySyntaxError(
                f"expected {text!r}, found {found.text if found else 'end of input'!r}",
                self.position(),
            )

    def name(self) -> str:
        token = self.peek()
        if token is None or not token.is_name:
            raise QuerySyntaxError("expected a name", self.position())
        self.index += 1
        return token.text

    def finish(self):
        if self.peek() is not None:
            raise QuerySyntaxError(f"unexpected {self.peek().text!r}", self.position())

    # --- queries ---

    def query(self):
        result = self.concat()
        while self.accept("|"):
            result = Union(result, self.concat())
        return result

    def concat(self):
        result = self.postfix()
        while self._continues_path():
            self.expect("/")
            result = Concat(result, self.postfix())
        return result

    def _continues_path(self) -> bool:
        slash, after = self.peek(), self.peek(1)
        if slash is None or slash.is_name or slash.text != "/":
            return False
        return not (after is not None and not after.is_name and after.text == "@")

    def postfix(self):
        result = self.primary()
        while self.accept("["):
            result = Filter(result, self.qualifier())
            self.expect("]")
        return result

    def primary(self):
        if self.accept("("):
            result = self.query()
            self.expect(")")
            return result
        token = self.peek()
        if token is not None and token.is_name:
            if token.text in BACKWARD:
                raise ForwardnessError(f"axis {token.text!r} is not forward")
            if token.text in STEPS:
                self.index += 1
                return STEPS[token.text]()
        raise QuerySyntaxError("expected a step or '('", self.position())

    # --- qualifiers ---

    def qualifier(self):
        result = self.unary()
        while self.accept("&"):
            result = And(result, self.unary())
        return result

    def unary(self):
        if self.accept("!"):
            return Not(self.unary())
        return self.atom()

    def atom(self):
        if self.accept("@"):
            return self.comparison(SelfStep())
        start = self.index
        try:
            path = self.query()
        except QuerySyntaxError:
            path = None
        if path is not None:
            if self.accept("?"):
                return Exists(path)
            if self.accept("/"):
                self.expect("@")
                return self.comparison(path)
        self.index = start
        if self.accept("("):
            result = self.qualifier()
            self.expect(")")
            return result
        token = self.peek()
        if token is not None and token.is_name and token.text not in RESERVED | BACKWARD | set(STEPS):
            self.index += 1
            return TypeTest(self._type(token))
        raise QuerySyntaxError("expected a qualifier", self.position())

    def _type(self, token: Token) -> str:
        if self.types is not None and token.text not in self.types:
            raise QuerySyntaxError(f"unknown element type {token.text!r}", token.position)
        return token.text

    def _attribute(self) -> str:
        position = self.position()
        name = self.name()
        if self.attributes is not None and name not in self.attributes:
            raise QuerySyntaxError(f"unknown attribute name {name!r}", position)
        return name

    def comparison(self, left):
        """Parses `a1 op P/@a2` once `[left/]@` has been read."""
        if _split_head(left) is not None:
            raise ForwardnessError("the left path of a comparison must be e")
        first = self._attribute()
        if self.accept("!="):
            relation = "!="
        else:
            self.expect("=")
            relation = "="
        right = self.concat()
        self.expect("/")
        self.expect("@")
        second = self._attribute()
        split = _split_head(right)
        if split is None:
            path = Self()
        else:
            head, rest = split
            path = ChildThen(rest) if isinstance(head, Child) else NextSibThen(rest)
        return AttrCmp(first, relation, path, second)


def _split_head(query):
    """
    Splits a comparison path into its first navigation step and the rest.
    None when the path never moves.
    """
    if isinstance(query, SelfStep):
        return None
    if isinstance(query, (Child, NextSib)):
        return query, SelfStep()
    if isinstance(query, Concat):
        split = _split_head(query.first)
        if split is None:
            return _split_head(query.second)
        head, rest = split
        return head, query.second if isinstance(rest, SelfStep) else Concat(rest, query.second)
    if isinstance(query, Filter):
        split = _split_head(query.query)
        if split is not None:
            head, rest = split
            return head, Filter(rest, query.qualifier)
    raise ForwardnessError("a comparison path must be e, or start with c or rs")


def parse_query(
    text: str,
    types: Optional[Iterable[str]] = None,
    attributes: Optional[Iterable[str]] = None,
):
    """
    Parses a forward query. A bare qualifier U reads as e[U]. With types or
    attributes given, names outside them are rejected.
    """
    parser = Parser(text, types, attributes)
    if not parser.tokens:
        raise QuerySyntaxError("empty query", 0)
    try:
        result = parser.query()
        parser.finish()
        return result
    except QuerySyntaxError as first:
        parser.index = 0
        try:
            qualifier = parser.qualifier()
            parser.finish()
        except QuerySyntaxError as second:
            raise max(first, second, key=lambda error: error.position)
        return Filter(SelfStep(), qualifier)


def parse_qualifier(
    text: str,
    types: Optional[Iterable[str]] = None,
    attributes: Optional[Iterable[str]] = None,
):
    parser = Parser(text, types, attributes)
    result = parser.qualifier()
    parser.finish()
    return result
