from typing import List

from pydantic import BaseModel, ConfigDict, Field
from pydantic.alias_generators import to_camel

from services.dtd import Dtd


class DtdRule(BaseModel):
    state: str
    letter: str
    left: str = Field(..., description="State at the left child.")
    right: str = Field(..., description="State at the right child.")

    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True)


class DtdFile(BaseModel):
    """A DTD as a top-down tree automaton over element types and attribute names."""

    types: List[str]
    attributes: List[str] = Field(default_factory=list)
    states: List[str]
    initial: str
    finals: List[str] = Field(default_factory=list)
    rules: List[DtdRule] = Field(default_factory=list)

    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True)

    def to_dtd(self) -> Dtd:
        return Dtd(
            types=frozenset(self.types),
            attributes=frozenset(self.attributes),
            states=frozenset(self.states),
            initial=self.initial,
            finals=frozenset(self.finals),
            rules=frozenset((r.state, r.letter, r.left, r.right) for r in self.rules),
        )

    @classmethod
    def from_dtd(cls, dtd: Dtd) -> "DtdFile":
        """Only for DTDs whose states are strings."""
        return cls(
            types=sorted(dtd.types),
            attributes=sorted(dtd.attributes),
            states=sorted(dtd.states),
            initial=dtd.initial,
            finals=sorted(dtd.finals),
            rules=[
                DtdRule(state=s, letter=x, left=s0, right=s1)
                for s, x, s0, s1 in sorted(dtd.rules)
            ],
        )
