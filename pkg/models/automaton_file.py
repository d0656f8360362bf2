from typing import List

from pydantic import BaseModel, ConfigDict, Field
from pydantic.alias_generators import to_camel

from services.atra import Atra
from services.formulas import FALSE, format_formula, parse_formula


class DeltaEntry(BaseModel):
    state: str
    letter: str
    eq: bool = Field(..., description="Whether the register equals the node's datum.")
    formula: str = Field(..., description="An s-expression such as (and (atom q 0 keep) true).")

    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True)


class AutomatonFile(BaseModel):
    """
    The on-disk form of an automaton. Missing delta entries read as false.
    """

    alphabet: List[str]
    states: List[str]
    initial: str
    finals: List[str] = Field(default_factory=list)
    delta: List[DeltaEntry] = Field(default_factory=list)

    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True)

    def to_atra(self) -> Atra:
        return Atra.build(
            self.alphabet,
            self.states,
            self.initial,
            self.finals,
            {(e.state, e.letter, e.eq): parse_formula(e.formula) for e in self.delta},
        )

    @classmethod
    def from_atra(cls, a: Atra) -> "AutomatonFile":
        return cls(
            alphabet=sorted(a.alphabet),
            states=sorted(a.states),
            initial=a.initial,
            finals=sorted(a.finals),
            delta=[
                DeltaEntry(state=q, letter=x, eq=eq, formula=format_formula(f))
                for (q, x, eq), f in a.table()
                if f != FALSE
            ],
        )
