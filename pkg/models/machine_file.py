from typing import List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator
from pydantic.alias_generators import to_camel

from services.counter_machines import (
    Dec,
    ExplicitMachine,
    Ifz,
    Inc,
    Instruction,
    MachineError,
    Transfer,
    Transition,
)

SIMPLE = {"inc": Inc, "dec": Dec, "ifz": Ifz}


def parse_instruction(encoded: list) -> Instruction:
    if not encoded or encoded[0] not in (*SIMPLE, "transf"):
        raise MachineError(f"unknown instruction {encoded!r}")
    op = encoded[0]
    if op == "transf":
        if len(encoded) != 3 or not isinstance(encoded[2], list):
            raise MachineError(f"a transfer reads [\"transf\", c, [targets]], got {encoded!r}")
        return Transfer(encoded[1], frozenset(encoded[2]))
    if len(encoded) != 2:
        raise MachineError(f"{op} takes exactly one counter, got {encoded!r}")
    return SIMPLE[op](encoded[1])


def format_instruction(instruction: Instruction) -> list:
    if isinstance(instruction, Transfer):
        return ["transf", instruction.counter, sorted(instruction.targets)]
    name = {Inc: "inc", Dec: "dec", Ifz: "ifz"}[type(instruction)]
    return [name, instruction.counter]


class TransitionEntry(BaseModel):
    source: str
    letter: Optional[str] = Field(default=None, description="Null for a silent move.")
    instruction: List[Union[str, int, List[int]]] = Field(
        ..., description='For example ["inc", 1] or ["transf", 1, [2, 3]].'
    )
    targets: List[str] = Field(..., description="One target for a silent move, two for a letter.")

    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True)

    @field_validator("instruction")
    @classmethod
    def instruction_is_well_formed(cls, value):
        parse_instruction(value)
        return value


class MachineFile(BaseModel):
    """The explicit transition relation of an ITCA or ITCANT with counters 1..counters."""

    alphabet: List[str]
    states: List[str]
    initial: str
    finals: List[str] = Field(default_factory=list)
    counters: int = Field(..., ge=0)
    transitions: List[TransitionEntry] = Field(default_factory=list)

    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True)

    def to_machine(self) -> ExplicitMachine:
        return ExplicitMachine(
            self.alphabet,
            self.states,
            self.initial,
            self.finals,
            self.counters,
            [
                (t.source, Transition(t.letter, parse_instruction(t.instruction), tuple(t.targets)))
                for t in self.transitions
            ],
        )

    @classmethod
    def from_machine(cls, machine: ExplicitMachine) -> "MachineFile":
        return cls(
            alphabet=sorted(machine.alphabet),
            states=sorted(machine.states),
            initial=machine.initial,
            finals=sorted(machine.finals),
            counters=machine.counters,
            transitions=[
                TransitionEntry(
                    source=source,
                    letter=t.letter,
                    instruction=format_instruction(t.instruction),
                    targets=list(t.targets),
                )
                for source in sorted(machine.states)
                for t in machine.transitions(source)
            ],
        )
