from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, field_serializer
from pydantic.alias_generators import to_camel

from services.level_solver import SearchStats


class Verdict(str, Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    NONEMPTY = "NONEMPTY"
    EMPTY = "EMPTY"
    HOLDS = "HOLDS"
    FAILS = "FAILS"
    ACCEPTED = "ACCEPTED"
    REJECTED = "REJECTED"
    OK = "OK"
    BUDGET = "BUDGET"
    ERROR = "ERROR"


POSITIVE = {Verdict.SAT, Verdict.NONEMPTY, Verdict.HOLDS, Verdict.ACCEPTED, Verdict.OK}


class Stats(BaseModel):
    levels: int = Field(default=0, description="Levels expanded.")
    retained: int = Field(default=0, description="Levels kept after pruning.")
    max_valuation_sum: int = 0
    wall_time: float = Field(default=0.0, description="Seconds spent exploring.")

    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True)

    @classmethod
    def of(cls, stats: Optional[SearchStats]) -> "Stats":
        if stats is None:
            return cls()
        return cls(
            levels=stats.levels,
            retained=stats.retained,
            max_valuation_sum=stats.max_valuation_sum,
            wall_time=round(stats.wall_time, 6),
        )


class Outcome(BaseModel):
    """
    The single JSON line a command prints. A witness only accompanies a
    positive verdict; value carries the payload of non-decision commands.
    """

    result: Verdict
    witness: Optional[Any] = None
    value: Optional[Any] = None
    message: Optional[str] = None
    stats: Stats = Field(default_factory=Stats)

    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True)

    @field_serializer("result")
    def serialize_result(self, result: Verdict, _info):
        return result.value

    @property
    def exit_code(self) -> int:
        if self.result in POSITIVE:
            return 0
        if self.result == Verdict.BUDGET:
            return 3
        if self.result == Verdict.ERROR:
            return 2
        return 1
