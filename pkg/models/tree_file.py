from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field
from pydantic.alias_generators import to_camel

from services.trees import DataTree, validate_tree


class NodeEntry(BaseModel):
    path: str = Field(..., description="Bit-string from the root; '' is the root.")
    letter: Optional[str] = Field(default=None, description="Null exactly on leaves.")
    datum: Optional[int] = Field(default=None, description="Null exactly on leaves.")

    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True)


class TreeFile(BaseModel):
    """The on-disk form of a data tree."""

    alphabet: List[str]
    nodes: List[NodeEntry]

    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True)

    def to_tree(self) -> DataTree:
        return validate_tree(
            self.alphabet, [(n.path, n.letter, n.datum) for n in self.nodes]
        )

    @classmethod
    def from_tree(cls, tree: DataTree) -> "TreeFile":
        return cls(
            alphabet=sorted(tree.alphabet),
            nodes=[
                NodeEntry(path=path, letter=letter, datum=datum)
                for path, letter, datum in tree.entries()
            ],
        )
