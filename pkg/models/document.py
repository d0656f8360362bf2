from typing import Dict, List

from pydantic import BaseModel, ConfigDict, Field
from pydantic.alias_generators import to_camel


class DocumentNode(BaseModel):
    """One element of a document: its type, attribute data and ordered children."""

    type: str = Field(..., description="The element type, drawn from the declared types.")
    atts: Dict[str, int] = Field(
        default_factory=dict, description="Attribute name to datum."
    )
    children: List["DocumentNode"] = Field(default_factory=list)

    model_config = ConfigDict(alias_generator=to_camel, populate_by_name=True)


DocumentNode.model_rebuild()
