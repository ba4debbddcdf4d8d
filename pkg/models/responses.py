from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

import config


class EvalResult(BaseModel):
    """Value of a term in a model"""
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(config.SCHEMA_VERSION, alias="schema")
    term: str
    mode: Literal["angelic", "demonic"]
    universe: int
    pairs: List[List[int]] = Field(..., description="Sorted pairs of the resulting relation")


class CertifyResult(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(config.SCHEMA_VERSION, alias="schema")
    lhs: str
    rhs: str
    relation: Literal["leq", "eq"]
    valid: bool = Field(..., description="The verdict being certified")
    certified: bool


class ErrorResponse(BaseModel):
    """Model for error responses"""
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(config.SCHEMA_VERSION, alias="schema")
    detail: str = Field(..., description="Error message")
    error_code: Optional[str] = Field(None, description="Specific error code")
    offset: Optional[int] = Field(None, description="Byte offset for term syntax errors")
