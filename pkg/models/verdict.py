from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

import config
from models.relation import ModelFile

Direction = Literal["forward", "backward"]


class DisjunctWitness(BaseModel):
    """Homomorphism from G_(t_j) into G_(s_i) proving disjunct i is covered"""
    model_config = ConfigDict(frozen=True)

    direction: Direction = Field("forward", description="forward proves lhs <= rhs, backward proves rhs <= lhs")
    disjunct: int = Field(..., ge=0, description="Index i of the covered disjunct")
    matched: int = Field(..., ge=0, description="Index j of the disjunct on the other side")
    mapping: List[List[int]] = Field(..., description="Vertex map as [source vertex, target vertex] pairs")


class Counterexample(BaseModel):
    """Canonical model of an uncovered disjunct"""
    model_config = ConfigDict(frozen=True)

    direction: Direction = Field("forward", description="forward refutes lhs <= rhs, backward refutes rhs <= lhs")
    model: ModelFile
    witness: List[int] = Field(..., min_length=2, max_length=2, description="(input, output) of the disjunct's graph")
    disjunct: int = Field(..., ge=0, description="Index of the separating disjunct")


class Verdict(BaseModel):
    """Decision for s <= t or s = t over the angelic representation class"""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    schema_version: int = Field(config.SCHEMA_VERSION, alias="schema")
    relation: Literal["leq", "eq"] = Field(..., description="Which statement was decided")
    lhs: str = Field(..., description="Left-hand term in the term grammar")
    rhs: str = Field(..., description="Right-hand term in the term grammar")
    valid: bool
    witnesses: List[DisjunctWitness] = Field(default_factory=list)
    counterexample: Optional[Counterexample] = None

    @model_validator(mode="after")
    def check_exactly_one(self) -> "Verdict":
        if self.valid and self.counterexample is not None:
            raise ValueError("A valid verdict cannot carry a counterexample")
        if not self.valid and self.counterexample is None:
            raise ValueError("An invalid verdict needs a counterexample")
        return self

    def to_json_dict(self) -> dict:
        return self.model_dump(by_alias=True)
