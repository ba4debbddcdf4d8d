from dataclasses import dataclass
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

import config
from models.relation import ModelFile
from models.term import Term


@dataclass(frozen=True)
class Axiom:
    label: str
    lhs: Term
    rhs: Term
    relation: Literal["eq", "leq"] = "eq"

    def describe(self) -> str:
        symbol = "<=" if self.relation == "leq" else "="
        return f"({self.label}) {self.lhs} {symbol} {self.rhs}"


@dataclass(frozen=True)
class QuasiEquation:
    """premises (all equations) imply conclusions (all equations)"""
    label: str
    premises: Tuple[Tuple[Term, Term], ...]
    conclusions: Tuple[Tuple[Term, Term], ...]

    def describe(self) -> str:
        left = " & ".join(f"{lhs} = {rhs}" for lhs, rhs in self.premises)
        right = " & ".join(f"{lhs} = {rhs}" for lhs, rhs in self.conclusions)
        return f"({self.label}) {left} => {right}"


@dataclass(frozen=True)
class AxiomCatalog:
    name: Literal["axa", "axd"]
    equations: Tuple[Axiom, ...]
    quasi_equations: Tuple[QuasiEquation, ...] = ()
    join_laws: Tuple[Axiom, ...] = ()

    def get(self, label: str) -> Axiom:
        for axiom in self.equations + self.join_laws:
            if axiom.label == label:
                return axiom
        raise KeyError(f"Catalog {self.name} has no law labelled {label}")

    def labels(self) -> List[str]:
        return [axiom.label for axiom in self.equations]


class ScanViolation(BaseModel):
    """An axiom instance that fails in a concrete model"""
    label: str = Field(..., description="Axiom label")
    model_index: int = Field(..., ge=0, description="Position of the model in the scanned sequence")
    model: ModelFile
    substitution: Dict[str, str] = Field(default_factory=dict, description="Axiom variable -> substituted term")
    witness: List[int] = Field(..., description="Pair present in exactly one side")
    side: Literal["lhs", "rhs"]


class ScanReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(config.SCHEMA_VERSION, alias="schema")
    catalog: str
    mode: Literal["angelic", "demonic"]
    models_tested: int = 0
    instances_checked: int = 0
    violations: List[ScanViolation] = Field(default_factory=list)


class CycleFreeViolation(BaseModel):
    label: Literal["31", "32"]
    elements: List[int] = Field(..., description="Violating x, y (and z for law 32)")


class CycleFreeReport(BaseModel):
    cycle_free: bool
    violations: List[CycleFreeViolation] = Field(default_factory=list)


class SmokeEntry(BaseModel):
    label: str
    statement: str = Field(..., description="The law in the term grammar")
    expected_valid: bool
    decided_valid: bool
    certified: bool = Field(..., description="The verdict passed independent certification")
    passed: bool


class SmokeReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(config.SCHEMA_VERSION, alias="schema")
    passed: bool
    entries: List[SmokeEntry] = Field(default_factory=list)
    failures: Optional[List[str]] = None
