from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

import config

PointPair = Tuple[int, int]


class FiniteAlgebra(BaseModel):
    """
    A finite (*, D, R)-algebra given by operation tables over 0..size-1

    JSON form: {"size": n, "star": [[..]..], "D": [..], "R": [..]}, with optional
    display names for the elements.
    """
    model_config = ConfigDict(frozen=True)

    size: int = Field(..., ge=1, description="Number of elements")
    star: List[List[int]] = Field(..., description="star[a][b] = a * b")
    D: List[int] = Field(..., description="Domain operation")
    R: List[int] = Field(..., description="Range operation")
    names: Optional[List[str]] = Field(None, description="Display names, one per element")

    @model_validator(mode="after")
    def check_tables(self) -> "FiniteAlgebra":
        n = self.size
        if len(self.star) != n or any(len(row) != n for row in self.star):
            raise ValueError(f"star must be a {n}x{n} table")
        if len(self.D) != n or len(self.R) != n:
            raise ValueError(f"D and R must have {n} entries")
        values = [v for row in self.star for v in row] + list(self.D) + list(self.R)
        if any(not 0 <= v < n for v in values):
            raise ValueError(f"Table entries must lie in 0..{n - 1}")
        if self.names is not None and len(self.names) != n:
            raise ValueError(f"names must have {n} entries")
        return self

    @property
    def elements(self) -> range:
        return range(self.size)

    def mul(self, a: int, b: int) -> int:
        return self.star[a][b]

    def name(self, a: int) -> str:
        return self.names[a] if self.names else str(a)

    def domain_elements(self) -> List[int]:
        return [a for a in self.elements if self.D[a] == a]

    def tables(self) -> dict:
        return {"size": self.size, "star": self.star, "D": self.D, "R": self.R}


@dataclass(frozen=True)
class Point:
    """A representation point; copies remember the base element they duplicate"""
    id: int
    origin: int
    round: int = 0
    defect: Optional[Tuple[int, int]] = None


@dataclass(frozen=True)
class Connector:
    """Connector edge u -a-> q added while curing the defect of s at p"""
    u: int
    label: int
    q: int
    copy_target: int
    via: int
    defect: Tuple[int, int]


@dataclass(frozen=True)
class RangeDefect:
    element: int
    point: int


@dataclass(frozen=True)
class PartialMapRepr:
    """Points and, per algebra element, a set of point pairs"""
    points: Tuple[Point, ...]
    edges: Dict[int, FrozenSet[PointPair]]
    connectors: Tuple[Connector, ...] = ()
    rounds: int = 0
    # points of the original Wagner-Preston part
    base_size: int = 0

    @property
    def size(self) -> int:
        return len(self.points)

    def edges_of(self, a: int) -> FrozenSet[PointPair]:
        return self.edges.get(a, frozenset())


class PointDump(BaseModel):
    id: int
    origin: int
    round: int
    defect: Optional[List[int]] = None


class ReprDump(BaseModel):
    points: List[PointDump]
    edges: Dict[str, List[List[int]]] = Field(..., description="Element -> sorted point pairs")
    connectors: List[List[int]] = Field(default_factory=list, description="[u, label, q] triples")


class VerificationReport(BaseModel):
    passed: bool
    domain_ok: bool
    composition_ok: bool
    faithful: bool
    connectors_ok: bool
    failures: List[str] = Field(default_factory=list)


class RoundSummary(BaseModel):
    round: int
    defects_before: int
    defects_after: int
    points: int
    verification: VerificationReport


class RepresentationReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(config.SCHEMA_VERSION, alias="schema")
    cycle_free: bool
    unsafe: bool = False
    caveat: Optional[str] = None
    initial_defects: List[List[int]] = Field(default_factory=list)
    remaining_defects: List[List[int]] = Field(default_factory=list)
    rounds: List[RoundSummary] = Field(default_factory=list)
    converged: bool = False
    initial_verification: Optional[VerificationReport] = None
    representation: Optional[ReprDump] = None


class EnumerationReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(config.SCHEMA_VERSION, alias="schema")
    size: int
    constraints: List[str]
    count: int
    complete: bool = Field(..., description="False when the node budget stopped the search")
    algebras: List[FiniteAlgebra] = Field(default_factory=list)
