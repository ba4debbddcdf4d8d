from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

import config
from models.term import Term

NodePair = Tuple[int, int]


@dataclass(frozen=True)
class UpsetLabel:
    """The principal upset generator↑ of the free algebra order"""
    generator: Term

    def __str__(self) -> str:
        return f"({self.generator})↑"


@dataclass
class LabelledGraph:
    """A finite construction stage: nodes and a partial labelling of node pairs"""
    nodes: List[int] = field(default_factory=list)
    labels: Dict[NodePair, UpsetLabel] = field(default_factory=dict)
    next_id: int = 0

    def add_node(self) -> int:
        node = self.next_id
        self.next_id += 1
        self.nodes.append(node)
        return node

    def copy(self) -> "LabelledGraph":
        return LabelledGraph(nodes=list(self.nodes), labels=dict(self.labels), next_id=self.next_id)

    def edges(self) -> List[NodePair]:
        return sorted(self.labels)

    def generator(self, u: int, v: int) -> Optional[Term]:
        label = self.labels.get((u, v))
        return label.generator if label else None

    def predecessors(self, u: int) -> List[int]:
        return sorted(p for (p, q) in self.labels if q == u and p != u)

    def successors(self, u: int) -> List[int]:
        return sorted(q for (p, q) in self.labels if p == u and q != u)


# (step kind, u, v, a, b); kind 0 = domain, 1 = range, 2 = composition
ScheduledStep = Tuple[int, int, int, Term, Term]


class LabelledEdgeDump(BaseModel):
    source: int
    target: int
    label: str = Field(..., description="Generator of the principal upset, in the term grammar")


class StageDump(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(config.SCHEMA_VERSION, alias="schema")
    nodes: List[int]
    edges: List[LabelledEdgeDump]


class CoherenceFailure(BaseModel):
    condition: Literal["GenC", "PriC", "CompC", "DomC", "RanC", "IdeC"]
    edges: List[List[int]]
    detail: str


class CoherenceReport(BaseModel):
    coherent: bool
    failures: List[CoherenceFailure] = Field(default_factory=list)


class SaturationDefect(BaseModel):
    condition: Literal["CompS", "DomS", "RanS"]
    edge: List[int] = Field(..., description="The labelled pair (u, v), or (u, u) for DomS/RanS")
    elements: List[str] = Field(..., description="Pool elements involved: [a, b] for CompS, [a] otherwise")

    def key(self) -> Tuple:
        return (self.condition, tuple(self.edge), tuple(self.elements))


class StepRecord(BaseModel):
    index: int
    kind: Literal["dom", "ran", "comp"]
    u: int
    v: int
    a: str
    b: str
    applied: bool
    new_node: Optional[int] = None


class SaturationReport(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(config.SCHEMA_VERSION, alias="schema")
    pool: List[str]
    rounds: int
    seed: int
    steps_applied: int
    stage: StageDump
    initial_defects: List[SaturationDefect] = Field(default_factory=list)
    defects: List[SaturationDefect] = Field(default_factory=list)
    coherence: Optional[CoherenceReport] = None
    dot: Optional[str] = None
