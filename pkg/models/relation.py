from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

Pair = Tuple[int, int]
Mode = Literal["angelic", "demonic"]


@dataclass(frozen=True)
class Relation:
    """Finite binary relation over the universe 0..universe_size-1"""
    universe_size: int
    pairs: FrozenSet[Pair]
    _successors: Dict[int, FrozenSet[int]] = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.universe_size < 1:
            raise ValueError(f"Universe size must be positive, got {self.universe_size}")
        for u, v in self.pairs:
            if not (0 <= u < self.universe_size and 0 <= v < self.universe_size):
                raise ValueError(f"Pair ({u}, {v}) lies outside a universe of size {self.universe_size}")
        rows: Dict[int, set] = {}
        for u, v in self.pairs:
            rows.setdefault(u, set()).add(v)
        object.__setattr__(self, "_successors", {u: frozenset(vs) for u, vs in rows.items()})

    @classmethod
    def of(cls, universe_size: int, pairs: Iterable[Pair]) -> "Relation":
        return cls(universe_size, frozenset((int(u), int(v)) for u, v in pairs))

    @classmethod
    def empty(cls, universe_size: int) -> "Relation":
        return cls(universe_size, frozenset())

    @classmethod
    def full(cls, universe_size: int) -> "Relation":
        return cls(universe_size, frozenset((u, v) for u in range(universe_size) for v in range(universe_size)))

    def successors(self, u: int) -> FrozenSet[int]:
        return self._successors.get(u, frozenset())

    def sources(self) -> FrozenSet[int]:
        return frozenset(self._successors)

    def targets(self) -> FrozenSet[int]:
        return frozenset(v for _, v in self.pairs)

    def is_coreflexive(self) -> bool:
        return all(u == v for u, v in self.pairs)

    def is_partial_function(self) -> bool:
        return all(len(vs) <= 1 for vs in self._successors.values())

    def sorted_pairs(self) -> List[List[int]]:
        return [[u, v] for u, v in sorted(self.pairs)]

    def __contains__(self, pair: Pair) -> bool:
        return tuple(pair) in self.pairs

    def __le__(self, other: "Relation") -> bool:
        return self.pairs <= other.pairs

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class RelationalModel:
    """A universe together with a valuation of variables as relations"""
    universe_size: int
    valuation: Dict[str, Relation]

    def __post_init__(self):
        for name, relation in self.valuation.items():
            if relation.universe_size != self.universe_size:
                raise ValueError(
                    f"Variable '{name}' has universe size {relation.universe_size}, model has {self.universe_size}"
                )

    def to_file(self) -> "ModelFile":
        return ModelFile(
            universe=self.universe_size,
            vars={name: relation.sorted_pairs() for name, relation in sorted(self.valuation.items())},
        )


class ModelFile(BaseModel):
    """JSON model file: {"universe": n, "vars": {"x": [[0,1],[0,2]]}}"""
    universe: int = Field(..., ge=1, description="Universe size n; points are 0..n-1")
    vars: Dict[str, List[List[int]]] = Field(default_factory=dict, description="Pairs of each variable")

    @field_validator("vars")
    @classmethod
    def check_pairs(cls, value: Dict[str, List[List[int]]]) -> Dict[str, List[List[int]]]:
        for name, pairs in value.items():
            seen = set()
            for pair in pairs:
                if len(pair) != 2:
                    raise ValueError(f"Variable '{name}': pairs must have two entries, got {pair}")
                key = (pair[0], pair[1])
                if key in seen:
                    raise ValueError(f"Variable '{name}': duplicate pair {list(key)}")
                seen.add(key)
        return value

    @model_validator(mode="after")
    def check_bounds(self) -> "ModelFile":
        for name, pairs in self.vars.items():
            for u, v in pairs:
                if not (0 <= u < self.universe and 0 <= v < self.universe):
                    raise ValueError(f"Variable '{name}': pair [{u}, {v}] outside universe {self.universe}")
        return self

    def to_model(self) -> RelationalModel:
        return RelationalModel(
            universe_size=self.universe,
            valuation={name: Relation.of(self.universe, pairs) for name, pairs in self.vars.items()},
        )


class EquationReport(BaseModel):
    """Outcome of comparing two terms in one model"""
    holds: bool = Field(..., description="True when both sides evaluate equally (or the inclusion holds)")
    witness: Optional[List[int]] = Field(None, description="Pair present in exactly one side")
    side: Optional[Literal["lhs", "rhs"]] = Field(None, description="Side that contains the witness")
