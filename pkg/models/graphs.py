from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Set, Tuple

Edge = Tuple[int, str, int]

# Vertex of the source graph -> vertex of the target graph
VertexMap = Dict[int, int]


@dataclass(frozen=True)
class TermGraph:
    """
    A 2-pointed labelled directed graph (V, E, input, output)

    Vertices are the dense ids 0..size-1; edges are (source, variable, target).
    """
    size: int
    edges: FrozenSet[Edge]
    input: int
    output: int

    def __post_init__(self):
        if not (0 <= self.input < self.size and 0 <= self.output < self.size):
            raise ValueError(f"Input {self.input} and output {self.output} must be vertices of a graph with {self.size} vertices")
        for u, _, v in self.edges:
            if not (0 <= u < self.size and 0 <= v < self.size):
                raise ValueError(f"Edge endpoint outside 0..{self.size - 1}: ({u}, {v})")

    @property
    def vertices(self) -> range:
        return range(self.size)

    # derived views; the graph is immutable so each is computed once

    @cached_property
    def labels(self) -> FrozenSet[str]:
        return frozenset(label for _, label, _ in self.edges)

    @cached_property
    def out_labels(self) -> Dict[int, FrozenSet[str]]:
        result: Dict[int, Set[str]] = {u: set() for u in self.vertices}
        for u, label, _ in self.edges:
            result[u].add(label)
        return {u: frozenset(found) for u, found in result.items()}

    @cached_property
    def in_labels(self) -> Dict[int, FrozenSet[str]]:
        result: Dict[int, Set[str]] = {u: set() for u in self.vertices}
        for _, label, v in self.edges:
            result[v].add(label)
        return {v: frozenset(found) for v, found in result.items()}

    @cached_property
    def successor_index(self) -> Dict[Tuple[int, str], FrozenSet[int]]:
        """(u, x) -> targets of x-edges leaving u"""
        result: Dict[Tuple[int, str], Set[int]] = {}
        for u, x, v in self.edges:
            result.setdefault((u, x), set()).add(v)
        return {key: frozenset(found) for key, found in result.items()}

    @cached_property
    def predecessor_index(self) -> Dict[Tuple[int, str], FrozenSet[int]]:
        """(v, x) -> sources of x-edges entering v"""
        result: Dict[Tuple[int, str], Set[int]] = {}
        for u, x, v in self.edges:
            result.setdefault((v, x), set()).add(u)
        return {key: frozenset(found) for key, found in result.items()}

    @cached_property
    def sorted_edges(self) -> Tuple[Edge, ...]:
        return tuple(sorted(self.edges))
