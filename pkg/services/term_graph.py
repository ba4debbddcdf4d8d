"""
Term graphs: construction, gluing, homomorphism search and the canonical model.

For a join-free term s the graph G_s is built inductively:
  G_x       one x-edge from input to a distinct output
  G_dom(s)  G_s with the output moved to the input
  G_ran(s)  G_s with the input moved to the output
  G_(s;t)   disjoint union of G_s and G_t with o_s glued to i_t
"""
import logging
from functools import lru_cache
from typing import Dict, Iterable, Optional, Set

import networkx as nx

import config
from models.graphs import TermGraph, VertexMap
from models.relation import Relation, RelationalModel
from models.term import Comp, Dom, Join, Ran, Term, Variable
from services.term_core import format_term
from utils.errors import JoinNotAllowedError
from utils.union_find import UnionFind

logger = logging.getLogger(__name__)


def variable_graph(name: str) -> TermGraph:
    return TermGraph(size=2, edges=frozenset({(0, name, 1)}), input=0, output=1)


def graph_compose(g1: TermGraph, g2: TermGraph) -> TermGraph:
    """Glue the output of g1 to the input of g2 and renumber densely"""
    offset = g1.size
    uf = UnionFind(g1.size + g2.size)
    uf.union(g1.output, offset + g2.input)
    labels = uf.dense_labels()
    edges = {(labels[u], x, labels[v]) for u, x, v in g1.edges}
    edges |= {(labels[offset + u], x, labels[offset + v]) for u, x, v in g2.edges}
    size = len(set(labels.values()))
    return TermGraph(size=size, edges=frozenset(edges), input=labels[g1.input], output=labels[offset + g2.output])


@lru_cache(maxsize=config.get_decision_cache_size())
def build_term_graph(t: Term) -> TermGraph:
    """
    Build G_t for a join-free term

    Raises:
        JoinNotAllowedError: if t contains a join
    """
    if isinstance(t, Variable):
        return variable_graph(t.name)
    if isinstance(t, Dom):
        g = build_term_graph(t.child)
        return TermGraph(size=g.size, edges=g.edges, input=g.input, output=g.input)
    if isinstance(t, Ran):
        g = build_term_graph(t.child)
        return TermGraph(size=g.size, edges=g.edges, input=g.output, output=g.output)
    if isinstance(t, Comp):
        return graph_compose(build_term_graph(t.left), build_term_graph(t.right))
    if isinstance(t, Join):
        raise JoinNotAllowedError(f"Term graphs are defined for join-free terms only: '{format_term(t)}'")
    raise TypeError(f"Not a term: {t!r}")


def to_networkx(g: TermGraph) -> nx.MultiDiGraph:
    graph = nx.MultiDiGraph()
    graph.add_nodes_from(g.vertices)
    for u, label, v in g.edges:
        graph.add_edge(u, v, key=label, label=label)
    return graph


def has_antisymmetric_reachability(g: TermGraph) -> bool:
    """Reachability is antisymmetric iff the graph without loops is acyclic"""
    graph = to_networkx(g)
    graph.remove_edges_from(list(nx.selfloop_edges(graph, keys=True)))
    return nx.is_directed_acyclic_graph(graph)


def has_variable_loops(g: TermGraph) -> bool:
    return any(u == v for u, _, v in g.edges)


# --------------------------------------------------------------------------
# Homomorphisms
# --------------------------------------------------------------------------

def is_homomorphism(mapping: VertexMap, source: TermGraph, target: TermGraph) -> bool:
    """Check a vertex map edge by edge, including input and output preservation"""
    if set(mapping) != set(source.vertices):
        return False
    if any(not (0 <= image < target.size) for image in mapping.values()):
        return False
    if mapping[source.input] != target.input or mapping[source.output] != target.output:
        return False
    return all((mapping[u], x, mapping[v]) in target.edges for u, x, v in source.edges)


_NONE: frozenset = frozenset()


class _HomSearch:
    """Backtracking with arc consistency on labelled edges and fail-first ordering"""

    def __init__(self, source: TermGraph, target: TermGraph):
        self.source = source
        self.target = target
        self.source_edges = source.sorted_edges
        self.forward = target.successor_index
        self.backward = target.predecessor_index

    def initial_domains(self) -> Optional[Dict[int, Set[int]]]:
        src_out, src_in = self.source.out_labels, self.source.in_labels
        dst_out, dst_in = self.target.out_labels, self.target.in_labels
        domains: Dict[int, Set[int]] = {}
        for s in self.source.vertices:
            domains[s] = {
                d for d in self.target.vertices
                if src_out[s] <= dst_out[d] and src_in[s] <= dst_in[d]
            }
        domains[self.source.input] &= {self.target.input}
        domains[self.source.output] &= {self.target.output}
        if any(not candidates for candidates in domains.values()):
            return None
        return domains

    def propagate(self, domains: Dict[int, Set[int]]) -> bool:
        changed = True
        while changed:
            changed = False
            for u, x, v in self.source_edges:
                kept_u = {a for a in domains[u] if self.forward.get((a, x), _NONE) & domains[v]}
                if kept_u != domains[u]:
                    domains[u] = kept_u
                    changed = True
                kept_v = {b for b in domains[v] if self.backward.get((b, x), _NONE) & domains[u]}
                if kept_v != domains[v]:
                    domains[v] = kept_v
                    changed = True
                if not kept_u or not kept_v:
                    return False
        return True

    def search(self, domains: Dict[int, Set[int]]) -> Optional[VertexMap]:
        open_vertices = [s for s, candidates in domains.items() if len(candidates) > 1]
        if not open_vertices:
            mapping = {s: next(iter(candidates)) for s, candidates in domains.items()}
            return mapping if is_homomorphism(mapping, self.source, self.target) else None
        chosen = min(open_vertices, key=lambda s: (len(domains[s]), s))
        for candidate in sorted(domains[chosen]):
            trial = {s: set(candidates) for s, candidates in domains.items()}
            trial[chosen] = {candidate}
            if self.propagate(trial):
                found = self.search(trial)
                if found is not None:
                    return found
        return None

    def run(self) -> Optional[VertexMap]:
        domains = self.initial_domains()
        if domains is None or not self.propagate(domains):
            return None
        return self.search(domains)


def hom_exists(source: TermGraph, target: TermGraph) -> Optional[VertexMap]:
    """
    Find a label-, input- and output-preserving homomorphism

    Args:
        source: graph mapped from
        target: graph mapped into

    Returns:
        A witnessing vertex map, or None when no homomorphism exists
    """
    if not source.labels <= target.labels:
        return None
    return _HomSearch(source, target).run()


# --------------------------------------------------------------------------
# Models and dumps
# --------------------------------------------------------------------------

def graph_to_model(g: TermGraph, extra_variables: Iterable[str] = ()) -> RelationalModel:
    """
    Canonical model of a graph: universe = vertices, x = its x-labelled edges

    Variables in extra_variables that label no edge get the empty relation.
    """
    pairs: Dict[str, set] = {name: set() for name in extra_variables}
    for u, x, v in g.edges:
        pairs.setdefault(x, set()).add((u, v))
    valuation = {name: Relation(g.size, frozenset(value)) for name, value in pairs.items()}
    return RelationalModel(universe_size=g.size, valuation=valuation)


def to_dot(g: TermGraph, name: str = "G") -> str:
    lines = [f"digraph {name} {{"]
    for vertex in g.vertices:
        marks = []
        if vertex == g.input:
            marks.append("ι")
        if vertex == g.output:
            marks.append("o")
        label = f"{vertex} ({','.join(marks)})" if marks else str(vertex)
        shape = "doublecircle" if marks else "circle"
        lines.append(f'  {vertex} [label="{label}", shape={shape}];')
    for u, x, v in g.sorted_edges:
        lines.append(f'  {u} -> {v} [label="{x}"];')
    lines.append("}")
    return "\n".join(lines)
