"""
Finite (*, D, R)-algebras: table enumeration, the Wagner-Preston representation
by partial maps, range defects and the gluing rounds that repair them.

Representation points are dense integers, so the edge set of an element is a
`Relation` over the points and demonic composition is checked with rel_engine.
"""
import logging
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from itertools import permutations, product
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple

import networkx as nx

import config
from models.algebra import (
    Connector,
    FiniteAlgebra,
    PartialMapRepr,
    Point,
    PointDump,
    RangeDefect,
    ReprDump,
    RepresentationReport,
    RoundSummary,
    VerificationReport,
)
from models.axioms import Axiom, QuasiEquation
from models.relation import Relation
from models.term import Term
from services.axioms import AXD, CYCLE_FREE_LAWS, eval_in_algebra, is_cycle_free, law_failures, restriction_laws
from services.rel_engine import demonic, domain, generated_relations, range_of
from services.term_core import variables
from utils.errors import (
    AxiomViolationError,
    CycleFreeViolationError,
    EnumerationBudgetExceeded,
    RepresentationPreconditionError,
)

logger = logging.getLogger(__name__)

UNSAFE_CAVEAT = (
    "The algebra is not cycle-free; repair rounds ran without the guarantees "
    "of the gluing construction and verification results are exploratory."
)


# --------------------------------------------------------------------------
# Enumeration
# --------------------------------------------------------------------------

def resolve_constraints(names: Sequence[str]) -> Tuple[List[Axiom], List[QuasiEquation]]:
    """Map constraint names (axd, cyclefree, restriction) to laws"""
    equations: Dict[str, Axiom] = {}
    quasi: List[QuasiEquation] = []
    for raw in names:
        name = raw.strip().lower()
        if name == "axd":
            equations.update((law.label, law) for law in AXD.equations)
        elif name == "restriction":
            equations.update((law.label, law) for law in restriction_laws())
        elif name in ("cyclefree", "cycle-free"):
            quasi.extend(CYCLE_FREE_LAWS)
        else:
            raise ValueError(f"Unknown constraint set '{raw}', expected axd, restriction or cyclefree")
    ordered = [equations[label] for label in sorted(equations, key=int)]
    return ordered, quasi


def _instances(laws: Sequence[Axiom], n: int) -> List[Tuple[Term, Term, Dict[str, int]]]:
    result = []
    for law in laws:
        names = sorted(set(variables(law.lhs)) | set(variables(law.rhs)))
        for values in product(range(n), repeat=len(names)):
            result.append((law.lhs, law.rhs, dict(zip(names, values))))
    return result


def _pending(instances, star, dom, ran) -> Optional[list]:
    """Instances still undecided; None when some defined instance fails"""
    still_open = []
    for lhs, rhs, env in instances:
        left = eval_in_algebra(lhs, star, dom, ran, env)
        right = eval_in_algebra(rhs, star, dom, ran, env) if left is not None else None
        if left is None or right is None:
            still_open.append((lhs, rhs, env))
        elif left != right:
            return None
    return still_open


def _quasi_holds(quasi: Sequence[QuasiEquation], star, dom, ran, n: int) -> bool:
    for law in quasi:
        names = sorted({name for pair in law.premises + law.conclusions for term in pair for name in variables(term)})
        for values in product(range(n), repeat=len(names)):
            env = dict(zip(names, values))
            if all(eval_in_algebra(l, star, dom, ran, env) == eval_in_algebra(r, star, dom, ran, env)
                   for l, r in law.premises):
                if not all(eval_in_algebra(l, star, dom, ran, env) == eval_in_algebra(r, star, dom, ran, env)
                           for l, r in law.conclusions):
                    return False
    return True


# Node counter shared by pool workers; None in the parent process
_shared_nodes = None


def _share_node_counter(counter) -> None:
    global _shared_nodes
    _shared_nodes = counter


class _NodeBudget:
    """
    Search nodes charged against one limit for the whole enumeration

    In pool workers the nodes are pooled in a shared counter, reported in
    chunks, and node by node once the last seen total is near the limit.
    """

    CHUNK = 256

    def __init__(self, limit: int):
        self.limit = limit
        self.nodes = 0
        self._unreported = 0
        # shared total as of the last flush
        self._seen = 0

    def spend(self) -> bool:
        if _shared_nodes is None:
            if self.nodes >= self.limit:
                return False
            self.nodes += 1
            return True
        self.nodes += 1
        self._unreported += 1
        if self._unreported < self.CHUNK and self._seen + self._unreported <= self.limit:
            return True
        return self.flush()

    def flush(self) -> bool:
        if _shared_nodes is None:
            return self.nodes <= self.limit
        with _shared_nodes.get_lock():
            _shared_nodes.value += self._unreported
            self._seen = _shared_nodes.value
        self._unreported = 0
        return self._seen <= self.limit


def _search_partition(args) -> Tuple[List[Tuple], int, bool]:
    """
    All algebras whose first star row is fixed, in a deterministic order

    Returns (tables, nodes visited, stopped by budget).
    """
    n, constraint_names, first_row, limit = args
    laws, quasi = resolve_constraints(constraint_names)
    instances = _instances(laws, n)
    cells = [(i, j) for i in range(1, n) for j in range(n)]
    found: List[Tuple] = []
    budget = _NodeBudget(limit)
    if not budget.flush():
        return found, 0, True

    def backtrack(position, star, dom, ran, open_instances) -> bool:
        if position == len(cells):
            if _quasi_holds(quasi, star, dom, ran, n):
                found.append((tuple(tuple(row) for row in star), tuple(dom), tuple(ran)))
            return True
        i, j = cells[position]
        for value in range(n):
            if not budget.spend():
                return False
            star[i][j] = value
            remaining = _pending(open_instances, star, dom, ran)
            if remaining is not None and not backtrack(position + 1, star, dom, ran, remaining):
                star[i][j] = None
                return False
        star[i][j] = None
        return True

    for dom in product(range(n), repeat=n):
        for ran in product(range(n), repeat=n):
            star = [[None] * n for _ in range(n)]
            star[0] = list(first_row)
            open_instances = _pending(instances, star, dom, ran)
            if open_instances is None:
                continue
            if not backtrack(0, star, list(dom), list(ran), open_instances):
                return found, budget.nodes, True
    budget.flush()
    return found, budget.nodes, False


def _canonical(tables: Tuple) -> Tuple:
    star, dom, ran = tables
    n = len(dom)
    best = None
    for perm in permutations(range(n)):
        inverse = [0] * n
        for old, new in enumerate(perm):
            inverse[new] = old
        relabelled = (
            tuple(tuple(perm[star[inverse[a]][inverse[b]]] for b in range(n)) for a in range(n)),
            tuple(perm[dom[inverse[a]]] for a in range(n)),
            tuple(perm[ran[inverse[a]]] for a in range(n)),
        )
        if best is None or relabelled < best:
            best = relabelled
    return best


def _run_partitions(n: int, constraints: Tuple[str, ...], limit: int, workers: int) -> Iterator[Tuple[List[Tuple], int, bool]]:
    rows = list(product(range(n), repeat=n))
    if workers > 1:
        counter = multiprocessing.Value("q", 0)
        with ProcessPoolExecutor(max_workers=workers, initializer=_share_node_counter, initargs=(counter,)) as pool:
            results = list(pool.map(_search_partition, [(n, constraints, row, limit) for row in rows]))
        yield from results
        return
    spent = 0
    for row in rows:
        # each partition gets what the earlier ones left over
        result = _search_partition((n, constraints, row, limit - spent))
        spent += result[1]
        yield result


def enumerate_algebras(n: int, constraints: Sequence[str] = ("axd",), budget: Optional[int] = None,
                       workers: int = 1, up_to_isomorphism: bool = False) -> Iterator[FiniteAlgebra]:
    """
    Yield every algebra on 0..n-1 satisfying the constraint sets

    The search fixes D and R first, then fills the star table cell by cell,
    pruning as soon as a fully defined law instance fails; quasi-equations are
    checked on complete tables. It is split by the first row of the star table,
    and those partitions run on `workers` processes when workers > 1. Output
    order does not depend on the number of workers.

    The node budget covers all partitions together. With workers it is shared
    through a counter, so the total may exceed it by less than
    workers * _NodeBudget.CHUNK nodes, and which algebras were found before the
    budget ran out depends on scheduling.

    Raises:
        EnumerationBudgetExceeded: after yielding what was found, if the node
            budget stopped the search
    """
    if n < 1:
        raise ValueError(f"Carrier size must be positive, got {n}")
    limit = budget if budget is not None else config.get_enumeration_node_budget()
    if n > config.get_enumeration_exhaustive_max_size():
        logger.warning(f"Carrier size {n} is beyond the exhaustive range; the node budget may stop the search")
    resolve_constraints(constraints)

    yielded = 0
    nodes_total = 0
    seen: Set[Tuple] = set()
    for found, nodes, stopped in _run_partitions(n, tuple(constraints), limit, workers):
        nodes_total += nodes
        for star, dom, ran in found:
            if up_to_isomorphism:
                key = _canonical((star, dom, ran))
                if key in seen:
                    continue
                seen.add(key)
            yielded += 1
            yield FiniteAlgebra(size=n, star=[list(row) for row in star], D=list(dom), R=list(ran))
        if stopped:
            logger.warning(f"Enumeration of size {n} stopped by its budget of {limit} nodes after {yielded} algebras")
            raise EnumerationBudgetExceeded(f"Node budget of {limit} exhausted", yielded, nodes_total)
    logger.info(f"Enumerated {yielded} algebras of size {n} under {','.join(constraints)}")


# --------------------------------------------------------------------------
# Algebras of relations
# --------------------------------------------------------------------------

def generated_algebra(generators: Sequence[Relation]) -> Tuple[FiniteAlgebra, List[Relation]]:
    """The (*, D, R)-algebra of relations generated under demonic composition"""
    carrier = generated_relations(generators, mode="demonic")
    index = {relation: position for position, relation in enumerate(carrier)}
    n = len(carrier)
    algebra = FiniteAlgebra(
        size=n,
        star=[[index[demonic(x, y)] for y in carrier] for x in carrier],
        D=[index[domain(x)] for x in carrier],
        R=[index[range_of(x)] for x in carrier],
    )
    return algebra, carrier


# --------------------------------------------------------------------------
# Representations
# --------------------------------------------------------------------------

def wagner_preston(algebra: FiniteAlgebra) -> PartialMapRepr:
    """
    Represent each element a by the partial map {(x*D(a), x*a) : x in S}

    Raises:
        AxiomViolationError: if the restriction semigroup laws fail
    """
    failures = law_failures(algebra, restriction_laws())
    if failures:
        raise AxiomViolationError(f"Algebra violates {len(failures)} restriction semigroup laws", failures)
    edges = {
        a: frozenset((algebra.mul(x, algebra.D[a]), algebra.mul(x, a)) for x in algebra.elements)
        for a in algebra.elements
    }
    points = tuple(Point(id=x, origin=x) for x in algebra.elements)
    return PartialMapRepr(points=points, edges=edges, base_size=algebra.size)


def _graph(r: PartialMapRepr, loops: bool = True) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(point.id for point in r.points)
    for pairs in r.edges.values():
        graph.add_edges_from((p, q) for p, q in pairs if loops or p != q)
    return graph


def forward_closure(r: PartialMapRepr, s: int) -> Set[int]:
    """Points reachable from s along edges of any element, s included"""
    if not 0 <= s < r.size:
        raise ValueError(f"Unknown point {s}")
    return nx.descendants(_graph(r), s) | {s}


def only_loop_cycles(r: PartialMapRepr) -> bool:
    return nx.is_directed_acyclic_graph(_graph(r, loops=False))


def _edge_relation(r: PartialMapRepr, a: int) -> Relation:
    return Relation(r.size, r.edges_of(a))


def domain_failures(algebra: FiniteAlgebra, r: PartialMapRepr) -> List[str]:
    """D(x)-edges must be exactly the identity loops on the domain of x's edges"""
    failures = []
    for x in algebra.elements:
        expected = domain(_edge_relation(r, x))
        actual = _edge_relation(r, algebra.D[x])
        if expected != actual:
            missing = sorted(expected.pairs - actual.pairs)
            extra = sorted(actual.pairs - expected.pairs)
            failures.append(f"domain of {algebra.name(x)}: missing {missing}, unexpected {extra}")
    return failures


def range_defects(algebra: FiniteAlgebra, r: PartialMapRepr) -> List[RangeDefect]:
    """
    Points p with an R(s)-loop but no incoming s-edge

    Raises:
        RepresentationPreconditionError: if domain is not correctly represented
    """
    failures = domain_failures(algebra, r)
    if failures:
        raise RepresentationPreconditionError(f"Domain is not correctly represented: {failures[0]}")
    defects = []
    for s in algebra.elements:
        targets = {q for _, q in r.edges_of(s)}
        for p, q in sorted(r.edges_of(algebra.R[s])):
            if p == q and p not in targets:
                defects.append(RangeDefect(element=s, point=p))
    return defects


def _base_edge_sets(algebra: FiniteAlgebra) -> Dict[int, FrozenSet[Tuple[int, int]]]:
    return {
        a: frozenset((algebra.mul(x, algebra.D[a]), algebra.mul(x, a)) for x in algebra.elements)
        for a in algebra.elements
    }


def repair_round(algebra: FiniteAlgebra, r: PartialMapRepr, unsafe: bool = False) -> PartialMapRepr:
    """
    Cure every current range defect at once by gluing in copies of forward closures

    For a defect of s at p a fresh copy of F_D(s) is adjoined. For every copy
    edge u -a-> v with u != v, v in F_s, v = s*c along an s -c-> v edge, and
    every q with p -c-> q, the connector edge u -a-> q is added.

    Raises:
        CycleFreeViolationError: if the algebra is not cycle-free and unsafe is False
        RepresentationPreconditionError: if domain is not correctly represented
    """
    if not unsafe and not is_cycle_free(algebra):
        raise CycleFreeViolationError("Repair rounds require a cycle-free algebra; pass unsafe to explore anyway")
    defects = range_defects(algebra, r)
    if not defects:
        return r

    base = _base_edge_sets(algebra)
    base_repr = PartialMapRepr(points=tuple(Point(id=x, origin=x) for x in algebra.elements), edges=base,
                               base_size=algebra.size)
    round_number = r.rounds + 1
    points = list(r.points)
    edges: Dict[int, Set[Tuple[int, int]]] = {a: set(r.edges_of(a)) for a in algebra.elements}
    connectors = list(r.connectors)

    for defect in defects:
        s, p = defect.element, defect.point
        closure = sorted(forward_closure(base_repr, algebra.D[s]))
        reach_s = forward_closure(base_repr, s)
        copy_of: Dict[int, int] = {}
        for x in closure:
            copy_of[x] = len(points)
            points.append(Point(id=len(points), origin=x, round=round_number, defect=(s, p)))
        inside = set(closure)
        for a in algebra.elements:
            for x, y in base[a]:
                if x in inside and y in inside:
                    edges[a].add((copy_of[x], copy_of[y]))
        for v in sorted(reach_s & inside):
            labels_to_v = [c for c in algebra.elements if (s, v) in base[c]]
            for c in labels_to_v:
                targets = sorted(q for source, q in r.edges_of(c) if source == p)
                for a in algebra.elements:
                    for u, target in sorted(base[a]):
                        if target != v or u == v or u not in inside:
                            continue
                        for q in targets:
                            edges[a].add((copy_of[u], q))
                            connectors.append(Connector(
                                u=copy_of[u], label=a, q=q, copy_target=copy_of[v], via=c, defect=(s, p)
                            ))
    if unsafe:
        logger.warning(f"Repair round {round_number} ran in unsafe mode")
    logger.info(f"Repair round {round_number}: {len(defects)} defects, {len(points)} points")
    return PartialMapRepr(
        points=tuple(points),
        edges={a: frozenset(pairs) for a, pairs in edges.items()},
        connectors=tuple(dict.fromkeys(connectors)),
        rounds=round_number,
        base_size=r.base_size,
    )


def _connector_failures(algebra: FiniteAlgebra, r: PartialMapRepr) -> List[str]:
    failures = []
    for connector in r.connectors:
        u, a, q, v = connector.u, connector.label, connector.q, connector.copy_target
        copy_points = {point.id for point in r.points
                       if point.round == r.points[v].round and point.defect == r.points[v].defect}
        for b in algebra.elements:
            for source, w in sorted(r.edges_of(b)):
                if source != v or w not in copy_points:
                    continue
                continuations = [target for start, target in r.edges_of(b) if start == q]
                if not continuations:
                    failures.append(f"connector {u}-{algebra.name(a)}->{q}: no {algebra.name(b)}-edge leaves {q}")
                    continue
                for q2 in continuations:
                    if (u, q2) not in r.edges_of(algebra.mul(a, b)):
                        failures.append(f"connector {u}-{algebra.name(a)}->{q}: missing {u}-{algebra.name(algebra.mul(a, b))}->{q2}")
                    if algebra.D[b] == b:
                        if q2 != q or w != v:
                            failures.append(f"connector {u}-{algebra.name(a)}->{q}: domain element {algebra.name(b)} moves {q} to {q2}")
                    elif (v, q2) not in r.edges_of(b):
                        failures.append(f"connector {u}-{algebra.name(a)}->{q}: missing {v}-{algebra.name(b)}->{q2}")
    return failures


def verify_partial_repr(algebra: FiniteAlgebra, r: PartialMapRepr) -> VerificationReport:
    """
    Check domain and demonic composition (1), faithfulness (2) and the
    continuation properties of every connector edge
    """
    failures = domain_failures(algebra, r)
    domain_ok = not failures

    composition_ok = True
    for x in algebra.elements:
        for y in algebra.elements:
            represented = demonic(_edge_relation(r, x), _edge_relation(r, y))
            table = _edge_relation(r, algebra.mul(x, y))
            if represented != table:
                composition_ok = False
                only_table = sorted(table.pairs - represented.pairs)
                only_repr = sorted(represented.pairs - table.pairs)
                failures.append(
                    f"composition {algebra.name(x)}*{algebra.name(y)}={algebra.name(algebra.mul(x, y))}: "
                    f"only in table {only_table}, only in represented product {only_repr}"
                )

    faithful = True
    seen: Dict[FrozenSet, int] = {}
    for a in algebra.elements:
        key = r.edges_of(a)
        if key in seen:
            faithful = False
            failures.append(f"elements {algebra.name(seen[key])} and {algebra.name(a)} have the same edges")
        else:
            seen[key] = a

    connector_failures = _connector_failures(algebra, r)
    failures.extend(connector_failures)
    return VerificationReport(
        passed=not failures,
        domain_ok=domain_ok,
        composition_ok=composition_ok,
        faithful=faithful,
        connectors_ok=not connector_failures,
        failures=failures,
    )


def point_name(algebra: FiniteAlgebra, point: Point) -> str:
    return algebra.name(point.origin) + "'" * point.round


def dump_repr(algebra: FiniteAlgebra, r: PartialMapRepr) -> ReprDump:
    return ReprDump(
        points=[
            PointDump(id=p.id, origin=p.origin, round=p.round, defect=list(p.defect) if p.defect else None)
            for p in r.points
        ],
        edges={algebra.name(a): [list(pair) for pair in sorted(r.edges_of(a))] for a in algebra.elements},
        connectors=[[c.u, c.label, c.q] for c in r.connectors],
    )


class RepresentationBuilder:
    """Wagner-Preston representation followed by bounded repair rounds"""

    def __init__(self, algebra: FiniteAlgebra, unsafe: bool = False, max_rounds: Optional[int] = None):
        self.algebra = algebra
        self.unsafe = unsafe
        self.max_rounds = max_rounds if max_rounds is not None else config.get_repair_rounds_max()

    def run(self) -> Tuple[PartialMapRepr, RepresentationReport]:
        cycle_free = is_cycle_free(self.algebra)
        r = wagner_preston(self.algebra)
        initial = range_defects(self.algebra, r)
        report = RepresentationReport(
            cycle_free=cycle_free,
            unsafe=self.unsafe and not cycle_free,
            caveat=UNSAFE_CAVEAT if self.unsafe and not cycle_free else None,
            initial_defects=[[d.element, d.point] for d in initial],
            initial_verification=verify_partial_repr(self.algebra, r),
        )
        defects = initial
        for round_index in range(1, self.max_rounds + 1):
            if not defects:
                break
            r = repair_round(self.algebra, r, unsafe=self.unsafe)
            after = range_defects(self.algebra, r)
            report.rounds.append(RoundSummary(
                round=round_index,
                defects_before=len(defects),
                defects_after=len(after),
                points=r.size,
                verification=verify_partial_repr(self.algebra, r),
            ))
            defects = after
        report.remaining_defects = [[d.element, d.point] for d in defects]
        report.converged = not defects
        if defects:
            logger.warning(f"{len(defects)} range defects remain after {len(report.rounds)} repair rounds")
        report.representation = dump_repr(self.algebra, r)
        return r, report
