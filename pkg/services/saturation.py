"""
Finite stages of the labelled-graph completeness construction.

Edge labels are principal upsets of the free algebra, held as generator terms.
Every question about membership or equality of labels is decided by the
decision procedure, since validity coincides with the free algebra order.

Only a finite pool of elements is scheduled, so saturation is always checked
relative to that pool.
"""
import logging
import random
from collections import deque
from typing import Deque, Dict, Iterable, List, Optional, Sequence, Tuple

from models.saturation import (
    CoherenceFailure,
    CoherenceReport,
    LabelledEdgeDump,
    LabelledGraph,
    SaturationDefect,
    SaturationReport,
    ScheduledStep,
    StageDump,
    StepRecord,
    UpsetLabel,
)
from models.term import Comp, Dom, Ran, Term
from services.decision import DecisionProcedure
from services.term_core import compose_all, contains_join, format_term, require_join_free
from utils.errors import JoinNotAllowedError, UnlabelledEdgeError

logger = logging.getLogger(__name__)

STEP_KINDS = {0: "dom", 1: "ran", 2: "comp"}


class SaturationEngine:
    """
    Builds G_0 from an element pool and applies scheduled successor steps

    Steps never modify their input graph: an applied step returns a copy with one
    extra node, a no-op returns the input itself.
    """

    def __init__(self, pool: Sequence[Term], seed: int = 0, procedure: Optional[DecisionProcedure] = None):
        if not pool:
            raise ValueError("The element pool must not be empty")
        for element in pool:
            require_join_free(element, "saturation")
        self.pool: List[Term] = list(pool)
        self.seed = seed
        self.procedure = procedure or DecisionProcedure()
        self.scheduler = Scheduler(self.pool, seed)
        self.graph = self.init_graph(self.pool)
        self.history: List[StepRecord] = []

    # -- decisions --------------------------------------------------------

    def leq(self, s: Term, t: Term) -> bool:
        return self.procedure.decide_leq(s, t).valid

    def eq(self, s: Term, t: Term) -> bool:
        return self.procedure.decide_eq(s, t).valid

    def is_domain_element(self, t: Term) -> bool:
        return self.eq(t, Dom(t))

    def is_range_element(self, t: Term) -> bool:
        return self.eq(t, Ran(t))

    # -- construction -------------------------------------------------------

    def init_graph(self, elements: Sequence[Term]) -> LabelledGraph:
        """
        One edge per element: u_a -> v_a labelled a, with loops dom(a) and ran(a)

        u_a = v_a exactly when a is a domain element; then the single loop is a.
        """
        if not elements:
            raise ValueError("init_graph needs at least one element")
        graph = LabelledGraph()
        for element in elements:
            if contains_join(element):
                raise JoinNotAllowedError(f"Saturation labels must be join-free: '{format_term(element)}'")
            u = graph.add_node()
            if self.is_domain_element(element):
                graph.labels[(u, u)] = UpsetLabel(element)
                continue
            v = graph.add_node()
            graph.labels[(u, v)] = UpsetLabel(element)
            graph.labels[(u, u)] = UpsetLabel(Dom(element))
            graph.labels[(v, v)] = UpsetLabel(Ran(element))
        logger.info(f"Initial stage: {len(graph.nodes)} nodes for {len(elements)} elements")
        return graph

    def _loop_generator(self, g: LabelledGraph, u: int) -> Term:
        c = g.generator(u, u)
        if c is None:
            raise UnlabelledEdgeError(f"Node {u} has no loop label")
        return c

    def step_dom(self, g: LabelledGraph, u: int, a: Term) -> LabelledGraph:
        """Witness a at u when dom(a) is in the loop label of u"""
        c = self._loop_generator(g, u)
        if not self.leq(c, Dom(a)):
            return g
        product = Comp(Dom(c), a)
        if self.is_domain_element(product):
            return g
        result = g.copy()
        w = result.add_node()
        result.labels[(u, w)] = UpsetLabel(product)
        result.labels[(w, w)] = UpsetLabel(Ran(product))
        for p in g.predecessors(u):
            result.labels[(p, w)] = UpsetLabel(Comp(g.generator(p, u), a))
        return result

    def step_ran(self, g: LabelledGraph, u: int, a: Term) -> LabelledGraph:
        """Mirror image of step_dom: witness a arriving at u"""
        c = self._loop_generator(g, u)
        if not self.leq(c, Ran(a)):
            return g
        product = Comp(a, Ran(c))
        if self.is_range_element(product):
            return g
        result = g.copy()
        w = result.add_node()
        result.labels[(w, u)] = UpsetLabel(product)
        result.labels[(w, w)] = UpsetLabel(Dom(product))
        for p in g.successors(u):
            result.labels[(w, p)] = UpsetLabel(Comp(a, g.generator(u, p)))
        return result

    def step_comp(self, g: LabelledGraph, u: int, v: int, a: Term, b: Term) -> LabelledGraph:
        """Insert a midpoint w on the edge (u, v) witnessing a;b"""
        c = g.generator(u, v)
        if c is None:
            raise UnlabelledEdgeError(f"Edge ({u}, {v}) is not labelled")
        if u == v:
            return g
        if not self.leq(c, Comp(a, b)):
            return g
        head = Comp(Dom(c), a)
        tail_guard = Dom(Comp(b, Ran(c)))
        left = compose_all([Dom(c), a, tail_guard])
        if self.is_domain_element(left):
            return g
        right = compose_all([Ran(head), b, Ran(c)])
        if self.is_range_element(right):
            return g
        result = g.copy()
        w = result.add_node()
        result.labels[(u, w)] = UpsetLabel(left)
        result.labels[(w, v)] = UpsetLabel(right)
        result.labels[(w, w)] = UpsetLabel(Comp(Ran(head), tail_guard))
        for p in g.predecessors(u):
            if p != v:
                result.labels[(p, w)] = UpsetLabel(compose_all([g.generator(p, u), a, tail_guard]))
        for q in g.successors(v):
            if q != u:
                result.labels[(w, q)] = UpsetLabel(compose_all([Ran(head), b, g.generator(v, q)]))
        return result

    def apply(self, g: LabelledGraph, step: ScheduledStep) -> LabelledGraph:
        kind, u, v, a, b = step
        if kind == 0:
            return self.step_dom(g, u, a)
        if kind == 1:
            return self.step_ran(g, u, a)
        return self.step_comp(g, u, v, a, b)

    def advance(self) -> Tuple[ScheduledStep, bool]:
        """Apply the next scheduled step to the current graph"""
        step = self.scheduler.next(self.graph)
        before = self.graph
        self.graph = self.apply(before, step)
        applied = self.graph is not before
        kind, u, v, a, b = step
        self.history.append(StepRecord(
            index=len(self.history),
            kind=STEP_KINDS[kind],
            u=u,
            v=v,
            a=format_term(a),
            b=format_term(b),
            applied=applied,
            new_node=self.graph.nodes[-1] if applied else None,
        ))
        return step, applied

    def run(self, rounds: int) -> LabelledGraph:
        if rounds < 0:
            raise ValueError(f"rounds must be non-negative, got {rounds}")
        for _ in range(rounds):
            self.advance()
        applied = sum(1 for record in self.history if record.applied)
        logger.info(f"Saturation ran {rounds} steps, {applied} applied, {len(self.graph.nodes)} nodes")
        return self.graph

    # -- conditions ------------------------------------------------------------

    def coherence_check(self, g: Optional[LabelledGraph] = None) -> CoherenceReport:
        g = g if g is not None else self.graph
        failures: List[CoherenceFailure] = []
        edges = g.edges()
        labelled = set(edges)

        for u, v in edges:
            for node in (u, v):
                if (node, node) not in labelled:
                    failures.append(CoherenceFailure(condition="GenC", edges=[[u, v]], detail=f"node {node} has no loop"))
            if u != v and (v, u) in labelled:
                failures.append(CoherenceFailure(condition="GenC", edges=[[u, v], [v, u]], detail="antisymmetry fails"))
            if contains_join(g.generator(u, v)):
                failures.append(CoherenceFailure(condition="PriC", edges=[[u, v]], detail="generator contains a join"))

        outgoing: Dict[int, List[int]] = {}
        for u, v in edges:
            outgoing.setdefault(u, []).append(v)
        for u, w in edges:
            for v in outgoing.get(w, []):
                if (u, v) not in labelled:
                    failures.append(CoherenceFailure(
                        condition="GenC", edges=[[u, w], [w, v]], detail=f"transitivity fails, ({u}, {v}) unlabelled"
                    ))
                    continue
                composite = Comp(g.generator(u, w), g.generator(w, v))
                if not self.leq(g.generator(u, v), composite):
                    failures.append(CoherenceFailure(
                        condition="CompC",
                        edges=[[u, w], [w, v], [u, v]],
                        detail=f"{g.generator(u, v)} is not below {composite}",
                    ))

        for u, v in edges:
            c = g.generator(u, v)
            if (u, u) in labelled and not self.eq(g.generator(u, u), Dom(c)):
                failures.append(CoherenceFailure(condition="DomC", edges=[[u, v]], detail=f"loop at {u} is not dom({c})"))
            if (v, v) in labelled and not self.eq(g.generator(v, v), Ran(c)):
                failures.append(CoherenceFailure(condition="RanC", edges=[[u, v]], detail=f"loop at {v} is not ran({c})"))
            if (u == v) != self.is_domain_element(c):
                failures.append(CoherenceFailure(
                    condition="IdeC", edges=[[u, v]],
                    detail="loop label is not a domain element" if u == v else "edge label is a domain element",
                ))
        return CoherenceReport(coherent=not failures, failures=failures)

    def _comp_pairs(self) -> List[Tuple[Term, Term]]:
        pairs = [(a, b) for a in self.pool for b in self.pool]
        for element in self.pool:
            if isinstance(element, Comp):
                pairs.append((element.left, element.right))
        return list(dict.fromkeys(pairs))

    def saturation_defects(self, g: Optional[LabelledGraph] = None) -> List[SaturationDefect]:
        """CompS, DomS and RanS defects relative to the pool"""
        g = g if g is not None else self.graph
        defects: List[SaturationDefect] = []
        edges = g.edges()
        for u, v in edges:
            c = g.generator(u, v)
            for a, b in self._comp_pairs():
                if not self.leq(c, Comp(a, b)):
                    continue
                witnessed = any(
                    (u, w) in g.labels and (w, v) in g.labels
                    and self.leq(g.generator(u, w), a) and self.leq(g.generator(w, v), b)
                    for w in g.nodes
                )
                if not witnessed:
                    defects.append(SaturationDefect(condition="CompS", edge=[u, v], elements=[format_term(a), format_term(b)]))
        for u in g.nodes:
            c = g.generator(u, u)
            if c is None:
                continue
            for a in self.pool:
                if self.leq(c, Dom(a)):
                    if not any(p == u and self.leq(g.generator(p, w), a) for p, w in edges):
                        defects.append(SaturationDefect(condition="DomS", edge=[u, u], elements=[format_term(a)]))
                if self.leq(c, Ran(a)):
                    if not any(w == u and self.leq(g.generator(p, w), a) for p, w in edges):
                        defects.append(SaturationDefect(condition="RanS", edge=[u, u], elements=[format_term(a)]))
        return defects

    # -- output ------------------------------------------------------------------

    def report(self, rounds: int, initial_defects: Iterable[SaturationDefect] = (), with_coherence: bool = True,
               with_dot: bool = False) -> SaturationReport:
        return SaturationReport(
            pool=[format_term(element) for element in self.pool],
            rounds=rounds,
            seed=self.seed,
            steps_applied=sum(1 for record in self.history if record.applied),
            stage=stage_dump(self.graph),
            initial_defects=list(initial_defects),
            defects=self.saturation_defects(),
            coherence=self.coherence_check() if with_coherence else None,
            dot=to_dot(self.graph) if with_dot else None,
        )


class Scheduler:
    """
    Fair schedule of (kind, u, v, a, b) tuples

    Each pass lists every tuple over the current nodes and the pool: loops with
    kinds 0 and 1 for every a, and labelled pairs u != v with kind 2 for every
    (a, b). The pass is shuffled with the seeded generator and consumed in
    order; a new pass starts when it runs out, so every tuple recurs forever.
    """

    def __init__(self, pool: Sequence[Term], seed: int = 0):
        self.pool = list(pool)
        self.rng = random.Random(seed)
        self.queue: Deque[ScheduledStep] = deque()
        self.passes = 0

    def _refill(self, g: LabelledGraph) -> None:
        steps: List[ScheduledStep] = []
        for u, v in g.edges():
            if u == v:
                for a in self.pool:
                    steps.append((0, u, u, a, a))
                    steps.append((1, u, u, a, a))
            else:
                for a in self.pool:
                    for b in self.pool:
                        steps.append((2, u, v, a, b))
        self.rng.shuffle(steps)
        self.queue = deque(steps)
        self.passes += 1

    def next(self, g: LabelledGraph) -> ScheduledStep:
        if not self.queue:
            self._refill(g)
        return self.queue.popleft()


def init_graph(elements: Sequence[Term], procedure: Optional[DecisionProcedure] = None) -> LabelledGraph:
    return SaturationEngine(elements, procedure=procedure).graph


def run_saturation(elements: Sequence[Term], rounds: int, seed: int = 0,
                   procedure: Optional[DecisionProcedure] = None) -> Tuple[LabelledGraph, List[SaturationDefect]]:
    """Build G_0, apply `rounds` scheduled steps and report the remaining defects"""
    engine = SaturationEngine(elements, seed=seed, procedure=procedure)
    engine.run(rounds)
    defects = engine.saturation_defects()
    logger.info(f"{len(defects)} saturation defects remain after {rounds} steps")
    return engine.graph, defects


def stage_dump(g: LabelledGraph) -> StageDump:
    return StageDump(
        nodes=list(g.nodes),
        edges=[LabelledEdgeDump(source=u, target=v, label=format_term(g.generator(u, v))) for u, v in g.edges()],
    )


def to_dot(g: LabelledGraph, name: str = "stage") -> str:
    lines = [f"digraph {name} {{"]
    for node in g.nodes:
        loop = g.generator(node, node)
        title = f"{node}: {format_term(loop)}" if loop is not None else str(node)
        lines.append(f'  {node} [label="{title}"];')
    for u, v in g.edges():
        if u != v:
            lines.append(f'  {u} -> {v} [label="{format_term(g.generator(u, v))}"];')
    lines.append("}")
    return "\n".join(lines)
