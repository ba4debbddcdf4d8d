"""
Decision procedure for s <= t and s = t over angelic (composition, dom, ran, join)
relation algebras.

Both sides are brought to join normal form s_1 + ... + s_n and t_1 + ... + t_m.
s <= t is valid iff every s_i admits a homomorphism G_(t_j) -> G_(s_i) for some j.
When some s_i admits none, the canonical model of G_(s_i) separates the sides at
(input, output) of that graph.
"""
import logging
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import config
from models.relation import ModelFile
from models.term import Dom, Term
from models.verdict import Counterexample, DisjunctWitness, Direction, Verdict
from services.rel_engine import eval_term
from services.term_core import contains_join, format_term, join_normal_form, variables
from services.term_graph import build_term_graph, graph_to_model, hom_exists, is_homomorphism

logger = logging.getLogger(__name__)


class DecisionProcedure:
    """Memoizing decider; results are keyed by structural term identity"""

    def __init__(self, cache_size: Optional[int] = None, jnf_cap: Optional[int] = None):
        self.cache_size = cache_size if cache_size is not None else config.get_decision_cache_size()
        self.jnf_cap = jnf_cap
        self._leq = lru_cache(maxsize=self.cache_size)(self._decide_leq_uncached)
        self._forms = lru_cache(maxsize=self.cache_size)(self._join_forms)
        self._variables = lru_cache(maxsize=self.cache_size)(self._ordered_variables)
        self._text = lru_cache(maxsize=self.cache_size)(format_term)
        self._countermodel = lru_cache(maxsize=self.cache_size)(self._canonical_countermodel)

    def _join_forms(self, t: Term) -> Tuple[Term, ...]:
        # join-free terms stand for themselves, keeping graph cache hits on the same object
        if not contains_join(t):
            return (t,)
        return tuple(join_normal_form(t, self.jnf_cap))

    @staticmethod
    def _ordered_variables(t: Term) -> Tuple[str, ...]:
        return tuple(variables(t))

    @staticmethod
    def _canonical_countermodel(term: Term, extra: Tuple[str, ...]) -> Tuple[ModelFile, List[int]]:
        graph = build_term_graph(term)
        model = graph_to_model(graph, extra_variables=list(extra))
        return model.to_file(), [graph.input, graph.output]

    def _covering(self, lhs: Sequence[Term], rhs: Sequence[Term], direction: Direction) -> Tuple[List[DisjunctWitness], Optional[int]]:
        """Witnesses for covered disjuncts of lhs, and the index of the first uncovered one"""
        witnesses: List[DisjunctWitness] = []
        for i, si in enumerate(lhs):
            target = build_term_graph(si)
            names = set(self._variables(si))
            found = None
            for j, tj in enumerate(rhs):
                # a variable of t_j missing from s_i rules the homomorphism out
                if not names.issuperset(self._variables(tj)):
                    continue
                mapping = hom_exists(build_term_graph(tj), target)
                if mapping is not None:
                    found = DisjunctWitness(
                        direction=direction,
                        disjunct=i,
                        matched=j,
                        mapping=[[u, mapping[u]] for u in sorted(mapping)],
                    )
                    break
            if found is None:
                return witnesses, i
            witnesses.append(found)
        return witnesses, None

    def _decide_leq_uncached(self, s: Term, t: Term, direction: Direction = "forward") -> Tuple[List[DisjunctWitness], Optional[Counterexample]]:
        lhs = self._forms(s)
        rhs = self._forms(t)
        witnesses, failed = self._covering(lhs, rhs, direction)
        if failed is None:
            return witnesses, None
        extra = tuple(dict.fromkeys(self._variables(s) + self._variables(t)))
        model, witness = self._countermodel(lhs[failed], extra)
        counterexample = Counterexample(
            direction=direction,
            model=model,
            witness=list(witness),
            disjunct=failed,
        )
        return witnesses, counterexample

    def decide_leq(self, s: Term, t: Term) -> Verdict:
        """
        Decide whether s <= t holds in every angelic relational model

        Raises:
            ResourceLimitError: if a join normal form exceeds its cap
        """
        witnesses, counterexample = self._leq(s, t, "forward")
        verdict = Verdict(
            relation="leq",
            lhs=self._text(s),
            rhs=self._text(t),
            valid=counterexample is None,
            witnesses=witnesses,
            counterexample=counterexample,
        )
        logger.debug(f"decide_leq {verdict.lhs} <= {verdict.rhs}: {verdict.valid}")
        return verdict

    def decide_eq(self, s: Term, t: Term) -> Verdict:
        """Decide s = t as s <= t and t <= s; the counterexample records which direction failed"""
        forward, counterexample = self._leq(s, t, "forward")
        witnesses = list(forward)
        if counterexample is None:
            backward, counterexample = self._leq(t, s, "backward")
            witnesses.extend(backward)
        verdict = Verdict(
            relation="eq",
            lhs=self._text(s),
            rhs=self._text(t),
            valid=counterexample is None,
            witnesses=witnesses,
            counterexample=counterexample,
        )
        logger.debug(f"decide_eq {verdict.lhs} = {verdict.rhs}: {verdict.valid}")
        return verdict

    def is_domain_element(self, t: Term) -> bool:
        """True when t = dom(t) is valid"""
        return self.decide_eq(t, Dom(t)).valid

    def certify(self, verdict: Verdict, s: Term, t: Term) -> bool:
        """
        Re-check a verdict independently of how it was produced

        Homomorphism witnesses are verified edge by edge; counterexamples are
        re-evaluated in their model. Any discrepancy, malformed witness or error
        gives False.
        """
        try:
            if verdict.lhs != format_term(s) or verdict.rhs != format_term(t):
                return False
            if verdict.valid:
                return self._certify_proof(verdict, s, t)
            return self._certify_counterexample(verdict, s, t)
        except Exception as e:
            logger.warning(f"Certification raised {type(e).__name__}: {str(e)}")
            return False

    def _certify_proof(self, verdict: Verdict, s: Term, t: Term) -> bool:
        directions = [("forward", s, t)]
        if verdict.relation == "eq":
            directions.append(("backward", t, s))
        for direction, lhs, rhs in directions:
            lhs_forms = join_normal_form(lhs, self.jnf_cap)
            rhs_forms = join_normal_form(rhs, self.jnf_cap)
            covered = set()
            for witness in verdict.witnesses:
                if witness.direction != direction:
                    continue
                if witness.disjunct >= len(lhs_forms) or witness.matched >= len(rhs_forms):
                    return False
                mapping = {u: v for u, v in witness.mapping}
                if len(mapping) != len(witness.mapping):
                    return False
                source = build_term_graph(rhs_forms[witness.matched])
                target = build_term_graph(lhs_forms[witness.disjunct])
                if not is_homomorphism(mapping, source, target):
                    return False
                covered.add(witness.disjunct)
            if covered != set(range(len(lhs_forms))):
                return False
        return True

    def _certify_counterexample(self, verdict: Verdict, s: Term, t: Term) -> bool:
        counterexample = verdict.counterexample
        if verdict.relation == "leq" and counterexample.direction != "forward":
            return False
        lhs, rhs = (s, t) if counterexample.direction == "forward" else (t, s)
        model = ModelFile.model_validate(counterexample.model.model_dump()).to_model()
        pair = tuple(counterexample.witness)
        return pair in eval_term(lhs, model, "angelic") and pair not in eval_term(rhs, model, "angelic")

    def cache_info(self):
        return self._leq.cache_info()


_default = DecisionProcedure()


def decide_leq(s: Term, t: Term) -> Verdict:
    return _default.decide_leq(s, t)


def decide_eq(s: Term, t: Term) -> Verdict:
    return _default.decide_eq(s, t)


def is_domain_element(t: Term) -> bool:
    return _default.is_domain_element(t)


def certify(verdict: Verdict, s: Term, t: Term) -> bool:
    return _default.certify(verdict, s, t)
