#!/usr/bin/env python3
"""
Test the angelic decision procedure and verdict certification
"""
import random

import pytest

from models.term import Join
from models.verdict import DisjunctWitness, Verdict
from services.axioms import AXA, AXD
from services.decision import DecisionProcedure, certify, decide_eq, decide_leq, is_domain_element
from services.rel_engine import eval_term, random_model
from services.term_core import enumerate_terms, is_domain_range_product, parse_term, random_term
from services.term_graph import build_term_graph, graph_to_model
from utils.errors import ResourceLimitError

SMALL = list(enumerate_terms(["x", "y"], 3))


def terms(*texts):
    return [parse_term(text) for text in texts]


def separates(verdict, s, t):
    counterexample = verdict.counterexample
    lhs, rhs = (s, t) if counterexample.direction == "forward" else (t, s)
    model = counterexample.model.to_model()
    pair = tuple(counterexample.witness)
    return pair in eval_term(lhs, model) and pair not in eval_term(rhs, model)


class TestDecideLeq:
    def test_range_law(self):
        s, t = terms("x;ran(x)", "x")
        verdict = decide_leq(s, t)
        assert verdict.valid and verdict.counterexample is None
        assert certify(verdict, s, t)

    def test_domain_below_variable_is_invalid(self):
        s, t = terms("dom(x)", "x")
        verdict = decide_leq(s, t)
        assert not verdict.valid
        assert verdict.counterexample.model.vars == {"x": [[0, 1]]}
        assert verdict.counterexample.witness == [0, 0]
        assert certify(verdict, s, t)

    def test_twisted_law_one_direction(self):
        s, t = terms("dom(x;y);x", "x;dom(y)")
        verdict = decide_leq(s, t)
        assert not verdict.valid
        assert verdict.counterexample.model.universe == 4
        assert separates(verdict, s, t)

    def test_restricted_variable_below_variable(self):
        s, t = terms("dom(x);y", "y")
        assert decide_leq(s, t).valid
        assert not decide_leq(t, s).valid

    def test_join_on_both_sides(self):
        s, t = terms("x;(y + z)", "x;z + x;y")
        verdict = decide_leq(s, t)
        assert verdict.valid
        assert {w.disjunct for w in verdict.witnesses} == {0, 1}
        assert certify(verdict, s, t)

    def test_join_upper_bound(self):
        s, t = terms("x", "x + y")
        assert decide_leq(s, t).valid
        assert not decide_leq(t, s).valid

    def test_missing_variable_rejects(self):
        s, t = terms("x", "x;ran(y)")
        assert not decide_leq(s, t).valid

    def test_resource_cap(self):
        procedure = DecisionProcedure(jnf_cap=50)
        s = parse_term(";".join(["(x + y)"] * 8))
        with pytest.raises(ResourceLimitError):
            procedure.decide_leq(s, s)


class TestDecideEq:
    def test_axa_laws_valid(self):
        for axiom in AXA.equations + AXA.join_laws:
            decide = decide_leq if axiom.relation == "leq" else decide_eq
            verdict = decide(axiom.lhs, axiom.rhs)
            assert verdict.valid, axiom.describe()
            assert certify(verdict, axiom.lhs, axiom.rhs), axiom.describe()

    def test_twisted_law_invalid_angelically(self):
        law = AXD.get("25")
        verdict = decide_eq(law.lhs, law.rhs)
        assert not verdict.valid
        assert verdict.counterexample.direction == "backward"
        assert verdict.counterexample.witness == [0, 3]
        assert separates(verdict, law.lhs, law.rhs)
        assert certify(verdict, law.lhs, law.rhs)

    def test_reflexive(self):
        for s in enumerate_terms(["x", "y"], 5):
            assert decide_eq(s, s).valid

    def test_json_shape(self):
        s, t = terms("dom(x;y)", "dom(x;dom(y))")
        payload = decide_eq(s, t).to_json_dict()
        assert payload["schema"] == 1
        assert payload["valid"] is True
        assert payload["counterexample"] is None

    def test_domain_elements(self):
        assert is_domain_element(parse_term("dom(x);ran(y)"))
        assert is_domain_element(parse_term("ran(x)"))
        assert not is_domain_element(parse_term("x;ran(x)"))

    def test_cache_reused(self):
        procedure = DecisionProcedure(cache_size=16)
        s, t = terms("dom(x);y", "y")
        procedure.decide_leq(s, t)
        procedure.decide_leq(s, t)
        assert procedure.cache_info().hits >= 1


class TestCertify:
    def test_tampered_mapping(self):
        s, t = terms("dom(x);y", "y")
        verdict = decide_leq(s, t)
        assert verdict.witnesses[0].mapping == [[0, 0], [1, 2]]
        broken = DisjunctWitness(direction="forward", disjunct=0, matched=0, mapping=[[0, 0], [1, 1]])
        assert not certify(verdict.model_copy(update={"witnesses": [broken]}), s, t)

    def test_missing_witness(self):
        s, t = terms("x;(y + z)", "x;y + x;z")
        verdict = decide_leq(s, t)
        assert not certify(verdict.model_copy(update={"witnesses": verdict.witnesses[:1]}), s, t)

    def test_tampered_counterexample_witness(self):
        law = AXD.get("25")
        verdict = decide_eq(law.lhs, law.rhs)
        moved = verdict.counterexample.model_copy(update={"witness": [0, 1]})
        assert not certify(verdict.model_copy(update={"counterexample": moved}), law.lhs, law.rhs)

    def test_other_terms(self):
        s, t = terms("x;ran(x)", "x")
        verdict = decide_leq(s, t)
        assert not certify(verdict, t, s)

    def test_round_trip_through_json(self):
        law = AXD.get("25")
        verdict = decide_eq(law.lhs, law.rhs)
        reloaded = Verdict.model_validate_json(verdict.model_dump_json(by_alias=True))
        assert certify(reloaded, law.lhs, law.rhs)

    def test_inconsistent_verdict_rejected(self):
        with pytest.raises(ValueError):
            Verdict(relation="leq", lhs="x", rhs="x", valid=False)

    def test_join_free_shortcut_agrees_with_normal_form(self):
        procedure = DecisionProcedure()
        for s in SMALL:
            for t in SMALL:
                direct = procedure.decide_leq(s, t)
                doubled = procedure.decide_leq(Join(s, s), Join(t, t))
                assert direct.valid == doubled.valid, (str(s), str(t))
                if not direct.valid:
                    assert direct.counterexample.model == doubled.counterexample.model


class TestOracle:
    def test_agreement_with_canonical_model(self):
        small = list(enumerate_terms(["x", "y"], 4))
        for s in small:
            g = build_term_graph(s)
            model = graph_to_model(g, extra_variables=["x", "y"])
            for t in small:
                verdict = decide_leq(s, t)
                assert verdict.valid == ((g.input, g.output) in eval_term(t, model)), (str(s), str(t))
                if not verdict.valid:
                    assert separates(verdict, s, t)

    @pytest.mark.slow
    def test_agreement_full_enumeration(self):
        full = list(enumerate_terms(["x", "y"], 6))
        procedure = DecisionProcedure()
        invalid = 0
        for s in full:
            g = build_term_graph(s)
            model = graph_to_model(g, extra_variables=["x", "y"])
            for t in full:
                verdict = procedure.decide_leq(s, t)
                assert verdict.valid == ((g.input, g.output) in eval_term(t, model)), (str(s), str(t))
                if verdict.valid:
                    continue
                # the counterexample is the canonical model of s itself
                assert verdict.counterexample.witness == [g.input, g.output]
                invalid += 1
                if invalid % 97 == 0:
                    assert separates(verdict, s, t)
        assert invalid > 0

    def test_valid_inequations_hold_in_random_models(self):
        rng = random.Random(17)
        for index in range(300):
            s = random_term(["x", "y"], 3, rng, allow_join=True)
            t = random_term(["x", "y"], 3, rng, allow_join=True)
            verdict = decide_leq(s, t)
            if verdict.valid:
                model = random_model(rng.randint(1, 4), ["x", "y"], 0.4, index)
                assert eval_term(s, model) <= eval_term(t, model)
            else:
                assert separates(verdict, s, t)


class TestOrder:
    def test_transitive(self):
        for a in SMALL:
            for b in SMALL:
                if not decide_leq(a, b).valid:
                    continue
                for c in SMALL:
                    if decide_leq(b, c).valid:
                        assert decide_leq(a, c).valid, (str(a), str(b), str(c))

    def test_mutual_bounds_are_equal(self):
        for a in SMALL:
            for b in SMALL:
                both = decide_leq(a, b).valid and decide_leq(b, a).valid
                assert both == decide_eq(a, b).valid

    def test_domain_bound_splits_over_composition(self):
        for r in SMALL:
            bound = parse_term(f"dom({r})")
            for s in SMALL:
                for t in SMALL:
                    if not decide_leq(bound, parse_term(f"({s});({t})")).valid:
                        continue
                    assert decide_leq(bound, s).valid and decide_leq(bound, t).valid
                    assert is_domain_element(s) and is_domain_element(t)

    def test_below_a_domain_term_is_a_domain_element(self):
        for s in enumerate_terms(["x", "y"], 4):
            for t in SMALL:
                if decide_leq(s, parse_term(f"dom({t})")).valid:
                    assert is_domain_element(s)
                    assert is_domain_range_product(s)

    def test_above_a_domain_term_is_a_domain_range_product(self):
        for s in SMALL:
            bound = parse_term(f"dom({s})")
            for t in enumerate_terms(["x", "y"], 4):
                if decide_leq(bound, t).valid:
                    assert is_domain_range_product(t), (str(s), str(t))
