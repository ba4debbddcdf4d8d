#!/usr/bin/env python3
"""
Test the concrete relational semantics
"""
import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from models.relation import Relation, RelationalModel
from services.rel_engine import (
    angelic,
    check_equation,
    check_inequation,
    demonic,
    domain,
    dump_model,
    eval_term,
    generated_relations,
    load_model,
    random_model,
    random_relation,
    range_of,
    relational_ops,
)
from services.term_core import parse_term
from utils.errors import FormatError, JoinNotAllowedError, UnboundVariableError, UniverseMismatchError


def rel(n, *pairs):
    return Relation.of(n, pairs)


@st.composite
def relation_pairs(draw, count=2):
    n = draw(st.integers(min_value=1, max_value=4))
    cells = [(u, v) for u in range(n) for v in range(n)]
    return [Relation.of(n, draw(st.sets(st.sampled_from(cells)))) for _ in range(count)]


@pytest.fixture
def twisted_model():
    return RelationalModel(4, {"x": rel(4, (0, 1), (0, 2)), "y": rel(4, (2, 3))})


class TestOperations:
    def test_angelic_example(self):
        assert relational_ops("angelic", rel(2, (0, 1)), rel(2, (1, 0))) == rel(2, (0, 0))

    def test_demonic_drops_sources_with_undefined_successors(self):
        assert relational_ops("demonic", rel(3, (0, 1), (0, 2)), rel(3, (1, 1))) == rel(3)

    def test_domain_and_range(self):
        assert relational_ops("dom", rel(3, (0, 1), (2, 0))) == rel(3, (0, 0), (2, 2))
        assert relational_ops("ran", rel(3, (0, 1), (2, 0))) == rel(3, (0, 0), (1, 1))

    def test_join(self):
        assert relational_ops("join", rel(2, (0, 1)), rel(2, (1, 1))) == rel(2, (0, 1), (1, 1))

    def test_universe_mismatch(self):
        with pytest.raises(UniverseMismatchError):
            angelic(rel(2, (0, 1)), rel(3, (1, 2)))

    def test_binary_op_needs_second_operand(self):
        with pytest.raises(ValueError):
            relational_ops("angelic", rel(2))

    def test_pairs_out_of_bounds(self):
        with pytest.raises(ValueError):
            rel(2, (0, 2))

    @given(relation_pairs(count=1))
    @settings(max_examples=200, deadline=None)
    def test_domain_and_range_are_coreflexive(self, relations):
        (x,) = relations
        assert domain(x).is_coreflexive()
        assert range_of(x).is_coreflexive()

    @given(relation_pairs())
    @settings(max_examples=300, deadline=None)
    def test_demonic_below_angelic(self, relations):
        x, y = relations
        assert demonic(x, y) <= angelic(x, y)

    def test_demonic_equals_angelic_when_successors_are_defined(self):
        rng = random.Random(11)
        for _ in range(1000):
            n = rng.randint(1, 5)
            x = random_relation(n, 0.4, rng)
            y = random_relation(n, 0.4, rng)
            if all(x.successors(u) <= y.sources() for u in x.sources()):
                assert demonic(x, y) == angelic(x, y)
            else:
                assert demonic(x, y) <= angelic(x, y)

    def test_associativity(self):
        rng = random.Random(3)
        for _ in range(1000):
            n = rng.randint(1, 5)
            x, y, z = (random_relation(n, 0.35, rng) for _ in range(3))
            assert angelic(x, angelic(y, z)) == angelic(angelic(x, y), z)
            assert demonic(x, demonic(y, z)) == demonic(demonic(x, y), z)


class TestEvaluation:
    def test_twisted_law_fails_angelically(self, twisted_model):
        assert eval_term(parse_term("dom(x;y);x"), twisted_model) == rel(4, (0, 1), (0, 2))
        assert eval_term(parse_term("x;dom(y)"), twisted_model) == rel(4, (0, 2))

    def test_twisted_law_holds_demonically(self, twisted_model):
        assert eval_term(parse_term("dom(x;y);x"), twisted_model, "demonic") == rel(4)
        assert eval_term(parse_term("x;dom(y)"), twisted_model, "demonic") == rel(4)

    def test_variable_is_its_value(self, twisted_model):
        assert eval_term(parse_term("x"), twisted_model) == twisted_model.valuation["x"]

    def test_unbound_variable(self, twisted_model):
        with pytest.raises(UnboundVariableError):
            eval_term(parse_term("x;w"), twisted_model)

    def test_join_rejected_in_demonic_mode(self, twisted_model):
        with pytest.raises(JoinNotAllowedError):
            eval_term(parse_term("x + y"), twisted_model, "demonic")


class TestEquations:
    def test_domain_law_holds(self):
        for seed in range(200):
            model = random_model(4, ["x"], 0.4, seed)
            assert check_equation(parse_term("dom(x);x"), parse_term("x"), model).holds

    def test_witness_for_twisted_law(self, twisted_model):
        report = check_equation(parse_term("x;dom(y)"), parse_term("dom(x;y);x"), twisted_model)
        assert not report.holds
        assert report.witness == [0, 1]
        assert report.side == "rhs"
        assert (0, 1) in eval_term(parse_term("dom(x;y);x"), twisted_model)

    def test_identical_sides(self, twisted_model):
        assert check_equation(parse_term("x;y"), parse_term("x;y"), twisted_model).holds

    def test_inequation(self, twisted_model):
        assert check_inequation(parse_term("x;dom(y)"), parse_term("x"), twisted_model).holds
        report = check_inequation(parse_term("x"), parse_term("x;dom(y)"), twisted_model)
        assert not report.holds and report.witness == [0, 1] and report.side == "lhs"


class TestRandomModels:
    def test_density_zero(self):
        model = random_model(3, ["x", "y"], 0.0, 5)
        assert all(len(relation) == 0 for relation in model.valuation.values())

    def test_density_one(self):
        model = random_model(3, ["x", "y"], 1.0, 5)
        assert all(relation == Relation.full(3) for relation in model.valuation.values())

    def test_seed_reproduces(self):
        assert random_model(5, ["x", "y"], 0.5, 42) == random_model(5, ["x", "y"], 0.5, 42)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            random_model(0, ["x"], 0.5, 1)
        with pytest.raises(ValueError):
            random_model(2, ["x"], 1.5, 1)


class TestGeneratedRelations:
    def test_cycle_example(self):
        s, t = rel(2, (0, 1)), rel(2, (1, 0))
        assert domain(s) <= angelic(s, t)
        carrier = generated_relations([s, t])
        assert angelic(s, t) in carrier and domain(s) in carrier

    def test_demonic_closure_of_single_edge(self):
        a = rel(2, (0, 1))
        carrier = generated_relations([a], mode="demonic")
        assert set(carrier) == {a, rel(2, (0, 0)), rel(2, (1, 1)), rel(2)}


class TestModelFiles:
    def test_load_and_dump(self):
        text = json.dumps({"universe": 3, "vars": {"x": [[0, 1], [0, 2]], "y": []}})
        model = load_model(text)
        assert model.valuation["x"] == rel(3, (0, 1), (0, 2))
        assert dump_model(model) == {"universe": 3, "vars": {"x": [[0, 1], [0, 2]], "y": []}}

    def test_duplicates_rejected(self):
        with pytest.raises(FormatError):
            load_model(json.dumps({"universe": 2, "vars": {"x": [[0, 1], [0, 1]]}}))

    def test_out_of_range_rejected(self):
        with pytest.raises(FormatError):
            load_model(json.dumps({"universe": 2, "vars": {"x": [[0, 2]]}}))

    def test_malformed_pair_rejected(self):
        with pytest.raises(FormatError):
            load_model(json.dumps({"universe": 2, "vars": {"x": [[0, 1, 1]]}}))
