#!/usr/bin/env python3
"""
Test term graph construction, gluing and homomorphism search
"""
import pytest

from models.graphs import TermGraph
from services.rel_engine import eval_term
from services.term_core import enumerate_terms, parse_term
from services.term_graph import (
    build_term_graph,
    graph_compose,
    graph_to_model,
    has_antisymmetric_reachability,
    has_variable_loops,
    hom_exists,
    is_homomorphism,
    to_dot,
    to_networkx,
)
from utils.errors import JoinNotAllowedError


def graph(text):
    return build_term_graph(parse_term(text))


def oracle(s, t):
    g = build_term_graph(s)
    model = graph_to_model(g, extra_variables=["x", "y"])
    return (g.input, g.output) in eval_term(t, model)


class TestConstruction:
    def test_dom_moves_output_to_input(self):
        g = graph("dom(x)")
        assert g.size == 2
        assert g.edges == {(0, "x", 1)}
        assert g.input == g.output == 0

    def test_ran_moves_input_to_output(self):
        g = graph("ran(x)")
        assert g.edges == {(0, "x", 1)}
        assert g.input == g.output == 1

    def test_chain(self):
        g = graph("x;x")
        assert g.size == 3
        assert g.edges == {(0, "x", 1), (1, "x", 2)}
        assert (g.input, g.output) == (0, 2)

    def test_range_glued_after_variable(self):
        g = graph("x;ran(x)")
        assert g.size == 3
        assert g.edges == {(0, "x", 1), (2, "x", 1)}
        assert (g.input, g.output) == (0, 1)

    def test_compose_single_edges(self):
        g = graph_compose(graph("x"), graph("y"))
        assert g.size == 3
        assert g.edges == {(0, "x", 1), (1, "y", 2)}

    def test_compose_with_range_graph(self):
        assert graph_compose(graph("x"), graph("ran(x)")) == graph("x;ran(x)")

    def test_compose_domain_then_variable(self):
        g = graph_compose(graph("dom(x)"), graph("y"))
        assert {label for u, label, _ in g.edges if u == g.input} == {"x", "y"}

    def test_join_rejected(self):
        with pytest.raises(JoinNotAllowedError):
            graph("x + y")

    def test_endpoints_validated(self):
        with pytest.raises(ValueError):
            TermGraph(size=2, edges=frozenset(), input=0, output=2)

    def test_structure_of_enumerated_graphs(self):
        for t in enumerate_terms(["x", "y"], 6):
            g = build_term_graph(t)
            assert has_antisymmetric_reachability(g)
            assert not has_variable_loops(g)

    def test_networkx_view_keeps_parallel_labels(self):
        g = TermGraph(size=2, edges=frozenset({(0, "x", 1), (0, "y", 1), (1, "x", 1)}), input=0, output=1)
        view = to_networkx(g)
        assert sorted(view.nodes) == [0, 1]
        assert view.number_of_edges(0, 1) == 2
        assert set(view[0][1]) == {"x", "y"}

    def test_label_indexes(self):
        g = graph("x;ran(x)")
        assert g.labels == {"x"}
        assert g.successor_index == {(0, "x"): {1}, (2, "x"): {1}}
        assert g.predecessor_index == {(1, "x"): {0, 2}}
        assert g.in_labels[1] == {"x"} and g.out_labels[1] == set()
        assert g.sorted_edges == ((0, "x", 1), (2, "x", 1))
        assert g.successor_index is g.successor_index

    def test_loops_do_not_count_against_antisymmetry(self):
        g = TermGraph(size=2, edges=frozenset({(0, "x", 1), (1, "x", 1), (0, "y", 0)}), input=0, output=1)
        assert has_antisymmetric_reachability(g)

    def test_two_cycle_breaks_antisymmetry(self):
        g = TermGraph(size=2, edges=frozenset({(0, "x", 1), (1, "y", 0)}), input=0, output=1)
        assert not has_antisymmetric_reachability(g)


class TestHomomorphisms:
    def test_folding_range_copy(self):
        assert hom_exists(graph("x;ran(x)"), graph("x")) == {0: 0, 1: 1, 2: 0}

    def test_unmatched_label(self):
        assert hom_exists(graph("x;y"), graph("x")) is None

    def test_identity(self):
        g = graph("x")
        assert hom_exists(g, g) == {0: 0, 1: 1}

    def test_every_graph_maps_to_itself(self):
        for t in enumerate_terms(["x", "y"], 5):
            g = build_term_graph(t)
            mapping = hom_exists(g, g)
            assert mapping is not None and is_homomorphism(mapping, g, g)

    def test_tampered_map_rejected(self):
        source, target = graph("x;ran(x)"), graph("x")
        assert is_homomorphism({0: 0, 1: 1, 2: 0}, source, target)
        assert not is_homomorphism({0: 0, 1: 1, 2: 1}, source, target)
        assert not is_homomorphism({0: 0, 1: 1}, source, target)

    def test_input_output_preserved(self):
        assert hom_exists(graph("x"), graph("x;x")) is None
        assert hom_exists(graph("dom(x)"), graph("x;x")) is None
        assert hom_exists(graph("dom(x)"), graph("dom(x;x)")) == {0: 0, 1: 1}


class TestCanonicalModel:
    def test_variable_graph(self):
        model = graph_to_model(graph("x"))
        assert model.universe_size == 2
        assert model.valuation["x"].pairs == {(0, 1)}

    def test_input_output_in_own_term(self):
        g = graph("dom(x)")
        assert (g.input, g.input) in eval_term(parse_term("dom(x)"), graph_to_model(g))

    def test_twisted_law_separated(self):
        g = graph("dom(x;y);x")
        assert g.size == 4
        model = graph_to_model(g)
        assert (g.input, g.output) in eval_term(parse_term("dom(x;y);x"), model)
        assert (g.input, g.output) not in eval_term(parse_term("x;dom(y)"), model)

    def test_missing_variables_are_empty(self):
        model = graph_to_model(graph("x"), extra_variables=["y"])
        assert len(model.valuation["y"]) == 0

    def test_own_term_holds_for_enumerated_terms(self):
        for s in enumerate_terms(["x", "y"], 6):
            g = build_term_graph(s)
            assert (g.input, g.output) in eval_term(s, graph_to_model(g))

    def test_dot_marks_endpoints(self):
        text = to_dot(graph("x;y"))
        assert "ι" in text and "o" in text and '[label="y"]' in text


class TestOracle:
    def test_homomorphism_iff_semantic_membership_small(self):
        small = list(enumerate_terms(["x", "y"], 4))
        for s in small:
            for t in small:
                found = hom_exists(build_term_graph(t), build_term_graph(s)) is not None
                assert found == oracle(s, t), (str(s), str(t))

    @pytest.mark.slow
    def test_homomorphism_iff_semantic_membership_full(self):
        full = list(enumerate_terms(["x", "y"], 6))
        for s in full:
            for t in full:
                found = hom_exists(build_term_graph(t), build_term_graph(s)) is not None
                assert found == oracle(s, t), (str(s), str(t))
