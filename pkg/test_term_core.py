#!/usr/bin/env python3
"""
Test term parsing, printing, join normal form and out-signatures
"""
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from models.term import Comp, Dom, Join, Ran, Variable
from services.rel_engine import eval_term, random_model
from services.term_core import (
    compose_all,
    enumerate_terms,
    format_term,
    is_domain_range_product,
    join_normal_form,
    join_of,
    out_signature,
    parse_term,
    random_term,
    replace_at,
    subterms,
    substitute,
    term_size,
    variables,
)
from utils.errors import JoinNotAllowedError, ReservedWordError, ResourceLimitError, TermSyntaxError

x, y, z = Variable("x"), Variable("y"), Variable("z")

names = st.sampled_from(["x", "y", "z", "u1", "long_name"])
terms = st.recursive(
    names.map(Variable),
    lambda children: st.one_of(
        children.map(Dom),
        children.map(Ran),
        st.tuples(children, children).map(lambda pair: Comp(*pair)),
        st.tuples(children, children).map(lambda pair: Join(*pair)),
    ),
    max_leaves=12,
)


class TestParse:
    def test_composition_binds_tighter_than_join(self):
        assert parse_term("dom(x);y + z") == Join(Comp(Dom(x), y), z)

    def test_parenthesised_join(self):
        assert parse_term("x;(y+z)") == Comp(x, Join(y, z))

    def test_left_associative(self):
        assert parse_term("x;y;z") == Comp(Comp(x, y), z)
        assert parse_term("x + y + z") == Join(Join(x, y), z)

    def test_whitespace_is_insignificant(self):
        assert parse_term("  dom ( x ; y )\t") == Dom(Comp(x, y))

    def test_unclosed_dom_reports_offset(self):
        with pytest.raises(TermSyntaxError) as info:
            parse_term("dom(")
        assert info.value.offset == 4

    def test_trailing_operator(self):
        with pytest.raises(TermSyntaxError) as info:
            parse_term("x;")
        assert info.value.offset == 2

    def test_unexpected_character(self):
        with pytest.raises(TermSyntaxError) as info:
            parse_term("x $ y")
        assert info.value.offset == 2

    @pytest.mark.parametrize("text,offset", [("\u3000dom(", 0), ("x;\u00e9", 2), ("x\u00a0;y", 1)])
    def test_only_ascii_whitespace(self, text, offset):
        with pytest.raises(TermSyntaxError) as info:
            parse_term(text)
        assert info.value.offset == offset
        assert info.value.offset == len(text[:offset].encode("utf-8"))

    def test_offsets_count_bytes(self):
        text = "\t dom(\n"
        with pytest.raises(TermSyntaxError) as info:
            parse_term(text)
        assert info.value.offset == len(text.encode("utf-8"))

    def test_depth_limit_boundary(self):
        assert term_size(parse_term("dom(" * 199 + "x" + ")" * 199)) == 200
        with pytest.raises(TermSyntaxError) as info:
            parse_term("dom(" * 200 + "x" + ")" * 200)
        assert info.value.offset == 0

    def test_deep_nesting_stops_at_the_first_excess_group(self):
        with pytest.raises(TermSyntaxError) as info:
            parse_term("dom(" * 250 + "x" + ")" * 250)
        assert info.value.offset == 800
        with pytest.raises(TermSyntaxError) as info:
            parse_term("(" * 1000 + "x" + ")" * 1000)
        assert info.value.offset == 200

    def test_long_composition_chain(self):
        with pytest.raises(TermSyntaxError) as info:
            parse_term("x" + ";x" * 200)
        assert info.value.offset == 399
        assert term_size(parse_term("x" + ";x" * 199)) == 399

    def test_explicit_depth_limit(self):
        assert parse_term("dom(dom(x))", max_depth=3) == Dom(Dom(x))
        with pytest.raises(TermSyntaxError):
            parse_term("dom(dom(x))", max_depth=2)

    def test_uppercase_identifier_rejected(self):
        with pytest.raises(TermSyntaxError) as info:
            parse_term("X")
        assert info.value.offset == 0

    @pytest.mark.parametrize("text", ["dom", "ran;x", "x;dom"])
    def test_reserved_words(self, text):
        with pytest.raises(ReservedWordError):
            parse_term(text)

    def test_reserved_prefix_is_a_variable(self):
        assert parse_term("domain;ranx") == Comp(Variable("domain"), Variable("ranx"))


class TestFormat:
    def test_examples(self):
        assert format_term(Comp(Dom(x), y)) == "dom(x);y"
        assert format_term(Join(x, y)) == "x + y"
        assert format_term(Dom(Ran(x))) == "dom(ran(x))"

    def test_minimal_parentheses(self):
        assert format_term(Comp(x, Comp(y, z))) == "x;(y;z)"
        assert format_term(Comp(Comp(x, y), z)) == "x;y;z"
        assert format_term(Comp(Join(x, y), z)) == "(x + y);z"
        assert format_term(Join(x, Join(y, z))) == "x + (y + z)"
        assert format_term(Join(Comp(x, y), z)) == "x;y + z"

    def test_str_uses_grammar(self):
        assert str(Comp(Dom(x), y)) == "dom(x);y"

    def test_round_trip_on_random_terms(self):
        rng = random.Random(2024)
        for _ in range(10_000):
            t = random_term(["x", "y", "z"], 5, rng, allow_join=True)
            assert parse_term(format_term(t)) == t

    @given(terms)
    @settings(max_examples=300, deadline=None)
    def test_round_trip_property(self, t):
        assert parse_term(format_term(t)) == t


class TestJoinNormalForm:
    def test_left_distribution(self):
        assert join_normal_form(parse_term("x;(y+z)")) == [parse_term("x;y"), parse_term("x;z")]

    def test_domain_additivity(self):
        assert join_normal_form(parse_term("dom(x+y)")) == [parse_term("dom(x)"), parse_term("dom(y)")]

    def test_join_free_is_unchanged(self):
        assert join_normal_form(x) == [x]

    def test_duplicates_removed(self):
        assert join_normal_form(parse_term("x + x;dom(y) + x")) == [x, parse_term("x;dom(y)")]

    def test_distribution_order(self):
        result = join_normal_form(parse_term("(x + y);(z + x)"))
        assert [format_term(t) for t in result] == ["x;z", "x;x", "y;z", "y;x"]

    def test_cap(self):
        t = compose_all([parse_term("x + y")] * 12)
        with pytest.raises(ResourceLimitError):
            join_normal_form(t, cap=1000)

    def test_semantics_preserved(self):
        rng = random.Random(7)
        for index in range(1000):
            t = random_term(["x", "y", "z"], 4, rng, allow_join=True)
            model = random_model(rng.randint(1, 4), ["x", "y", "z"], 0.35, index)
            forms = join_normal_form(t)
            assert all("+" not in format_term(form) for form in forms)
            assert eval_term(join_of(forms), model) == eval_term(t, model)


class TestOutSignature:
    def test_examples(self):
        assert out_signature(parse_term("dom(x);x")) == {"x": 1}
        assert out_signature(parse_term("dom(x;y);x")) == {"x": 1, "y": 0}
        assert out_signature(parse_term("x;dom(y)")) == {"x": 1, "y": 0}
        assert out_signature(parse_term("ran(dom(x))")) == {"x": 0}

    def test_counts_repeated_occurrences(self):
        assert out_signature(parse_term("x;y;x")) == {"x": 2, "y": 1}

    def test_join_rejected(self):
        with pytest.raises(JoinNotAllowedError):
            out_signature(parse_term("x + y"))


class TestHelpers:
    def test_variables_in_first_occurrence_order(self):
        assert variables(parse_term("dom(y;x);z;y")) == ["y", "x", "z"]

    def test_term_size(self):
        assert term_size(parse_term("dom(x;y)")) == 4

    def test_substitute(self):
        assert substitute(parse_term("x;dom(y)"), {"y": parse_term("x;x")}) == parse_term("x;dom(x;x)")

    def test_replace_at_every_position(self):
        t = parse_term("dom(x;y);ran(z)")
        for position, sub in subterms(t):
            assert replace_at(t, position, sub) == t
        assert replace_at(t, (1, 0), y) == parse_term("dom(x;y);ran(y)")

    def test_domain_range_product(self):
        assert is_domain_range_product(parse_term("dom(x);ran(y;x);dom(z)"))
        assert not is_domain_range_product(parse_term("dom(x);y"))

    def test_enumeration_counts(self):
        assert sum(1 for _ in enumerate_terms(["x", "y"], 4)) == 58
        assert sum(1 for _ in enumerate_terms(["x", "y"], 6)) == 746

    def test_enumeration_is_duplicate_free(self):
        listed = list(enumerate_terms(["x", "y"], 5, allow_join=True))
        assert len(listed) == len(set(listed))
