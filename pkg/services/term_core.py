"""
Parsing, printing, join normal form and syntactic analysis of terms.

Grammar (whitespace insignificant):

    term := comp ('+' comp)*
    comp := atom (';' atom)*
    atom := 'dom' '(' term ')' | 'ran' '(' term ')' | var | '(' term ')'
    var  := [a-z][a-zA-Z0-9_]*   excluding dom, ran

Composition binds tighter than join; both associate to the left.
"""
import random
import re
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import config
from models.term import Comp, Dom, Join, OutSignature, Ran, Term, Variable
from utils.errors import JoinNotAllowedError, ReservedWordError, ResourceLimitError, TermSyntaxError

RESERVED_WORDS = frozenset({"dom", "ran"})
_IDENT = re.compile(r"[a-z][a-zA-Z0-9_]*")
_ANY_WORD = re.compile(r"[A-Za-z0-9_]+")
_WHITESPACE = frozenset(" \t\n\r\f\v")

Position = Tuple[int, ...]


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, max_depth: Optional[int] = None):
        self.text = text
        self.max_depth = max_depth if max_depth is not None else config.get_term_depth_max()
        self.tokens = self._tokenize(text)
        self.index = 0
        self.nesting = 0

    @staticmethod
    def _tokenize(text: str) -> List[Tuple[str, str, int]]:
        tokens: List[Tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            char = text[pos]
            if char in _WHITESPACE:
                pos += 1
                continue
            if char in "+;()":
                tokens.append(("op", char, pos))
                pos += 1
                continue
            match = _IDENT.match(text, pos)
            if match:
                tokens.append(("ident", match.group(0), pos))
                pos = match.end()
                continue
            word = _ANY_WORD.match(text, pos)
            if word:
                raise TermSyntaxError(f"Invalid identifier '{word.group(0)}'", pos)
            raise TermSyntaxError(f"Unexpected character {char!r}", pos)
        tokens.append(("end", "", len(text)))
        return tokens

    def _peek(self) -> Tuple[str, str, int]:
        return self.tokens[self.index]

    def _advance(self) -> Tuple[str, str, int]:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _expect(self, value: str) -> None:
        kind, text, offset = self._advance()
        if kind != "op" or text != value:
            found = "end of input" if kind == "end" else repr(text)
            raise TermSyntaxError(f"Expected '{value}', found {found}", offset)

    def _check_depth(self, depth: int, offset: int) -> int:
        if depth > self.max_depth:
            raise TermSyntaxError(f"Term nested deeper than {self.max_depth} levels", offset)
        return depth

    def parse(self) -> Term:
        result, _ = self._term()
        kind, text, offset = self._peek()
        if kind != "end":
            raise TermSyntaxError(f"Unexpected {text!r}", offset)
        return result

    # each rule returns the parsed term and the depth of its AST

    def _term(self) -> Tuple[Term, int]:
        result, depth = self._comp()
        while self._peek()[:2] == ("op", "+"):
            offset = self._advance()[2]
            right, right_depth = self._comp()
            result = Join(result, right)
            depth = self._check_depth(max(depth, right_depth) + 1, offset)
        return result, depth

    def _comp(self) -> Tuple[Term, int]:
        result, depth = self._atom()
        while self._peek()[:2] == ("op", ";"):
            offset = self._advance()[2]
            right, right_depth = self._atom()
            result = Comp(result, right)
            depth = self._check_depth(max(depth, right_depth) + 1, offset)
        return result, depth

    def _atom(self) -> Tuple[Term, int]:
        kind, text, offset = self._advance()
        if kind == "ident" and text not in RESERVED_WORDS:
            return Variable(text), 1
        if kind == "ident":
            if self._peek()[:2] != ("op", "("):
                raise ReservedWordError(f"'{text}' is reserved and cannot be used as a variable", offset)
            self._advance()
        elif kind != "op" or text != "(":
            found = "end of input" if kind == "end" else repr(text)
            raise TermSyntaxError(f"Expected a term, found {found}", offset)
        self.nesting += 1
        self._check_depth(self.nesting, offset)
        inner, depth = self._term()
        self._expect(")")
        self.nesting -= 1
        if kind == "op":
            return inner, depth
        term = Dom(inner) if text == "dom" else Ran(inner)
        return term, self._check_depth(depth + 1, offset)


def parse_term(text: str, max_depth: Optional[int] = None) -> Term:
    """
    Parse a term in the concrete grammar

    Only ASCII whitespace separates tokens, so offsets count bytes of the
    UTF-8 input as well as characters.

    Args:
        text: Term text
        max_depth: Deepest AST accepted, defaults to config.get_term_depth_max()

    Raises:
        TermSyntaxError: with the offset of the offending token, also for
            terms nested deeper than max_depth
        ReservedWordError: when dom/ran is used as a variable
    """
    return _Parser(text, max_depth).parse()


# --------------------------------------------------------------------------
# Printing
# --------------------------------------------------------------------------

def format_term(t: Term) -> str:
    """Print a term with minimal parentheses; parse_term(format_term(t)) == t"""
    if isinstance(t, Variable):
        return t.name
    if isinstance(t, Dom):
        return f"dom({format_term(t.child)})"
    if isinstance(t, Ran):
        return f"ran({format_term(t.child)})"
    if isinstance(t, Comp):
        left = format_term(t.left)
        if isinstance(t.left, Join):
            left = f"({left})"
        right = format_term(t.right)
        if isinstance(t.right, (Join, Comp)):
            right = f"({right})"
        return f"{left};{right}"
    if isinstance(t, Join):
        right = format_term(t.right)
        if isinstance(t.right, Join):
            right = f"({right})"
        return f"{format_term(t.left)} + {right}"
    raise TypeError(f"Not a term: {t!r}")


# --------------------------------------------------------------------------
# Structural helpers
# --------------------------------------------------------------------------

def term_size(t: Term) -> int:
    """Number of AST nodes"""
    if isinstance(t, Variable):
        return 1
    if isinstance(t, (Dom, Ran)):
        return 1 + term_size(t.child)
    return 1 + term_size(t.left) + term_size(t.right)


def variables(t: Term) -> List[str]:
    """Variable names in order of first occurrence"""
    seen: Dict[str, None] = {}

    def walk(node: Term) -> None:
        if isinstance(node, Variable):
            seen.setdefault(node.name, None)
        elif isinstance(node, (Dom, Ran)):
            walk(node.child)
        else:
            walk(node.left)
            walk(node.right)

    walk(t)
    return list(seen)


def contains_join(t: Term) -> bool:
    if isinstance(t, Variable):
        return False
    if isinstance(t, Join):
        return True
    if isinstance(t, (Dom, Ran)):
        return contains_join(t.child)
    return contains_join(t.left) or contains_join(t.right)


def require_join_free(t: Term, context: str) -> None:
    if contains_join(t):
        raise JoinNotAllowedError(f"{context} requires a join-free term, got '{format_term(t)}'")


def substitute(t: Term, mapping: Dict[str, Term]) -> Term:
    """Replace variables simultaneously; unmapped variables stay"""
    if isinstance(t, Variable):
        return mapping.get(t.name, t)
    if isinstance(t, Dom):
        return Dom(substitute(t.child, mapping))
    if isinstance(t, Ran):
        return Ran(substitute(t.child, mapping))
    if isinstance(t, Comp):
        return Comp(substitute(t.left, mapping), substitute(t.right, mapping))
    return Join(substitute(t.left, mapping), substitute(t.right, mapping))


def subterms(t: Term, prefix: Position = ()) -> Iterator[Tuple[Position, Term]]:
    """Pre-order walk yielding (position, subterm); position 0 is child/left, 1 is right"""
    yield prefix, t
    if isinstance(t, (Dom, Ran)):
        yield from subterms(t.child, prefix + (0,))
    elif isinstance(t, (Comp, Join)):
        yield from subterms(t.left, prefix + (0,))
        yield from subterms(t.right, prefix + (1,))


def replace_at(t: Term, position: Position, new: Term) -> Term:
    if not position:
        return new
    head, rest = position[0], position[1:]
    if isinstance(t, Dom):
        return Dom(replace_at(t.child, rest, new))
    if isinstance(t, Ran):
        return Ran(replace_at(t.child, rest, new))
    if isinstance(t, (Comp, Join)):
        cls = type(t)
        if head == 0:
            return cls(replace_at(t.left, rest, new), t.right)
        return cls(t.left, replace_at(t.right, rest, new))
    raise ValueError(f"Position {position} does not exist in '{format_term(t)}'")


def composition_factors(t: Term) -> List[Term]:
    """Flatten nested compositions into their factors, left to right"""
    if isinstance(t, Comp):
        return composition_factors(t.left) + composition_factors(t.right)
    return [t]


def is_domain_range_product(t: Term) -> bool:
    """True when t is a composition of dom(...) and ran(...) terms only"""
    return all(isinstance(factor, (Dom, Ran)) for factor in composition_factors(t))


# --------------------------------------------------------------------------
# Join normal form
# --------------------------------------------------------------------------

def join_normal_form(t: Term, cap: Optional[int] = None) -> List[Term]:
    """
    Distribute every operation over join, returning join-free disjuncts

    Only the additivity laws are used. Output order is left-to-right distribution
    order with structural duplicates removed. The result can be exponential in the
    number of Join nodes, so the total node count of intermediate results is capped.

    Raises:
        ResourceLimitError: when the node cap is exceeded
    """
    limit = cap if cap is not None else config.get_join_normal_form_cap()

    def check(items: List[Tuple[Term, int]]) -> List[Tuple[Term, int]]:
        total = sum(size for _, size in items)
        if total > limit:
            raise ResourceLimitError(f"Join normal form exceeds the node cap of {limit}")
        return items

    def dedupe(items: List[Tuple[Term, int]]) -> List[Tuple[Term, int]]:
        seen: Dict[Term, int] = {}
        for term, size in items:
            seen.setdefault(term, size)
        return list(seen.items())

    def walk(node: Term) -> List[Tuple[Term, int]]:
        if isinstance(node, Variable):
            return [(node, 1)]
        if isinstance(node, Dom):
            return [(Dom(term), size + 1) for term, size in walk(node.child)]
        if isinstance(node, Ran):
            return [(Ran(term), size + 1) for term, size in walk(node.child)]
        if isinstance(node, Join):
            return check(dedupe(walk(node.left) + walk(node.right)))
        lefts, rights = walk(node.left), walk(node.right)
        if len(lefts) * len(rights) > limit:
            raise ResourceLimitError(f"Join normal form exceeds the node cap of {limit}")
        return check(dedupe([
            (Comp(lt, rt), ls + rs + 1) for lt, ls in lefts for rt, rs in rights
        ]))

    return [term for term, _ in walk(t)]


def join_of(terms: Sequence[Term]) -> Term:
    """Left-associated join of a non-empty list of terms"""
    if not terms:
        raise ValueError("Cannot join an empty list of terms")
    result = terms[0]
    for term in terms[1:]:
        result = Join(result, term)
    return result


def compose_all(terms: Sequence[Term]) -> Term:
    """Left-associated composition of a non-empty list of terms"""
    if not terms:
        raise ValueError("Cannot compose an empty list of terms")
    result = terms[0]
    for term in terms[1:]:
        result = Comp(result, term)
    return result


# --------------------------------------------------------------------------
# Out-signature
# --------------------------------------------------------------------------

def out_signature(t: Term) -> OutSignature:
    """
    Count occurrences of each variable that lie outside any dom/ran application

    Every variable of t gets an entry, possibly 0. Joins are rejected.
    """
    require_join_free(t, "out_signature")
    counts: OutSignature = {name: 0 for name in variables(t)}

    def walk(node: Term) -> None:
        if isinstance(node, Variable):
            counts[node.name] += 1
        elif isinstance(node, Comp):
            walk(node.left)
            walk(node.right)

    walk(t)
    return counts


# --------------------------------------------------------------------------
# Generation
# --------------------------------------------------------------------------

def enumerate_terms(names: Sequence[str], max_nodes: int, allow_join: bool = False) -> Iterator[Term]:
    """Yield every term over `names` with at most max_nodes AST nodes, smallest first"""
    by_size: Dict[int, List[Term]] = {}
    for size in range(1, max_nodes + 1):
        level: List[Term] = []
        if size == 1:
            level.extend(Variable(name) for name in names)
        else:
            for child in by_size[size - 1]:
                level.append(Dom(child))
                level.append(Ran(child))
            for left_size in range(1, size - 1):
                right_size = size - 1 - left_size
                for left in by_size[left_size]:
                    for right in by_size[right_size]:
                        level.append(Comp(left, right))
                        if allow_join:
                            level.append(Join(left, right))
        by_size[size] = level
        yield from level


def random_term(names: Sequence[str], depth: int, rng: random.Random, allow_join: bool = False) -> Term:
    """Random term of height at most depth; leaves are variables from names"""
    if depth <= 0 or rng.random() < 0.25:
        return Variable(rng.choice(list(names)))
    choices = ["dom", "ran", "comp", "comp"] + (["join"] if allow_join else [])
    kind = rng.choice(choices)
    if kind == "dom":
        return Dom(random_term(names, depth - 1, rng, allow_join))
    if kind == "ran":
        return Ran(random_term(names, depth - 1, rng, allow_join))
    left = random_term(names, depth - 1, rng, allow_join)
    right = random_term(names, depth - 1, rng, allow_join)
    return Comp(left, right) if kind == "comp" else Join(left, right)
