"""Abstract syntax for (composition, dom, ran, join) terms."""
from dataclasses import dataclass, field
from typing import Dict, Union


@dataclass(frozen=True, eq=True)
class Variable:
    name: str
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("var", self.name)))

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        from services.term_core import format_term
        return format_term(self)


@dataclass(frozen=True, eq=True)
class Dom:
    child: "Term"
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("dom", self.child)))

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        from services.term_core import format_term
        return format_term(self)


@dataclass(frozen=True, eq=True)
class Ran:
    child: "Term"
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("ran", self.child)))

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        from services.term_core import format_term
        return format_term(self)


@dataclass(frozen=True, eq=True)
class Comp:
    left: "Term"
    right: "Term"
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("comp", self.left, self.right)))

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        from services.term_core import format_term
        return format_term(self)


@dataclass(frozen=True, eq=True)
class Join:
    left: "Term"
    right: "Term"
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("join", self.left, self.right)))

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        from services.term_core import format_term
        return format_term(self)


Term = Union[Variable, Dom, Ran, Comp, Join]

# Per-variable count of occurrences outside any dom/ran application
OutSignature = Dict[str, int]
