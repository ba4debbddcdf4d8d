"""Error hierarchy shared by all services."""
from typing import List, Optional


class EngineError(Exception):
    """Base class for every error raised by the engine"""
    error_code = "engine_error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class FormatError(EngineError):
    """Malformed input file or document"""
    error_code = "format_error"


class TermSyntaxError(EngineError):
    """Term text does not match the grammar"""
    error_code = "term_syntax"

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class ReservedWordError(TermSyntaxError):
    """`dom` or `ran` used where a variable is expected"""
    error_code = "reserved_word"


class JoinNotAllowedError(EngineError):
    """A join node appeared where only join-free terms are accepted"""
    error_code = "join_not_allowed"


class UnboundVariableError(EngineError):
    error_code = "unbound_variable"

    def __init__(self, name: str):
        super().__init__(f"Variable '{name}' has no value in the model")
        self.name = name


class UniverseMismatchError(EngineError):
    error_code = "universe_mismatch"


class ResourceLimitError(EngineError):
    """A configured size cap was exceeded"""
    error_code = "resource_limit"


class AxiomViolationError(EngineError):
    """An algebra fails laws it is required to satisfy"""
    error_code = "axiom_violation"

    def __init__(self, message: str, failures: Optional[List[str]] = None):
        super().__init__(message)
        self.failures = failures or []


class CycleFreeViolationError(EngineError):
    error_code = "not_cycle_free"


class RepresentationPreconditionError(EngineError):
    """Domain or demonic composition is not correctly represented"""
    error_code = "representation_precondition"


class UnlabelledEdgeError(EngineError):
    error_code = "unlabelled_edge"


class EnumerationBudgetExceeded(EngineError):
    """Enumeration stopped by its node budget rather than by exhausting the search"""
    error_code = "budget_exhausted"

    def __init__(self, message: str, yielded: int, nodes: int = 0):
        super().__init__(message)
        self.yielded = yielded
        self.nodes = nodes
