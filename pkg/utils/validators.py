import json
import re
from pathlib import Path
from typing import List

from pydantic import ValidationError

from models.algebra import FiniteAlgebra
from models.relation import RelationalModel
from models.term import Term
from models.verdict import Verdict
from services.rel_engine import load_model
from services.term_core import RESERVED_WORDS, parse_term, require_join_free
from utils.errors import FormatError

VARIABLE_PATTERN = re.compile(r"^[a-z][a-zA-Z0-9_]*$")


def validate_variable_name(name: str) -> bool:
    """
    Check a variable name against the term grammar

    Args:
        name: Candidate variable name

    Returns:
        bool: True if the name is a legal, non-reserved identifier
    """
    if not name:
        return False
    return bool(VARIABLE_PATTERN.match(name)) and name not in RESERVED_WORDS


def validate_seed(seed: int) -> bool:
    return isinstance(seed, int) and seed >= 0


def read_text(path: str) -> str:
    """
    Read an input file

    Raises:
        FormatError: if the file does not exist or cannot be read
    """
    file_path = Path(path)
    if not file_path.is_file():
        raise FormatError(f"File not found: {path}")
    try:
        return file_path.read_text(encoding="utf-8")
    except OSError as e:
        raise FormatError(f"Could not read {path}: {str(e)}")


def load_model_file(path: str) -> RelationalModel:
    model = load_model(read_text(path))
    for name in model.valuation:
        if not validate_variable_name(name):
            raise FormatError(f"Invalid variable name in model file: '{name}'")
    return model


def load_algebra_text(text: str) -> FiniteAlgebra:
    """Parse the algebra JSON format, wrapping validation errors"""
    try:
        return FiniteAlgebra.model_validate_json(text)
    except ValidationError as e:
        raise FormatError(f"Invalid algebra file: {str(e)}")


def load_algebra_file(path: str) -> FiniteAlgebra:
    return load_algebra_text(read_text(path))


def load_verdict_file(path: str) -> Verdict:
    try:
        return Verdict.model_validate_json(read_text(path))
    except ValidationError as e:
        raise FormatError(f"Invalid verdict file: {str(e)}")


def load_elements_text(text: str) -> List[Term]:
    """An element pool: a JSON list of join-free terms in the term grammar"""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"Element pool is not valid JSON: {str(e)}")
    if not isinstance(raw, list) or not raw or not all(isinstance(item, str) for item in raw):
        raise FormatError("Element pool must be a non-empty JSON list of term strings")
    terms = [parse_term(item) for item in raw]
    for term in terms:
        require_join_free(term, "An element pool")
    return terms


def load_elements_file(path: str) -> List[Term]:
    return load_elements_text(read_text(path))


def parse_constraint_list(value: str) -> List[str]:
    """Split a comma separated constraint list such as 'axd,cyclefree'"""
    names = [part.strip().lower() for part in value.split(",") if part.strip()]
    allowed = {"axd", "restriction", "cyclefree", "cycle-free"}
    unknown = [name for name in names if name not in allowed]
    if not names or unknown:
        raise FormatError(f"Unknown constraints {unknown or value!r}; use axd, restriction, cyclefree")
    return names
