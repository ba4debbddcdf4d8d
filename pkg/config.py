# Configuration settings for the domain-range algebra engine
import os

from dotenv import load_dotenv

load_dotenv()

# Output schema
SCHEMA_VERSION = 1

# Defaults, overridable from the environment (or a .env file)
JOIN_NORMAL_FORM_CAP = 100_000
DECISION_CACHE_SIZE = 65_536
REPAIR_ROUNDS_MAX = 3
ENUMERATION_EXHAUSTIVE_MAX_SIZE = 3
ENUMERATION_NODE_BUDGET = 50_000_000
SCAN_SUBSTITUTION_DEPTH = 3
TERM_DEPTH_MAX = 200
DEFAULT_SEED = 0


def _int_env(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or not value.strip():
        return default
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"Environment variable {name} must be an integer, got {value!r}")


def get_join_normal_form_cap() -> int:
    """Total AST nodes join_normal_form may hold across its disjuncts"""
    return _int_env("JOIN_NORMAL_FORM_CAP", JOIN_NORMAL_FORM_CAP)


def get_decision_cache_size() -> int:
    """Entries kept by the term graph and decision memo caches"""
    return _int_env("DECISION_CACHE_SIZE", DECISION_CACHE_SIZE)


def get_repair_rounds_max() -> int:
    """Default bound on Wagner-Preston repair rounds"""
    return _int_env("REPAIR_ROUNDS_MAX", REPAIR_ROUNDS_MAX)


def get_enumeration_exhaustive_max_size() -> int:
    """Largest carrier size for which enumeration is guaranteed exhaustive"""
    return _int_env("ENUMERATION_EXHAUSTIVE_MAX_SIZE", ENUMERATION_EXHAUSTIVE_MAX_SIZE)


def get_enumeration_node_budget() -> int:
    """Search nodes an enumeration may visit before it gives up"""
    return _int_env("ENUMERATION_NODE_BUDGET", ENUMERATION_NODE_BUDGET)


def get_scan_substitution_depth() -> int:
    """Depth of random terms substituted into axioms during soundness scans"""
    return _int_env("SCAN_SUBSTITUTION_DEPTH", SCAN_SUBSTITUTION_DEPTH)


def get_term_depth_max() -> int:
    """Deepest term AST the parser accepts"""
    return _int_env("TERM_DEPTH_MAX", TERM_DEPTH_MAX)


def get_default_seed() -> int:
    return _int_env("DEFAULT_SEED", DEFAULT_SEED)


def get_log_level() -> str:
    return os.getenv("LOG_LEVEL", "INFO").upper()
