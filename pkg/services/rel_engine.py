"""
Concrete relational semantics: dom, ran, angelic and demonic composition, join.

Random models use Python's `random.Random` (Mersenne Twister MT19937), seeded
explicitly, so a seed reproduces the same model on every platform.
"""
import logging
import random
from typing import Dict, Iterable, List, Literal, Optional, Sequence, Set

from models.relation import EquationReport, Mode, ModelFile, Relation, RelationalModel
from models.term import Comp, Dom, Join, Ran, Term, Variable
from services.term_core import format_term
from utils.errors import FormatError, JoinNotAllowedError, UnboundVariableError, UniverseMismatchError

logger = logging.getLogger(__name__)

Operation = Literal["dom", "ran", "angelic", "demonic", "join"]


def _same_universe(x: Relation, y: Relation) -> int:
    if x.universe_size != y.universe_size:
        raise UniverseMismatchError(
            f"Operands have universe sizes {x.universe_size} and {y.universe_size}"
        )
    return x.universe_size


def domain(x: Relation) -> Relation:
    return Relation(x.universe_size, frozenset((u, u) for u in x.sources()))


def range_of(x: Relation) -> Relation:
    return Relation(x.universe_size, frozenset((v, v) for v in x.targets()))


def angelic(x: Relation, y: Relation) -> Relation:
    n = _same_universe(x, y)
    pairs = set()
    for u in x.sources():
        for w in x.successors(u):
            for v in y.successors(w):
                pairs.add((u, v))
    return Relation(n, frozenset(pairs))


def demonic(x: Relation, y: Relation) -> Relation:
    """Angelic composition restricted to sources whose every x-successor lies in dom(y)"""
    n = _same_universe(x, y)
    defined = y.sources()
    pairs = set()
    for u in x.sources():
        successors = x.successors(u)
        if not successors <= defined:
            continue
        for w in successors:
            for v in y.successors(w):
                pairs.add((u, v))
    return Relation(n, frozenset(pairs))


def join(x: Relation, y: Relation) -> Relation:
    n = _same_universe(x, y)
    return Relation(n, x.pairs | y.pairs)


def relational_ops(op: Operation, x: Relation, y: Optional[Relation] = None) -> Relation:
    """
    Apply one operation of the relational signature

    Args:
        op: dom, ran, angelic, demonic or join
        x: first operand
        y: second operand, required for binary operations

    Raises:
        UniverseMismatchError: if the operands live on different universes
    """
    if op == "dom":
        return domain(x)
    if op == "ran":
        return range_of(x)
    if y is None:
        raise ValueError(f"Operation '{op}' needs two operands")
    if op == "angelic":
        return angelic(x, y)
    if op == "demonic":
        return demonic(x, y)
    if op == "join":
        return join(x, y)
    raise ValueError(f"Unknown operation: {op}")


def compose(mode: Mode, x: Relation, y: Relation) -> Relation:
    return demonic(x, y) if mode == "demonic" else angelic(x, y)


def eval_term(t: Term, m: RelationalModel, mode: Mode = "angelic") -> Relation:
    """
    Evaluate a term in a model

    Raises:
        UnboundVariableError: a variable of t has no value in m
        JoinNotAllowedError: t contains a join and mode is demonic
    """
    cache: Dict[Term, Relation] = {}

    def walk(node: Term) -> Relation:
        if node in cache:
            return cache[node]
        if isinstance(node, Variable):
            if node.name not in m.valuation:
                raise UnboundVariableError(node.name)
            result = m.valuation[node.name]
        elif isinstance(node, Dom):
            result = domain(walk(node.child))
        elif isinstance(node, Ran):
            result = range_of(walk(node.child))
        elif isinstance(node, Comp):
            result = compose(mode, walk(node.left), walk(node.right))
        elif isinstance(node, Join):
            if mode == "demonic":
                raise JoinNotAllowedError(f"Demonic evaluation does not support join: '{format_term(t)}'")
            result = join(walk(node.left), walk(node.right))
        else:
            raise TypeError(f"Not a term: {node!r}")
        cache[node] = result
        return result

    return walk(t)


def _report(lhs: Relation, rhs: Relation, inclusion: bool) -> EquationReport:
    extra_left = sorted(lhs.pairs - rhs.pairs)
    if extra_left:
        return EquationReport(holds=False, witness=list(extra_left[0]), side="lhs")
    if not inclusion:
        extra_right = sorted(rhs.pairs - lhs.pairs)
        if extra_right:
            return EquationReport(holds=False, witness=list(extra_right[0]), side="rhs")
    return EquationReport(holds=True)


def check_equation(s: Term, t: Term, m: RelationalModel, mode: Mode = "angelic") -> EquationReport:
    """Compare both sides in m; on failure the witness is the least pair of the symmetric difference"""
    if s == t:
        eval_term(s, m, mode)
        return EquationReport(holds=True)
    return _report(eval_term(s, m, mode), eval_term(t, m, mode), inclusion=False)


def check_inequation(s: Term, t: Term, m: RelationalModel, mode: Mode = "angelic") -> EquationReport:
    """Check s ⊆ t in m; the witness comes from s minus t"""
    return _report(eval_term(s, m, mode), eval_term(t, m, mode), inclusion=True)


def random_relation(universe_size: int, density: float, rng: random.Random) -> Relation:
    pairs = [
        (u, v)
        for u in range(universe_size)
        for v in range(universe_size)
        if rng.random() < density
    ]
    return Relation.of(universe_size, pairs)


def random_model(universe_size: int, variables: Sequence[str], density: float, seed: int) -> RelationalModel:
    """
    Draw a model where every pair of every variable is included independently

    Variables are drawn in the given order, pairs row-major; each pair consumes one
    `rng.random()` value and is kept when it is below density.
    """
    if universe_size < 1:
        raise ValueError(f"Universe size must be at least 1, got {universe_size}")
    if not 0.0 <= density <= 1.0:
        raise ValueError(f"Density must lie in [0, 1], got {density}")
    rng = random.Random(seed)
    valuation = {name: random_relation(universe_size, density, rng) for name in variables}
    return RelationalModel(universe_size=universe_size, valuation=valuation)


def generated_relations(generators: Iterable[Relation], mode: Mode = "angelic", include_join: bool = False) -> List[Relation]:
    """
    Close a set of relations under dom, ran and the mode's composition

    Returns the carrier in discovery order (generators first). Join is only used
    in angelic mode and only when include_join is set.
    """
    carrier: List[Relation] = []
    seen: Set[Relation] = set()
    for relation in generators:
        if relation not in seen:
            seen.add(relation)
            carrier.append(relation)
    if carrier:
        n = carrier[0].universe_size
        for relation in carrier:
            if relation.universe_size != n:
                raise UniverseMismatchError("Generators live on different universes")

    index = 0
    while index < len(carrier):
        current = carrier[index]
        produced = [domain(current), range_of(current)]
        for other in carrier[: index + 1]:
            produced.append(compose(mode, current, other))
            produced.append(compose(mode, other, current))
            if include_join and mode == "angelic":
                produced.append(join(current, other))
        for relation in produced:
            if relation not in seen:
                seen.add(relation)
                carrier.append(relation)
        index += 1
    logger.debug(f"Generated {len(carrier)} relations in {mode} mode")
    return carrier


def load_model(text: str) -> RelationalModel:
    """Parse a JSON model file"""
    try:
        return ModelFile.model_validate_json(text).to_model()
    except ValueError as e:
        raise FormatError(f"Invalid model file: {str(e)}")


def dump_model(m: RelationalModel) -> dict:
    return m.to_file().model_dump()
