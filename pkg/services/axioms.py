"""
Axiom catalogs for angelic and demonic composition, soundness scans over
relational models, cycle-freeness checks on finite algebras and the
completeness smoke suite.
"""
import logging
import random
from itertools import product
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import config
from models.algebra import FiniteAlgebra
from models.axioms import (
    Axiom,
    AxiomCatalog,
    CycleFreeReport,
    CycleFreeViolation,
    QuasiEquation,
    ScanReport,
    ScanViolation,
    SmokeEntry,
    SmokeReport,
)
from models.relation import Mode, Relation, RelationalModel
from models.term import Comp, Dom, Join, Ran, Term, Variable
from services import decision
from services.rel_engine import check_equation, check_inequation, random_model
from services.term_core import format_term, parse_term, random_term, replace_at, subterms, substitute, variables
from utils.errors import JoinNotAllowedError, UnboundVariableError

logger = logging.getLogger(__name__)

AXIOM_VARIABLES = ("x", "y", "z")


def _law(label: str, lhs: str, rhs: str, relation: str = "eq") -> Axiom:
    return Axiom(label=label, lhs=parse_term(lhs), rhs=parse_term(rhs), relation=relation)


AXA = AxiomCatalog(
    name="axa",
    equations=(
        _law("1", "x;(y;z)", "(x;y);z"),
        _law("2", "dom(x);x", "x"),
        _law("3", "x;ran(x)", "x"),
        _law("4", "dom(x);dom(x)", "dom(x)"),
        _law("5", "ran(x);ran(x)", "ran(x)"),
        _law("6", "dom(x;y)", "dom(x;dom(y))"),
        _law("7", "ran(x;y)", "ran(ran(x);y)"),
        _law("8", "dom(dom(x);y)", "dom(x);dom(y)"),
        _law("9", "ran(x;ran(y))", "ran(x);ran(y)"),
        _law("10", "dom(ran(x))", "ran(x)"),
        _law("11", "ran(dom(x))", "dom(x)"),
        _law("12", "dom(x);dom(y)", "dom(y);dom(x)"),
        _law("13", "ran(x);ran(y)", "ran(y);ran(x)"),
        _law("14", "dom(x);y", "y", "leq"),
        _law("15", "x;ran(y)", "x", "leq"),
        _law("16", "x;(y + z)", "x;y + x;z"),
        _law("17", "(x + y);z", "x;z + y;z"),
        _law("18", "dom(x + y)", "dom(x) + dom(y)"),
        _law("19", "ran(x + y)", "ran(x) + ran(y)"),
    ),
    join_laws=(
        _law("join-idempotent", "x + x", "x"),
        _law("join-commutative", "x + y", "y + x"),
        _law("join-associative", "x + (y + z)", "(x + y) + z"),
    ),
)

CYCLE_FREE_LAWS = (
    QuasiEquation(
        label="31",
        premises=((parse_term("x;y"), parse_term("x")),),
        conclusions=((parse_term("dom(y)"), parse_term("y")),),
    ),
    QuasiEquation(
        label="32",
        premises=((parse_term("x;y"), parse_term("dom(z)")),),
        conclusions=((parse_term("x"), parse_term("dom(x)")), (parse_term("y"), parse_term("dom(y)"))),
    ),
)

AXD = AxiomCatalog(
    name="axd",
    equations=(
        _law("20", "x;(y;z)", "(x;y);z"),
        _law("21", "dom(x);x", "x"),
        _law("22", "dom(x);dom(y)", "dom(y);dom(x)"),
        _law("23", "dom(dom(x);y)", "dom(x);dom(y)"),
        _law("24", "x;ran(x)", "x"),
        _law("25", "x;dom(y)", "dom(x;y);x"),
        _law("26", "dom(ran(x))", "ran(x)"),
        _law("27", "ran(dom(x))", "dom(x)"),
        _law("28", "ran(ran(x))", "ran(x)"),
        _law("29", "ran(x);ran(y)", "ran(y);ran(x)"),
        _law("30", "ran(x;y);ran(y)", "ran(x;y)"),
    ),
    quasi_equations=CYCLE_FREE_LAWS,
)

# Laws of (S, *, D) defining restriction semigroups, used as the Wagner-Preston precondition
RESTRICTION_LABELS = ("20", "21", "22", "23", "25")

CATALOGS = {"axa": AXA, "axd": AXD}


def get_catalog(name: str) -> AxiomCatalog:
    key = name.lower()
    if key not in CATALOGS:
        raise ValueError(f"Unknown catalog '{name}', expected one of {sorted(CATALOGS)}")
    return CATALOGS[key]


def restriction_laws() -> List[Axiom]:
    return [AXD.get(label) for label in RESTRICTION_LABELS]


def list_text(catalog: AxiomCatalog) -> str:
    """One law per line: label and both sides in the term grammar"""
    lines = [axiom.describe() for axiom in catalog.equations]
    lines.extend(axiom.describe() for axiom in catalog.join_laws)
    lines.extend(law.describe() for law in catalog.quasi_equations)
    return "\n".join(lines)


# --------------------------------------------------------------------------
# Evaluation in finite algebras
# --------------------------------------------------------------------------

def eval_in_algebra(
    t: Term,
    star: Sequence[Sequence[Optional[int]]],
    dom: Sequence[Optional[int]],
    ran: Sequence[Optional[int]],
    env: Dict[str, int],
) -> Optional[int]:
    """
    Evaluate a join-free term over operation tables

    Tables may contain None for cells not yet filled; the result is then None
    whenever the value depends on such a cell.
    """
    if isinstance(t, Variable):
        if t.name not in env:
            raise UnboundVariableError(t.name)
        return env[t.name]
    if isinstance(t, Dom):
        inner = eval_in_algebra(t.child, star, dom, ran, env)
        return None if inner is None else dom[inner]
    if isinstance(t, Ran):
        inner = eval_in_algebra(t.child, star, dom, ran, env)
        return None if inner is None else ran[inner]
    if isinstance(t, Comp):
        left = eval_in_algebra(t.left, star, dom, ran, env)
        if left is None:
            return None
        right = eval_in_algebra(t.right, star, dom, ran, env)
        return None if right is None else star[left][right]
    if isinstance(t, Join):
        raise JoinNotAllowedError("Finite (*, D, R)-algebras have no join")
    raise TypeError(f"Not a term: {t!r}")


def evaluate(t: Term, algebra: FiniteAlgebra, env: Dict[str, int]) -> int:
    return eval_in_algebra(t, algebra.star, algebra.D, algebra.R, env)


def law_failures(algebra: FiniteAlgebra, laws: Iterable[Axiom]) -> List[str]:
    """Describe every law instance failing in the algebra"""
    failures: List[str] = []
    for law in laws:
        names = sorted(set(variables(law.lhs)) | set(variables(law.rhs)))
        for values in product(algebra.elements, repeat=len(names)):
            env = dict(zip(names, values))
            left, right = evaluate(law.lhs, algebra, env), evaluate(law.rhs, algebra, env)
            if left != right:
                assignment = ", ".join(f"{k}={algebra.name(v)}" for k, v in env.items())
                failures.append(f"({law.label}) fails at {assignment}: {algebra.name(left)} != {algebra.name(right)}")
                break
    return failures


def check_cycle_free(algebra: FiniteAlgebra) -> CycleFreeReport:
    """
    Check x*y=x => D(y)=y and x*y=D(z) => x=D(x) & y=D(y) exhaustively

    Every violating (x, y) for the first law and (x, y, z) for the second is reported.
    """
    violations: List[CycleFreeViolation] = []
    for x in algebra.elements:
        for y in algebra.elements:
            if algebra.mul(x, y) == x and algebra.D[y] != y:
                violations.append(CycleFreeViolation(label="31", elements=[x, y]))
    for x in algebra.elements:
        for y in algebra.elements:
            product_xy = algebra.mul(x, y)
            if algebra.D[x] == x and algebra.D[y] == y:
                continue
            for z in algebra.elements:
                if product_xy == algebra.D[z]:
                    violations.append(CycleFreeViolation(label="32", elements=[x, y, z]))
    return CycleFreeReport(cycle_free=not violations, violations=violations)


def is_cycle_free(algebra: FiniteAlgebra) -> bool:
    return check_cycle_free(algebra).cycle_free


# --------------------------------------------------------------------------
# Soundness scans
# --------------------------------------------------------------------------

def angelic_counterexample_to_demonic_axiom() -> Tuple[RelationalModel, Tuple[int, int]]:
    """A model where x;dom(y) = dom(x;y);x fails angelically, with its witness"""
    model = RelationalModel(
        universe_size=4,
        valuation={
            "x": Relation.of(4, [(0, 1), (0, 2)]),
            "y": Relation.of(4, [(2, 3)]),
        },
    )
    return model, (0, 1)


def random_models(count: int, universe_max: int, seed: int, names: Sequence[str] = AXIOM_VARIABLES,
                  universe_min: int = 2) -> Iterator[RelationalModel]:
    """
    Seeded stream of models; universe sizes cycle through universe_min..universe_max

    Densities and per-model seeds are drawn from one `random.Random(seed)`.
    """
    low = min(universe_min, universe_max)
    span = universe_max - low + 1
    rng = random.Random(seed)
    for index in range(count):
        size = low + index % span
        density = rng.choice((0.15, 0.3, 0.5))
        yield random_model(size, names, density, rng.getrandbits(32))


class AxiomScanner:
    """Instantiates catalog laws in concrete models and records failing instances"""

    def __init__(self, catalog: AxiomCatalog, mode: Mode, substitution_depth: Optional[int] = None,
                 substitutions_per_model: int = 2, seed: int = 0):
        expected = "angelic" if catalog.name == "axa" else "demonic"
        if mode != expected:
            raise ValueError(f"Catalog {catalog.name} is scanned in {expected} mode, not {mode}")
        self.catalog = catalog
        self.mode = mode
        self.depth = substitution_depth if substitution_depth is not None else config.get_scan_substitution_depth()
        self.substitutions_per_model = substitutions_per_model
        self.seed = seed

    def laws(self) -> List[Axiom]:
        return list(self.catalog.equations) + list(self.catalog.join_laws)

    def _check(self, law: Axiom, mapping: Dict[str, Term], model: RelationalModel):
        lhs, rhs = substitute(law.lhs, mapping), substitute(law.rhs, mapping)
        if law.relation == "leq":
            return check_inequation(lhs, rhs, model, self.mode)
        return check_equation(lhs, rhs, model, self.mode)

    def scan_model(self, index: int, model: RelationalModel) -> Tuple[int, List[ScanViolation]]:
        names = sorted(model.valuation)
        rng = random.Random(self.seed * 1_000_003 + index)
        checked = 0
        violations: List[ScanViolation] = []
        for law in self.laws():
            law_vars = sorted(set(variables(law.lhs)) | set(variables(law.rhs)))
            mappings: List[Dict[str, Term]] = [{name: Variable(name) for name in law_vars}]
            for _ in range(self.substitutions_per_model):
                mappings.append({
                    name: random_term(names, self.depth, rng, allow_join=self.mode == "angelic")
                    for name in law_vars
                })
            for mapping in mappings:
                report = self._check(law, mapping, model)
                checked += 1
                if not report.holds:
                    violations.append(ScanViolation(
                        label=law.label,
                        model_index=index,
                        model=model.to_file(),
                        substitution={name: format_term(term) for name, term in mapping.items()},
                        witness=report.witness,
                        side=report.side,
                    ))
        return checked, violations

    def scan(self, models: Iterable[RelationalModel]) -> ScanReport:
        report = ScanReport(catalog=self.catalog.name, mode=self.mode)
        for index, model in enumerate(models):
            checked, violations = self.scan_model(index, model)
            report.models_tested += 1
            report.instances_checked += checked
            report.violations.extend(violations)
        if report.violations:
            logger.warning(f"Scan of {self.catalog.name} found {len(report.violations)} violations")
        logger.info(f"Scanned {report.models_tested} models ({report.instances_checked} instances) for {self.catalog.name}")
        return report


def soundness_scan(catalog: AxiomCatalog, mode: Mode, models: Iterable[RelationalModel],
                   substitution_depth: Optional[int] = None, seed: int = 0) -> ScanReport:
    return AxiomScanner(catalog, mode, substitution_depth, seed=seed).scan(models)


def reverify(violation: ScanViolation, catalog: AxiomCatalog, mode: Mode) -> bool:
    """True when the recorded violation still fails at its witness"""
    law = catalog.get(violation.label)
    mapping = {name: parse_term(text) for name, text in violation.substitution.items()}
    model = violation.model.to_model()
    lhs, rhs = substitute(law.lhs, mapping), substitute(law.rhs, mapping)
    if law.relation == "leq":
        report = check_inequation(lhs, rhs, model, mode)
    else:
        report = check_equation(lhs, rhs, model, mode)
    return not report.holds and report.witness == violation.witness


# --------------------------------------------------------------------------
# Completeness smoke suite
# --------------------------------------------------------------------------

def completeness_smoke() -> SmokeReport:
    """Decide all angelic laws (expect valid) and the twisted demonic law (expect invalid)"""
    entries: List[SmokeEntry] = []
    cases = [(axiom, True) for axiom in AXA.equations + AXA.join_laws]
    cases.append((AXD.get("25"), False))
    for axiom, expected in cases:
        if axiom.relation == "leq":
            verdict = decision.decide_leq(axiom.lhs, axiom.rhs)
        else:
            verdict = decision.decide_eq(axiom.lhs, axiom.rhs)
        certified = decision.certify(verdict, axiom.lhs, axiom.rhs)
        entries.append(SmokeEntry(
            label=axiom.label,
            statement=axiom.describe(),
            expected_valid=expected,
            decided_valid=verdict.valid,
            certified=certified,
            passed=verdict.valid == expected and certified,
        ))
    failures = [entry.label for entry in entries if not entry.passed]
    logger.info(f"Completeness smoke: {len(entries) - len(failures)}/{len(entries)} laws as expected")
    return SmokeReport(passed=not failures, entries=entries, failures=failures or None)


# --------------------------------------------------------------------------
# Single axiom rewrites
# --------------------------------------------------------------------------

def match(pattern: Term, t: Term, binding: Dict[str, Term]) -> bool:
    """First-order matching of pattern variables against subterms of t; extends binding"""
    if isinstance(pattern, Variable):
        bound = binding.get(pattern.name)
        if bound is None:
            binding[pattern.name] = t
            return True
        return bound == t
    if type(pattern) is not type(t):
        return False
    if isinstance(pattern, (Dom, Ran)):
        return match(pattern.child, t.child, binding)
    return match(pattern.left, t.left, binding) and match(pattern.right, t.right, binding)


def rewrite_once(t: Term, catalog: AxiomCatalog, rng: random.Random) -> Optional[Tuple[Term, str, str]]:
    """
    Apply one randomly chosen law of the catalog at one random position, in a random direction

    Variables of the produced side that the match leaves unbound are instantiated
    with small random terms over the variables of t.

    Returns:
        (rewritten term, law label, "ltr" or "rtl"), or None if nothing applies
    """
    positions = list(subterms(t))
    rng.shuffle(positions)
    options = [(law, direction) for law in catalog.equations for direction in ("ltr", "rtl")]
    names = variables(t)
    for position, sub in positions:
        rng.shuffle(options)
        for law, direction in options:
            pattern, result = (law.lhs, law.rhs) if direction == "ltr" else (law.rhs, law.lhs)
            binding: Dict[str, Term] = {}
            if not match(pattern, sub, binding):
                continue
            for name in variables(result):
                if name not in binding:
                    binding[name] = random_term(names, 1, rng)
            return replace_at(t, position, substitute(result, binding)), law.label, direction
    return None
