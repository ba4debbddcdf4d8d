"""
Command-line front end.

JSON results go to standard output, log lines and summaries to standard error.
Exit status: 0 success, 1 usage or input error, 2 failed verification.
"""
import argparse
import json
import logging
import sys
from typing import Any, List, Optional, Tuple

import config
from models.algebra import EnumerationReport
from models.responses import CertifyResult, ErrorResponse, EvalResult
from services import axioms as axiom_service
from services.decision import DecisionProcedure
from services.demonic_repr import RepresentationBuilder, enumerate_algebras
from services.rel_engine import eval_term
from services.saturation import SaturationEngine
from services.term_core import format_term, parse_term
from utils.errors import EngineError, EnumerationBudgetExceeded, TermSyntaxError
from utils.validators import (
    load_algebra_file,
    load_elements_file,
    load_model_file,
    load_verdict_file,
    parse_constraint_list,
    validate_seed,
)

logger = logging.getLogger("dralg")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VERIFICATION = 2

# (payload, exit status); payload is a pydantic model, a dict or plain text
Outcome = Tuple[Any, int]

decision_procedure = DecisionProcedure()


def cmd_decide(args: argparse.Namespace) -> Outcome:
    """
    Decide s <= t or s = t over angelic relation algebras

    Returns:
        The verdict; invalid statements still exit 0
    """
    lhs, rhs = parse_term(args.lhs), parse_term(args.rhs)
    if args.leq:
        verdict = decision_procedure.decide_leq(lhs, rhs)
    else:
        verdict = decision_procedure.decide_eq(lhs, rhs)
    symbol = "<=" if args.leq else "="
    logger.info(f"{verdict.lhs} {symbol} {verdict.rhs}: {'valid' if verdict.valid else 'invalid'}")
    return verdict, EXIT_OK


def cmd_eval(args: argparse.Namespace) -> Outcome:
    term = parse_term(args.term)
    model = load_model_file(args.model)
    value = eval_term(term, model, args.mode)
    return EvalResult(
        term=format_term(term),
        mode=args.mode,
        universe=model.universe_size,
        pairs=value.sorted_pairs(),
    ), EXIT_OK


def cmd_scan(args: argparse.Namespace) -> Outcome:
    catalog = axiom_service.get_catalog(args.catalog)
    mode = "angelic" if catalog.name == "axa" else "demonic"
    models = axiom_service.random_models(args.models, args.universe, args.seed)
    report = axiom_service.soundness_scan(catalog, mode, models, substitution_depth=args.depth, seed=args.seed)
    logger.info(f"{report.models_tested} models, {len(report.violations)} violations")
    return report, EXIT_VERIFICATION if report.violations else EXIT_OK


def cmd_axioms(args: argparse.Namespace) -> Outcome:
    if args.action == "list":
        return axiom_service.list_text(axiom_service.get_catalog(args.catalog)), EXIT_OK
    report = axiom_service.completeness_smoke()
    return report, EXIT_OK if report.passed else EXIT_VERIFICATION


def cmd_saturate(args: argparse.Namespace) -> Outcome:
    pool = load_elements_file(args.elements)
    engine = SaturationEngine(pool, seed=args.seed, procedure=decision_procedure)
    initial = engine.saturation_defects()
    engine.run(args.rounds)
    report = engine.report(args.rounds, initial_defects=initial, with_dot=args.dot)
    logger.info(f"{len(engine.graph.nodes)} nodes, {len(report.defects)} defects remain")
    coherent = report.coherence is None or report.coherence.coherent
    return report, EXIT_OK if coherent else EXIT_VERIFICATION


def cmd_enumerate(args: argparse.Namespace) -> Outcome:
    constraints = parse_constraint_list(args.constraints)
    found = []
    complete = True
    try:
        for algebra in enumerate_algebras(args.size, constraints, budget=args.budget, workers=args.threads,
                                          up_to_isomorphism=args.iso):
            found.append(algebra)
    except EnumerationBudgetExceeded as e:
        logger.warning(f"{e.message}; {e.yielded} algebras found before stopping")
        complete = False
    report = EnumerationReport(
        size=args.size,
        constraints=constraints,
        count=len(found),
        complete=complete,
        algebras=found if not args.count_only else [],
    )
    return report, EXIT_OK


def cmd_wp(args: argparse.Namespace) -> Outcome:
    algebra = load_algebra_file(args.algebra)
    rounds = args.repair_rounds if args.repair_rounds is not None else config.get_repair_rounds_max()
    _, report = RepresentationBuilder(algebra, unsafe=args.unsafe, max_rounds=rounds).run()
    verifications = [report.initial_verification] + [summary.verification for summary in report.rounds]
    failed = any(not v.passed for v in verifications if v is not None)
    if failed and not report.unsafe:
        return report, EXIT_VERIFICATION
    return report, EXIT_OK


def cmd_certify(args: argparse.Namespace) -> Outcome:
    verdict = load_verdict_file(args.verdict)
    lhs, rhs = parse_term(args.lhs), parse_term(args.rhs)
    certified = decision_procedure.certify(verdict, lhs, rhs)
    result = CertifyResult(
        lhs=format_term(lhs), rhs=format_term(rhs), relation=verdict.relation, valid=verdict.valid, certified=certified
    )
    return result, EXIT_OK if certified else EXIT_VERIFICATION


def _seed(value: str) -> int:
    seed = int(value)
    if not validate_seed(seed):
        raise argparse.ArgumentTypeError(f"seed must be a non-negative integer, got {value}")
    return seed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dralg", description="Domain-range relation algebra engine")
    parser.add_argument("--threads", type=int, default=1, help="Worker processes for parallel searches")
    parser.add_argument("--quiet", action="store_true", help="Only log warnings and errors")
    commands = parser.add_subparsers(dest="command", required=True)

    decide = commands.add_parser("decide", help="Decide an inequation or equation")
    relation = decide.add_mutually_exclusive_group(required=True)
    relation.add_argument("--leq", action="store_true")
    relation.add_argument("--eq", action="store_true")
    decide.add_argument("lhs")
    decide.add_argument("rhs")
    decide.set_defaults(handler=cmd_decide)

    evaluate = commands.add_parser("eval", help="Evaluate a term in a model file")
    evaluate.add_argument("--model", required=True)
    evaluate.add_argument("--mode", choices=["angelic", "demonic"], default="angelic")
    evaluate.add_argument("term")
    evaluate.set_defaults(handler=cmd_eval)

    scan = commands.add_parser("scan", help="Soundness scan of an axiom catalog")
    scan.add_argument("--catalog", choices=["axa", "axd"], required=True)
    scan.add_argument("--models", type=int, default=1000)
    scan.add_argument("--universe", type=int, default=4, help="Largest universe; sizes cycle from 2")
    scan.add_argument("--seed", type=_seed, default=config.get_default_seed())
    scan.add_argument("--depth", type=int, default=config.get_scan_substitution_depth())
    scan.set_defaults(handler=cmd_scan)

    axioms = commands.add_parser("axioms", help="List catalogs or run the completeness smoke suite")
    axioms.add_argument("action", choices=["list", "smoke"])
    axioms.add_argument("--catalog", choices=["axa", "axd"], default="axa")
    axioms.set_defaults(handler=cmd_axioms)

    saturate = commands.add_parser("saturate", help="Run scheduled saturation steps over an element pool")
    saturate.add_argument("--elements", required=True, help="JSON list of join-free terms")
    saturate.add_argument("--rounds", type=int, default=100)
    saturate.add_argument("--seed", type=_seed, default=config.get_default_seed())
    saturate.add_argument("--dot", action="store_true", help="Include a DOT rendering of the final stage")
    saturate.set_defaults(handler=cmd_saturate)

    enumerate_cmd = commands.add_parser("enumerate", help="Enumerate finite algebras")
    enumerate_cmd.add_argument("--size", type=int, required=True)
    enumerate_cmd.add_argument("--constraints", default="axd", help="Comma separated: axd, restriction, cyclefree")
    enumerate_cmd.add_argument("--budget", type=int, default=None)
    enumerate_cmd.add_argument("--iso", action="store_true", help="Keep one algebra per isomorphism class")
    enumerate_cmd.add_argument("--count-only", action="store_true")
    enumerate_cmd.set_defaults(handler=cmd_enumerate)

    wp = commands.add_parser("wp", help="Wagner-Preston representation and repair rounds")
    wp.add_argument("--algebra", required=True)
    wp.add_argument("--repair-rounds", type=int, default=None)
    wp.add_argument("--unsafe", action="store_true", help="Allow repair rounds on algebras that are not cycle-free")
    wp.set_defaults(handler=cmd_wp)

    certify = commands.add_parser("certify", help="Re-check a verdict file")
    certify.add_argument("--verdict", required=True)
    certify.add_argument("lhs")
    certify.add_argument("rhs")
    certify.set_defaults(handler=cmd_certify)
    return parser


def render(payload: Any) -> str:
    if isinstance(payload, str):
        return payload
    if hasattr(payload, "model_dump"):
        payload = payload.model_dump(by_alias=True, mode="json")
    return json.dumps(payload, indent=2, ensure_ascii=False)


def configure_logging(quiet: bool) -> None:
    level = logging.WARNING if quiet else getattr(logging, config.get_log_level(), logging.INFO)
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")


def run(argv: Optional[List[str]] = None) -> Tuple[str, int]:
    """Parse arguments, run one command and return (stdout text, exit status)"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return "", EXIT_INPUT if e.code else EXIT_OK
    configure_logging(args.quiet)
    if args.threads < 1:
        return render(ErrorResponse(detail="--threads must be at least 1", error_code="usage")), EXIT_INPUT
    try:
        payload, status = args.handler(args)
    except TermSyntaxError as e:
        logger.error(f"Term syntax error: {e.message}")
        return render(ErrorResponse(detail=e.message, error_code=e.error_code, offset=e.offset)), EXIT_INPUT
    except EngineError as e:
        logger.error(f"{e.error_code}: {e.message}")
        return render(ErrorResponse(detail=e.message, error_code=e.error_code)), EXIT_INPUT
    except ValueError as e:
        logger.error(f"Invalid input: {str(e)}")
        return render(ErrorResponse(detail=str(e), error_code="invalid_input")), EXIT_INPUT
    except Exception as e:
        logger.error(f"Internal error: {str(e)}")
        return render(ErrorResponse(detail=str(e), error_code="internal_error")), EXIT_VERIFICATION
    return render(payload), status


def main(argv: Optional[List[str]] = None) -> int:
    output, status = run(argv)
    if output:
        print(output)
    return status


if __name__ == "__main__":
    sys.exit(main())
