import csv
import json
import logging
import sys
from fractions import Fraction
from typing import Dict, List, Optional, TextIO

from rich.console import Console
from rich.table import Table

from agents.moments_agent import MomentsAgent
from config import EngineSettings, load_settings
from models.chain import ChainInvariantError
from models.distribution import parse_distribution, parse_rational, parse_runs, render_rational, validate_query
from models.results import CrosscheckReport, ParadoxPair, QueryResult, Route
from services.chain_service import ChainService
from services.closed_form_service import ClosedFormService
from services.exact_solver import SingularSystemError
from services.operator_service import OperatorService
from services.oracle_service import OracleService, TailSumCapExceeded
from services.paradox_service import ParadoxService
from services.simulation_service import SimulationService

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INVARIANT = 2

CSV_COLUMNS = [
    "r", "dist", "runs", "j", "route",
    "expectation_num", "expectation_den", "variance_num", "variance_den",
]

ROUTE_NAMES = {route.value: route for route in Route}

# Shared service instances; the handlers reach them through the get_* accessors
settings = load_settings()
closed_form_service = ClosedFormService()
operator_service = OperatorService(settings)
chain_service = ChainService()
oracle_service = OracleService(chain_service, settings)
simulation_service = SimulationService(settings)
paradox_service = ParadoxService(closed_form_service)
moments_agent = MomentsAgent(closed_form_service, operator_service, chain_service,
                             oracle_service, simulation_service, settings)


def get_moments_agent() -> MomentsAgent:
    return moments_agent


def get_chain_service() -> ChainService:
    return chain_service


def get_closed_form_service() -> ClosedFormService:
    return closed_form_service


def get_paradox_service() -> ParadoxService:
    return paradox_service


def configure(new_settings: EngineSettings) -> None:
    """Rebuild the shared services with new settings (CLI overrides)."""
    global settings, closed_form_service, operator_service, chain_service
    global oracle_service, simulation_service, paradox_service, moments_agent
    settings = new_settings
    closed_form_service = ClosedFormService()
    operator_service = OperatorService(settings)
    chain_service = ChainService()
    oracle_service = OracleService(chain_service, settings)
    simulation_service = SimulationService(settings)
    paradox_service = ParadoxService(closed_form_service)
    moments_agent = MomentsAgent(closed_form_service, operator_service, chain_service,
                                 oracle_service, simulation_service, settings)


def report_error(kind: str, error: Exception, err: TextIO) -> None:
    """One machine-parsable line on standard error."""
    message = " ".join(str(error).split())
    err.write(f"error: {kind}: {message}\n")


def _split(value: Optional[str]):
    if value is None:
        return "", ""
    numerator, denominator = value.split("/")
    return numerator, denominator


def write_results(results: List[QueryResult], fmt: str, out: TextIO) -> None:
    if fmt == "json":
        payload = [json.loads(result.model_dump_json(exclude_none=True)) for result in results]
        out.write(json.dumps(payload[0] if len(payload) == 1 else payload, indent=2) + "\n")
    elif fmt == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for result in results:
            e_num, e_den = _split(result.expectation.exact if result.expectation else None)
            v_num, v_den = _split(result.variance.exact if result.variance else None)
            writer.writerow([result.r, result.dist, result.runs, result.j, result.route,
                             e_num, e_den, v_num, v_den])
    else:
        table = Table(title="Waiting-time moments")
        for column in ("route", "dist", "runs", "j", "expectation", "variance", "details"):
            table.add_column(column)
        for result in results:
            if result.expectation:
                expectation = f"{result.expectation.exact} ({result.expectation.decimal})"
            elif result.lower:
                expectation = f"[{result.lower.decimal}, {result.upper.decimal}]"
            else:
                expectation = f"{result.simulated_mean:.6g} ± {result.standard_error:.2g}"
            if result.variance:
                variance = f"{result.variance.exact} ({result.variance.decimal})"
            elif result.simulated_variance is not None:
                variance = f"{result.simulated_variance:.6g}"
            else:
                variance = "-"
            details = ", ".join(f"{k}={v}" for k, v in result.diagnostics.items())
            table.add_row(result.route, result.dist, result.runs, str(result.j),
                          expectation, variance, details)
        Console(file=out, width=160).print(table)


def cmd_moments(args, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    """Compute E(B_j) (and V(B_j) where the route provides it) on one route."""
    out, err = out or sys.stdout, err or sys.stderr
    try:
        dist = parse_distribution(args.dist)
        rs = parse_runs(args.runs, dist.r)
        query = validate_query(dist, rs, args.j)
        route = ROUTE_NAMES[args.route]
        tol = parse_rational(args.tol)
        result = get_moments_agent().compute(
            query, route, tol=tol, n_cap=args.n_cap, trials=args.trials,
            seed=args.seed, threads=args.threads,
        )
    except TailSumCapExceeded as e:
        report_error("cap_exceeded", e, err)
        return EXIT_VALIDATION
    except (ChainInvariantError, SingularSystemError) as e:
        logger.error(f"Invariant violation: {e}")
        report_error("invariant", e, err)
        return EXIT_INVARIANT
    except ValueError as e:
        report_error("validation", e, err)
        return EXIT_VALIDATION

    write_results([result], args.format, out)
    return EXIT_OK


def cmd_crosscheck(args, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    """Run all routes per j and compare exactly; exit 2 on the first mismatch."""
    out, err = out or sys.stdout, err or sys.stderr
    try:
        dist = parse_distribution(args.dist)
        rs = parse_runs(args.runs, dist.r)
        validate_query(dist, rs, 1)
        if args.jmax is not None:
            validate_query(dist, rs, args.jmax)
        agent = get_moments_agent()
        agent.fault_route = args.inject_fault
        try:
            report = agent.crosscheck(dist, rs, jmax=args.jmax, nmax=args.nmax)
        finally:
            agent.fault_route = None
    except (ChainInvariantError, SingularSystemError) as e:
        report_error("invariant", e, err)
        return EXIT_INVARIANT
    except ValueError as e:
        report_error("validation", e, err)
        return EXIT_VALIDATION

    write_report(report, args.format, out)
    failure = report.first_failure
    if failure is not None:
        err.write(
            f"FAIL {failure.name} j={failure.j} n={failure.n}: "
            f"dist={report.dist} runs={report.runs} left={failure.left} right={failure.right}\n"
        )
        return EXIT_INVARIANT
    return EXIT_OK


def write_report(report: CrosscheckReport, fmt: str, out: TextIO) -> None:
    if fmt == "json":
        out.write(report.model_dump_json(indent=2) + "\n")
        return
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        where = "".join(
            f" {key}={value}" for key, value in (("j", check.j), ("n", check.n)) if value is not None
        )
        relation = "==" if check.passed else "!="
        out.write(f"{status} {check.name}{where}: {check.left} {relation} {check.right}\n")


def cmd_paradox_search(args, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    """Search the k/D grid for regularity-paradox dice and re-verify each pair."""
    out, err = out or sys.stdout, err or sys.stderr
    try:
        pairs = get_paradox_service().search(args.r, args.grid_denominator, args.limit,
                                             threads=args.threads)
    except ValueError as e:
        report_error("validation", e, err)
        return EXIT_VALIDATION

    agent = get_moments_agent()
    for pair in pairs:
        pair.verified = agent.verify_paradox_pair(pair)
    write_pairs(pairs, args.format, out)
    if any(not pair.verified for pair in pairs):
        err.write("error: invariant: a reported pair failed re-verification\n")
        return EXIT_INVARIANT
    return EXIT_OK


def write_pairs(pairs: List[ParadoxPair], fmt: str, out: TextIO) -> None:
    rows: List[Dict[str, str]] = [pair.as_row() for pair in pairs]
    if fmt == "json":
        out.write(json.dumps(rows, indent=2) + "\n")
    elif fmt == "csv":
        writer = csv.DictWriter(out, fieldnames=list(ParadoxPair.model_fields.keys()),
                                lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    elif not rows:
        out.write("none found\n")
    else:
        table = Table(title="Regularity paradox pairs")
        for column in rows[0]:
            table.add_column(column)
        for row in rows:
            table.add_row(*row.values())
        Console(file=out, width=200).print(table)


def cmd_chain_dump(args, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    """Print the run-detecting chain, one transition per line."""
    out, err = out or sys.stdout, err or sys.stderr
    try:
        dist = parse_distribution(args.dist)
        rs = parse_runs(args.runs, dist.r)
        validate_query(dist, rs, args.j)
        chain = get_chain_service().build_run_chain(dist, rs, args.j)
    except ChainInvariantError as e:
        report_error("invariant", e, err)
        return EXIT_INVARIANT
    except ValueError as e:
        report_error("validation", e, err)
        return EXIT_VALIDATION
    out.write(get_chain_service().dump_chain(chain) + "\n")
    return EXIT_OK


def cmd_series(args, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    """Print P{Y_n = 0} for n = 0..nmax from the series of G_1."""
    out, err = out or sys.stdout, err or sys.stderr
    try:
        dist = parse_distribution(args.dist)
        rs = parse_runs(args.runs, dist.r)
        validate_query(dist, rs, 1)
        if args.nmax < 0:
            raise ValueError(f"nmax must be nonnegative, got {args.nmax}")
        values = get_closed_form_service().no_run_prefix_probs(dist, rs, args.nmax)
    except ValueError as e:
        report_error("validation", e, err)
        return EXIT_VALIDATION

    if args.format == "json":
        out.write(json.dumps([render_rational(Fraction(v)) for v in values], indent=2) + "\n")
    else:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["n", "numerator", "denominator"])
        for n, value in enumerate(values):
            writer.writerow([n, value.numerator, value.denominator])
    return EXIT_OK
