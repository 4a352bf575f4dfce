import logging
from fractions import Fraction
from typing import Optional

from config import EngineSettings, load_settings
from models.distribution import (
    AlphabetDistribution,
    RunQuery,
    RunSpec,
    render_distribution,
    render_rational,
    render_runs,
)
from models.results import (
    CheckOutcome,
    CrosscheckReport,
    ExactValue,
    ParadoxPair,
    QueryResult,
    Route,
)
from services.chain_service import ChainService
from services.closed_form_service import ClosedFormService
from services.operator_service import OperatorService
from services.oracle_service import OracleService
from services.simulation_service import SimulationService

logger = logging.getLogger(__name__)


class RouteUnavailableError(ValueError):
    """The requested route cannot answer this query."""


class MomentsAgent:
    """
    Coordinates the computation routes: answers single queries on a chosen
    route and cross-checks all routes against each other.
    """

    def __init__(self,
                 closed_form_service: ClosedFormService,
                 operator_service: OperatorService,
                 chain_service: ChainService,
                 oracle_service: OracleService,
                 simulation_service: SimulationService,
                 settings: Optional[EngineSettings] = None):
        self.closed_form = closed_form_service
        self.operator = operator_service
        self.chain = chain_service
        self.oracle = oracle_service
        self.simulation = simulation_service
        self.settings = settings or load_settings()
        self.fault_route: Optional[str] = None

        logger.info("MomentsAgent initialized with all computation routes")

    def _exact(self, value: Fraction) -> ExactValue:
        return ExactValue.of(value, self.settings.decimal_digits)

    def _corrupt(self, route: str, value: Fraction) -> Fraction:
        """Test hook: shift one route's values so cross-checks must fail."""
        if self.fault_route == route:
            return value + Fraction(1, 10 ** 9)
        return value

    def compute(self, query: RunQuery, route: Route, tol: Fraction = Fraction(1, 1000),
                n_cap: int = 10 ** 9, trials: int = 100_000, seed: int = 0,
                threads: int = 1) -> QueryResult:
        """
        Answer one moments query on one route.

        Raises:
            RouteUnavailableError: route=closed with j > 1
        """
        dist, rs, j = query.dist, query.runs, query.j
        result = QueryResult(
            r=dist.r,
            dist=render_distribution(dist),
            runs=render_runs(rs),
            j=j,
            route=route.value,
        )

        if route is Route.CLOSED:
            if j > 1:
                raise RouteUnavailableError(
                    "no closed form for j > 1; use --route operator or --route chain"
                )
            result.expectation = self._exact(self.closed_form.expect_first(dist, rs))
            result.variance = self._exact(self.closed_form.variance_first(dist, rs))
        elif route is Route.OPERATOR:
            result.expectation = self._exact(self.operator.expect_j(dist, rs, j))
            result.diagnostics["evaluations"] = (1 << dist.r) - 1
        elif route is Route.CHAIN:
            chain = self.chain.build_run_chain(dist, rs, j)
            moments = self.chain.chain_moments(chain)
            result.expectation = self._exact(moments.expectation)
            result.variance = self._exact(moments.variance)
            result.diagnostics["states"] = chain.size
        elif route is Route.TAIL:
            enclosure = self.oracle.tail_sum_expectation(dist, rs, j, n_cap, tol)
            result.lower = self._exact(enclosure.lower)
            result.upper = self._exact(enclosure.upper)
            result.diagnostics.update({
                "steps": enclosure.steps,
                "block_length": enclosure.block_length,
                "delta": render_rational(enclosure.delta),
            })
        elif route is Route.SIM:
            summary = self.simulation.simulate_waiting(dist, rs, j, trials, seed, threads=threads)
            result.simulated_mean = summary.mean
            result.simulated_variance = summary.variance
            result.standard_error = summary.standard_error
            result.diagnostics.update({"trials": summary.trials, "seed": summary.seed,
                                       "blocks": summary.blocks})

        logger.info(f"Computed route={route.value} for r={dist.r}, j={j}")
        return result

    def crosscheck(self, dist: AlphabetDistribution, rs: RunSpec,
                   jmax: Optional[int] = None, nmax: int = 15) -> CrosscheckReport:
        """
        Run every applicable route for each j and compare exactly.

        Checks: closed = operator = naive subsets = chain (= expect_all at j = r)
        for expectations; closed = chain = generating function for the j = 1
        variance; DP/chain CDF identity and series/DP identity up to nmax.
        """
        jmax = min(jmax or dist.r, dist.r)
        report = CrosscheckReport(dist=render_distribution(dist), runs=render_runs(rs))

        def record(name: str, left: Fraction, right: Fraction,
                   j: Optional[int] = None, n: Optional[int] = None) -> None:
            report.checks.append(CheckOutcome(
                name=name, j=j, n=n, passed=left == right,
                left=render_rational(left), right=render_rational(right),
            ))

        y_dists = self.oracle.dp_y_dists(dist, rs, nmax)

        for j in range(1, jmax + 1):
            chain = self.chain.build_run_chain(dist, rs, j)
            moments = self.chain.chain_moments(chain)
            chain_e = self._corrupt("chain", moments.expectation)
            operator_e = self._corrupt("operator", self.operator.expect_j(dist, rs, j))

            record("operator=chain expectation", operator_e, chain_e, j=j)
            record("operator=subset-sum expectation",
                   operator_e, self.operator.expect_j_by_subsets(dist, rs, j), j=j)
            if j == dist.r:
                record("expect_all=chain expectation", self.operator.expect_all(dist, rs), chain_e, j=j)
            if j == 1:
                closed_e = self._corrupt("closed", self.closed_form.expect_first(dist, rs))
                closed_v = self._corrupt("closed", self.closed_form.variance_first(dist, rs))
                record("closed=chain expectation", closed_e, chain_e, j=j)
                record("closed=operator expectation", closed_e, operator_e, j=j)
                record("closed=chain variance", closed_v, self._corrupt("chain", moments.variance), j=j)
                record("closed=generating-function variance",
                       closed_v, self.closed_form.variance_from_generating_function(dist, rs), j=j)

            chain_cdfs = self.chain.chain_waiting_cdfs(chain, nmax)
            for n in range(nmax + 1):
                dp_cdf = 1 - sum(y_dists[n][:j], Fraction(0))
                record("dp=chain cdf", dp_cdf, chain_cdfs[n], j=j, n=n)

        series = self.closed_form.no_run_prefix_probs(dist, rs, nmax)
        for n in range(nmax + 1):
            record("series=dp no-run probability", series[n], y_dists[n][0], n=n)

        failures = sum(not check.passed for check in report.checks)
        logger.info(f"Cross-check finished: {len(report.checks)} checks, {failures} failures")
        return report

    def verify_paradox_pair(self, pair: ParadoxPair) -> bool:
        """Recompute all four expectations on the chain route and compare."""
        def chain_expectation(die: AlphabetDistribution, h: int) -> Fraction:
            return self.chain.moments(die, RunSpec.uniform(h, die.r), 1).expectation

        a2, a3 = chain_expectation(pair.die_a, 2), chain_expectation(pair.die_a, 3)
        b2, b3 = chain_expectation(pair.die_b, 2), chain_expectation(pair.die_b, 3)
        return (a2, a3, b2, b3) == (pair.a_h2, pair.a_h3, pair.b_h2, pair.b_h3) and a2 > b2 and a3 < b3
