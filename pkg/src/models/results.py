from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from models.distribution import AlphabetDistribution, render_distribution, render_rational


class Route(Enum):
    """Computation routes for the moments of B_j."""
    CLOSED = "closed"
    OPERATOR = "operator"
    CHAIN = "chain"
    TAIL = "tail"
    SIM = "sim"


def to_decimal(value: Fraction, digits: int = 12) -> str:
    """Decimal rendering with the given significant digits, half-even rounding."""
    with localcontext() as ctx:
        ctx.prec = digits
        ctx.rounding = ROUND_HALF_EVEN
        return str(Decimal(value.numerator) / Decimal(value.denominator))


class ExactValue(BaseModel):
    """An exact rational plus a decimal rendering derived from it."""
    exact: str
    decimal: str

    @classmethod
    def of(cls, value: Fraction, digits: int = 12) -> "ExactValue":
        return cls(exact=render_rational(value), decimal=to_decimal(value, digits))

    def to_fraction(self) -> Fraction:
        numerator, denominator = self.exact.split("/")
        return Fraction(int(numerator), int(denominator))


class QueryResult(BaseModel):
    """Result of one moments query on one route."""
    r: int
    dist: str
    runs: str
    j: int
    route: str
    expectation: Optional[ExactValue] = None
    variance: Optional[ExactValue] = None
    lower: Optional[ExactValue] = None  # tail route enclosure
    upper: Optional[ExactValue] = None
    simulated_mean: Optional[float] = None
    simulated_variance: Optional[float] = None
    standard_error: Optional[float] = None
    diagnostics: Dict[str, Any] = Field(default_factory=dict)


class CheckOutcome(BaseModel):
    """One equality check in a cross-check run."""
    name: str
    j: Optional[int] = None
    n: Optional[int] = None
    passed: bool
    left: str
    right: str


class CrosscheckReport(BaseModel):
    dist: str
    runs: str
    checks: List[CheckOutcome] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def first_failure(self) -> Optional[CheckOutcome]:
        return next((check for check in self.checks if not check.passed), None)


class ParadoxPair(BaseModel):
    """Dice A, B with E_A(h=2) > E_B(h=2) but E_A(h=3) < E_B(h=3)."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    index_a: int
    index_b: int
    die_a: AlphabetDistribution
    die_b: AlphabetDistribution
    a_h2: Fraction
    b_h2: Fraction
    a_h3: Fraction
    b_h3: Fraction
    verified: Optional[bool] = None

    def as_row(self) -> Dict[str, str]:
        return {
            "index_a": str(self.index_a),
            "index_b": str(self.index_b),
            "die_a": render_distribution(self.die_a),
            "die_b": render_distribution(self.die_b),
            "a_h2": render_rational(self.a_h2),
            "b_h2": render_rational(self.b_h2),
            "a_h3": render_rational(self.a_h3),
            "b_h3": render_rational(self.b_h3),
            "verified": str(self.verified),
        }
