import math
import re
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

ExactRational = Fraction

_RATIONAL_PATTERN = re.compile(r"^[+-]?\d+(/\d+)?$")


class DistributionError(ValueError):
    """Invalid letter distribution; names the offending index or value."""


class RunSpecError(ValueError):
    """Invalid run-length specification."""


class QueryError(ValueError):
    """Query parameters inconsistent with the distribution."""


def parse_rational(token: str) -> Fraction:
    """Parse "a/b" or an integer exactly. Decimal notation is rejected."""
    text = token.strip()
    if not _RATIONAL_PATTERN.match(text):
        raise DistributionError(f"malformed rational {token!r}")
    if "/" in text:
        numerator, denominator = text.split("/")
        if int(denominator) == 0:
            raise DistributionError(f"zero denominator in {token!r}")
        return Fraction(int(numerator), int(denominator))
    return Fraction(int(text))


def check_probabilities(probs: Sequence[Fraction]) -> None:
    """Raise DistributionError unless probs is a valid distribution with r >= 2."""
    if len(probs) < 2:
        raise DistributionError(f"alphabet needs at least 2 letters, got r={len(probs)}")
    for index, p in enumerate(probs, start=1):
        if p <= 0 or p >= 1:
            raise DistributionError(f"p{index}={p} must satisfy 0 < p < 1")
    total = sum(probs, Fraction(0))
    if total != 1:
        raise DistributionError(f"probabilities sum to {total}, expected 1")


class AlphabetDistribution(BaseModel):
    """Letter probabilities p_1..p_r as exact rationals."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    probs: Tuple[Fraction, ...]

    @field_validator("probs")
    @classmethod
    def check_probs(cls, value):
        check_probabilities(value)
        return value

    @property
    def r(self) -> int:
        return len(self.probs)

    @classmethod
    def of(cls, probs: Iterable) -> "AlphabetDistribution":
        return cls(probs=tuple(Fraction(p) for p in probs))

    @classmethod
    def uniform(cls, r: int) -> "AlphabetDistribution":
        return cls(probs=tuple(Fraction(1, r) for _ in range(r)))


class RunSpec(BaseModel):
    """Required run length h_i per letter."""
    model_config = ConfigDict(frozen=True)

    lengths: Tuple[int, ...]

    @field_validator("lengths")
    @classmethod
    def check_lengths(cls, value):
        if not value:
            raise RunSpecError("run specification is empty")
        for index, h in enumerate(value, start=1):
            if h < 1:
                raise RunSpecError(f"h{index}={h} must be at least 1")
        return value

    @classmethod
    def uniform(cls, h: int, r: int) -> "RunSpec":
        return cls(lengths=(h,) * r)

    @classmethod
    def of(cls, lengths: Iterable[int]) -> "RunSpec":
        return cls(lengths=tuple(lengths))

    def __len__(self) -> int:
        return len(self.lengths)


class Moments(BaseModel):
    """Expectation and (optionally) variance of a waiting time."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    expectation: Fraction
    variance: Optional[Fraction] = None

    @field_validator("variance")
    @classmethod
    def check_variance(cls, value):
        if value is not None and value < 0:
            raise ValueError(f"variance {value} is negative")
        return value


class RunQuery(BaseModel):
    """A validated (distribution, run spec, j) triple."""
    model_config = ConfigDict(frozen=True)

    dist: AlphabetDistribution
    runs: RunSpec
    j: int

    @model_validator(mode="after")
    def check_query(self):
        check_query(self.dist, self.runs, self.j)
        return self


def check_query(dist: AlphabetDistribution, rs: RunSpec, j: int) -> None:
    if len(rs) != dist.r:
        raise QueryError(f"run spec has {len(rs)} entries but the alphabet has r={dist.r}")
    if j < 1 or j > dist.r:
        raise QueryError(f"j={j} outside [1, {dist.r}]")


def parse_distribution(text: str) -> AlphabetDistribution:
    """
    Parse a comma-separated list of exact rationals into a distribution.

    Args:
        text: e.g. "1/6,1/6,1/6,1/6,1/6,1/6"

    Returns:
        Validated AlphabetDistribution

    Raises:
        DistributionError: malformed token, r < 2, p outside (0, 1), or sum != 1
    """
    tokens = text.split(",")
    probs: List[Fraction] = []
    for index, token in enumerate(tokens, start=1):
        try:
            probs.append(parse_rational(token))
        except DistributionError as e:
            raise DistributionError(f"token {index}: {e}") from e
    check_probabilities(probs)
    return AlphabetDistribution(probs=tuple(probs))


def parse_runs(text: str, r: int) -> RunSpec:
    """Parse "3" (uniform) or "3,2,4" (one length per letter)."""
    tokens = [token.strip() for token in text.split(",")]
    lengths = []
    for index, token in enumerate(tokens, start=1):
        if not re.fullmatch(r"\d+", token):
            raise RunSpecError(f"run length {index} is not a positive integer: {token!r}")
        if int(token) < 1:
            raise RunSpecError(f"h{index}={token} must be at least 1")
        lengths.append(int(token))
    if len(lengths) == 1:
        return RunSpec.uniform(lengths[0], r)
    return RunSpec.of(lengths)


def validate_query(dist: AlphabetDistribution, rs: RunSpec, j: int) -> RunQuery:
    """Accept iff 1 <= j <= r and the run spec has exactly r entries."""
    check_query(dist, rs, j)
    return RunQuery(dist=dist, runs=rs, j=j)


def render_rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def render_distribution(dist: AlphabetDistribution) -> str:
    return ",".join(render_rational(p) for p in dist.probs)


def render_runs(rs: RunSpec) -> str:
    return ",".join(str(h) for h in rs.lengths)


def letter_weights(dist: AlphabetDistribution) -> Tuple[Tuple[int, ...], int]:
    """Integer weights w_i with p_i = w_i / total over the common denominator."""
    total = math.lcm(*(p.denominator for p in dist.probs))
    weights = tuple(p.numerator * (total // p.denominator) for p in dist.probs)
    return weights, total
