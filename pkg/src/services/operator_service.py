import logging
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict

from config import EngineSettings, load_settings
from models.distribution import AlphabetDistribution, RunSpec, check_query

logger = logging.getLogger(__name__)


class SingularEvaluationError(ArithmeticError):
    """The Smirnov function has a pole at the requested point."""


class OperatorLimitError(ValueError):
    """Alphabet too large for the 2^r subset expansion."""


class SubstitutionValues(BaseModel):
    """Per-letter evaluation points: alpha (run still missing) and gamma (unrestricted)."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    alpha: Tuple[Fraction, ...]
    gamma: Tuple[Fraction, ...]

    def assignment(self, mask: int) -> List[Fraction]:
        """gamma on the letters whose bit is set in mask, alpha elsewhere."""
        return [
            self.gamma[i] if mask >> i & 1 else self.alpha[i]
            for i in range(len(self.alpha))
        ]


def smirnov_eval(x: Sequence[Fraction]) -> Fraction:
    """
    Smirnov-word generating function S(x) = 1 / (1 - sum x_i / (1 + x_i)).

    Raises:
        ZeroDivisionError: some x_i equals -1
        SingularEvaluationError: sum x_i / (1 + x_i) equals 1
    """
    total = Fraction(0)
    for index, value in enumerate(x, start=1):
        if value == -1:
            raise ZeroDivisionError(f"x{index} = -1")
        total += value / (1 + value)
    if total == 1:
        raise SingularEvaluationError("sum of x_i/(1+x_i) equals 1")
    return 1 / (1 - total)


def assignment_weight(r: int, j: int, t: int) -> int:
    """
    Weight of the assignment with gamma on t letters in the expansion of
    sum_{q<j} [y^q] prod_i (y Gamma_i + (1 - y) A_i).
    """
    return sum((-1) ** (q - t) * comb(r - t, q - t) for q in range(t, j))


def harmonic(r: int) -> Fraction:
    if r < 1:
        raise ValueError(f"harmonic number needs r >= 1, got {r}")
    return sum((Fraction(1, k) for k in range(1, r + 1)), Fraction(0))


def harmonic_alternating(r: int) -> Fraction:
    """sum_k C(r, k) (-1)^(k+1) / k, which equals H_r."""
    return sum((Fraction(comb(r, k) * (-1) ** (k + 1), k) for k in range(1, r + 1)), Fraction(0))


class OperatorService:
    """
    Expected waiting time for runs of j distinct letters via Smirnov-function
    evaluations at alpha/gamma substitution points.
    """

    def __init__(self, settings: Optional[EngineSettings] = None):
        self.settings = settings or load_settings()
        self.max_r = self.settings.max_operator_r
        logger.info(f"OperatorService initialized with subset guard r <= {self.max_r}")

    def substitution_values(self, dist: AlphabetDistribution, rs: RunSpec) -> SubstitutionValues:
        check_query(dist, rs, 1)
        alpha = tuple((p - p ** h) / (1 - p) for p, h in zip(dist.probs, rs.lengths))
        gamma = tuple(p / (1 - p) for p in dist.probs)
        return SubstitutionValues(alpha=alpha, gamma=gamma)

    def _check_size(self, r: int, allow_large: bool) -> None:
        if r <= self.max_r:
            return
        if not (allow_large or self.settings.allow_large):
            raise OperatorLimitError(
                f"r={r} needs 2^{r} Smirnov evaluations; limit is r <= {self.max_r}"
            )
        logger.warning(f"Subset guard overridden for r={r}")

    def expect_j(self, dist: AlphabetDistribution, rs: RunSpec, j: int,
                 allow_large: bool = False) -> Fraction:
        """
        E(B_j) as a weighted sum of Smirnov evaluations over letter subsets T.

        The full set gets weight zero for every j <= r and is never evaluated.

        Args:
            dist: Letter distribution
            rs: Run length per letter
            j: Number of distinct letters that must complete their run
            allow_large: Skip the alphabet size guard

        Returns:
            The exact expectation
        """
        check_query(dist, rs, j)
        r = dist.r
        self._check_size(r, allow_large)
        values = self.substitution_values(dist, rs)
        weights = [assignment_weight(r, j, t) for t in range(r + 1)]
        assert weights[r] == 0

        total = Fraction(0)
        for mask in range((1 << r) - 1):
            weight = weights[bin(mask).count("1")]
            if weight == 0:
                continue
            term = smirnov_eval(values.assignment(mask))
            logger.debug(f"subset mask={mask:0{r}b} weight={weight} S={term}")
            total += weight * term

        logger.info(f"Operator route: E(B_{j}) for r={r} = {total}")
        return total

    def expect_all(self, dist: AlphabetDistribution, rs: RunSpec,
                   allow_large: bool = False) -> Fraction:
        """E(B_r) = sum over proper subsets T of (-1)^(r-|T|+1) S(gamma on T, alpha off T)."""
        check_query(dist, rs, 1)
        r = dist.r
        self._check_size(r, allow_large)
        values = self.substitution_values(dist, rs)
        total = Fraction(0)
        for mask in range((1 << r) - 1):
            sign = (-1) ** (r - bin(mask).count("1") + 1)
            total += sign * smirnov_eval(values.assignment(mask))
        return total

    def expect_j_by_subsets(self, dist: AlphabetDistribution, rs: RunSpec, j: int) -> Fraction:
        """
        Direct double sum over |M| < j and T subset of M of
        (-1)^(|M|-|T|) S(gamma on T, alpha elsewhere), without weight collection.
        """
        check_query(dist, rs, j)
        r = dist.r
        self._check_size(r, False)
        values = self.substitution_values(dist, rs)
        cache: Dict[int, Fraction] = {}
        total = Fraction(0)
        for size in range(j):
            for members in combinations(range(r), size):
                for t in range(size + 1):
                    for chosen in combinations(members, t):
                        mask = sum(1 << i for i in chosen)
                        if mask not in cache:
                            cache[mask] = smirnov_eval(values.assignment(mask))
                        total += (-1) ** (size - t) * cache[mask]
        return total

    @staticmethod
    def expect_all_uniform(r: int, h: int) -> Fraction:
        """r (r^h - 1) / (r - 1) * H_r for equiprobable letters and uniform h."""
        if r < 2 or h < 1:
            raise ValueError(f"need r >= 2 and h >= 1, got r={r}, h={h}")
        return Fraction(r * (r ** h - 1), r - 1) * harmonic(r)
