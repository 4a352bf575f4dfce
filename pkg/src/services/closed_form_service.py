import logging
from fractions import Fraction
from typing import List

from models.distribution import AlphabetDistribution, RunSpec, check_query
from models.rational_function import (
    RationalFunction,
    monomial,
    poly_add,
    poly_mul,
    poly_sub,
)

logger = logging.getLogger(__name__)


class ClosedFormService:
    """
    Closed forms for the first completed run of any letter (j = 1).

    Every formula uses the per-letter run length h_i; a uniform h is just
    the case of equal lengths.
    """

    def __init__(self):
        logger.info("ClosedFormService initialized")

    def _run_terms(self, dist: AlphabetDistribution, rs: RunSpec):
        check_query(dist, rs, 1)
        for p, h in zip(dist.probs, rs.lengths):
            yield p, h, p ** h

    def expect_first(self, dist: AlphabetDistribution, rs: RunSpec) -> Fraction:
        """
        E(B_1) = 1 / sum_i p_i^h_i (1 - p_i) / (1 - p_i^h_i).

        Args:
            dist: Letter distribution
            rs: Run length per letter

        Returns:
            The exact expectation
        """
        rate = sum(
            (ph * (1 - p) / (1 - ph) for p, h, ph in self._run_terms(dist, rs)),
            Fraction(0),
        )
        return 1 / rate

    def variance_summands(self, dist: AlphabetDistribution, rs: RunSpec) -> List[Fraction]:
        """Per-letter terms of the variance numerator; each one is nonnegative."""
        return [
            (p + ph) / (1 - ph) - 2 * h * ph * (1 - p) / (1 - ph) ** 2
            for p, h, ph in self._run_terms(dist, rs)
        ]

    def variance_first(self, dist: AlphabetDistribution, rs: RunSpec) -> Fraction:
        """V(B_1) = E(B_1)^2 times the sum of the variance summands."""
        expectation = self.expect_first(dist, rs)
        return expectation ** 2 * sum(self.variance_summands(dist, rs), Fraction(0))

    def expect_letter(self, dist: AlphabetDistribution, rs: RunSpec, letter: int) -> Fraction:
        """Expected wait until the given letter (0-based) completes its own run."""
        check_query(dist, rs, 1)
        if not 0 <= letter < dist.r:
            raise ValueError(f"letter index {letter} outside [0, {dist.r})")
        p, h = dist.probs[letter], rs.lengths[letter]
        return (1 - p ** h) / (p ** h * (1 - p))

    def g1_rational(self, dist: AlphabetDistribution, rs: RunSpec) -> RationalFunction:
        """
        G_1(z) = sum_n P{Y_n = 0} z^n as one numerator/denominator pair.

        Each letter contributes (p z - (p z)^h) / (1 - (p z)^h); fractions are
        cleared over the product of the letter denominators, no GCD reduction.
        """
        numerators = []
        denominators = []
        for p, h, _ in self._run_terms(dist, rs):
            pz_h = monomial(p ** h, h)
            numerators.append(poly_sub(monomial(p, 1), pz_h))
            denominators.append(poly_sub((Fraction(1),), pz_h))

        common = (Fraction(1),)
        for d in denominators:
            common = poly_mul(common, d)

        inner = (Fraction(0),)
        for i, n in enumerate(numerators):
            term = n
            for k, d in enumerate(denominators):
                if k != i:
                    term = poly_mul(term, d)
            inner = poly_add(inner, term)

        function = RationalFunction(numer=common, denom=poly_sub(common, inner))
        logger.debug(f"G_1 built with numerator degree {len(function.numer) - 1}, "
                     f"denominator degree {len(function.denom) - 1}")
        return function

    def no_run_prefix_probs(self, dist: AlphabetDistribution, rs: RunSpec, n_max: int) -> List[Fraction]:
        """[P{Y_0 = 0}, ..., P{Y_n_max = 0}] as series coefficients of G_1."""
        return self.g1_rational(dist, rs).series(n_max)

    def variance_from_generating_function(self, dist: AlphabetDistribution, rs: RunSpec) -> Fraction:
        """V(B_1) = 2 G_1'(1) + G_1(1) - G_1(1)^2, evaluated on the rational function."""
        g1 = self.g1_rational(dist, rs)
        value = g1.evaluate(1)
        return 2 * g1.derivative_at(1) + value - value ** 2
