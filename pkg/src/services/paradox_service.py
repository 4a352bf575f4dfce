import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Iterator, List, Optional, Tuple

from models.distribution import AlphabetDistribution, RunSpec
from models.results import ParadoxPair
from services.closed_form_service import ClosedFormService

logger = logging.getLogger(__name__)


def grid_dice(r: int, denominator: int) -> Iterator[Tuple[int, ...]]:
    """
    Numerator vectors k_1 >= ... >= k_r >= 1 with sum equal to denominator.

    Letter order does not change any waiting time, so each die on the grid
    appears once, in lexicographically decreasing order.
    """
    def parts(remaining: int, slots: int, cap: int):
        if slots == 0:
            if remaining == 0:
                yield ()
            return
        low = max(1, remaining - cap * (slots - 1))
        for first in range(min(cap, remaining - (slots - 1)), low - 1, -1):
            for rest in parts(remaining - first, slots - 1, first):
                yield (first,) + rest

    yield from parts(denominator, r, denominator)


class ParadoxService:
    """
    Search for dice A, B where A waits longer for a 2-run but B waits longer
    for a 3-run. Comparisons are exact; ties are never reported.
    """

    def __init__(self, closed_form_service: Optional[ClosedFormService] = None):
        self.closed_form = closed_form_service or ClosedFormService()
        logger.info("ParadoxService initialized")

    def _profile(self, dist: AlphabetDistribution) -> Tuple[Fraction, Fraction]:
        r = dist.r
        return (
            self.closed_form.expect_first(dist, RunSpec.uniform(2, r)),
            self.closed_form.expect_first(dist, RunSpec.uniform(3, r)),
        )

    def is_paradox(self, die_a: AlphabetDistribution, die_b: AlphabetDistribution) -> bool:
        a2, a3 = self._profile(die_a)
        b2, b3 = self._profile(die_b)
        return a2 > b2 and a3 < b3

    def search(self, r: int, denominator: int, limit: int, threads: int = 1) -> List[ParadoxPair]:
        """
        Exhaustive search over dice with probabilities k/denominator, k >= 1.

        Args:
            r: Number of faces
            denominator: Grid denominator D
            limit: Maximum number of pairs to report
            threads: Worker threads for evaluating candidates

        Returns:
            Pairs ordered by (index of A, index of B) in grid order
        """
        if r < 2 or denominator < r:
            raise ValueError(f"need r >= 2 and denominator >= r, got r={r}, D={denominator}")
        if limit < 1:
            raise ValueError(f"limit must be at least 1, got {limit}")
        dice = [
            AlphabetDistribution.of(Fraction(k, denominator) for k in numerators)
            for numerators in grid_dice(r, denominator)
        ]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                profiles = list(pool.map(self._profile, dice))
        else:
            profiles = [self._profile(die) for die in dice]
        logger.info(f"Paradox search: {len(dice)} dice on the r={r}, D={denominator} grid")

        pairs: List[ParadoxPair] = []
        for a, (a2, a3) in enumerate(profiles):
            for b, (b2, b3) in enumerate(profiles):
                if a2 > b2 and a3 < b3:
                    pairs.append(ParadoxPair(
                        index_a=a, index_b=b,
                        die_a=dice[a], die_b=dice[b],
                        a_h2=a2, b_h2=b2, a_h3=a3, b_h3=b3,
                    ))
                    if len(pairs) >= limit:
                        logger.info(f"Paradox search stopped at limit {limit}")
                        return pairs
        logger.info(f"Paradox search found {len(pairs)} pairs")
        return pairs
