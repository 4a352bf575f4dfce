import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from config import EngineSettings, load_settings
from models.chain import ABSORBED, SUPPRESSED, AbsorbingChain, ChainState
from models.distribution import AlphabetDistribution, RunSpec, check_query
from services.chain_service import ChainService, next_context

logger = logging.getLogger(__name__)

PrefixKey = Tuple[FrozenSet[int], Optional[int], int]


class PrefixLawLimitError(ValueError):
    """Alphabet too large for the set-resolved prefix law."""


@dataclass(frozen=True)
class TailSumEnclosure:
    """Rigorous bounds lower <= E(B_j) <= upper."""
    lower: Fraction
    upper: Fraction
    steps: int
    block_length: int
    delta: Fraction

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    def contains(self, value: Fraction) -> bool:
        return self.lower <= value <= self.upper


class TailSumCapExceeded(RuntimeError):
    """Tolerance not reached within the step cap; carries the enclosure achieved."""

    def __init__(self, enclosure: TailSumEnclosure, tol: Fraction):
        self.enclosure = enclosure
        super().__init__(
            f"width {float(enclosure.width):.3g} > tol {float(tol):.3g} "
            f"after {enclosure.steps} steps: [{enclosure.lower}, {enclosure.upper}]"
        )


@dataclass(frozen=True)
class PrefixLaw:
    """Joint law of (completed set M, current letter, run length) after n letters."""
    n: int
    mass: Dict[PrefixKey, Fraction] = field(default_factory=dict)

    @classmethod
    def empty_word(cls) -> "PrefixLaw":
        return cls(n=0, mass={(frozenset(), None, SUPPRESSED): Fraction(1)})

    def total(self) -> Fraction:
        return sum(self.mass.values(), Fraction(0))


def round_down(value, bits: int):
    """floor(value / 2^bits) for an int or an object array of ints."""
    return value >> bits


def round_up(value, bits: int):
    """ceil(value / 2^bits) for an int or an object array of ints."""
    return -((-value) >> bits)


class DyadicBlocks:
    """
    Outward-rounded bounds on Q^(2^b) and sum_{n < 2^b} Q^n 1 for the
    transient matrix Q of a chain, as integers scaled by 2^bits.

    Levels are squared on demand; every entry of a lower block is at most the
    exact value and every entry of an upper block at least it.
    """

    def __init__(self, chain: AbsorbingChain, bits: int):
        self.bits = bits
        weights = np.zeros((chain.size, chain.size), dtype=object)
        for i, row in enumerate(chain.transitions):
            for t in row:
                if t.target != ABSORBED:
                    weights[i, t.target] += chain.weights[t.letter]
        scaled = weights * (1 << bits)
        total = chain.weight_total
        ones = np.full(chain.size, 1 << bits, dtype=object)
        self.powers = [(scaled // total, -((-scaled) // total))]
        self.sums = [(ones, ones.copy())]

    def level(self, b: int):
        """((power_lo, power_hi), (sum_lo, sum_hi)) for 2^b steps."""
        while len(self.powers) <= b:
            power_lo, power_hi = self.powers[-1]
            sum_lo, sum_hi = self.sums[-1]
            self.sums.append((sum_lo + round_down(power_lo.dot(sum_lo), self.bits),
                              sum_hi + round_up(power_hi.dot(sum_hi), self.bits)))
            self.powers.append((round_down(power_lo.dot(power_lo), self.bits),
                                round_up(power_hi.dot(power_hi), self.bits)))
            logger.debug(f"Squared transient block to 2^{len(self.powers) - 1} steps")
        return self.powers[b], self.sums[b]


class OracleService:
    """
    Independent verification engines: an exact prefix dynamic program and
    a rigorous tail-sum enclosure of E(B_j).
    """

    def __init__(self, chain_service: Optional[ChainService] = None,
                 settings: Optional[EngineSettings] = None):
        self.chain_service = chain_service or ChainService()
        self.settings = settings or load_settings()
        self.max_r = self.settings.max_prefix_law_r
        logger.info(f"OracleService initialized with prefix-law guard r <= {self.max_r}")

    def _check_size(self, dist: AlphabetDistribution, rs: RunSpec) -> None:
        check_query(dist, rs, 1)
        if dist.r <= self.max_r:
            return
        if not self.settings.allow_large:
            raise PrefixLawLimitError(f"r={dist.r} exceeds the prefix-law limit {self.max_r}")
        logger.warning(f"Prefix-law guard overridden for r={dist.r}")

    def dp_step(self, law: PrefixLaw, dist: AlphabetDistribution, rs: RunSpec) -> PrefixLaw:
        """Law after one more letter. Completed sets are kept in full, never absorbed."""
        updated: Dict[PrefixKey, Fraction] = {}
        for (completed, letter, run), mass in law.mass.items():
            state = ChainState(completed, letter, run)
            for k, p in enumerate(dist.probs):
                target, _ = next_context(state, k, rs.lengths)
                key = (target.completed, target.current_letter, target.run_length)
                updated[key] = updated.get(key, Fraction(0)) + mass * p
        return PrefixLaw(n=law.n + 1, mass=updated)

    def prefix_laws(self, dist: AlphabetDistribution, rs: RunSpec, n_max: int) -> Iterator[PrefixLaw]:
        """Laws for word lengths 0..n_max."""
        self._check_size(dist, rs)
        law = PrefixLaw.empty_word()
        yield law
        for _ in range(n_max):
            law = self.dp_step(law, dist, rs)
            yield law

    def prefix_law(self, dist: AlphabetDistribution, rs: RunSpec, n: int) -> PrefixLaw:
        law = None
        for law in self.prefix_laws(dist, rs, n):
            pass
        return law

    @staticmethod
    def event_prob(law: PrefixLaw, letters: Iterable[int]) -> Fraction:
        target = frozenset(letters)
        return sum(
            (mass for (completed, _, _), mass in law.mass.items() if completed == target),
            Fraction(0),
        )

    @staticmethod
    def y_dist(law: PrefixLaw, r: int) -> List[Fraction]:
        dist = [Fraction(0)] * (r + 1)
        for (completed, _, _), mass in law.mass.items():
            dist[len(completed)] += mass
        return dist

    def dp_event_prob(self, dist: AlphabetDistribution, rs: RunSpec, n: int,
                      letters: Iterable[int]) -> Fraction:
        """P(exactly the given letters (0-based) have completed their run within n letters)."""
        letters = frozenset(letters)
        if any(not 0 <= letter < dist.r for letter in letters):
            raise ValueError(f"letters {sorted(letters)} not in the alphabet")
        return self.event_prob(self.prefix_law(dist, rs, n), letters)

    def dp_y_dist(self, dist: AlphabetDistribution, rs: RunSpec, n: int) -> List[Fraction]:
        """[P{Y_n = 0}, ..., P{Y_n = r}]."""
        return self.y_dist(self.prefix_law(dist, rs, n), dist.r)

    def dp_y_dists(self, dist: AlphabetDistribution, rs: RunSpec, n_max: int) -> List[List[Fraction]]:
        return [self.y_dist(law, dist.r) for law in self.prefix_laws(dist, rs, n_max)]

    def tail_sum_expectation(self, dist: AlphabetDistribution, rs: RunSpec, j: int,
                             n_cap: int, tol: Fraction) -> TailSumEnclosure:
        """
        Enclose E(B_j) = sum_n P{B_j > n} between partial sums and a geometric tail.

        With L the number of transient states and delta the smallest
        probability of absorbing within L steps from any state,
        sum_{n >= N} P{B_j > n} <= L * P{B_j > N} / delta.

        Partial sums advance N by powers of two from squared transition blocks,
        so the number of rounds grows with log N. Masses are fixed-point
        integers rounded down on the lower side and up on the upper side;
        delta is exact.

        Raises:
            TailSumCapExceeded: width still above tol after n_cap steps
        """
        check_query(dist, rs, j)
        if n_cap < 1:
            raise ValueError(f"n_cap must be at least 1, got {n_cap}")
        tol = Fraction(tol)
        if tol <= 0:
            raise ValueError(f"tol must be positive, got {tol}")

        chain = self.chain_service.build_run_chain(dist, rs, j)
        block = chain.size
        delta = min(self.chain_service.absorption_within(chain, block))
        bits = self.settings.tail_precision_bits
        one = 1 << bits
        blocks = DyadicBlocks(chain, bits)

        mass_lo = np.zeros(block, dtype=object)
        mass_lo[chain.start] = one
        mass_hi = mass_lo.copy()
        acc_lo = acc_hi = 0
        upper = None
        steps = 0
        level = 0
        while True:
            lower = Fraction(acc_lo, one)
            bound = Fraction(acc_hi, one) + block * Fraction(int(mass_hi.sum()), one) / delta
            upper = bound if upper is None else min(upper, bound)
            if upper - lower <= tol or steps >= n_cap:
                break
            while steps + (1 << level) > n_cap:
                level -= 1
            (power_lo, power_hi), (sum_lo, sum_hi) = blocks.level(level)
            acc_lo += round_down(int(mass_lo.dot(sum_lo)), bits)
            acc_hi += round_up(int(mass_hi.dot(sum_hi)), bits)
            mass_lo = round_down(mass_lo.dot(power_lo), bits)
            mass_hi = round_up(mass_hi.dot(power_hi), bits)
            steps += 1 << level
            level += 1

        enclosure = TailSumEnclosure(lower=lower, upper=upper, steps=steps,
                                     block_length=block, delta=delta)
        if enclosure.width > tol:
            logger.error(f"Tail-sum enclosure did not reach tol within {n_cap} steps")
            raise TailSumCapExceeded(enclosure, tol)
        logger.info(f"Tail-sum enclosure after {steps} steps: width={float(enclosure.width):.3g}")
        return enclosure
