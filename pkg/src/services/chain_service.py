import logging
from collections import deque
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Tuple

from models.chain import (
    ABSORBED,
    SUPPRESSED,
    AbsorbingChain,
    ChainInvariantError,
    ChainState,
    Transition,
)
from models.distribution import (
    AlphabetDistribution,
    Moments,
    RunSpec,
    check_query,
    letter_weights,
)
from services.exact_solver import ExactLinearSolver, SingularSystemError

logger = logging.getLogger(__name__)

__all__ = ["ChainService", "SingularSystemError", "ChainInvariantError"]


def next_context(state: ChainState, letter: int, lengths: Tuple[int, ...]) -> Tuple[ChainState, bool]:
    """
    Read one letter from a trailing-run context.

    Returns:
        (next state, whether the letter just completed its run)
    """
    completed = state.completed
    if letter in completed:
        return ChainState(completed, letter, SUPPRESSED), False
    run = state.run_length + 1 if letter == state.current_letter else 1
    if run >= lengths[letter]:
        return ChainState(completed | {letter}, letter, SUPPRESSED), True
    return ChainState(completed, letter, run), False


class ChainService:
    """
    Absorbing-chain route: builds the run-detecting automaton for B_j and
    solves exactly for the first two moments of the absorption time.
    """

    def __init__(self):
        logger.info("ChainService initialized")

    def build_run_chain(self, dist: AlphabetDistribution, rs: RunSpec, j: int) -> AbsorbingChain:
        """
        Chain whose absorption time is distributed as B_j.

        States are materialized by BFS from the start state, letters in
        ascending order; absorption happens when the j-th distinct letter
        completes its run.
        """
        check_query(dist, rs, j)
        lengths = rs.lengths

        def absorbs(state: ChainState, completed_now: bool) -> bool:
            return completed_now and len(state.completed) >= j

        chain = self._explore(dist, ChainState(), absorbs, lambda s, k: next_context(s, k, lengths), j)
        bound = self.state_bound(rs, j)
        if chain.size > bound:
            raise ChainInvariantError(f"{chain.size} states exceed the bound {bound}")
        logger.info(f"Run chain built: r={dist.r}, runs={lengths}, j={j}, states={chain.size}")
        return chain

    def build_letter_chain(self, dist: AlphabetDistribution, rs: RunSpec, letter: int) -> AbsorbingChain:
        """Chain absorbing at the first completed run of one given letter (0-based)."""
        check_query(dist, rs, 1)
        if not 0 <= letter < dist.r:
            raise ValueError(f"letter index {letter} outside [0, {dist.r})")
        h = rs.lengths[letter]

        def step(state: ChainState, k: int) -> Tuple[ChainState, bool]:
            if k != letter:
                return ChainState(frozenset(), None, SUPPRESSED), False
            run = state.run_length + 1
            if run >= h:
                return state, True
            return ChainState(frozenset(), letter, run), False

        return self._explore(dist, ChainState(), lambda s, done: done, step, 1)

    def _explore(self, dist, start: ChainState, absorbs, step, j: int) -> AbsorbingChain:
        weights, total = letter_weights(dist)
        index: Dict[ChainState, int] = {start: 0}
        states: List[ChainState] = [start]
        rows: List[Tuple[Transition, ...]] = []
        queue = deque([start])
        while queue:
            state = queue.popleft()
            row = []
            for letter, p in enumerate(dist.probs):
                target_state, completed_now = step(state, letter)
                if absorbs(target_state, completed_now):
                    row.append(Transition(letter, p, ABSORBED))
                    continue
                if target_state not in index:
                    index[target_state] = len(states)
                    states.append(target_state)
                    queue.append(target_state)
                row.append(Transition(letter, p, index[target_state]))
            rows.append(tuple(row))
        return AbsorbingChain(
            states=tuple(states),
            transitions=tuple(rows),
            start=0,
            weights=weights,
            weight_total=total,
            j=j,
            index=index,
        )

    @staticmethod
    def state_bound(rs: RunSpec, j: int) -> int:
        """1 + sum over completed sets C with |C| < j of per-letter context counts."""
        r = len(rs)
        bound = 1
        for size in range(min(j, r)):
            for completed in combinations(range(r), size):
                bound += sum(
                    1 if letter in completed else rs.lengths[letter] - 1
                    for letter in range(r)
                )
        return bound

    def chain_moments(self, chain: AbsorbingChain) -> Moments:
        """
        Expectation and variance of the absorption time from the start state.

        Solves (I - Q) t = 1 and (I - Q) s = 1 + 2 Q t exactly; since
        Q t = t - 1 the second right-hand side is 2 t - 1.

        Raises:
            SingularSystemError: I - Q is not invertible
        """
        n = chain.size
        rows = []
        for i, row in enumerate(chain.transitions):
            sparse: Dict[int, Fraction] = {i: Fraction(1)}
            for t in row:
                if t.target != ABSORBED:
                    sparse[t.target] = sparse.get(t.target, Fraction(0)) - t.probability
            rows.append({k: v for k, v in sparse.items() if v != 0})

        try:
            solver = ExactLinearSolver(rows, n)
        except SingularSystemError:
            logger.error(f"Singular system for chain with {n} states")
            raise
        t = solver.solve([Fraction(1)] * n)
        s = solver.solve([2 * value - 1 for value in t])
        expectation = t[chain.start]
        variance = s[chain.start] - expectation ** 2
        logger.info(f"Chain moments over {n} states: E={expectation}, V={variance}")
        return Moments(expectation=expectation, variance=variance)

    def push(self, chain: AbsorbingChain, counts: List[int]) -> List[int]:
        """One step of the integer-scaled distribution (scale grows by weight_total)."""
        updated = [0] * chain.size
        for i, mass in enumerate(counts):
            if not mass:
                continue
            for t in chain.transitions[i]:
                if t.target != ABSORBED:
                    updated[t.target] += mass * chain.weights[t.letter]
        return updated

    def initial_counts(self, chain: AbsorbingChain) -> List[int]:
        counts = [0] * chain.size
        counts[chain.start] = 1
        return counts

    def chain_waiting_cdf(self, chain: AbsorbingChain, n: int) -> Fraction:
        """P{absorption time <= n} by n exact distribution pushes."""
        if n < 0:
            raise ValueError(f"n must be nonnegative, got {n}")
        counts = self.initial_counts(chain)
        for _ in range(n):
            counts = self.push(chain, counts)
        return 1 - Fraction(sum(counts), chain.weight_total ** n)

    def chain_waiting_cdfs(self, chain: AbsorbingChain, n_max: int) -> List[Fraction]:
        """[P{T <= 0}, ..., P{T <= n_max}] in one pass."""
        counts = self.initial_counts(chain)
        values = []
        for n in range(n_max + 1):
            if n:
                counts = self.push(chain, counts)
            values.append(1 - Fraction(sum(counts), chain.weight_total ** n))
        return values

    def absorption_within(self, chain: AbsorbingChain, steps: int) -> List[Fraction]:
        """
        Per-state probability of absorbing within the given number of steps.

        Backward recursion f_{k+1}(s) = sum_l p_l (1 if absorbed else f_k(target)),
        carried in integers scaled by weight_total^k.
        """
        scaled = [0] * chain.size
        for k in range(steps):
            scale = chain.weight_total ** k
            scaled = [
                sum(
                    chain.weights[t.letter] * (scale if t.target == ABSORBED else scaled[t.target])
                    for t in row
                )
                for row in chain.transitions
            ]
        denominator = chain.weight_total ** steps
        return [Fraction(value, denominator) for value in scaled]

    def dump_chain(self, chain: AbsorbingChain) -> str:
        """One transition per line: state_index letter prob target (A = absorbed)."""
        lines = [f"# states={chain.size} start={chain.start} j={chain.j}"]
        for i, state in enumerate(chain.states):
            lines.append(f"# {i} {state.label() or '(start)'}")
        for i, row in enumerate(chain.transitions):
            for t in row:
                target = "A" if t.target == ABSORBED else str(t.target)
                prob = f"{t.probability.numerator}/{t.probability.denominator}"
                lines.append(f"{i} {t.letter + 1} {prob} {target}")
        return "\n".join(lines)

    def moments(self, dist: AlphabetDistribution, rs: RunSpec, j: int,
                chain: Optional[AbsorbingChain] = None) -> Moments:
        return self.chain_moments(chain or self.build_run_chain(dist, rs, j))
