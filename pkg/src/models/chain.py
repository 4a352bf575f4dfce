from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import FrozenSet, List, NamedTuple, Optional, Tuple

ABSORBED = -1
SUPPRESSED = 0


class ChainInvariantError(ValueError):
    """An absorbing chain violates row-sum or reachability requirements."""


@dataclass(frozen=True)
class ChainState:
    """
    Trailing-run context of a random word.

    completed holds letters (0-based) whose run is already complete. A current
    letter in completed carries run_length SUPPRESSED; the start state has no
    current letter.
    """
    completed: FrozenSet[int] = frozenset()
    current_letter: Optional[int] = None
    run_length: int = SUPPRESSED

    def label(self) -> str:
        """Human-readable name: "" for the start, "11" for two trailing 1s."""
        if self.current_letter is None:
            run = ""
        elif self.current_letter in self.completed:
            run = f"{self.current_letter + 1}*"
        else:
            run = str(self.current_letter + 1) * self.run_length
        if not self.completed:
            return run
        done = ",".join(str(letter + 1) for letter in sorted(self.completed))
        return f"{{{done}}}{run}"


class Transition(NamedTuple):
    letter: int
    probability: Fraction
    target: int  # transient index or ABSORBED


@dataclass(frozen=True)
class AbsorbingChain:
    """
    Finite absorbing Markov chain with exact transition probabilities.

    weights/weight_total give each letter's probability as an integer ratio so
    distribution pushes can run in integer arithmetic.
    """
    states: Tuple[ChainState, ...]
    transitions: Tuple[Tuple[Transition, ...], ...]
    start: int
    weights: Tuple[int, ...]
    weight_total: int
    j: int = 1
    index: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if len(self.states) != len(self.transitions):
            raise ChainInvariantError("every state needs a transition row")
        if not self.index:
            self.index.update({state: i for i, state in enumerate(self.states)})
        self._check_rows()
        self._check_absorbing()

    @property
    def size(self) -> int:
        return len(self.states)

    def _check_rows(self) -> None:
        for i, row in enumerate(self.transitions):
            total = sum((t.probability for t in row), Fraction(0))
            if total != 1:
                raise ChainInvariantError(f"row {i} sums to {total}")
            for t in row:
                if t.target != ABSORBED and not 0 <= t.target < self.size:
                    raise ChainInvariantError(f"row {i} points at unknown state {t.target}")
                if self.weights[t.letter] != t.probability * self.weight_total:
                    raise ChainInvariantError(f"row {i} letter {t.letter + 1} weight mismatch")

    def _check_absorbing(self) -> None:
        """Every transient state must reach ABSORBED."""
        predecessors: List[List[int]] = [[] for _ in self.states]
        queue = deque()
        reaches = [False] * self.size
        for i, row in enumerate(self.transitions):
            for t in row:
                if t.target == ABSORBED:
                    if not reaches[i]:
                        reaches[i] = True
                        queue.append(i)
                else:
                    predecessors[t.target].append(i)
        while queue:
            node = queue.popleft()
            for prev in predecessors[node]:
                if not reaches[prev]:
                    reaches[prev] = True
                    queue.append(prev)
        stuck = [self.states[i].label() for i, ok in enumerate(reaches) if not ok]
        if stuck:
            raise ChainInvariantError(f"states never absorb: {stuck[:5]}")
