import logging
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

logger = logging.getLogger(__name__)

SparseRow = Dict[int, Fraction]


class SingularSystemError(ArithmeticError):
    """The linear system has no unique solution."""


def _size(value: Fraction) -> int:
    return value.numerator.bit_length() + value.denominator.bit_length()


class ExactLinearSolver:
    """
    Gaussian elimination over the rationals on sparse rows.

    The matrix is factorized once; solve() replays the recorded row
    operations on each right-hand side. Pivots are chosen by the smallest
    numerator plus denominator bit length to limit coefficient growth.
    """

    def __init__(self, rows: Sequence[SparseRow], n: int):
        self.n = n
        self._pivots: List[Tuple[int, SparseRow]] = []
        self._log: List[List[Tuple[int, int, Fraction]]] = []
        self._factorize([dict(row) for row in rows])

    def _factorize(self, rows: List[SparseRow]) -> None:
        remaining = set(range(len(rows)))
        for col in range(self.n):
            candidates = [i for i in remaining if rows[i].get(col, 0) != 0]
            if not candidates:
                raise SingularSystemError(f"no pivot for column {col}")
            pivot_index = min(candidates, key=lambda i: (_size(rows[i][col]), i))
            remaining.discard(pivot_index)
            pivot_row = rows[pivot_index]
            pivot_value = pivot_row[col]

            step = []
            for i in candidates:
                if i == pivot_index:
                    continue
                row = rows[i]
                factor = row[col] / pivot_value
                for k, value in pivot_row.items():
                    updated = row.get(k, 0) - factor * value
                    if updated:
                        row[k] = updated
                    else:
                        row.pop(k, None)
                step.append((i, pivot_index, factor))
            self._log.append(step)
            self._pivots.append((pivot_index, pivot_row))

    def solve(self, rhs: Sequence[Fraction]) -> List[Fraction]:
        b = [Fraction(v) for v in rhs]
        for step in self._log:
            for target, source, factor in step:
                b[target] -= factor * b[source]

        x = [Fraction(0)] * self.n
        for col in reversed(range(self.n)):
            pivot_index, row = self._pivots[col]
            acc = b[pivot_index]
            for k, value in row.items():
                if k != col:
                    acc -= value * x[k]
            x[col] = acc / row[col]
        return x
