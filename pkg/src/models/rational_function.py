from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

Poly = Tuple[Fraction, ...]


def poly_trim(coeffs: Sequence[Fraction]) -> Poly:
    """Drop trailing zero coefficients (keeps at least the constant term)."""
    coeffs = list(coeffs)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(Fraction(c) for c in coeffs) if coeffs else (Fraction(0),)


def poly_add(a: Poly, b: Poly) -> Poly:
    size = max(len(a), len(b))
    return poly_trim([
        (a[k] if k < len(a) else 0) + (b[k] if k < len(b) else 0)
        for k in range(size)
    ])


def poly_sub(a: Poly, b: Poly) -> Poly:
    return poly_add(a, tuple(-c for c in b))


def poly_mul(a: Poly, b: Poly) -> Poly:
    result = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for k, y in enumerate(b):
            result[i + k] += x * y
    return poly_trim(result)


def poly_eval(a: Poly, z: Fraction) -> Fraction:
    value = Fraction(0)
    for c in reversed(a):
        value = value * z + c
    return value


def poly_derivative(a: Poly) -> Poly:
    if len(a) == 1:
        return (Fraction(0),)
    return poly_trim([k * a[k] for k in range(1, len(a))])


def monomial(coefficient: Fraction, degree: int) -> Poly:
    return poly_trim([Fraction(0)] * degree + [Fraction(coefficient)])


@dataclass(frozen=True)
class RationalFunction:
    """numer(z) / denom(z) with exact coefficients, lowest degree first."""
    numer: Poly
    denom: Poly

    def __post_init__(self):
        if self.denom[0] == 0:
            raise ValueError("denominator must have a nonzero constant term")

    @property
    def degree_bound(self) -> int:
        return max(len(self.numer), len(self.denom)) - 1

    def evaluate(self, z) -> Fraction:
        z = Fraction(z)
        d = poly_eval(self.denom, z)
        if d == 0:
            raise ZeroDivisionError(f"denominator vanishes at z={z}")
        return poly_eval(self.numer, z) / d

    def derivative_at(self, z) -> Fraction:
        """Exact value of d/dz (numer/denom) at z by the quotient rule."""
        z = Fraction(z)
        n, d = poly_eval(self.numer, z), poly_eval(self.denom, z)
        if d == 0:
            raise ZeroDivisionError(f"denominator vanishes at z={z}")
        dn = poly_eval(poly_derivative(self.numer), z)
        dd = poly_eval(poly_derivative(self.denom), z)
        return (dn * d - n * dd) / (d * d)

    def series(self, n_max: int) -> List[Fraction]:
        """
        Power-series coefficients a_0..a_{n_max} at z = 0.

        Uses a_n = (c_n - sum_{k>=1} q_k a_{n-k}) / q_0 for numerator c and
        denominator q.
        """
        if n_max < 0:
            raise ValueError("n_max must be nonnegative")
        q = self.denom
        q0 = q[0]
        coefficients: List[Fraction] = []
        for n in range(n_max + 1):
            acc = self.numer[n] if n < len(self.numer) else Fraction(0)
            for k in range(1, min(n, len(q) - 1) + 1):
                if q[k]:
                    acc -= q[k] * coefficients[n - k]
            coefficients.append(acc / q0)
        return coefficients
