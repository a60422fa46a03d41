"""q-number arithmetic underlying every matrix-element formula in the package.

Conventions used throughout: for deformation parameter q > 1,

    [a] = (q^a - q^-a) / (q - 1/q)        (bracket)
    {a} = q^a + q^-a                      (curly)
    lambda = q - 1/q

All arithmetic is double precision; q^a is evaluated as exp(a*ln q) so that
half-integer and shifted arguments cost nothing special.
"""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class DeformationParams:
    """Deformation parameter q with derived scale lambda = q - 1/q.

    q = 1 is rejected: the classical limit is probed by taking q close to 1,
    never equal to it (the admissible-scale interval [1, q) would collapse).
    """

    q: float

    def __post_init__(self):
        if not self.q > 1.0:
            raise ValueError(f"deformation parameter must satisfy q > 1, got q={self.q}")

    @property
    def lam(self) -> float:
        return self.q - 1.0 / self.q

    def qpow(self, a: float) -> float:
        """q**a for arbitrary real a."""
        return math.exp(a * math.log(self.q))


def bracket(a: float, p: DeformationParams) -> float:
    """Symmetric q-integer [a]; odd in a, [1] = 1."""
    return (p.qpow(a) - p.qpow(-a)) / p.lam


def curly(a: float, p: DeformationParams) -> float:
    """{a} = q^a + q^-a; even in a, bounded below by 2."""
    return p.qpow(a) + p.qpow(-a)


def sum_identity(j: int, p: DeformationParams) -> tuple[float, float]:
    """Both sides of the closed form for  sum_{l=1..j} [2l+1] / ({l}{l+1})^2.

    Returns (lhs, rhs) where lhs is the brute-force sum and rhs the closed
    form [2j]/([2]{j}^2{j+1}^2) * (1 + [2j+2]/[2]).  The empty-sum case j = 0
    is rejected; the closed form is stated for j >= 1 only.
    """
    if j < 1:
        raise ValueError(f"sum identity requires j >= 1, got j={j}")
    lhs = sum(
        bracket(2 * l + 1, p) / (curly(l, p) ** 2 * curly(l + 1, p) ** 2)
        for l in range(1, j + 1)
    )
    two = bracket(2, p)
    rhs = (
        bracket(2 * j, p)
        / (two * curly(j, p) ** 2 * curly(j + 1, p) ** 2)
        * (1.0 + bracket(2 * j + 2, p) / two)
    )
    return lhs, rhs
