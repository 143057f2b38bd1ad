import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

from app.config import settings
from app.core.exceptions import (
    BistableInput,
    DenominatorVanishesAtZero,
    InsufficientSymbols,
    NonIntegerLapCoefficient,
    NotAdmissible,
    NotBistable,
)
from app.services.poly import (
    IntPolynomial,
    RationalFunction,
    TruncatedSeries,
    least_root_in_unit_interval,
    poly_gcd,
    series_of_rational,
)
from app.services.symbolic import (
    KneadingPair,
    PeriodicSequence,
    Symbol,
    Word,
    is_admissible,
    is_bistable,
    phi,
    tau,
)

logger = logging.getLogger(__name__)

ONE_PLUS_T = IntPolynomial((1, 1))

# F(c1) = F(c1-) and F(c2) = F(c2+): an orbit through c1 reads as L, through c2 as R.
CONVENTION_FOLDING: Mapping[Symbol, Symbol] = {Symbol.A: Symbol.L, Symbol.B: Symbol.R}


@dataclass(frozen=True)
class SymbolSeries:
    L: TruncatedSeries
    M: TruncatedSeries
    R: TruncatedSeries

    @property
    def order(self) -> int:
        return self.L.order

    def __sub__(self, other: "SymbolSeries") -> "SymbolSeries":
        return SymbolSeries(self.L - other.L, self.M - other.M, self.R - other.R)

    def components(self) -> tuple[TruncatedSeries, TruncatedSeries, TruncatedSeries]:
        return self.L, self.M, self.R


@dataclass(frozen=True)
class KneadingMatrixTrunc:
    rows: tuple[tuple[TruncatedSeries, ...], ...]

    @property
    def order(self) -> int:
        return self.rows[0][0].order

    def __getitem__(self, index: tuple[int, int]) -> TruncatedSeries:
        i, j = index
        return self.rows[i][j]

    @classmethod
    def zero(cls, order: int) -> "KneadingMatrixTrunc":
        return cls(tuple(tuple(TruncatedSeries.zero(order) for _ in range(3)) for _ in range(2)))


def u_poly(s: PeriodicSequence) -> IntPolynomial:
    coeffs = [0] + [(-1) ** k * phi(s.word[k - 1]) for k in range(1, s.period + 1)]
    return IntPolynomial(tuple(coeffs))


def periodic_kneading_determinant(word: Word) -> RationalFunction:
    """Closed form (E + 2u_p) / ((1 + t) E) with E = 1 - (-1)^p t^p, unguarded."""
    p = len(word)
    eps = (-1) ** p
    e = IntPolynomial((1,)) - IntPolynomial.monomial(p, eps)
    u = u_poly(PeriodicSequence(word))
    return RationalFunction(e + u * 2, ONE_PLUS_T * e)


def kneading_determinant(s: PeriodicSequence) -> RationalFunction:
    if not is_admissible(s):
        raise NotAdmissible(f"({s})^inf is not admissible")
    if is_bistable(s):
        raise BistableInput(f"({s})^inf is bistable; use kneading_determinant_bistable")
    return periodic_kneading_determinant(s.word)


def kneading_determinant_bistable(s: PeriodicSequence) -> RationalFunction:
    if not is_bistable(s):
        raise NotBistable(f"({s})^inf is not of the form (Q tau(Q))^inf")
    half = s.word[: s.period // 2]
    q = len(half)
    e = IntPolynomial((1,)) + IntPolynomial.monomial(q, (-1) ** q)
    u = u_poly(PeriodicSequence(half))
    return RationalFunction(e + u * 2, ONE_PLUS_T * e)


def invariant_coordinate(
    it: Sequence[Symbol],
    order: int,
    folding: Mapping[Symbol, Symbol] = CONVENTION_FOLDING,
) -> SymbolSeries:
    if len(it) <= order:
        raise InsufficientSymbols(f"{len(it)} symbols cannot fill order {order}")
    parts = {Symbol.L: [0] * (order + 1), Symbol.M: [0] * (order + 1), Symbol.R: [0] * (order + 1)}
    for k in range(order + 1):
        symbol = folding.get(it[k], it[k])
        parts[symbol][k] += (-1) ** k
    return SymbolSeries(
        L=TruncatedSeries(tuple(parts[Symbol.L]), order),
        M=TruncatedSeries(tuple(parts[Symbol.M]), order),
        R=TruncatedSeries(tuple(parts[Symbol.R]), order),
    )


def _one_sided(first: Symbol, continuation: PeriodicSequence, order: int) -> SymbolSeries:
    symbols = [first] + list(continuation.prefix(order))
    return invariant_coordinate(symbols, order)


def kneading_increments(pair: KneadingPair, order: int) -> KneadingMatrixTrunc:
    """Increments nu_i = theta(c_i+) - theta(c_i-) on the basis (L, M, R).

    c1- reads L then follows -a, c1+ reads M then follows +a,
    c2- reads M then follows -a, c2+ reads R then follows +a.
    """
    plus, minus = pair.S, pair.tauS
    nu1 = _one_sided(Symbol.M, plus, order) - _one_sided(Symbol.L, minus, order)
    nu2 = _one_sided(Symbol.R, plus, order) - _one_sided(Symbol.M, minus, order)
    return KneadingMatrixTrunc((nu1.components(), nu2.components()))


def kneading_det_from_matrix(n: KneadingMatrixTrunc, j: int) -> TruncatedSeries:
    if j not in (1, 2, 3):
        raise ValueError("column index must be 1, 2 or 3")
    a, b = [c for c in range(3) if c != j - 1]
    minor = n[0, a] * n[1, b] - n[0, b] * n[1, a]
    sign = 1 if j % 2 else -1
    return (minor * sign) / TruncatedSeries.from_polynomial(ONE_PLUS_T, n.order)


def closed_form_series(s: PeriodicSequence, order: int) -> TruncatedSeries:
    return series_of_rational(periodic_kneading_determinant(s.word), order)


def oracle_agrees(s: PeriodicSequence, order: int | None = None) -> bool:
    """Increment-based D matches the closed form for every omitted column."""
    order = order if order is not None else 2 * s.period
    matrix = kneading_increments(KneadingPair(S=s, tauS=tau(s)), order)
    expected = closed_form_series(s, order)
    return all(kneading_det_from_matrix(matrix, j) == expected for j in (1, 2, 3))


def lap_series(d: RationalFunction, n_terms: int) -> list[int]:
    """Coefficients of 1/(t(1 - t^2)D) - 1/t; entry k is the lap number of F^(k+1)."""
    if d.num.coeff(0) == 0:
        raise DenominatorVanishesAtZero(f"lap series needs D(0) != 0, got {d}")
    one_minus_t2 = IntPolynomial((1, 0, -1))
    reciprocal = RationalFunction(d.den, one_minus_t2 * d.num)
    series = series_of_rational(reciprocal, n_terms)
    if series.coeffs[0] != 1:
        raise NonIntegerLapCoefficient(f"lap series of {d} has a pole at t = 0")
    laps: list[int] = []
    for k, c in enumerate(series.coeffs[1:]):
        if c.denominator != 1:
            raise NonIntegerLapCoefficient(f"coefficient {k} of the lap series is {c}")
        laps.append(int(c))
    return laps


def growth_number(d: RationalFunction, tol: float | None = None) -> tuple[float | None, float]:
    tol = tol if tol is not None else settings.root_tolerance
    common = poly_gcd(d.num, d.den)
    numerator = d.num.exact_div(common) if common.degree >= 1 else d.num
    if numerator.is_zero():
        return None, 1.0
    t0 = least_root_in_unit_interval(numerator, tol)
    if t0 is None:
        return None, 1.0
    return t0, 1.0 / t0


def truncated_determinant(prefix: Word) -> RationalFunction:
    """(1 + 2u_n) / (1 + t) from a finite kneading prefix."""
    coeffs = [1] + [2 * (-1) ** k * phi(prefix[k - 1]) for k in range(1, len(prefix) + 1)]
    return RationalFunction(IntPolynomial(tuple(coeffs)), ONE_PLUS_T)

