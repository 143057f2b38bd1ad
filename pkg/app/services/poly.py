import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

import numpy as np
import sympy

from app.config import settings
from app.core.exceptions import (
    DenominatorVanishesAtZero,
    DimensionMismatch,
    NotSquare,
    PolynomialParseError,
)

logger = logging.getLogger(__name__)

_TERM_BODY = re.compile(r"^(\d+)?(?:(\*)?t(?:\^(\d+))?)?$")

T = sympy.Symbol("t")


def _strip(coeffs: Iterable) -> tuple:
    values = list(coeffs)
    while values and values[-1] == 0:
        values.pop()
    return tuple(values)


def _rational_divmod(num: list[Fraction], den: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    """Long division of ascending coefficient lists over the rationals."""
    rem = list(num)
    quot = [Fraction(0)] * max(len(num) - len(den) + 1, 1)
    lead = den[-1]
    while len(rem) >= len(den) and any(rem):
        shift = len(rem) - len(den)
        factor = rem[-1] / lead
        quot[shift] = factor
        for i, d in enumerate(den):
            rem[shift + i] -= factor * d
        rem.pop()
        while rem and rem[-1] == 0:
            rem.pop()
    return quot, rem


@dataclass(frozen=True)
class IntPolynomial:
    coeffs: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _strip(int(c) for c in self.coeffs))

    @classmethod
    def from_coeffs(cls, *coeffs: int) -> "IntPolynomial":
        return cls(tuple(coeffs))

    @classmethod
    def monomial(cls, degree: int, coeff: int = 1) -> "IntPolynomial":
        return cls((0,) * degree + (coeff,))

    @classmethod
    def parse(cls, text: str) -> "IntPolynomial":
        return parse_polynomial(text)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, k: int) -> int:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __add__(self, other: "IntPolynomial") -> "IntPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        return IntPolynomial(tuple(self.coeff(k) + other.coeff(k) for k in range(n)))

    def __sub__(self, other: "IntPolynomial") -> "IntPolynomial":
        return self + (-other)

    def __neg__(self) -> "IntPolynomial":
        return IntPolynomial(tuple(-c for c in self.coeffs))

    def __mul__(self, other: "IntPolynomial | int") -> "IntPolynomial":
        if isinstance(other, int):
            return IntPolynomial(tuple(c * other for c in self.coeffs))
        if self.is_zero() or other.is_zero():
            return IntPolynomial()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return IntPolynomial(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "IntPolynomial":
        result = IntPolynomial((1,))
        for _ in range(exponent):
            result = result * self
        return result

    def __call__(self, x):
        acc = 0 * x
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "IntPolynomial":
        return IntPolynomial(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def content(self) -> int:
        result = 0
        for c in self.coeffs:
            result = gcd(result, c)
        return result

    def primitive(self) -> "IntPolynomial":
        if self.is_zero():
            return self
        content = self.content()
        if self.coeffs[-1] < 0:
            content = -content
        return IntPolynomial(tuple(c // content for c in self.coeffs))

    def as_sympy(self) -> sympy.Poly:
        return sympy.Poly(list(reversed(self.coeffs)) or [0], T, domain=sympy.ZZ)

    @classmethod
    def from_sympy(cls, poly: sympy.Poly) -> "IntPolynomial":
        return cls(tuple(int(c) for c in reversed(poly.all_coeffs())))

    def divmod_rational(self, other: "IntPolynomial") -> tuple[list[Fraction], list[Fraction]]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        return _rational_divmod(
            [Fraction(c) for c in self.coeffs], [Fraction(c) for c in other.coeffs]
        )

    def divides(self, other: "IntPolynomial") -> bool:
        """True if self divides other over the rationals."""
        _, rem = other.divmod_rational(self)
        return not rem

    def exact_div(self, other: "IntPolynomial") -> "IntPolynomial":
        quot, rem = self.divmod_rational(other)
        if rem or any(q.denominator != 1 for q in quot):
            raise ArithmeticError(f"{other} does not divide {self} over the integers")
        return IntPolynomial(tuple(int(q) for q in quot))

    def __str__(self) -> str:
        return format_polynomial(self)


def poly_arith(a: IntPolynomial, b: IntPolynomial, op: str) -> IntPolynomial:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"Unknown polynomial operation '{op}'")


def poly_gcd(a: IntPolynomial, b: IntPolynomial) -> IntPolynomial:
    """Primitive gcd with positive leading coefficient (over the rationals)."""
    common = a.as_sympy().gcd(b.as_sympy())
    if common.is_zero:
        return IntPolynomial()
    return IntPolynomial.from_sympy(common).primitive()


def format_polynomial(p: IntPolynomial) -> str:
    if p.is_zero():
        return "0"
    parts: list[str] = []
    for k, c in enumerate(p.coeffs):
        if c == 0:
            continue
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            body = ("" if mag == 1 else f"{mag}*") + "t" + (f"^{k}" if k > 1 else "")
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts)


def parse_polynomial(text: str) -> IntPolynomial:
    compact = "".join(text.split())
    if not compact:
        raise PolynomialParseError("empty polynomial", 0)
    if compact[0] not in "+-":
        compact = "+" + compact
        offset = -1
    else:
        offset = 0
    coeffs: dict[int, int] = {}
    pos = 0
    for match in re.finditer(r"[+-]+[^+-]*", compact):
        if match.start() != pos:
            raise PolynomialParseError("unexpected character", max(pos + offset, 0))
        pos = match.end()
        token = match.group()
        signs = len(token) - len(token.lstrip("+-"))
        sign = -1 if token[:signs].count("-") % 2 else 1
        body = token[signs:]
        parsed = _TERM_BODY.match(body)
        if not body or parsed is None or (parsed.group(2) and parsed.group(1) is None):
            raise PolynomialParseError(f"malformed term '{body}'", max(match.start() + signs + offset, 0))
        digits, _, exponent = parsed.groups()
        has_t = "t" in body
        value = int(digits) if digits is not None else 1
        degree = (int(exponent) if exponent is not None else 1) if has_t else 0
        coeffs[degree] = coeffs.get(degree, 0) + sign * value
    if pos != len(compact):
        raise PolynomialParseError("trailing characters", pos + offset)
    top = max(coeffs) if coeffs else 0
    return IntPolynomial(tuple(coeffs.get(k, 0) for k in range(top + 1)))


def _cross_content(num: IntPolynomial, den: IntPolynomial) -> int:
    return gcd(num.content(), den.content())


@dataclass(frozen=True, eq=False)
class RationalFunction:
    num: IntPolynomial
    den: IntPolynomial

    def __post_init__(self):
        if self.den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        content = _cross_content(self.num, self.den)
        if self.den.coeffs[-1] < 0:
            content = -content
        if content not in (0, 1):
            object.__setattr__(self, "num", IntPolynomial(tuple(c // content for c in self.num.coeffs)))
            object.__setattr__(self, "den", IntPolynomial(tuple(c // content for c in self.den.coeffs)))

    __hash__ = None

    def __eq__(self, other: object) -> bool:
        if isinstance(other, IntPolynomial):
            other = RationalFunction(other, IntPolynomial((1,)))
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num * other.den == other.num * self.den

    def __mul__(self, other: "RationalFunction | IntPolynomial") -> "RationalFunction":
        if isinstance(other, IntPolynomial):
            return RationalFunction(self.num * other, self.den)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    def reduced(self) -> "RationalFunction":
        """Divide out the polynomial gcd of numerator and denominator."""
        common = poly_gcd(self.num, self.den)
        if common.degree < 1:
            return self
        return RationalFunction(self.num.exact_div(common), self.den.exact_div(common))

    def __call__(self, x):
        return self.num(x) / self.den(x)

    def __str__(self) -> str:
        return f"({self.num})/({self.den})"


@dataclass(frozen=True)
class TruncatedSeries:
    coeffs: tuple[Fraction, ...]
    order: int

    def __post_init__(self):
        values = tuple(Fraction(c) for c in self.coeffs)[: self.order + 1]
        values = values + (Fraction(0),) * (self.order + 1 - len(values))
        object.__setattr__(self, "coeffs", values)

    @classmethod
    def zero(cls, order: int) -> "TruncatedSeries":
        return cls((), order)

    @classmethod
    def from_polynomial(cls, p: IntPolynomial, order: int) -> "TruncatedSeries":
        return cls(p.coeffs, order)

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        order = min(self.order, other.order)
        return TruncatedSeries(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), order)

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(tuple(-c for c in self.coeffs), self.order)

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return self + (-other)

    def __mul__(self, other: "TruncatedSeries | int | Fraction") -> "TruncatedSeries":
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries(tuple(c * other for c in self.coeffs), self.order)
        order = min(self.order, other.order)
        out = [Fraction(0)] * (order + 1)
        for i in range(order + 1):
            a = self.coeffs[i]
            if a == 0:
                continue
            for j in range(order + 1 - i):
                out[i + j] += a * other.coeffs[j]
        return TruncatedSeries(tuple(out), order)

    __rmul__ = __mul__

    def __truediv__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        if other.coeffs[0] == 0:
            raise DenominatorVanishesAtZero("series divisor has zero constant term")
        order = min(self.order, other.order)
        out: list[Fraction] = []
        for k in range(order + 1):
            acc = self.coeffs[k] - sum(other.coeffs[j] * out[k - j] for j in range(1, k + 1))
            out.append(acc / other.coeffs[0])
        return TruncatedSeries(tuple(out), order)

    def truncate(self, order: int) -> "TruncatedSeries":
        return TruncatedSeries(self.coeffs, min(order, self.order))

    def is_zero(self) -> bool:
        return not any(self.coeffs)


def series_of_rational(r: RationalFunction, order: int) -> TruncatedSeries:
    num = list(r.num.coeffs)
    den = list(r.den.coeffs)
    while num and den and num[0] == 0 and den[0] == 0:
        num.pop(0)
        den.pop(0)
    if not den or den[0] == 0:
        raise DenominatorVanishesAtZero(f"denominator of {r} vanishes at t = 0")
    numerator = TruncatedSeries(tuple(num), order)
    denominator = TruncatedSeries(tuple(den), order)
    return numerator / denominator


# --- Root isolation ---


def square_free_part(p: IntPolynomial) -> IntPolynomial:
    if p.degree < 1:
        return p
    return IntPolynomial.from_sympy(p.as_sympy().sqf_part()).primitive()


def _rational(x) -> sympy.Rational:
    if isinstance(x, Fraction):
        return sympy.Rational(x.numerator, x.denominator)
    return sympy.Rational(x)


def _without_root_at(q: sympy.Poly, value: int) -> sympy.Poly:
    # q is square-free, so the factor appears at most once.
    if q.degree() >= 1 and q.eval(value) == 0:
        return q.exquo(sympy.Poly(T - value, T, domain=sympy.ZZ))
    return q


def sturm_chain(q: sympy.Poly) -> list[sympy.Poly]:
    return q.sturm()


def _variations(chain: list[sympy.Poly], x: sympy.Rational) -> int:
    signs = [v > 0 for v in (c.eval(x) for c in chain) if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _least_root(q: sympy.Poly, lo: sympy.Rational, hi: sympy.Rational, tol: float) -> float:
    """Bisection keeping (lo, hi] around the least root, with none in (0, lo]."""
    chain = sturm_chain(q)
    v_lo = _variations(chain, lo)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        v_mid = _variations(chain, mid)
        if v_lo - v_mid >= 1:
            if v_lo - v_mid == 1 and q.eval(mid) == 0:
                return float(mid)
            hi = mid
        else:
            lo, v_lo = mid, v_mid
    if q.eval(hi) == 0:
        return float(hi)
    return float((lo + hi) / 2)


def count_roots(p: IntPolynomial, lo: Fraction, hi: Fraction) -> int:
    """Distinct real roots in the half-open interval (lo, hi]."""
    q = square_free_part(p)
    if q.degree < 1:
        return 0
    poly = q.as_sympy()
    lo, hi = _rational(lo), _rational(hi)
    return poly.count_roots(lo, hi) - (1 if poly.eval(lo) == 0 else 0)


def least_root_in_unit_interval(p: IntPolynomial, tol: float | None = None) -> float | None:
    tol = tol if tol is not None else settings.root_tolerance
    if p.is_zero():
        raise ValueError("the zero polynomial has no isolated roots")
    q = square_free_part(p)
    if q.degree < 1:
        return None
    poly = _without_root_at(_without_root_at(q.as_sympy(), 0), 1)
    if poly.degree() < 1 or poly.count_roots(0, 1) == 0:
        return None
    return _least_root(poly, sympy.Integer(0), sympy.Integer(1), tol)


def least_positive_root(p: IntPolynomial, tol: float | None = None) -> float | None:
    """Least root in (0, inf), searched first in (0, 1] and then by doubling."""
    tol = tol if tol is not None else settings.root_tolerance
    q = square_free_part(p)
    if q.degree < 1:
        return None
    poly = _without_root_at(q.as_sympy(), 0)
    if poly.degree() < 1 or poly.count_roots(0, None) == 0:
        return None
    lo, hi = sympy.Integer(0), sympy.Integer(1)
    while poly.count_roots(lo, hi) == 0:
        lo, hi = hi, hi * 2
    return _least_root(poly, lo, hi, tol)


# --- Integer matrices ---


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise DimensionMismatch(
                f"{len(self.entries)} entries for a {self.rows}x{self.cols} matrix"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "IntMatrix":
        n_cols = len(rows[0]) if rows else 0
        if any(len(r) != n_cols for r in rows):
            raise DimensionMismatch("ragged rows")
        return cls(len(rows), n_cols, tuple(int(v) for r in rows for v in r))

    @classmethod
    def from_array(cls, array: np.ndarray) -> "IntMatrix":
        return cls.from_rows([[int(v) for v in row] for row in array])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(1 if i == j else 0 for i in range(n) for j in range(n)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, index: tuple[int, int]) -> int:
        i, j = index
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def to_rows(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def as_array(self) -> np.ndarray:
        return np.array(self.to_rows(), dtype=object).reshape(self.rows, self.cols)

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, tuple(v for j in range(self.cols) for v in self.column(j)))

    @property
    def T(self) -> "IntMatrix":
        return self.transpose()

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        return IntMatrix.from_array(self.as_array() @ other.as_array())

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if self.shape != other.shape:
            raise DimensionMismatch(f"cannot add {self.shape} and {other.shape}")
        return IntMatrix(self.rows, self.cols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, tuple(-a for a in self.entries))

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self + (-other)

    def __pow__(self, exponent: int) -> "IntMatrix":
        if self.rows != self.cols:
            raise NotSquare(f"matrix power of a {self.rows}x{self.cols} matrix")
        result = IntMatrix.identity(self.rows)
        for _ in range(exponent):
            result = result @ self
        return result

    def hstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.rows != other.rows:
            raise DimensionMismatch(f"cannot stack {self.shape} beside {other.shape}")
        return IntMatrix.from_rows([list(self.row(i)) + list(other.row(i)) for i in range(self.rows)])

    def is_permutation(self) -> bool:
        if self.rows != self.cols or any(v not in (0, 1) for v in self.entries):
            return False
        return all(sum(self.row(i)) == 1 for i in range(self.rows)) and all(
            sum(self.column(j)) == 1 for j in range(self.cols)
        )

    def is_zero(self) -> bool:
        return not any(self.entries)

    def __str__(self) -> str:
        return "\n".join(" ".join(str(v) for v in self.row(i)) for i in range(self.rows))


def char_poly_det_I_minus_tM(m: IntMatrix) -> IntPolynomial:
    """det(I - tM) from the Berkowitz characteristic polynomial.

    Berkowitz is division-free, so the integer coefficients stay exact. The
    descending coefficients of det(xI - M) are the ascending ones of det(I - tM).
    """
    if m.rows != m.cols:
        raise NotSquare(f"char poly of a {m.rows}x{m.cols} matrix")
    if m.rows == 0:
        return IntPolynomial((1,))
    char = sympy.Matrix(m.to_rows()).charpoly(T)
    return IntPolynomial(tuple(int(c) for c in char.all_coeffs()))


def rational_rank(m: IntMatrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    return int(sympy.Matrix(m.to_rows()).rank())


def column_space_equal(a: IntMatrix, b: IntMatrix) -> bool:
    if a.rows != b.rows:
        raise DimensionMismatch(f"column spaces in R^{a.rows} and R^{b.rows}")
    rank_a = rational_rank(a)
    return rank_a == rational_rank(b) == rational_rank(a.hstack(b))
