import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from app.config import load_families, settings
from app.core.exceptions import (
    AtDiscontinuity,
    BisectionFailure,
    OrbitEscapedDomain,
    UnknownFamily,
)
from app.models.schemas import FamilyValidation
from app.services.symbolic import PeriodicSequence, Symbol, Word

logger = logging.getLogger(__name__)

HALF_PI = math.pi / 2


def u_step(x: float) -> int:
    if x >= 0.5:
        return 1
    if x <= -0.5:
        return -1
    return 0


def eval_g_beta(x: float, beta: float) -> float:
    if abs(x) == HALF_PI:
        raise AtDiscontinuity(f"g_beta is discontinuous at x = {x}")
    return -beta * math.tanh(beta * math.tan(x))


def eval_G_alpha(x: float, alpha: float) -> float:
    if abs(x) == 0.5:
        raise AtDiscontinuity(f"G_alpha is discontinuous at x = {x}")
    if math.isinf(x):
        return -alpha if x > 0 else alpha
    return x / (4 * x * x - 1) - alpha * u_step(x)


class MapFamily(ABC):
    """An odd map on (-a, a), decreasing on three laps split by c1 = -c2."""

    name: str = ""
    parameter_name: str = ""

    def __init__(self, parameter: float):
        self.parameter = float(parameter)

    @property
    @abstractmethod
    def a(self) -> float: ...

    @property
    @abstractmethod
    def c2(self) -> float: ...

    @abstractmethod
    def branch(self, x: float) -> float:
        """Raw evaluation off the discontinuities."""

    @abstractmethod
    def evaluate_many(self, xs: np.ndarray) -> np.ndarray: ...

    @property
    def c1(self) -> float:
        return -self.c2

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.a)

    @property
    def b(self) -> float:
        return self.branch(self.a)

    def apply(self, x: float) -> float:
        """F with the conventions F(c1) = -a and F(c2) = +a."""
        if x == self.c2:
            return self.a
        if x == self.c1:
            return -self.a
        if x >= self.a:
            return self.b
        if x <= -self.a:
            return -self.b
        return self.branch(x)

    def with_parameter(self, value: float) -> "MapFamily":
        return type(self)(value)

    def describe(self) -> dict:
        return {"family": self.name, self.parameter_name: self.parameter}

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.parameter_name}={self.parameter})"


class GBetaMap(MapFamily):
    """x -> -beta tanh(beta tan x) on (-beta, beta), pi/2 < beta < 3pi/2."""

    name = "g_beta"
    parameter_name = "beta"

    @property
    def a(self) -> float:
        return self.parameter

    @property
    def c2(self) -> float:
        return HALF_PI

    def branch(self, x: float) -> float:
        return eval_g_beta(x, self.parameter)

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        return -self.parameter * np.tanh(self.parameter * np.tan(xs))


class GAlphaMap(MapFamily):
    """x -> x/(4x^2 - 1) - alpha u(x) on the whole line (a = +inf)."""

    name = "G_alpha"
    parameter_name = "alpha"

    @property
    def a(self) -> float:
        return math.inf

    @property
    def c2(self) -> float:
        return 0.5

    @property
    def b(self) -> float:
        return -self.parameter

    def branch(self, x: float) -> float:
        return eval_G_alpha(x, self.parameter)

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        steps = np.where(xs >= 0.5, 1.0, np.where(xs <= -0.5, -1.0, 0.0))
        return xs / (4 * xs * xs - 1) - self.parameter * steps


class ConjugatedMap(MapFamily):
    """h o F o h^-1 with h = arctan, bounded on (-pi/2, pi/2)."""

    def __init__(self, inner: MapFamily):
        self.inner = inner
        super().__init__(inner.parameter)
        self.name = inner.name
        self.parameter_name = inner.parameter_name

    @property
    def a(self) -> float:
        return HALF_PI

    @property
    def c2(self) -> float:
        return math.atan(self.inner.c2)

    @property
    def b(self) -> float:
        return math.atan(self.inner.b)

    def branch(self, x: float) -> float:
        if x >= HALF_PI:
            return self.b
        if x <= -HALF_PI:
            return -self.b
        return math.atan(self.inner.branch(math.tan(x)))

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        return np.arctan(self.inner.evaluate_many(np.tan(xs)))

    def with_parameter(self, value: float) -> "ConjugatedMap":
        return ConjugatedMap(self.inner.with_parameter(value))

    def __repr__(self) -> str:
        return f"ConjugatedMap({self.inner!r})"


FAMILIES: dict[str, type[MapFamily]] = {"g_beta": GBetaMap, "G_alpha": GAlphaMap}


def conjugate_to_bounded(m: MapFamily) -> MapFamily:
    return m if m.bounded else ConjugatedMap(m)


def family_from_params(params: dict) -> MapFamily:
    """Build a family from `{"family": "g_beta", "beta": 3.1588}`."""
    name = params.get("family")
    if name not in FAMILIES:
        raise UnknownFamily(f"Unknown family '{name}'. Known: {', '.join(FAMILIES)}")
    spec = load_families().get(name, {})
    key = FAMILIES[name].parameter_name
    value = params.get(key, spec.get("default"))
    if value is None:
        raise UnknownFamily(f"Family '{name}' needs a '{key}' parameter")
    return FAMILIES[name](float(value))


def validate_family(m: MapFamily, samples: int = 1000, tol: float = 1e-9) -> FamilyValidation:
    """Sampled checks of oddness, decreasing branches and one-sided limits."""
    f = conjugate_to_bounded(m)
    a, c1, c2 = f.a, f.c1, f.c2
    margin = 1e-6
    laps = [(-a, c1), (c1, c2), (c2, a)]
    decreasing = True
    oddness = 0.0
    for lo, hi in laps:
        xs = np.linspace(lo + margin, hi - margin, samples)
        ys = f.evaluate_many(xs)
        decreasing = decreasing and bool(np.all(np.diff(ys) <= 0))
        oddness = max(oddness, float(np.max(np.abs(f.evaluate_many(-xs) + ys))))

    delta = 1e-10
    limit_tol = 1e-6
    probes = np.array([c1 - delta, c1 + delta, c2 - delta, c2 + delta])
    expected = np.array([-a, a, -a, a])
    limits = bool(np.all(np.abs(f.evaluate_many(probes) - expected) <= limit_tol))
    return FamilyValidation(
        family=m.name,
        parameter=m.parameter,
        odd=oddness <= tol,
        decreasing=decreasing,
        limits=limits,
        max_oddness_error=oddness,
    )


# --- Itineraries ---


def _address(m: MapFamily, x: float, eps: float) -> Symbol:
    snap = eps * abs(m.c2)
    if abs(x - m.c2) <= snap:
        return Symbol.B
    if abs(x - m.c1) <= snap:
        return Symbol.A
    if x > m.c2:
        return Symbol.R
    if x < m.c1:
        return Symbol.L
    return Symbol.M


def _advance(m: MapFamily, x: float, symbol: Symbol) -> float:
    if symbol == Symbol.B:
        return m.a
    if symbol == Symbol.A:
        return -m.a
    return m.apply(x)


def _check_domain(m: MapFamily, x: float) -> None:
    if math.isnan(x):
        raise OrbitEscapedDomain("orbit produced NaN")
    if m.bounded and abs(x) > m.a + settings.escape_eps * max(1.0, m.a):
        raise OrbitEscapedDomain(f"orbit point {x} left (-{m.a}, {m.a})")


def numeric_itinerary(m: MapFamily, x0: float, n: int, eps: float | None = None) -> Word:
    eps = eps if eps is not None else settings.discontinuity_eps
    x = x0
    symbols = []
    for _ in range(n):
        _check_domain(m, x)
        symbol = _address(m, x, eps)
        symbols.append(symbol)
        x = _advance(m, x, symbol)
    return Word(tuple(symbols))


@dataclass(frozen=True)
class KneadingDetection:
    word: Word
    periodic: bool

    @property
    def period(self) -> int | None:
        return len(self.word) if self.periodic else None

    @property
    def sequence(self) -> PeriodicSequence | None:
        return PeriodicSequence(self.word) if self.periodic else None


def _quantize(x: float, quantum: float):
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return round(x / quantum)


def detect_kneading(m: MapFamily, n_max: int | None = None, eps: float | None = None) -> KneadingDetection:
    """Itinerary of +a with cycle detection on quantized orbit states."""
    n_max = n_max if n_max is not None else settings.kneading_horizon
    eps = eps if eps is not None else settings.discontinuity_eps
    seen: dict = {}
    symbols: list[Symbol] = []
    x = m.a
    for step in range(n_max):
        key = _quantize(x, settings.cycle_quantum)
        if key in seen:
            start = seen[key]
            if start != 0:
                logger.warning("%r: orbit of +a is preperiodic (enters a cycle at step %d)", m, start)
                break
            candidate = Word(tuple(symbols[:step]))
            raw = numeric_itinerary(m, m.a, min(n_max, 4 * step), eps)
            if all(raw[k] == candidate[k % step] for k in range(len(raw))):
                return KneadingDetection(candidate, periodic=True)
            logger.warning("%r: cycle of length %d is not symbolically consistent", m, step)
            break
        seen[key] = step
        _check_domain(m, x)
        symbol = _address(m, x, eps)
        symbols.append(symbol)
        x = _advance(m, x, symbol)
    return KneadingDetection(Word(tuple(symbols)), periodic=False)


def realizing_parameter(
    m: MapFamily,
    lo: float,
    hi: float,
    steps: int = 2,
    iterations: int = 200,
) -> float:
    """Parameter in [lo, hi] at which F^steps(+a) = c2, found by bisection."""

    def miss(value: float) -> float:
        f = conjugate_to_bounded(m.with_parameter(value))
        x = f.a
        for _ in range(steps):
            x = f.apply(x)
        return x - f.c2

    f_lo, f_hi = miss(lo), miss(hi)
    if f_lo * f_hi > 0:
        raise BisectionFailure(f"no sign change of F^{steps}(+a) - c2 on [{lo}, {hi}]")
    for _ in range(iterations):
        mid = (lo + hi) / 2
        if mid in (lo, hi):
            break
        f_mid = miss(mid)
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return (lo + hi) / 2


def tangent_orbit(beta: float, x0: float, n: int) -> list[float]:
    """Alternating orbit of y -> beta tan y and y -> -beta tanh y.

    Even entries are the orbit of g_beta; odd entries are the tangent-family images.
    """
    orbit = [x0]
    for k in range(n):
        x = orbit[-1]
        orbit.append(beta * math.tan(x) if k % 2 == 0 else -beta * math.tanh(x))
    return orbit


# --- Lap counting ---


@dataclass(frozen=True)
class Lap:
    left: float
    right: float
    f_left: float
    f_right: float
    point: bool = False


@dataclass
class LapStructure:
    family: str
    parameter: float
    depth: int
    laps: list[Lap]
    coincidences: int = 0
    history: list[int] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.laps)

    @property
    def point_laps(self) -> int:
        return sum(1 for lap in self.laps if lap.point)

    @property
    def breakpoints(self) -> list[float]:
        return [lap.right for lap in self.laps[:-1] if not lap.point]


def _iterate(f: MapFamily, x: float, k: int) -> float:
    for _ in range(k):
        x = f.apply(x)
    return x


class LapPropagator:
    """Builds the laps of F, F^2, ..., F^n of a bounded map, one depth at a time.

    Lap images are carried as endpoint values with the side they are
    approached from. An image endpoint landing exactly on c2 from below (or
    on c1 from above) is a point where the next iterate jumps away from its
    one-sided limit; that point becomes a lap of its own and its orbit is
    carried exactly with F(c1) = -a and F(c2) = +a.
    """

    def __init__(self, f: MapFamily, snap: float, locate: bool = True):
        self.f = f
        self.snap = snap
        self.locate = locate

    def _hit(self, value: float) -> int:
        """+1 near c2, -1 near c1, 0 elsewhere."""
        if abs(value - self.f.c2) <= self.snap:
            return 1
        if abs(value - self.f.c1) <= self.snap:
            return -1
        return 0

    def _point_image(self, value: float) -> float:
        hit = self._hit(value)
        if hit:
            return hit * self.f.a
        return self.f.apply(value)

    def _one_sided_image(self, value: float, side: int) -> float:
        """Limit of F at `value` approached from above (side +1) or below (side -1)."""
        f = self.f
        if self._hit(value):
            return f.a if side > 0 else -f.a
        if value >= f.a:
            return f.b
        if value <= -f.a:
            return -f.b
        return f.apply(value)

    def _locate(self, lap: Lap, lo: float, depth: int, target: float) -> float:
        increasing = lap.f_right > lap.f_left
        hi = lap.right
        for _ in range(200):
            mid = (lo + hi) / 2
            if mid in (lo, hi):
                break
            value = _iterate(self.f, mid, depth)
            if not math.isfinite(value):
                raise BisectionFailure(f"non-finite value on lap ({lap.left}, {lap.right})")
            if (value < target) == increasing:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2

    def refine(self, laps: list[Lap], depth: int) -> tuple[list[Lap], int]:
        """Laps of F^(depth+1) from the laps of F^depth, with the coincidence count."""
        f = self.f
        refined: list[Lap] = []
        coincidences = 0
        for lap in laps:
            if lap.point:
                value = self._point_image(lap.f_left)
                refined.append(Lap(lap.left, lap.right, value, value, point=True))
                continue

            increasing = lap.f_right > lap.f_left
            low, high = sorted((lap.f_left, lap.f_right))
            cuts = []
            lead: Lap | None = None
            tail: Lap | None = None
            for c in (f.c1, f.c2):
                at_low, at_high = abs(c - low) <= self.snap, abs(c - high) <= self.snap
                if not (at_low or at_high):
                    if low < c < high:
                        cuts.append(c)
                    continue
                coincidences += 1
                if (c == f.c2 and at_high) or (c == f.c1 and at_low):
                    x = lap.right if at_high == increasing else lap.left
                    value = self._point_image(c)
                    if x == lap.right:
                        tail = Lap(x, x, value, value, point=True)
                    else:
                        lead = Lap(x, x, value, value, point=True)
            cuts.sort(reverse=not increasing)

            if lead is not None:
                refined.append(lead)
            before, after = (-1, 1) if increasing else (1, -1)
            x_left, v_left, s_left = lap.left, lap.f_left, after
            for c in cuts:
                x_cut = self._locate(lap, x_left, depth, c) if self.locate else math.nan
                refined.append(
                    Lap(x_left, x_cut, self._one_sided_image(v_left, s_left), self._one_sided_image(c, before))
                )
                x_left, v_left, s_left = x_cut, c, after
            refined.append(
                Lap(x_left, lap.right, self._one_sided_image(v_left, s_left), self._one_sided_image(lap.f_right, before))
            )
            if tail is not None:
                refined.append(tail)
        return refined, coincidences

    def run(self, n: int) -> tuple[list[Lap], int, list[int]]:
        laps = [Lap(-self.f.a, self.f.a, -self.f.a, self.f.a)]
        coincidences = 0
        history = []
        for depth in range(n):
            laps, hits = self.refine(laps, depth)
            coincidences += hits
            history.append(len(laps))
        return laps, coincidences, history


def lap_structure(
    m: MapFamily,
    n: int,
    eps: float | None = None,
    locate_breakpoints: bool = True,
) -> LapStructure:
    if n < 1:
        raise ValueError("lap structure needs n >= 1")
    eps = eps if eps is not None else settings.discontinuity_eps
    f = conjugate_to_bounded(m)
    snap = eps * abs(f.c2)
    laps, coincidences, history = LapPropagator(f, snap, locate_breakpoints).run(n)
    structure = LapStructure(m.name, m.parameter, n, laps, coincidences, history=history)
    if coincidences:
        logger.warning(
            "%r: %d lap image endpoints coincide with a discontinuity; %d point laps carried exactly",
            m, coincidences, structure.point_laps,
        )
    return structure


def lap_count(m: MapFamily, n: int, eps: float | None = None) -> int:
    return lap_structure(m, n, eps, locate_breakpoints=False).count


def lap_counts(m: MapFamily, n: int, eps: float | None = None) -> list[int]:
    """Lap numbers of F, F^2, ..., F^n from one propagation."""
    return lap_structure(m, n, eps, locate_breakpoints=False).history


def growth_from_laps(counts: list[int]) -> float:
    return counts[-1] ** (1.0 / len(counts))
