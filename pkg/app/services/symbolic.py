import itertools
import logging
import re
from dataclasses import dataclass
from enum import Enum
from functools import cmp_to_key
from math import lcm
from typing import Iterable, Iterator, Sequence

from app.config import settings
from app.core.exceptions import (
    DuplicateItineraries,
    NotAdmissible,
    PeriodTooLarge,
    SequenceParseError,
)

logger = logging.getLogger(__name__)


class Symbol(str, Enum):
    L = "L"
    A = "A"
    M = "M"
    B = "B"
    R = "R"

    @property
    def order_index(self) -> int:
        return _ORDER_INDEX[self]

    def __str__(self) -> str:
        return self.value


_ORDER_INDEX = {Symbol.L: 0, Symbol.A: 1, Symbol.M: 2, Symbol.B: 3, Symbol.R: 4}
_TAU = {Symbol.L: Symbol.R, Symbol.A: Symbol.B, Symbol.M: Symbol.M, Symbol.B: Symbol.A, Symbol.R: Symbol.L}
_PHI = {Symbol.L: -1, Symbol.A: -1, Symbol.M: 0, Symbol.B: 1, Symbol.R: 1}

ALPHABET = (Symbol.L, Symbol.A, Symbol.M, Symbol.B, Symbol.R)
MARKOV_INTERIOR = (Symbol.L, Symbol.M, Symbol.R)


class Ordering(int, Enum):
    LT = -1
    EQ = 0
    GT = 1


@dataclass(frozen=True)
class Word:
    symbols: tuple[Symbol, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "Word":
        symbols = []
        for i, ch in enumerate(text):
            try:
                symbols.append(Symbol(ch))
            except ValueError:
                raise SequenceParseError(f"invalid symbol '{ch}'", i) from None
        return cls(tuple(symbols))

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[Symbol]:
        return iter(self.symbols)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return Word(self.symbols[index])
        return self.symbols[index]

    def __add__(self, other: "Word") -> "Word":
        return Word(self.symbols + other.symbols)

    def __str__(self) -> str:
        return "".join(s.value for s in self.symbols)


@dataclass(frozen=True)
class PeriodicSequence:
    word: Word

    def __post_init__(self):
        if len(self.word) < 1:
            raise ValueError("a periodic sequence needs a period word of length >= 1")

    @classmethod
    def parse(cls, text: str) -> "PeriodicSequence":
        return parse_sequence(text)

    @property
    def period(self) -> int:
        return len(self.word)

    def __getitem__(self, k: int) -> Symbol:
        return self.word.symbols[k % self.period]

    def prefix(self, n: int) -> Word:
        return Word(tuple(self[k] for k in range(n)))

    def __str__(self) -> str:
        return str(self.word)


@dataclass(frozen=True)
class KneadingPair:
    S: PeriodicSequence
    tauS: PeriodicSequence


def parse_sequence(text: str) -> PeriodicSequence:
    """Parse `RMB`, `RMB^inf` or `(RMB)^inf` into a periodic sequence."""
    stripped = text.strip()
    lead = len(text) - len(text.lstrip())
    body = re.sub(r"\^inf$", "", stripped)
    if body.startswith("(") and body.endswith(")"):
        body = body[1:-1]
        lead += 1
    if not body:
        raise SequenceParseError("empty sequence", lead)
    try:
        word = Word.parse(body)
    except SequenceParseError as e:
        raise SequenceParseError(f"invalid symbol '{body[e.position]}'", lead + e.position) from None
    return PeriodicSequence(word)


def _as_sequence(text_or_seq: "str | PeriodicSequence") -> PeriodicSequence:
    if isinstance(text_or_seq, PeriodicSequence):
        return text_or_seq
    return parse_sequence(text_or_seq)


def tau(s):
    if isinstance(s, Symbol):
        return _TAU[s]
    if isinstance(s, Word):
        return Word(tuple(_TAU[x] for x in s.symbols))
    if isinstance(s, PeriodicSequence):
        return PeriodicSequence(tau(s.word))
    raise TypeError(f"tau is not defined for {type(s).__name__}")


def shift(s: PeriodicSequence, k: int = 1) -> PeriodicSequence:
    k %= s.period
    symbols = s.word.symbols
    return PeriodicSequence(Word(symbols[k:] + symbols[:k]))


def shift_word(w: Word) -> Word:
    if not w.symbols:
        return w
    return Word(w.symbols[1:] + w.symbols[:1])


def parity(w: Word) -> int:
    return -1 if len(w) % 2 else 1


def phi(x: Symbol) -> int:
    return _PHI[x]


def _signed_lex(a: Sequence[Symbol], b: Sequence[Symbol], horizon: int) -> Ordering:
    for k in range(horizon):
        x, y = a[k], b[k]
        if x != y:
            result = Ordering.LT if x.order_index < y.order_index else Ordering.GT
            # An odd common prefix reverses the comparison.
            if k % 2:
                result = Ordering(-result.value)
            return result
    return Ordering.EQ


def compare(p: PeriodicSequence, q: PeriodicSequence) -> Ordering:
    return _signed_lex(p, q, 2 * lcm(p.period, q.period))


def compare_words(a: Word, b: Word) -> Ordering:
    """Signed order on finite itineraries, EQ when one is a prefix of the other."""
    return _signed_lex(a.symbols, b.symbols, min(len(a), len(b)))


def sort_sequences(items: Iterable[PeriodicSequence]) -> list[PeriodicSequence]:
    return sorted(items, key=cmp_to_key(lambda x, y: compare(x, y).value))


def is_admissible(s: PeriodicSequence) -> bool:
    mirrored = tau(s)
    for k in range(s.period):
        shifted = shift(s, k)
        if compare(mirrored, shifted) == Ordering.GT or compare(shifted, s) == Ordering.GT:
            return False
    return True


def is_bistable(s: PeriodicSequence) -> bool:
    if s.period % 2:
        return False
    half = s.period // 2
    return s.word[half:] == tau(s.word[:half])


def is_markov_form(s: PeriodicSequence, allow_interior_discontinuity: bool = False) -> bool:
    symbols = s.word.symbols
    if s.period < 2 or symbols[0] != Symbol.R or symbols[-1] != Symbol.B:
        return False
    if allow_interior_discontinuity:
        return True
    return all(x in MARKOV_INTERIOR for x in symbols[1:-1])


def orbit_sequences(s: PeriodicSequence) -> list[PeriodicSequence]:
    """The 2p sequences sigma^k S and sigma^k tau(S), k = 0..p-1."""
    mirrored = tau(s)
    return [shift(s, k) for k in range(s.period)] + [shift(mirrored, k) for k in range(s.period)]


def has_distinct_orbit(s: PeriodicSequence) -> bool:
    return len(set(orbit_sequences(s))) == 2 * s.period


def kneading_pair(s: "str | PeriodicSequence") -> KneadingPair:
    s = _as_sequence(s)
    if not is_admissible(s):
        raise NotAdmissible(f"({s})^inf is not admissible")
    return KneadingPair(S=s, tauS=tau(s))


def require_distinct_orbit(s: PeriodicSequence) -> None:
    if is_bistable(s) or not has_distinct_orbit(s):
        raise DuplicateItineraries(f"the orbit of ({s})^inf repeats an itinerary")


def enumerate_admissible(
    p: int,
    require_markov_form: bool,
    allow_interior_discontinuity: bool = False,
) -> list[PeriodicSequence]:
    if p < 1:
        raise ValueError("period must be at least 1")
    if p > settings.max_period:
        raise PeriodTooLarge(f"period {p} exceeds MAX_PERIOD={settings.max_period}")

    if require_markov_form:
        if p < 2:
            return []
        interior = ALPHABET if allow_interior_discontinuity else MARKOV_INTERIOR
        candidates = (
            (Symbol.R,) + middle + (Symbol.B,)
            for middle in itertools.product(interior, repeat=p - 2)
        )
    else:
        candidates = itertools.product(ALPHABET, repeat=p)

    found: list[PeriodicSequence] = []
    for symbols in candidates:
        # S dominates all its shifts, so its first symbol is its largest.
        if max(x.order_index for x in symbols) != symbols[0].order_index:
            continue
        s = PeriodicSequence(Word(tuple(symbols)))
        if not is_admissible(s):
            continue
        if require_markov_form and (is_bistable(s) or not has_distinct_orbit(s)):
            continue
        found.append(s)

    found.sort(key=lambda s: [x.order_index for x in s.word])
    logger.debug("Period %d: %d admissible sequences", p, len(found))
    return found
