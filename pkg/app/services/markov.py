import logging
from dataclasses import dataclass
from functools import cmp_to_key

from app.config import settings
from app.core.exceptions import NotAdmissible, NotMarkovForm
from app.services.poly import IntMatrix, char_poly_det_I_minus_tM, least_positive_root
from app.services.symbolic import (
    PeriodicSequence,
    compare,
    is_admissible,
    is_markov_form,
    require_distinct_orbit,
    shift,
    tau,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OrbitTable:
    """Orbit itineraries v, their symbolic order w = pi v and the rank map.

    Indices are 0-based: v[0] = sigma^(p-1) S (the point c2, address B),
    v[1] = S (the point +a), and v[p:] repeats the pattern for tau(S).
    order[k] is the v-index of the k-th smallest point and rank inverts it.
    """

    p: int
    v: tuple[PeriodicSequence, ...]
    order: tuple[int, ...]
    rank: tuple[int, ...]
    pi: IntMatrix

    @property
    def w(self) -> tuple[PeriodicSequence, ...]:
        return tuple(self.v[j] for j in self.order)

    def successor(self, j: int) -> int:
        """v-index of F applied to the point v[j] (a shift within its block)."""
        block = j // self.p * self.p
        return block + (j - block + 1) % self.p

    @property
    def c1(self) -> int:
        return self.p

    @property
    def c2(self) -> int:
        return 0

    @property
    def plus_a(self) -> int:
        return 1

    @property
    def minus_a(self) -> int:
        return self.p + 1

    def kneading_rows(self) -> dict[str, list[str]]:
        return {"v": [str(x) for x in self.v], "w": [str(x) for x in self.w]}


@dataclass(frozen=True)
class TransitionMatrix:
    psi: IntMatrix

    @property
    def dimension(self) -> int:
        return self.psi.rows


def build_orbit_table(s: PeriodicSequence, allow_interior_discontinuity: bool = False) -> OrbitTable:
    """Order the 2p orbit points of c2 and -c2 by their itineraries.

    With allow_interior_discontinuity, A or B may also occur inside S; such
    an orbit meets c1 or c2 early and every hit still gets its own slot.
    """
    if not is_markov_form(s, allow_interior_discontinuity):
        raise NotMarkovForm(f"({s})^inf must start with R, end with B and avoid A/B inside")
    if not is_admissible(s):
        raise NotAdmissible(f"({s})^inf is not admissible")
    require_distinct_orbit(s)

    p = s.period
    mirrored = tau(s)
    v = tuple(shift(s, j - 1) for j in range(p)) + tuple(shift(mirrored, j - 1) for j in range(p))
    order = tuple(sorted(range(2 * p), key=cmp_to_key(lambda i, j: compare(v[i], v[j]).value)))
    rank = [0] * (2 * p)
    for position, j in enumerate(order):
        rank[j] = position
    pi = IntMatrix.from_rows([[1 if j == order[k] else 0 for j in range(2 * p)] for k in range(2 * p)])
    logger.debug("Orbit order for %s: %s", s, [str(v[j]) for j in order])
    return OrbitTable(p=p, v=v, order=order, rank=tuple(rank), pi=pi)


def transition_matrix(tbl: OrbitTable) -> TransitionMatrix:
    """psi[k][j] = 1 iff I_j lies in F(I_k), with I_k = (w_k, w_k+1).

    Every branch decreases, so F(I_k) runs from the image of its right
    endpoint up to the image of its left endpoint. A left endpoint at c1
    maps to +a and a right endpoint at c2 maps to -a.
    """
    n = 2 * tbl.p - 1
    rows = []
    for k in range(n):
        left, right = tbl.order[k], tbl.order[k + 1]
        image_left = tbl.plus_a if left == tbl.c1 else tbl.successor(left)
        image_right = tbl.minus_a if right == tbl.c2 else tbl.successor(right)
        lo, hi = tbl.rank[image_right], tbl.rank[image_left]
        rows.append([1 if lo <= j < hi else 0 for j in range(n)])
    return TransitionMatrix(IntMatrix.from_rows(rows))


def is_symmetric_transition(psi: TransitionMatrix) -> bool:
    """The tau-mirror I_k <-> I_(2p-k) leaves psi invariant."""
    n = psi.dimension
    return all(psi.psi[n - 1 - i, n - 1 - j] == psi.psi[i, j] for i in range(n) for j in range(n))


def has_contiguous_rows(psi: TransitionMatrix) -> bool:
    for i in range(psi.dimension):
        ones = [j for j, v in enumerate(psi.psi.row(i)) if v]
        if not ones or ones[-1] - ones[0] + 1 != len(ones):
            return False
    return True


def spectral_radius(psi: TransitionMatrix, tol: float | None = None) -> float:
    tol = tol if tol is not None else settings.root_tolerance
    t_star = least_positive_root(char_poly_det_I_minus_tM(psi.psi), tol)
    if t_star is None:
        return 0.0
    return 1.0 / t_star
