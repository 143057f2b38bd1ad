import logging
from dataclasses import dataclass

from app.config import settings
from app.core.exceptions import NotMarkovForm
from app.models.schemas import Counterexample, IdentityChecks, VerificationReport
from app.services.kneading import growth_number, kneading_determinant, oracle_agrees
from app.services.markov import (
    OrbitTable,
    TransitionMatrix,
    build_orbit_table,
    spectral_radius,
    transition_matrix,
)
from app.services.poly import (
    IntMatrix,
    IntPolynomial,
    RationalFunction,
    char_poly_det_I_minus_tM,
    column_space_equal,
    rational_rank,
)
from app.services.symbolic import PeriodicSequence, is_markov_form, phi, tau

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HomologyData:
    p: int
    table: OrbitTable
    mu: IntMatrix
    omega: IntMatrix
    pi: IntMatrix
    eta: IntMatrix
    s: tuple[int, ...]
    Gamma: IntMatrix
    gamma: IntMatrix
    Theta: IntMatrix
    boundary: IntMatrix
    boundary_s: IntMatrix


def _delta(i: int, j: int) -> int:
    return 1 if i == j else 0


def build_mu(p: int) -> IntMatrix:
    if p < 1:
        raise ValueError("period must be at least 1")
    n = 2 * p
    # 1-based Kronecker formula; row p cancels to zero.
    rows = [
        [
            _delta(i + 1, j) - _delta(i, j) - _delta(n + 1 - i, j) + _delta(n - i, j)
            for j in range(1, n + 1)
        ]
        for i in range(1, n)
    ]
    return IntMatrix.from_rows(rows)


def _cyclic_shift(p: int) -> list[list[int]]:
    return [[1 if j == (i + 1) % p else 0 for j in range(p)] for i in range(p)]


def build_omega(p: int) -> IntMatrix:
    sigma = _cyclic_shift(p)
    rows = [row + [0] * p for row in sigma] + [[0] * p + row for row in sigma]
    return IntMatrix.from_rows(rows)


def build_eta(mu: IntMatrix, pi: IntMatrix) -> IntMatrix:
    return mu @ pi


def _phi_vector(symbols) -> tuple[int, ...]:
    # Read from S_0 = S_p, the address just before +a.
    rotated = symbols[-1:] + symbols[:-1]
    head = tuple(phi(x) for x in rotated)
    return head + tuple(-v for v in head)


def build_s_vector(s: PeriodicSequence, allow_interior_discontinuity: bool = False) -> tuple[int, ...]:
    if not is_markov_form(s, allow_interior_discontinuity):
        raise NotMarkovForm(f"({s})^inf must start with R and end with B")
    return _phi_vector(s.word.symbols)


def mirrored_s_vector(s: PeriodicSequence) -> tuple[int, ...]:
    """s(tau S), built the same way from the itinerary of -a."""
    return _phi_vector(tau(s).word.symbols)


def swap_halves(vector: tuple[int, ...]) -> tuple[int, ...]:
    half = len(vector) // 2
    return vector[half:] + vector[:half]


def build_boundaries(tbl: OrbitTable) -> tuple[IntMatrix, IntMatrix]:
    n = 2 * tbl.p
    boundary = [[0] * (n - 1) for _ in range(n)]
    for k in range(n - 1):
        boundary[k][k] = -1
        boundary[k + 1][k] = 1
    boundary_s = [
        [boundary[r][k] - boundary[r][n - 2 - k] for k in range(n - 1)] for r in range(n)
    ]
    return IntMatrix.from_rows(boundary), IntMatrix.from_rows(boundary_s)


def build_theta(s: PeriodicSequence, allow_interior_discontinuity: bool = False) -> HomologyData:
    table = build_orbit_table(s, allow_interior_discontinuity)
    p = table.p
    n = 2 * p
    vector = build_s_vector(s, allow_interior_discontinuity)
    mirrored = swap_halves(vector)
    gamma_rows = [[0] * n for _ in range(n)]
    for r in range(n):
        gamma_rows[r][0] = vector[r]
        gamma_rows[r][p] = mirrored[r]
    big_gamma = IntMatrix.from_rows(gamma_rows)
    small_gamma = big_gamma - IntMatrix.identity(n)
    omega = build_omega(p)
    mu = build_mu(p)
    boundary, boundary_s = build_boundaries(table)
    return HomologyData(
        p=p,
        table=table,
        mu=mu,
        omega=omega,
        pi=table.pi,
        eta=build_eta(mu, table.pi),
        s=vector,
        Gamma=big_gamma,
        gamma=small_gamma,
        Theta=small_gamma @ omega,
        boundary=boundary,
        boundary_s=boundary_s,
    )


def eta_in_w_coordinates(data: HomologyData) -> IntMatrix:
    """(eta pi^T)^T, which is mu^T = boundary_s when the w-basis is used."""
    return (data.eta @ data.pi.T).T


def _theorem_rhs(p: int, d: RationalFunction) -> RationalFunction:
    e = IntPolynomial((1,)) - IntPolynomial.monomial(p, (-1) ** p)
    return d * (e * e * IntPolynomial((1, 1)))


def verify_identities(s: PeriodicSequence, tol: float | None = None) -> VerificationReport:
    tol = tol if tol is not None else settings.spectral_tolerance
    data = build_theta(s)
    psi: TransitionMatrix = transition_matrix(data.table)
    p, n = data.p, 2 * data.p

    d = kneading_determinant(s)
    theta_poly = char_poly_det_I_minus_tM(data.Theta)
    psi_poly = char_poly_det_I_minus_tM(psi.psi)

    t0, rho_kneading = growth_number(d, settings.root_tolerance)
    rho_markov = spectral_radius(psi, settings.root_tolerance)
    if t0 is None:
        spectral_ok = abs(rho_markov - 1.0) <= tol
    else:
        spectral_ok = abs(rho_markov * t0 - 1.0) <= tol

    rank_eta = rational_rank(data.eta)
    rank_boundary = rational_rank(data.boundary)
    rank_boundary_s = rational_rank(data.boundary_s)
    boundary_ok = (
        rank_eta == rank_boundary_s == p - 1
        and rank_boundary - rank_boundary_s == p
        and column_space_equal(data.boundary_s, eta_in_w_coordinates(data))
    )

    zero = IntMatrix.zeros(n - 1, n)
    checks = IdentityChecks(
        eta_gamma_zero=(data.eta @ data.Gamma) == zero,
        eta_omega_anticommutes=(data.eta @ data.omega) == -(psi.psi @ data.eta),
        eta_small_gamma=(data.eta @ data.gamma) == -data.eta,
        theta_matches_determinant=RationalFunction(theta_poly, IntPolynomial((1,))) == _theorem_rhs(p, d),
        theta_matches_transition=theta_poly == IntPolynomial((1, 1)) * psi_poly,
        spectral_matches_growth=spectral_ok,
        psi_nonnegative=all(v in (0, 1) for v in psi.psi.entries),
        eta_theta_commutes=(data.eta @ data.Theta) == (psi.psi @ data.eta),
        boundary_ranks=boundary_ok,
        kneading_oracle=oracle_agrees(s),
    )

    counterexample = None
    if not checks.all_hold():
        failed = [name for name, ok in checks.model_dump().items() if not ok]
        logger.warning("Identities failed for %s: %s", s, ", ".join(failed))
        counterexample = Counterexample(
            sequence=str(s),
            failed=failed,
            pi=data.pi.to_rows(),
            psi=psi.psi.to_rows(),
            theta=data.Theta.to_rows(),
        )

    return VerificationReport(
        sequence=str(s),
        period=p,
        checks=checks,
        theta_char_poly=str(theta_poly),
        psi_char_poly=str(psi_poly),
        determinant=str(d),
        t0=t0,
        rho_kneading=rho_kneading,
        rho_markov=rho_markov,
        spectral_check_skipped=t0 is None,
        rank_eta=rank_eta,
        rank_boundary=rank_boundary,
        rank_boundary_s=rank_boundary_s,
        counterexample=counterexample,
    )

