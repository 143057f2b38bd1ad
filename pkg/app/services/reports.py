import csv
import io
import logging

import numpy as np

from app.config import settings
from app.core.exceptions import KneadingError
from app.models.schemas import (
    KneadReport,
    LapReport,
    MarkovReport,
    ScanRow,
    ScanStatus,
    ThetaReport,
    VerificationReport,
)
from app.services.homology import build_theta, verify_identities
from app.services.kneading import (
    growth_number,
    kneading_determinant,
    kneading_determinant_bistable,
    lap_series,
    truncated_determinant,
    u_poly,
)
from app.services.maps import (
    MapFamily,
    detect_kneading,
    growth_from_laps,
    lap_counts,
    lap_structure,
)
from app.services.markov import build_orbit_table, spectral_radius, transition_matrix
from app.services.poly import RationalFunction, char_poly_det_I_minus_tM, series_of_rational
from app.services.symbolic import (
    PeriodicSequence,
    is_admissible,
    is_bistable,
    parse_sequence,
    tau,
)

logger = logging.getLogger(__name__)

SCAN_HEADER = ["param", "word", "period", "rho_kneading", "rho_laps", "status"]


def determinant_for(s: PeriodicSequence) -> RationalFunction:
    """D(t) by the closed form that applies to `s`."""
    if is_bistable(s):
        return kneading_determinant_bistable(s)
    return kneading_determinant(s)


def knead_report(text: str, laps: int = 0, order: int = 0, tol: float | None = None) -> KneadReport:
    s = parse_sequence(text)
    report = KneadReport(
        sequence=str(s),
        period=s.period,
        admissible=is_admissible(s),
        bistable=is_bistable(s),
        tau_sequence=str(tau(s)),
        u_poly=str(u_poly(s)),
    )
    try:
        d = determinant_for(s)
        t0, rho = growth_number(d, tol if tol is not None else settings.root_tolerance)
        report.determinant = str(d)
        if order > 0:
            report.series = [str(c) for c in series_of_rational(d, order).coeffs]
        report.t0 = t0
        report.rho = rho
        if laps > 0:
            report.laps = lap_series(d, laps)
    except KneadingError as e:
        logger.info("No kneading invariants for %s: %s", s, e)
        report.error = str(e)
    return report


def markov_report(text: str, allow_interior_discontinuity: bool = False) -> MarkovReport:
    s = parse_sequence(text)
    table = build_orbit_table(s, allow_interior_discontinuity)
    psi = transition_matrix(table)
    rows = table.kneading_rows()
    return MarkovReport(
        sequence=str(s),
        period=table.p,
        v=rows["v"],
        w=rows["w"],
        pi=table.pi.to_rows(),
        psi=psi.psi.to_rows(),
        char_poly=str(char_poly_det_I_minus_tM(psi.psi)),
        spectral_radius=spectral_radius(psi, settings.root_tolerance),
    )


def theta_report(text: str, allow_interior_discontinuity: bool = False) -> ThetaReport:
    s = parse_sequence(text)
    data = build_theta(s, allow_interior_discontinuity)
    return ThetaReport(
        sequence=str(s),
        period=data.p,
        s=list(data.s),
        gamma=data.gamma.to_rows(),
        theta=data.Theta.to_rows(),
        char_poly=str(char_poly_det_I_minus_tM(data.Theta)),
    )


def verify_report(text: str, tol: float | None = None) -> VerificationReport:
    return verify_identities(parse_sequence(text), tol)


def lap_report(m: MapFamily, n: int) -> LapReport:
    detection = detect_kneading(m)
    structure = lap_structure(m, n, locate_breakpoints=False)
    predicted = None
    if detection.periodic and is_admissible(detection.sequence):
        try:
            predicted = lap_series(determinant_for(detection.sequence), n)
        except KneadingError as e:
            logger.info("No lap prediction for %s: %s", detection.sequence, e)
    return LapReport(
        family=m.name,
        parameter=m.parameter,
        kneading=str(detection.word),
        periodic=detection.periodic,
        counts=structure.history,
        predicted=predicted,
        point_laps=structure.point_laps,
    )


def scan_parameters(lo: float, hi: float, step: float) -> list[float]:
    if step <= 0:
        raise ValueError("scan step must be positive")
    if hi < lo:
        raise ValueError("scan range must satisfy lo <= hi")
    count = int(round((hi - lo) / step)) + 1
    return [round(float(v), 12) for v in np.linspace(lo, lo + (count - 1) * step, count)]


def scan_row(m: MapFamily, depth: int | None = None) -> ScanRow:
    depth = depth if depth is not None else settings.lap_depth
    try:
        detection = detect_kneading(m)
        if detection.periodic:
            s = detection.sequence
            if not is_admissible(s):
                raise KneadingError(f"detected ({s})^inf is not admissible")
            _, rho_kneading = growth_number(determinant_for(s))
            status = ScanStatus.PERIODIC
        else:
            _, rho_kneading = growth_number(truncated_determinant(detection.word))
            status = ScanStatus.PREFIX
        rho_laps = growth_from_laps(lap_counts(m, depth))
    except (KneadingError, ValueError) as e:
        logger.warning("Scan row %r failed: %s", m, e)
        return ScanRow(param=m.parameter, word="", status=ScanStatus.ERROR, error=str(e))
    return ScanRow(
        param=m.parameter,
        word=str(detection.word),
        period=detection.period,
        rho_kneading=rho_kneading,
        rho_laps=rho_laps,
        status=status,
    )


def scan(m: MapFamily, lo: float, hi: float, step: float, depth: int | None = None) -> list[ScanRow]:
    params = scan_parameters(lo, hi, step)
    logger.info("Scanning %s over %d parameter values", m.name, len(params))
    return [scan_row(m.with_parameter(value), depth) for value in params]


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.6f}"


def scan_csv(rows: list[ScanRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SCAN_HEADER)
    for row in rows:
        status = row.status.value if row.error is None else f"error: {row.error}"
        writer.writerow(
            [
                f"{row.param:.6f}",
                row.word,
                "" if row.period is None else row.period,
                _fmt(row.rho_kneading),
                _fmt(row.rho_laps),
                status,
            ]
        )
    return buffer.getvalue()
