import numpy as np
import pytest

from app.models.schemas import MarkovReport, ScanRow, ScanStatus, ThetaReport, VerificationReport
from app.services import reports
from app.services.maps import GAlphaMap
from app.services.poly import IntMatrix, IntPolynomial, char_poly_det_I_minus_tM
from app.services.symbolic import enumerate_admissible


class TestKneadReport:
    def test_rmb(self, printed_examples):
        report = reports.knead_report("RMB", laps=6, order=2)
        assert report.admissible
        assert not report.bistable
        assert report.tau_sequence == "LMA"
        assert report.u_poly == "-t - t^3"
        assert report.series == ["1", "-3", "3"]
        assert report.laps == printed_examples["RMB"]["laps"]
        assert report.rho == pytest.approx(printed_examples["RMB"]["rho"], abs=5e-4)
        assert report.error is None

    def test_bistable_uses_the_half_period_form(self):
        report = reports.knead_report("RMBLMA")
        assert report.bistable
        assert report.determinant is not None
        assert report.error is None

    def test_inadmissible_is_reported_not_raised(self):
        report = reports.knead_report("RRL")
        assert not report.admissible
        assert report.determinant is None
        assert "not admissible" in report.error


class TestStructuralReports:
    def test_markov(self, printed_examples):
        report = reports.markov_report("(RMB)^inf")
        assert report.psi == printed_examples["RMB"]["psi"]
        assert report.w == ["LMA", "ALM", "MBR", "MAL", "BRM", "RMB"]

    def test_theta(self, printed_examples):
        report = reports.theta_report("RMB")
        assert report.theta == printed_examples["RMB"]["theta"]
        assert report.s == [1, 1, 0, -1, -1, 0]

    def test_verify(self):
        assert reports.verify_report("RLMB").passed


class TestScan:
    def test_parameters(self):
        assert reports.scan_parameters(0.3, 0.32, 0.01) == [0.3, 0.31, 0.32]
        assert reports.scan_parameters(0.3, 0.3, 0.01) == [0.3]

    @pytest.mark.parametrize("lo, hi, step", [(0.3, 0.4, 0.0), (0.3, 0.4, -0.1), (0.4, 0.3, 0.01)])
    def test_invalid_parameters(self, lo, hi, step):
        with pytest.raises(ValueError):
            reports.scan_parameters(lo, hi, step)

    def test_row_at_rmb(self, printed_examples):
        row = reports.scan_row(GAlphaMap((5 ** 0.5 - 1) / 4), depth=4)
        assert row.status == ScanStatus.PERIODIC
        assert row.word == "RMB"
        assert row.period == 3
        assert row.rho_kneading == pytest.approx(printed_examples["RMB"]["rho"], abs=5e-4)

    def test_csv(self):
        rows = [
            ScanRow(param=0.3, word="RMB", period=3, rho_kneading=2.2055694, rho_laps=1.9, status=ScanStatus.PERIODIC),
            ScanRow(param=0.31, word="", status=ScanStatus.ERROR, error="orbit escaped"),
        ]
        lines = reports.scan_csv(rows).splitlines()
        assert lines[0] == "param,word,period,rho_kneading,rho_laps,status"
        assert lines[1] == "0.300000,RMB,3,2.205569,1.900000,periodic"
        assert lines[2] == "0.310000,,,,,error: orbit escaped"

    def test_scan_is_deterministic(self):
        m = GAlphaMap(0.3)
        first = reports.scan_csv(reports.scan(m, 0.29, 0.31, 0.01, depth=4))
        second = reports.scan_csv(reports.scan(m, 0.29, 0.31, 0.01, depth=4))
        assert first == second
        assert len(first.splitlines()) == 4


class TestJsonRoundTrip:
    @pytest.mark.parametrize(
        "text", [str(s) for p in range(3, 6) for s in enumerate_admissible(p, require_markov_form=True)]
    )
    def test_parsed_matrices_reproduce_the_checks(self, text):
        verify = VerificationReport.model_validate_json(reports.verify_report(text).model_dump_json())
        markov = MarkovReport.model_validate_json(reports.markov_report(text).model_dump_json())
        theta = ThetaReport.model_validate_json(reports.theta_report(text).model_dump_json())

        psi = IntMatrix.from_rows(markov.psi)
        psi_poly = char_poly_det_I_minus_tM(psi)
        theta_poly = char_poly_det_I_minus_tM(IntMatrix.from_rows(theta.theta))
        assert str(psi_poly) == verify.psi_char_poly == markov.char_poly
        assert str(theta_poly) == verify.theta_char_poly
        assert (theta_poly == IntPolynomial((1, 1)) * psi_poly) == verify.checks.theta_matches_transition
        assert all(v in (0, 1) for row in markov.psi for v in row) == verify.checks.psi_nonnegative

        rho = max(abs(np.linalg.eigvals(np.array(markov.psi, dtype=float))))
        assert rho == pytest.approx(verify.rho_markov, abs=1e-8)
        if verify.t0 is not None:
            assert (abs(rho * verify.t0 - 1.0) <= 1e-8) == verify.checks.spectral_matches_growth
        assert verify.passed
