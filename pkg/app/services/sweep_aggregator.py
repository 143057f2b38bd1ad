from collections import defaultdict

from app.models.schemas import PeriodSummary, SweepReport, VerificationReport


class SweepAggregator:
    def __init__(self, max_period: int):
        self.max_period = max_period

    def aggregate(self, reports: list[VerificationReport]) -> SweepReport:
        by_period: dict[int, list[VerificationReport]] = defaultdict(list)
        for report in reports:
            by_period[report.period].append(report)

        periods: list[PeriodSummary] = []
        for period in range(1, self.max_period + 1):
            group = by_period.get(period, [])
            # Only periods that produced sequences get a summary row.
            if not group:
                continue
            rhos = [r.rho_markov for r in group]
            periods.append(
                PeriodSummary(
                    period=period,
                    checked=len(group),
                    failures=sum(1 for r in group if not r.passed),
                    skipped_spectral=sum(1 for r in group if r.spectral_check_skipped),
                    min_rho=round(min(rhos), 6),
                    max_rho=round(max(rhos), 6),
                )
            )

        counterexamples = [r for r in reports if not r.passed]
        return SweepReport(
            max_period=self.max_period,
            checked=len(reports),
            failures=len(counterexamples),
            periods=periods,
            counterexamples=counterexamples,
        )
