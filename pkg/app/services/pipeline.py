import logging
import time
from concurrent.futures import ProcessPoolExecutor

from app.config import settings
from app.models.schemas import SweepReport, VerificationReport
from app.services.homology import verify_identities
from app.services.sweep_aggregator import SweepAggregator
from app.services.symbolic import PeriodicSequence, enumerate_admissible, parse_sequence

logger = logging.getLogger(__name__)


def _verify_word(word: str) -> VerificationReport:
    # Module-level so worker processes can unpickle it.
    return verify_identities(parse_sequence(word))


class VerificationSweep:
    """Checks every identity on all markov-form admissible sequences up to a period."""

    def __init__(self, max_period: int | None = None, jobs: int | None = None):
        self.max_period = max_period if max_period is not None else settings.sweep_period
        self.jobs = jobs if jobs is not None else settings.sweep_jobs
        if self.max_period < 1:
            raise ValueError("max_period must be at least 1")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")

    def sequences(self) -> list[PeriodicSequence]:
        found: list[PeriodicSequence] = []
        for p in range(1, self.max_period + 1):
            found.extend(enumerate_admissible(p, require_markov_form=True))
        return found

    def run(self) -> SweepReport:
        start_time = time.time()
        words = [str(s) for s in self.sequences()]
        logger.info("Verifying %d sequences up to period %d (jobs=%d)", len(words), self.max_period, self.jobs)

        if self.jobs > 1:
            with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                reports = list(pool.map(_verify_word, words, chunksize=8))
        else:
            reports = [_verify_word(word) for word in words]

        sweep = SweepAggregator(self.max_period).aggregate(reports)
        logger.info("%s in %.2fs", sweep.summary, time.time() - start_time)
        return sweep
