import logging

from fastapi import APIRouter, HTTPException, Query

from app.core.exceptions import KneadingError, SequenceParseError
from app.models.schemas import KneadReport, MarkovReport, ThetaReport, VerificationReport
from app.services import reports

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/sequences", tags=["sequences"])


def _run(builder, *args):
    try:
        return builder(*args)
    except SequenceParseError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except KneadingError as e:
        logger.info("Domain error for %s: %s", args[0], e)
        raise HTTPException(status_code=422, detail=f"{type(e).__name__}: {e}")


@router.get("/{word}/kneading", response_model=KneadReport)
async def get_kneading(word: str, laps: int = Query(0, ge=0, le=50)):
    """Admissibility, kneading determinant, growth number and lap numbers."""
    return _run(reports.knead_report, word, laps)


@router.get("/{word}/markov", response_model=MarkovReport)
async def get_markov(word: str):
    return _run(reports.markov_report, word)


@router.get("/{word}/theta", response_model=ThetaReport)
async def get_theta(word: str):
    return _run(reports.theta_report, word)


@router.get("/{word}/verify", response_model=VerificationReport)
async def get_verification(word: str):
    """Every identity between the Markov and kneading data of one sequence."""
    return _run(reports.verify_report, word)
