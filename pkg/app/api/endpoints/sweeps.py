import logging
import uuid

from fastapi import APIRouter, BackgroundTasks, HTTPException

from app.models.schemas import SweepRequest, SweepResponse, SweepStatus
from app.services.pipeline import VerificationSweep
from app.storage.sweep_store import SweepStore

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/sweeps", tags=["sweeps"])

store = SweepStore()


def _run_sweep(sweep_id: str, max_period: int, jobs: int):
    """Run the verification sweep synchronously (called as a background task)."""
    store.update_status(sweep_id, SweepStatus.PROCESSING)
    try:
        report = VerificationSweep(max_period, jobs).run()
        store.save_report(sweep_id, report)
        logger.info("Sweep %s completed: %s", sweep_id, report.summary)
    except Exception as e:
        logger.exception("Sweep %s failed", sweep_id)
        store.update_status(sweep_id, SweepStatus.FAILED, error_message=str(e))


@router.post("/", status_code=202, response_model=SweepResponse)
async def create_sweep(request: SweepRequest, background_tasks: BackgroundTasks):
    """Start an exhaustive identity sweep over all periods up to max_period."""
    sweep_id = str(uuid.uuid4())
    sweep = store.create(sweep_id, request.max_period)
    background_tasks.add_task(_run_sweep, sweep_id, request.max_period, request.jobs)
    return sweep


@router.get("/{sweep_id}")
async def get_sweep(sweep_id: str):
    """Get sweep status, or the full report once it has completed."""
    record = store.get(sweep_id)
    if not record:
        raise HTTPException(status_code=404, detail="Sweep not found")

    if record["report"] is not None:
        return record["report"]

    return store.response(record)
