from datetime import datetime, timezone
from typing import Optional

from app.models.schemas import SweepReport, SweepResponse, SweepStatus


class SweepStore:
    """In-memory sweep storage. Replace with a DB adapter for production."""

    def __init__(self):
        self._sweeps: dict[str, dict] = {}

    def create(self, sweep_id: str, max_period: int) -> SweepResponse:
        record = {
            "sweep_id": sweep_id,
            "status": SweepStatus.PENDING,
            "created_at": datetime.now(timezone.utc),
            "max_period": max_period,
            "report": None,
            "error_message": None,
        }
        self._sweeps[sweep_id] = record
        return self.response(record)

    def update_status(self, sweep_id: str, status: SweepStatus, error_message: str | None = None):
        if sweep_id in self._sweeps:
            self._sweeps[sweep_id]["status"] = status
            if error_message:
                self._sweeps[sweep_id]["error_message"] = error_message

    def save_report(self, sweep_id: str, report: SweepReport):
        if sweep_id in self._sweeps:
            self._sweeps[sweep_id]["report"] = report
            self._sweeps[sweep_id]["status"] = SweepStatus.COMPLETED

    def get(self, sweep_id: str) -> Optional[dict]:
        return self._sweeps.get(sweep_id)

    @staticmethod
    def response(record: dict) -> SweepResponse:
        return SweepResponse(
            sweep_id=record["sweep_id"],
            status=record["status"],
            created_at=record["created_at"],
            max_period=record["max_period"],
            error_message=record["error_message"],
        )
