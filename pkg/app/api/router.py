from fastapi import APIRouter

from app.api.endpoints.health import router as health_router
from app.api.endpoints.sequences import router as sequences_router
from app.api.endpoints.sweeps import router as sweeps_router

api_router = APIRouter()
api_router.include_router(health_router)
api_router.include_router(sequences_router)
api_router.include_router(sweeps_router)
