from fastapi import FastAPI
from app.api import sweeps
from app.core.config import settings
import logging

# Configure logging
logging.basicConfig(
    level=settings.LOG_LEVEL,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

app = FastAPI(
    title="RIS Cell-Free Beamforming API",
    description="Monte-Carlo sweeps of partially distributed beamforming for RIS-aided cell-free networks",
    version="1.0.0"
)

# Include routers
app.include_router(sweeps.router, prefix="/api", tags=["sweeps"])
