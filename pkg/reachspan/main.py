from fastapi import FastAPI
from contextlib import asynccontextmanager
import logging

from reachspan.config import settings
from reachspan.core.robot import BUNDLED_ROBOTS

# Configure logging
logging.basicConfig(
    level=getattr(logging, settings.log_level.upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application lifespan manager"""
    logger.info("🚀 Starting reachspan...")
    logger.info(f"LP backend: {settings.lp_backend}, delta: {settings.delta} m")
    yield
    logger.info("Shutting down reachspan...")


app = FastAPI(
    title=settings.api_title,
    description="Reachable-space polytopes for serial manipulators",
    version=settings.api_version,
    lifespan=lifespan,
)


@app.get("/health")
async def health_check():
    """Health check endpoint"""
    return {
        "status": "healthy",
        "service": "reachspan",
        "lp_backend": settings.lp_backend,
        "robots": list(BUNDLED_ROBOTS),
    }


@app.get("/")
async def root():
    """Root endpoint"""
    return {
        "message": "reachspan API",
        "version": settings.api_version,
        "docs": "/docs"
    }


# Include API routers
from reachspan.api.reachability import router as reachability_router
app.include_router(reachability_router, prefix="/api/v1", tags=["reachability"])
