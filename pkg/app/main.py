from fastapi import FastAPI
from app.api.router import router as main_router
from app.api.v1.router import api_router
from app.core.logging import setup_logging


setup_logging()

app = FastAPI(
    title="MB Verify API",
    description="Numerical verification of multidimensional Mellin-Barnes integral identities",
    version="1.0.0",
)

app.include_router(main_router) # service banner
app.include_router(api_router, prefix="/api/v1")
