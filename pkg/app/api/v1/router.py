from fastapi import APIRouter
from app.api.v1 import identities, verification, halfplane


api_router = APIRouter()


api_router.include_router(identities.router, prefix="/identities", tags=["Identity Catalog"])
api_router.include_router(verification.router, tags=["Verification"])
api_router.include_router(halfplane.router, prefix="/halfplane", tags=["Half-plane Checks"])
