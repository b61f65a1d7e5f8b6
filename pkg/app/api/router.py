from fastapi import APIRouter


router = APIRouter()


@router.get("/", include_in_schema=False)
def root():
    return "MB Verify: numerical checks of Mellin-Barnes integral identities"
