from typing import List

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

from app.core.exceptions import INPUT_ERRORS, SchemaMismatch
from app.schemas.identity import BuildRequest, IdentityCase, IdentitySummary
from app.services.catalog_service import build_identity, list_identities, sample_params


router = APIRouter()


class SampleRequest(BaseModel):
    n: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0)


@router.get("", response_model=List[IdentitySummary])
async def get_identities():
    """
    List every identity in the catalog with its dimension formula, parameter
    schema, constraint predicates and anchor string.
    """
    try:
        return list_identities()
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))


@router.get("/{identity_id}", response_model=IdentitySummary)
async def get_identity(identity_id: str):
    """
    Catalog entry for one identity id (e.g. `g1`, `s3`, `barnes1`).
    """
    for entry in list_identities():
        if entry.id == identity_id:
            return entry
    raise HTTPException(status_code=404, detail=f"unknown identity {identity_id!r}")


@router.post("/{identity_id}/sample")
async def sample_identity_params(identity_id: str, data: SampleRequest):
    """
    Seeded parameter draw satisfying the entry's constraints.

    ### Example Request:
    ```json
    {"n": 2, "seed": 7}
    ```

    ### Example Response:
    ```json
    {"alpha": [[0.83, -0.12], [0.41, 0.37], [1.05, 0.02]], "beta": [[0.66, 0.21], [0.29, -0.44], [0.97, 0.15]]}
    ```
    """
    try:
        return sample_params(identity_id, data.n, data.seed)
    except SchemaMismatch as e:
        raise HTTPException(status_code=404, detail=e.to_dict())
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))


@router.post("/build", response_model=IdentityCase)
async def build_identity_case(data: BuildRequest):
    """
    Build the left-hand-side integrand and the log of the right-hand side.

    Give either `params` or `seed`. Complex values travel as `[re, im]`.

    ### Example Request:
    ```json
    {"id": "barnes1", "n": 1, "params": {"a": [0.5, 0.7], "b": [0.6, 0.9]}}
    ```
    """
    try:
        params = data.params if data.params is not None else sample_params(data.id, data.n, data.seed or 0)
        return build_identity(data.id, data.n, params)
    except INPUT_ERRORS as e:
        raise HTTPException(status_code=422, detail=e.to_dict())
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))
