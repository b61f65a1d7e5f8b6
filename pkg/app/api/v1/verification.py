import cmath

from fastapi import APIRouter, HTTPException

from app.core.config import get_settings
from app.core.exceptions import INPUT_ERRORS, SeriesDivergent
from app.schemas.identity import BuildRequest, VerificationReport
from app.schemas.run import RunConfig, SweepReport, SweepRequest
from app.services.catalog_service import build_identity, sample_params
from app.services.residue_service import cross_check_residue
from app.services.run_service import run_sweep, run_verify


router = APIRouter()


@router.post("/verify", response_model=VerificationReport)
async def verify_identity(data: RunConfig):
    """
    Verify one identity instance: build it, place the contour, integrate the
    left-hand side and compare with the closed form.

    `status` is `pass`, `fail` or `inconclusive`; a failed numerical guard
    (contour, convergence, node budget) is never reported as a pass.

    ### Example Request:
    ```json
    {
        "identity": "barnes1",
        "n": 1,
        "params": {"a": [0.5, 0.7], "b": [0.6, 0.9]},
        "rel_tol": 1e-8
    }
    ```

    ### Example Request (seeded draw, shifted contour):
    ```json
    {"identity": "g1", "n": 2, "seed": 7, "offsets": [0.2, 0.2]}
    ```
    """
    settings = get_settings()
    try:
        return run_verify(data, max_nodes=settings.max_nodes, jobs=settings.jobs)
    except INPUT_ERRORS as e:
        raise HTTPException(status_code=422, detail=e.to_dict())
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))


@router.post("/sweep", response_model=SweepReport)
async def sweep_identity(data: SweepRequest):
    """
    Verify `trials` seeded parameter draws of one identity.

    ### Example Request:
    ```json
    {"identity": "barnes1", "n": 1, "trials": 20, "seed": 1}
    ```
    """
    settings = get_settings()
    try:
        return run_sweep(data, max_nodes=settings.max_nodes, jobs=settings.jobs)
    except INPUT_ERRORS as e:
        raise HTTPException(status_code=422, detail=e.to_dict())
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))


@router.post("/residue")
async def residue_cross_check(data: BuildRequest):
    """
    Left-hand side of the first Barnes lemma as a sum over the left pole
    series, next to the closed-form right-hand side.

    ### Example Request:
    ```json
    {"id": "barnes1", "params": {"a": [0.5, 0.7], "b": [0.6, 0.9]}}
    ```
    """
    try:
        params = data.params if data.params is not None else sample_params(data.id, data.n, data.seed or 0)
        case = build_identity(data.id, data.n, params)
        value = cross_check_residue(case)
        rhs = cmath.exp(case.rhs_log)
        return {
            "status": "success",
            "residue_sum": [value.real, value.imag],
            "rhs": [rhs.real, rhs.imag],
            "rel_deviation": abs(value / rhs - 1),
        }
    except (SeriesDivergent,) + INPUT_ERRORS as e:
        raise HTTPException(status_code=422, detail=e.to_dict())
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))
