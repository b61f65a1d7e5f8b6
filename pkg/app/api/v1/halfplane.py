from fastapi import APIRouter, HTTPException

from app.core.config import get_settings
from app.core.exceptions import INPUT_ERRORS
from app.schemas.halfplane import ChainRuleRequest, TransitionRequest
from app.schemas.identity import VerificationReport
from app.services.halfplane_service import verify_chain_rule, verify_chain_rule_scaled, verify_transition_element
from app.services.run_service import quadrature_config


router = APIRouter()


def _config(rel_tol: float):
    settings = get_settings()
    return quadrature_config("auto", rel_tol, settings.default_qmc_points, 0, settings.max_nodes, settings.jobs)


@router.post("/chain-rule", response_model=VerificationReport)
async def chain_rule(data: ChainRuleRequest):
    """
    Integrate the product of two propagators over the upper half-plane and
    compare with the chain-rule closed form.

    Needs s > 1/2, Re alpha and Re beta > s - 1/2 and Re(alpha + beta) > 2s.
    With `scale` set, checks the scaling covariance of the integral instead.

    ### Example Request:
    ```json
    {
        "s": 1.25,
        "alpha": [1.9, 0.0],
        "beta": [1.8, 0.0],
        "z": {"x": 0.3, "y": 0.9},
        "zeta": {"x": -0.2, "y": 1.4},
        "rel_tol": 1e-5
    }
    ```
    """
    try:
        config = _config(data.rel_tol)
        if data.scale is not None:
            return verify_chain_rule_scaled(data.s, data.alpha, data.beta, data.z, data.zeta, data.scale, config)
        return verify_chain_rule(data.s, data.alpha, data.beta, data.z, data.zeta, config)
    except INPUT_ERRORS as e:
        raise HTTPException(status_code=422, detail=e.to_dict())
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))


@router.post("/transition", response_model=VerificationReport)
async def transition_element(data: TransitionRequest):
    """
    Transition element between the power eigenfunction M_nu and the plane
    wave E_p; the closed form is p^(-i nu - 1/2).

    ### Example Request:
    ```json
    {"s": 1.0, "nu": 0.4, "p": 2.0}
    ```
    """
    try:
        return verify_transition_element(data.s, data.nu, data.p, _config(data.rel_tol))
    except INPUT_ERRORS as e:
        raise HTTPException(status_code=422, detail=e.to_dict())
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))
