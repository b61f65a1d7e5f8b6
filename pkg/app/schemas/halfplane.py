from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from app.schemas.common import Cx


class HalfPlanePoint(BaseModel):
    """z = x + iy in the open upper half-plane."""

    model_config = ConfigDict(frozen=True)

    x: float = Field(..., description="Real part")
    y: float = Field(..., gt=0, description="Imaginary part, strictly positive")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


class ChainRuleRequest(BaseModel):
    s: float = Field(..., gt=0.5, description="Spin; the measure needs s > 1/2")
    alpha: Cx = Field(..., description="Exponent of the propagator attached to z")
    beta: Cx = Field(..., description="Exponent of the propagator attached to zeta")
    z: HalfPlanePoint
    zeta: HalfPlanePoint
    rel_tol: float = Field(default=1e-6, gt=0)
    scale: Optional[float] = Field(default=None, gt=0, description="Check scaling covariance at z, zeta -> scale*z, scale*zeta instead")


class TransitionRequest(BaseModel):
    s: float = Field(..., gt=0.5)
    nu: float = Field(..., description="Real label of the power eigenfunction")
    p: float = Field(..., gt=0, description="Momentum of the plane wave")
    rel_tol: float = Field(default=1e-6, gt=0)
