from enum import Enum
from typing import List

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.common import Cx, LogCx


class Placement(str, Enum):
    NUMERATOR = "numerator"
    DENOMINATOR = "denominator"


class AffineArg(BaseModel):
    """constant + sum_j coeffs[j] * z_j"""

    model_config = ConfigDict(frozen=True)

    constant: Cx = Field(default=0j, description="Complex constant term, [re, im]")
    coeffs: List[int] = Field(..., description="Integer coefficient per integration variable")

    @model_validator(mode="after")
    def _not_trivial(self):
        if self.constant == 0 and not any(self.coeffs):
            raise ValueError("affine argument must have a nonzero constant or coefficient")
        return self


class GammaFactor(BaseModel):
    model_config = ConfigDict(frozen=True)

    arg: AffineArg
    placement: Placement = Field(default=Placement.NUMERATOR)
    multiplicity: int = Field(default=1, ge=1)


class PowerFactor(BaseModel):
    """base ** exponent with a positive real base (principal branch)."""

    model_config = ConfigDict(frozen=True)

    base: float = Field(..., gt=0, description="Positive real base")
    exponent: AffineArg


class MBIntegrand(BaseModel):
    """Mellin-Barnes integrand; every axis carries dz/(2 pi i) along a vertical line."""

    model_config = ConfigDict(frozen=True)

    dim: int = Field(..., ge=1, description="Number of integration variables")
    gamma_factors: List[GammaFactor] = Field(default_factory=list)
    power_factors: List[PowerFactor] = Field(default_factory=list)
    log_prefactor: LogCx = Field(default=0j, description="log of the scalar prefactor")
    symmetry_divisor: int = Field(default=1, ge=1, description="Front factor 1/divisor, e.g. N!")
    delta_constraint: bool = Field(
        default=False,
        description="Integrand is restricted to sum_k z_k = 0 and must be reduced before integration",
    )
    measure: str = Field(default="dz/(2*pi*i)", description="Per-axis differential convention")

    @model_validator(mode="after")
    def _check_lengths(self):
        for i, factor in enumerate(self.gamma_factors):
            if len(factor.arg.coeffs) != self.dim:
                raise ValueError(f"gamma factor {i} has {len(factor.arg.coeffs)} coefficients, dim is {self.dim}")
        for i, factor in enumerate(self.power_factors):
            if len(factor.exponent.coeffs) != self.dim:
                raise ValueError(f"power factor {i} has {len(factor.exponent.coeffs)} coefficients, dim is {self.dim}")
        return self
