from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.schemas.common import Cx


class ContourSpec(BaseModel):
    """Vertical contours Re z_j = offsets[j]."""

    model_config = ConfigDict(frozen=True)

    offsets: List[float] = Field(..., description="Real abscissa per integration variable")
    margin: float = Field(default=0.05, gt=0, description="Minimum real part of every numerator argument")


class PoleConstraint(BaseModel):
    """Re(constant + sum_j coeffs[j] * c_j) >= margin for one numerator factor."""

    factor_index: int
    constant: Cx
    coeffs: List[int]
    description: str


class ConstraintSlack(BaseModel):
    factor_index: int
    description: str
    value: float = Field(..., description="Real part of the argument on the contour")
    slack: float = Field(..., description="value - margin; negative means violated")


class ValidationResult(BaseModel):
    passed: bool
    min_slack: Optional[float] = Field(default=None, description="None when there are no constraints")
    entries: List[ConstraintSlack] = Field(default_factory=list)

    @property
    def violations(self) -> List[ConstraintSlack]:
        return [e for e in self.entries if e.slack < 0]
