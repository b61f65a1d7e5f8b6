from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from app.schemas.common import Cx, LogCx
from app.schemas.contour import ConstraintSlack, ContourSpec
from app.schemas.integrand import MBIntegrand

# JSON key of the provenance string in reports and listings
ANCHOR_KEY = "paper_anchor"


class VerificationStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


class ParameterSpec(BaseModel):
    name: str
    length: Optional[str] = Field(default=None, description="Vector length formula in N; None for scalars")
    description: str = ""


class IdentitySummary(BaseModel):
    """One row of the catalog listing."""

    id: str
    dim_formula: str
    min_n: int
    max_n: Optional[int] = None
    parameters: List[ParameterSpec]
    constraints: List[str]
    anchor: str = Field(..., serialization_alias=ANCHOR_KEY)
    rotation: Optional[str] = None


class IdentityCase(BaseModel):
    id: str
    n: int = Field(..., ge=1, description="Size parameter N of the identity")
    dim: int = Field(..., ge=1, description="Number of integration variables of the LHS")
    vectors: Dict[str, List[Cx]] = Field(default_factory=dict)
    scalars: Dict[str, Cx] = Field(default_factory=dict)
    constraints: List[str] = Field(default_factory=list, description="Predicates checked at build time")
    lhs: MBIntegrand
    rhs_log: LogCx = Field(..., description="log of the closed-form right-hand side")
    anchor: str = Field(..., serialization_alias=ANCHOR_KEY)
    normalization: float = Field(default=1.0, description="Constant multiplying the LHS measure")

    def params_document(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {k: [[v.real, v.imag] for v in vals] for k, vals in self.vectors.items()}
        doc.update({k: [v.real, v.imag] for k, v in self.scalars.items()})
        return doc


class ValueSummary(BaseModel):
    re: Optional[float] = Field(default=None, description="None when the plain value overflows")
    im: Optional[float] = None
    log_mag: Optional[float] = Field(default=None, description="None for an exact zero")
    phase: float = 0.0
    error: Optional[float] = None


class VerificationReport(BaseModel):
    identity: str
    N: Optional[int] = None
    params: Dict[str, Any] = Field(default_factory=dict)
    contour: Optional[ContourSpec] = None
    lhs: Optional[ValueSummary] = None
    rhs: Optional[ValueSummary] = None
    rel_deviation: Optional[float] = None
    rel_error: Optional[float] = Field(default=None, description="LHS error bar relative to |RHS|")
    rel_tol: float
    status: VerificationStatus
    method: Optional[str] = None
    nodes: int = 0
    runtime_s: float = 0.0
    normalization_note: Optional[str] = None
    anchor: str = Field(default="", serialization_alias=ANCHOR_KEY, description="Where the identity comes from")
    diagnostics: List[str] = Field(default_factory=list)
    violations: List[ConstraintSlack] = Field(default_factory=list)
    integrand: Optional[Dict[str, Any]] = None


class BuildRequest(BaseModel):
    id: str = Field(..., description="Catalog identity id, e.g. 'g1'")
    n: int = Field(default=1, ge=1)
    params: Optional[Dict[str, Any]] = Field(default=None, description="Named parameters; complex values as [re, im]")
    seed: Optional[int] = Field(default=None, ge=0, description="Draw parameters with sample_params instead")
