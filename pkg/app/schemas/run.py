import hashlib
import json
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from app.schemas.identity import VerificationReport, VerificationStatus
from app.schemas.quadrature import QuadratureMethod


class RunConfig(BaseModel):
    """One verify run. Parameters come either from `params` or from `seed`."""

    identity: str = Field(..., description="Catalog identity id")
    n: int = Field(default=1, ge=1)
    params: Optional[Dict[str, Any]] = Field(default=None, description="Named parameters; complex values as [re, im]")
    seed: Optional[int] = Field(default=None, ge=0, description="Draw parameters with sample_params")
    method: QuadratureMethod = QuadratureMethod.AUTO
    rel_tol: float = Field(default=1e-8, gt=0)
    qmc_points: int = Field(default=32768, ge=2)
    offsets: Optional[List[float]] = Field(default=None, description="Contour override; validated before use")
    margin: float = Field(default=0.05, gt=0)
    explain: bool = False

    @model_validator(mode="after")
    def check_single_source(self) -> "RunConfig":
        if (self.params is None) == (self.seed is None):
            raise ValueError("exactly one parameter source is required: params or seed")
        return self

    def run_id(self) -> str:
        """Content hash of the canonical JSON form."""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class SweepRequest(BaseModel):
    identity: str
    n: int = Field(default=1, ge=1)
    trials: int = Field(..., ge=1)
    seed: int = Field(default=0, ge=0)
    method: QuadratureMethod = QuadratureMethod.AUTO
    rel_tol: float = Field(default=1e-8, gt=0)
    qmc_points: int = Field(default=32768, ge=2)
    margin: float = Field(default=0.05, gt=0)

    def run_id(self) -> str:
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class SweepReport(BaseModel):
    identity: str
    N: int
    trials: int
    seed: int
    counts: Dict[str, int] = Field(..., description="Number of trials per status: pass, fail, inconclusive")
    worst_rel_deviation: Optional[float] = None
    status: VerificationStatus
    entries: List[VerificationReport] = Field(default_factory=list)


class ReportRow(BaseModel):
    run_id: str
    kind: str = Field(..., description="verify or sweep")
    identity: str
    N: Optional[int] = None
    status: VerificationStatus
    rel_deviation: Optional[float] = None
    source: str = Field(..., description="Cache file the row was read from")


class CacheSummary(BaseModel):
    rows: List[ReportRow]
    notes: List[str] = Field(default_factory=list)
