import math
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field

from app.schemas.common import LogCx


class QuadratureMethod(str, Enum):
    AUTO = "auto"
    TENSOR = "tensor"
    QMC = "qmc"


class MethodUsed(str, Enum):
    ZERO = "zero"
    LINE = "line"
    TENSOR = "tensor"
    QMC = "qmc"
    HALFPLANE = "halfplane"


class QuadratureConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: QuadratureMethod = Field(default=QuadratureMethod.AUTO)
    rel_tol: float = Field(default=1e-8, gt=0)
    truncation_log_threshold: float = Field(
        default=40.0, gt=0, description="Integrate where log|f| is within this many nats of the peak"
    )
    max_refinements: int = Field(default=8, ge=1, description="Step halvings after the initial grid")
    initial_step: float = Field(default=0.5, gt=0)
    qmc_points: int = Field(default=32768, ge=2, description="Points per randomization (rounded up to a power of two)")
    qmc_randomizations: int = Field(default=16, ge=2)
    seed: int = Field(default=0, ge=0)
    max_nodes: int = Field(default=4_000_000, ge=1, description="Node cap per refinement level / QMC run")
    jobs: int = Field(default=1, ge=1, description="Workers for node evaluation")


class IntegralEstimate(BaseModel):
    """Integral value in log form plus an absolute error bar on the same scale."""

    log_value: LogCx = Field(..., description="log of the integral; real part -inf for zero")
    log_error: float = Field(..., description="log of the absolute error estimate (-inf for exact)")
    nodes_evaluated: int = Field(..., ge=0)
    method_used: MethodUsed
    converged: bool = True
    refinements: int = 0

    @property
    def value(self) -> complex:
        if self.log_value.real == -math.inf:
            return 0j
        if self.log_value.real > 709:
            return complex(math.inf, 0.0)
        return complex(math.exp(self.log_value.real) * complex(math.cos(self.log_value.imag), math.sin(self.log_value.imag)))

    @property
    def error_estimate(self) -> float:
        if self.log_error == -math.inf:
            return 0.0
        if self.log_error > 709:
            return math.inf
        return math.exp(self.log_error)

    @property
    def relative_error(self) -> float:
        """error / |value|, computed in log form."""
        if self.log_error == -math.inf:
            return 0.0
        if self.log_value.real == -math.inf:
            return math.inf
        return math.exp(min(self.log_error - self.log_value.real, 700.0))
