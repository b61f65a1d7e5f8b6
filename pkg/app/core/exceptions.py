from typing import Any, Dict, List, Optional


class MBVerifyError(Exception):
    """Base class for every domain error raised by the services.

    `details` carries structured context that the HTTP layer and the CLI render
    next to the message.
    """

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": self.message, "details": self.details}


class PoleArgument(MBVerifyError):
    """Gamma function evaluated at (or within 1e-12 of) a non-positive integer."""


class ZeroBase(MBVerifyError):
    """Complex power with a zero base."""


class NumeratorPole(MBVerifyError):
    def __init__(self, factor_index: int, message: Optional[str] = None):
        super().__init__(
            message or f"numerator gamma factor {factor_index} evaluated at a pole",
            {"factor_index": factor_index},
        )
        self.factor_index = factor_index


class NonDecaying(MBVerifyError):
    def __init__(self, rates: List[float]):
        super().__init__(
            f"integrand does not decay along every axis: rates={rates}", {"rates": rates}
        )
        self.rates = rates


class BadAxis(MBVerifyError):
    pass


class DeltaConstraintMissing(BadAxis):
    """reduce_delta_constraint called on an integrand without the sum constraint."""


class Infeasible(MBVerifyError):
    def __init__(self, message: str, violations: List[Dict[str, Any]]):
        super().__init__(message, {"violations": violations})
        self.violations = violations


class NoConvergence(MBVerifyError):
    """Refinement stopped without meeting the tolerance; `estimate` is the best value."""

    def __init__(self, message: str, estimate: Any = None):
        super().__init__(message)
        self.estimate = estimate


class BudgetExceeded(MBVerifyError):
    def __init__(self, nodes: int, limit: int):
        super().__init__(f"node budget exceeded: {nodes} > {limit}", {"nodes": nodes, "limit": limit})
        self.nodes = nodes
        self.limit = limit


class SchemaMismatch(MBVerifyError):
    pass


class ConstraintViolated(MBVerifyError):
    def __init__(self, predicate: str, message: Optional[str] = None):
        super().__init__(message or f"constraint violated: {predicate}", {"predicate": predicate})
        self.predicate = predicate


class RHSPole(MBVerifyError):
    pass


class SeriesDivergent(MBVerifyError):
    pass


class BadSpin(MBVerifyError):
    pass


class DomainViolation(MBVerifyError):
    pass


class EmptyCache(MBVerifyError):
    pass


class UsageError(MBVerifyError):
    pass


# Errors that describe bad caller input rather than a numerical breakdown.
INPUT_ERRORS = (
    SchemaMismatch,
    ConstraintViolated,
    RHSPole,
    BadAxis,
    BadSpin,
    DomainViolation,
    UsageError,
    PoleArgument,
    ZeroBase,
)
