import logging
import math
from typing import List

from app.core.exceptions import Infeasible
from app.schemas.contour import ConstraintSlack, ContourSpec, PoleConstraint, ValidationResult
from app.schemas.integrand import MBIntegrand, Placement

logger = logging.getLogger(__name__)

# Offset used on an axis that is bounded on one side only.
ONE_SIDED_STEP = 0.5


def _describe(constant: complex, coeffs: List[int]) -> str:
    terms = [f"{constant.real:+.6g}{constant.imag:+.6g}i"]
    for j, c in enumerate(coeffs):
        if c:
            terms.append(f"{c:+d}*c{j}")
    return "Re(" + " ".join(terms) + ") >= margin"


def pole_constraints(integrand: MBIntegrand) -> List[PoleConstraint]:
    """One constraint per numerator factor that depends on the contour.

    A positive real part of the argument along the whole vertical line keeps it
    off the pole set {0, -1, -2, ...}. Factors without integration variables do
    not move with the contour and are left to the evaluator.
    """
    constraints = []
    for i, factor in enumerate(integrand.gamma_factors):
        if factor.placement != Placement.NUMERATOR or not any(factor.arg.coeffs):
            continue
        constraints.append(
            PoleConstraint(
                factor_index=i,
                constant=factor.arg.constant,
                coeffs=list(factor.arg.coeffs),
                description=_describe(factor.arg.constant, factor.arg.coeffs),
            )
        )
    return constraints


def validate(integrand: MBIntegrand, contour: ContourSpec) -> ValidationResult:
    if len(contour.offsets) != integrand.dim:
        raise ValueError(f"contour has {len(contour.offsets)} offsets, integrand dim is {integrand.dim}")
    entries = []
    for con in pole_constraints(integrand):
        value = con.constant.real + sum(c * o for c, o in zip(con.coeffs, contour.offsets))
        entries.append(
            ConstraintSlack(
                factor_index=con.factor_index,
                description=con.description,
                value=value,
                slack=value - contour.margin,
            )
        )
    if not entries:
        return ValidationResult(passed=True, min_slack=None, entries=[])
    min_slack = min(e.slack for e in entries)
    return ValidationResult(passed=min_slack >= 0, min_slack=min_slack, entries=entries)


def _axis_intervals(integrand: MBIntegrand, margin: float):
    lo = [-math.inf] * integrand.dim
    hi = [math.inf] * integrand.dim
    for con in pole_constraints(integrand):
        nonzero = [(j, c) for j, c in enumerate(con.coeffs) if c]
        if len(nonzero) != 1:
            continue
        j, c = nonzero[0]
        bound = (margin - con.constant.real) / c
        if c > 0:
            lo[j] = max(lo[j], bound)
        else:
            hi[j] = min(hi[j], bound)
    return lo, hi


def default_contour(integrand: MBIntegrand, margin: float = 0.05) -> ContourSpec:
    """Zero offsets when they validate, otherwise per-axis interval midpoints."""
    if margin <= 0:
        raise ValueError("margin must be positive")
    contour = ContourSpec(offsets=[0.0] * integrand.dim, margin=margin)
    result = validate(integrand, contour)
    if result.passed:
        return contour

    lo, hi = _axis_intervals(integrand, margin)
    offsets = []
    for j in range(integrand.dim):
        if lo[j] > hi[j]:
            raise Infeasible(
                f"no offset for axis {j} satisfies its single-variable constraints: [{lo[j]:.6g}, {hi[j]:.6g}]",
                [v.model_dump() for v in result.violations],
            )
        if math.isfinite(lo[j]) and math.isfinite(hi[j]):
            offsets.append(0.5 * (lo[j] + hi[j]))
        elif math.isfinite(lo[j]):
            offsets.append(max(0.0, lo[j] + ONE_SIDED_STEP))
        elif math.isfinite(hi[j]):
            offsets.append(min(0.0, hi[j] - ONE_SIDED_STEP))
        else:
            offsets.append(0.0)

    contour = ContourSpec(offsets=offsets, margin=margin)
    result = validate(integrand, contour)
    if not result.passed:
        raise Infeasible(
            "shifted contour still violates multi-variable constraints; supply explicit offsets",
            [v.model_dump() for v in result.violations],
        )
    logger.info(f"Contour shifted to offsets={[round(o, 6) for o in offsets]} (margin {margin})")
    return contour
