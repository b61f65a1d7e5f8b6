import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence

import numpy as np

from app.core.exceptions import BadAxis, DeltaConstraintMissing, NonDecaying, NumeratorPole
from app.schemas.integrand import AffineArg, GammaFactor, MBIntegrand, Placement, PowerFactor
from app.services.gamma_service import log_gamma_array

logger = logging.getLogger(__name__)

HALF_PI = math.pi / 2


def gamma_factor(constant: complex, coeffs: Sequence[int], denominator: bool = False, multiplicity: int = 1) -> GammaFactor:
    """Shorthand used by the catalog builders."""
    return GammaFactor(
        arg=AffineArg(constant=complex(constant), coeffs=list(coeffs)),
        placement=Placement.DENOMINATOR if denominator else Placement.NUMERATOR,
        multiplicity=multiplicity,
    )


@dataclass(frozen=True)
class CompiledIntegrand:
    """Array form of an MBIntegrand for batched evaluation."""

    dim: int
    constants: np.ndarray      # (F,) complex
    coeffs: np.ndarray         # (F, dim) float
    weights: np.ndarray        # (F,) +multiplicity for numerators, -multiplicity for denominators
    numerator: np.ndarray      # (F,) bool
    power_constants: np.ndarray
    power_coeffs: np.ndarray
    log_bases: np.ndarray
    log_front: complex         # log_prefactor - log(symmetry_divisor)

    @property
    def is_zero(self) -> bool:
        return self.log_front.real == -math.inf


def compile_integrand(integrand: MBIntegrand) -> CompiledIntegrand:
    dim = integrand.dim
    factors = integrand.gamma_factors
    powers = integrand.power_factors
    return CompiledIntegrand(
        dim=dim,
        constants=np.array([f.arg.constant for f in factors], dtype=np.complex128),
        coeffs=np.array([f.arg.coeffs for f in factors], dtype=np.float64).reshape(len(factors), dim),
        weights=np.array(
            [f.multiplicity if f.placement == Placement.NUMERATOR else -f.multiplicity for f in factors],
            dtype=np.float64,
        ),
        numerator=np.array([f.placement == Placement.NUMERATOR for f in factors], dtype=bool),
        power_constants=np.array([p.exponent.constant for p in powers], dtype=np.complex128),
        power_coeffs=np.array([p.exponent.coeffs for p in powers], dtype=np.float64).reshape(len(powers), dim),
        log_bases=np.array([math.log(p.base) for p in powers], dtype=np.float64),
        log_front=complex(integrand.log_prefactor) - math.log(integrand.symmetry_divisor),
    )


def eval_log_batch(compiled: CompiledIntegrand, points: np.ndarray) -> np.ndarray:
    """log integrand at each row of `points` (shape (P, dim)).

    Denominator poles give -inf real part; a numerator pole raises
    NumeratorPole with the index of the first offending factor.
    """
    points = np.asarray(points, dtype=np.complex128).reshape(-1, compiled.dim)
    n = points.shape[0]
    if compiled.is_zero:
        return np.full(n, complex(-math.inf, 0.0))
    real = np.full(n, compiled.log_front.real)
    imag = np.full(n, compiled.log_front.imag)
    if compiled.constants.size:
        args = compiled.constants[None, :] + points @ compiled.coeffs.T
        values, poles = log_gamma_array(args)
        bad = poles & compiled.numerator[None, :]
        if np.any(bad):
            factor_index = int(np.flatnonzero(np.any(bad, axis=0))[0])
            raise NumeratorPole(factor_index)
        real = real + (values.real * compiled.weights[None, :]).sum(axis=1)
        imag = imag + (values.imag * compiled.weights[None, :]).sum(axis=1)
    if compiled.log_bases.size:
        exponents = compiled.power_constants[None, :] + points @ compiled.power_coeffs.T
        power = (exponents * compiled.log_bases[None, :]).sum(axis=1)
        real = real + power.real
        imag = imag + power.imag
    return real + 1j * imag


def eval_log(integrand: MBIntegrand, point: Sequence[complex]) -> complex:
    if len(point) != integrand.dim:
        raise BadAxis(f"point has {len(point)} coordinates, integrand dim is {integrand.dim}")
    compiled = compile_integrand(integrand)
    return complex(eval_log_batch(compiled, np.array([point], dtype=np.complex128))[0])


def decay_rates(integrand: MBIntegrand) -> List[float]:
    """Leading exponential decay rate of |integrand| along each imaginary axis.

    Uses |Gamma(x+iy)| ~ |y|^{x-1/2} exp(-pi|y|/2) per factor.
    """
    totals = [0] * integrand.dim
    for factor in integrand.gamma_factors:
        sign = 1 if factor.placement == Placement.NUMERATOR else -1
        for j, c in enumerate(factor.arg.coeffs):
            totals[j] += sign * factor.multiplicity * abs(c)
    rates = [HALF_PI * t for t in totals]
    if any(r <= 0 for r in rates):
        raise NonDecaying(rates)
    return rates


def _reduce_arg(arg: AffineArg, axis: int) -> AffineArg:
    ce = arg.coeffs[axis]
    coeffs = [c - ce for j, c in enumerate(arg.coeffs) if j != axis]
    return AffineArg(constant=arg.constant, coeffs=coeffs)


def reduce_delta_constraint(integrand: MBIntegrand, eliminated_axis: int) -> MBIntegrand:
    """Integrate out the constraint sum_k z_k = 0 by substituting
    z_e = -sum(others). The 2*pi*i prefactor cancels one dz/(2*pi*i) with unit
    Jacobian, so the log prefactor is unchanged.
    """
    if not integrand.delta_constraint:
        raise DeltaConstraintMissing("integrand carries no sum constraint to reduce")
    if integrand.dim < 2:
        raise BadAxis("cannot reduce a one-dimensional integrand")
    if not 0 <= eliminated_axis < integrand.dim:
        raise BadAxis(f"axis {eliminated_axis} out of range for dim {integrand.dim}")
    reduced = MBIntegrand(
        dim=integrand.dim - 1,
        gamma_factors=[
            GammaFactor(arg=_reduce_arg(f.arg, eliminated_axis), placement=f.placement, multiplicity=f.multiplicity)
            for f in integrand.gamma_factors
        ],
        power_factors=[
            PowerFactor(base=p.base, exponent=_reduce_arg(p.exponent, eliminated_axis))
            for p in integrand.power_factors
        ],
        log_prefactor=integrand.log_prefactor,
        symmetry_divisor=integrand.symmetry_divisor,
        delta_constraint=False,
        measure=integrand.measure,
    )
    logger.debug(f"Reduced delta constraint on axis {eliminated_axis}: dim {integrand.dim} -> {reduced.dim}")
    return reduced


def factor_multiset(integrand: MBIntegrand, digits: int = 12) -> Counter:
    """Multiset of gamma factors keyed by (placement, rounded constant, coeffs)."""
    counts: Counter = Counter()
    for f in integrand.gamma_factors:
        key = (
            f.placement.value,
            round(f.arg.constant.real, digits) + 0.0,
            round(f.arg.constant.imag, digits) + 0.0,
            tuple(f.arg.coeffs),
        )
        counts[key] += f.multiplicity
    return counts


def structurally_equal(a: MBIntegrand, b: MBIntegrand) -> bool:
    """Same dimension, same gamma and power factor multisets (prefactors ignored)."""
    if a.dim != b.dim:
        return False
    powers_a = sorted((p.base, p.exponent.constant.real, p.exponent.constant.imag, tuple(p.exponent.coeffs)) for p in a.power_factors)
    powers_b = sorted((p.base, p.exponent.constant.real, p.exponent.constant.imag, tuple(p.exponent.coeffs)) for p in b.power_factors)
    return factor_multiset(a) == factor_multiset(b) and powers_a == powers_b


def integrand_document(integrand: MBIntegrand) -> Dict[str, Any]:
    """JSON-ready description of the integrand (complex values as [re, im])."""
    return integrand.model_dump(mode="json")
