import logging
import math
import time
from typing import Callable, Dict, Tuple

import numpy as np

from app.core.exceptions import BadSpin, BudgetExceeded, DomainViolation, NoConvergence
from app.schemas.halfplane import HalfPlanePoint
from app.schemas.identity import VerificationReport, VerificationStatus
from app.schemas.quadrature import IntegralEstimate, MethodUsed, QuadratureConfig
from app.services.catalog_service import decide_status, summarize_log
from app.services.gamma_service import chain_constant, complex_power, log_gamma
from app.services.quadrature_service import evaluate_chunked, grid_indices
from app.utils.logsum import ScaledValue, relative_log_difference

logger = logging.getLogger(__name__)

# (tau, v) -> log of the mapped integrand, evaluated on an (n, 2) array
LogDensity = Callable[[np.ndarray], np.ndarray]
Box = Tuple[np.ndarray, np.ndarray]

MAX_BOX_GROWTH = 5
BOX_GROWTH = 1.0
CHAIN_RULE_ANCHOR = "chain rule: convolution of two propagators over the upper half-plane"
TRANSITION_ANCHOR = "transition element between the power eigenfunction and the plane wave"


def _check_spin(s: float) -> None:
    if s <= 0.5:
        raise BadSpin(f"spin s={s} must exceed 1/2 for the half-plane measure", {"s": s})


def measure_weight(point: HalfPlanePoint, s: float) -> float:
    """Density ((2s-1)/pi) (2y)^(2s-2) of the half-plane measure."""
    _check_spin(s)
    return (2 * s - 1) / math.pi * (2 * point.y) ** (2 * s - 2)


def _log_measure(y: np.ndarray, s: float) -> np.ndarray:
    return math.log((2 * s - 1) / math.pi) + (2 * s - 2) * np.log(2 * y)


def propagator(z: HalfPlanePoint, w_conj_of: HalfPlanePoint, alpha: complex) -> complex:
    """(i / (z - conj(w)))^alpha on the principal branch."""
    return complex_power(1j / (z.z - w_conj_of.z.conjugate()), alpha)


def _refine(log_f: LogDensity, box: Box, config: QuadratureConfig) -> IntegralEstimate:
    """Tensor trapezoid over a (tau, v) box with nested step halving."""
    lo, hi = box
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    K0 = np.ceil(half / config.initial_step).astype(np.int64)

    raw = ScaledValue.zero()
    previous = None
    nodes = 0
    estimate = None
    for level in range(config.max_refinements + 1):
        h = half / (K0 * 2 ** level)
        K = K0 * 2 ** level
        total = int(np.prod(2 * K + 1))
        if total > config.max_nodes:
            if estimate is None:
                raise BudgetExceeded(total, config.max_nodes)
            raise NoConvergence(f"node budget reached after {level} levels", estimate=estimate)
        idx = grid_indices(K, new_only=level > 0)
        points = center[None, :] + h[None, :] * idx
        logs = evaluate_chunked(log_f, points, config.jobs)
        nodes += len(idx)
        raw = raw + ScaledValue.sum_logs(logs)
        current = raw.scale(float(np.sum(np.log(h))))

        converged = False
        log_diff = current.log_abs()
        if previous is not None:
            log_diff = (current - previous).log_abs()
            log_cur = current.log_abs()
            converged = log_diff == -math.inf or (
                log_cur != -math.inf and math.exp(min(log_diff - log_cur, 0.0)) < config.rel_tol / 4
            )
        estimate = IntegralEstimate(
            log_value=current.log(),
            log_error=log_diff,
            nodes_evaluated=nodes,
            method_used=MethodUsed.HALFPLANE,
            converged=converged,
            refinements=level,
        )
        logger.debug(f"halfplane level {level}: h={h.round(5).tolist()} nodes={nodes} log|I|={current.log_abs():.6f}")
        if converged:
            return estimate
        previous = current
    raise NoConvergence("half-plane trapezoid did not converge", estimate=estimate.model_copy(update={"converged": False}))


def _grow(box: Box) -> Box:
    lo, hi = box
    return lo - BOX_GROWTH, hi + BOX_GROWTH


def _integrate_box(log_f: LogDensity, box: Box, config: QuadratureConfig) -> IntegralEstimate:
    """Refine on the box, then enlarge it until the value moves by less than rel_tol/10."""
    estimate = _refine(log_f, box, config)
    nodes = estimate.nodes_evaluated
    for _ in range(MAX_BOX_GROWTH):
        box = _grow(box)
        larger = _refine(log_f, box, config)
        nodes += larger.nodes_evaluated
        change = relative_log_difference(larger.log_value, estimate.log_value)
        log_change = (ScaledValue.from_log(larger.log_value) - ScaledValue.from_log(estimate.log_value)).log_abs()
        estimate = larger.model_copy(
            update={"log_error": float(np.logaddexp(larger.log_error, log_change)), "nodes_evaluated": nodes}
        )
        if change < config.rel_tol / 10:
            return estimate
        logger.debug(f"box enlarged: relative change {change:.3e}")
    raise NoConvergence("truncation box kept changing the result", estimate=estimate.model_copy(update={"converged": False}))


def _report(identity: str, params: Dict, target: complex, config: QuadratureConfig, log_f: LogDensity, box: Box, anchor: str) -> VerificationReport:
    started = time.perf_counter()
    report = VerificationReport(
        identity=identity,
        params=params,
        rhs=summarize_log(target),
        rel_tol=config.rel_tol,
        status=VerificationStatus.INCONCLUSIVE,
        anchor=anchor,
    )
    guard_failed = False
    try:
        estimate = _integrate_box(log_f, box, config)
    except NoConvergence as e:
        estimate = e.estimate
        guard_failed = True
        report.diagnostics.append(f"NoConvergence: {e.message}")
    except BudgetExceeded as e:
        report.diagnostics.append(f"BudgetExceeded: {e.message}")
        report.runtime_s = time.perf_counter() - started
        return report

    rel_deviation = relative_log_difference(estimate.log_value, target)
    rel_error = 0.0 if estimate.log_error == -math.inf else math.exp(min(estimate.log_error - target.real, 700.0))
    report.lhs = summarize_log(estimate.log_value, estimate.log_error)
    report.rel_deviation = rel_deviation
    report.rel_error = rel_error
    report.nodes = estimate.nodes_evaluated
    report.method = estimate.method_used.value
    report.status = decide_status(rel_deviation, rel_error, config.rel_tol, guard_failed)
    report.runtime_s = time.perf_counter() - started
    logger.info(f"{identity}: {report.status.value} rel_dev={rel_deviation:.3e} nodes={report.nodes} ({report.runtime_s:.2f}s)")
    return report


def _chain_rule_problem(s: float, alpha: complex, beta: complex, z: HalfPlanePoint, zeta: HalfPlanePoint, rel_tol: float):
    _check_spin(s)
    alpha, beta = complex(alpha), complex(beta)
    if alpha.real <= s - 0.5 or beta.real <= s - 0.5:
        raise DomainViolation(f"need Re alpha, Re beta > s - 1/2 = {s - 0.5}", {"alpha": [alpha.real, alpha.imag], "beta": [beta.real, beta.imag]})
    kappa = (alpha + beta).real - 2 * s
    if kappa <= 0:
        raise DomainViolation(f"need Re(alpha + beta) > 2s; Re(alpha + beta) - 2s = {kappa}")

    zc, zetac = z.z, zeta.z.conjugate()
    x_center = 0.5 * (z.x + zeta.x)
    width = min(z.y, zeta.y)
    log_front = math.log(width)

    def log_f(points: np.ndarray) -> np.ndarray:
        tau, v = points[:, 0], points[:, 1]
        x = x_center + width * np.sinh(tau)
        y = np.exp(v)
        w = x + 1j * y
        return (
            _log_measure(y, s)
            + alpha * np.log(1j / (zc - np.conj(w)))
            + beta * np.log(1j / (w - zetac))
            + log_front + np.log(np.cosh(tau)) + v
        )

    log_tol = math.log(10.0 / rel_tol)
    scale = abs(zc - zetac) + abs(z.x - zeta.x)
    log_r = math.log(scale) + log_tol / kappa + 1.0
    u = math.asinh(math.exp(log_r) / width) + 1.0
    lo = np.array([-u, log_front - log_tol / (2 * s - 1) - 1.0])
    hi = np.array([u, log_r + 1.0])
    target = chain_constant(alpha, beta, s) + (alpha + beta - 2 * s) * complex(np.log(1j / (zc - zetac)))
    return log_f, (lo, hi), target


def verify_chain_rule(s: float, alpha: complex, beta: complex, z: HalfPlanePoint, zeta: HalfPlanePoint, config: QuadratureConfig) -> VerificationReport:
    """Integral of D_alpha(z, conj w) D_beta(w, conj zeta) over the half-plane
    against a(alpha, beta) D_{alpha+beta-2s}(z, conj zeta).

    The x axis is mapped by x = x_c + L sinh(tau) and the y axis by y = e^v.
    """
    log_f, box, target = _chain_rule_problem(s, alpha, beta, z, zeta, config.rel_tol)
    params = {
        "s": s,
        "alpha": [complex(alpha).real, complex(alpha).imag],
        "beta": [complex(beta).real, complex(beta).imag],
        "z": z.model_dump(),
        "zeta": zeta.model_dump(),
    }
    return _report("halfplane-chain-rule", params, target, config, log_f, box, CHAIN_RULE_ANCHOR)


def verify_chain_rule_scaled(
    s: float,
    alpha: complex,
    beta: complex,
    z: HalfPlanePoint,
    zeta: HalfPlanePoint,
    lam: float,
    config: QuadratureConfig,
) -> VerificationReport:
    """Compare the integral at (lam z, lam zeta) with lam^(2s-alpha-beta) times the integral at (z, zeta)."""
    if lam <= 0:
        raise DomainViolation(f"scale factor must be positive, got {lam}")
    log_f, box, _ = _chain_rule_problem(s, alpha, beta, z, zeta, config.rel_tol)
    base = _integrate_box(log_f, box, config)
    scaled_z = HalfPlanePoint(x=lam * z.x, y=lam * z.y)
    scaled_zeta = HalfPlanePoint(x=lam * zeta.x, y=lam * zeta.y)
    log_f_scaled, box_scaled, _ = _chain_rule_problem(s, alpha, beta, scaled_z, scaled_zeta, config.rel_tol)
    target = base.log_value + (2 * s - complex(alpha) - complex(beta)) * math.log(lam)
    params = {
        "s": s,
        "alpha": [complex(alpha).real, complex(alpha).imag],
        "beta": [complex(beta).real, complex(beta).imag],
        "z": z.model_dump(),
        "zeta": zeta.model_dump(),
        "scale": lam,
    }
    report = _report("halfplane-chain-rule-scaled", params, target, config, log_f_scaled, box_scaled, CHAIN_RULE_ANCHOR)
    report.nodes += base.nodes_evaluated
    return report


def verify_transition_element(s: float, nu: float, p: float, config: QuadratureConfig) -> VerificationReport:
    """(M_nu, E_p) = integral of conj(M_nu(z)) E_p(z) against p^(-i nu - 1/2).

    The x line is bent to x(tau) = tau + i(sqrt(tau^2+1) - 1 - delta), which
    passes below the branch point at x = iy and lets e^{ipx} damp both tails.
    """
    _check_spin(s)
    if p <= 0:
        raise DomainViolation(f"momentum p must be positive, got {p}")
    delta = min(0.5, 1.0 / p)
    a = complex(s, -nu)
    log_front = -log_gamma(2 * s) + log_gamma(a) + (s - 0.5) * math.log(p)

    def log_f(points: np.ndarray) -> np.ndarray:
        tau, v = points[:, 0], points[:, 1]
        root = np.sqrt(tau ** 2 + 1)
        x = tau + 1j * (root - 1 - delta)
        dx = 1 + 1j * tau / root
        y = np.exp(v)
        return (
            log_front
            + a * np.log(-1j / (x - 1j * y))
            + 1j * p * (x + 1j * y)
            + _log_measure(y, s)
            + np.log(dx) + v
        )

    log_tol = math.log(10.0 / config.rel_tol)
    u = (log_tol + p * (1 + delta)) / p + 2.0
    lo = np.array([-u, -log_tol / (2 * s - 1) - 1.0 + math.log(min(1.0, 1.0 / p))])
    hi = np.array([u, math.log((log_tol + 10.0) / p)])
    target = complex(-0.5, -nu) * math.log(p)
    params = {"s": s, "nu": nu, "p": p}
    return _report("halfplane-transition", params, target, config, log_f, (lo, hi), TRANSITION_ANCHOR)
