import logging
import math
from functools import partial
from typing import Callable, List

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import qmc, t as student_t

from app.core.exceptions import BadAxis, BudgetExceeded, Infeasible, NoConvergence
from app.schemas.contour import ContourSpec
from app.schemas.integrand import MBIntegrand
from app.schemas.quadrature import IntegralEstimate, MethodUsed, QuadratureConfig, QuadratureMethod
from app.services.contour_service import validate
from app.services.integrand_service import CompiledIntegrand, compile_integrand, decay_rates, eval_log_batch
from app.utils.logsum import ScaledValue

logger = logging.getLogger(__name__)

# Extra nats added to the truncation threshold to cover the |t|^{x-1/2} prefactors.
TRUNCATION_SAFETY = 10.0
MAX_TRUNCATION_GROWTH = 6
SCAN_POINTS = 129
CHUNK_SIZE = 32768
MAX_DIM = 6
# The logistic map uses half the decay rate so the mapped integrand vanishes on the cube faces.
QMC_MAP_RATE_FACTOR = 0.5
LOG_TWO_PI = math.log(2 * math.pi)


def evaluate_chunked(fn: Callable[[np.ndarray], np.ndarray], points: np.ndarray, jobs: int) -> np.ndarray:
    """Apply a batched log-integrand in fixed-size chunks; chunk boundaries do not depend on `jobs`."""
    chunks = [points[i:i + CHUNK_SIZE] for i in range(0, len(points), CHUNK_SIZE)]
    if not chunks:
        return np.empty(0, dtype=np.complex128)
    if jobs > 1 and len(chunks) > 1:
        parts = Parallel(n_jobs=jobs, prefer="threads")(delayed(fn)(c) for c in chunks)
    else:
        parts = [fn(c) for c in chunks]
    return np.concatenate(parts)


def _zero_estimate() -> IntegralEstimate:
    return IntegralEstimate(
        log_value=complex(-math.inf, 0.0),
        log_error=-math.inf,
        nodes_evaluated=0,
        method_used=MethodUsed.ZERO,
    )


def _require_valid(integrand: MBIntegrand, contour: ContourSpec) -> None:
    result = validate(integrand, contour)
    if not result.passed:
        raise Infeasible(
            "contour does not separate the pole series",
            [v.model_dump() for v in result.violations],
        )


def _fit_truncation(compiled: CompiledIntegrand, offsets: np.ndarray, rates: np.ndarray, config: QuadratureConfig) -> np.ndarray:
    """Per-axis half-widths T_j, grown until the axis scans fall below the threshold."""
    threshold = config.truncation_log_threshold
    T = (threshold + TRUNCATION_SAFETY) / rates
    for j in range(compiled.dim):
        for _ in range(MAX_TRUNCATION_GROWTH):
            ts = np.linspace(-T[j], T[j], SCAN_POINTS)
            points = np.tile(offsets.astype(np.complex128), (SCAN_POINTS, 1))
            points[:, j] += 1j * ts
            logs = eval_log_batch(compiled, points).real
            peak = np.max(logs)
            edge = max(logs[0], logs[-1])
            if not np.isfinite(peak) or edge < peak - threshold:
                break
            T[j] *= 1.25
            logger.debug(f"Axis {j}: truncation extended to T={T[j]:.3f}")
    return T


def grid_indices(K: np.ndarray, new_only: bool) -> np.ndarray:
    axes = [np.arange(-k, k + 1, dtype=np.int64) for k in K]
    grids = np.meshgrid(*axes, indexing="ij")
    idx = np.stack([g.ravel() for g in grids], axis=1)
    if new_only:
        idx = idx[np.any(idx % 2 != 0, axis=1)]
    return idx


def _truncation_bound(logs: np.ndarray, idx: np.ndarray, K: np.ndarray, T: np.ndarray, rates: np.ndarray) -> float:
    """Log of a tail estimate: boundary magnitude integrated against exp(-rate*|t|)."""
    dim = len(K)
    terms = []
    for j in range(dim):
        on_face = np.abs(idx[:, j]) == K[j]
        if not np.any(on_face):
            continue
        b = float(np.max(logs.real[on_face]))
        if b == -math.inf:
            continue
        other = sum(math.log(2 * T[i]) for i in range(dim) if i != j)
        terms.append(b + math.log(2.0 / rates[j]) + other)
    if not terms:
        return -math.inf
    return float(np.logaddexp.reduce(terms)) - dim * LOG_TWO_PI


def _trapezoid(integrand: MBIntegrand, contour: ContourSpec, config: QuadratureConfig, method: MethodUsed) -> IntegralEstimate:
    compiled = compile_integrand(integrand)
    if compiled.is_zero:
        return _zero_estimate()
    rates = np.array(decay_rates(integrand))
    offsets = np.array(contour.offsets, dtype=np.float64)
    dim = compiled.dim
    T = _fit_truncation(compiled, offsets, rates, config)

    raw = ScaledValue.zero()
    previous = None
    nodes = 0
    log_trunc = -math.inf
    estimate = None
    for level in range(config.max_refinements + 1):
        h = config.initial_step / 2 ** level
        K = np.floor(T / h).astype(np.int64)
        total = int(np.prod(2 * K + 1))
        if total > config.max_nodes:
            if estimate is None:
                raise BudgetExceeded(total, config.max_nodes)
            raise NoConvergence(f"node budget reached after {level} levels", estimate=estimate)
        idx = grid_indices(K, new_only=level > 0)
        points = offsets[None, :] + 1j * h * idx
        logs = evaluate_chunked(partial(eval_log_batch, compiled), points, config.jobs)
        nodes += len(idx)
        if level == 0:
            log_trunc = _truncation_bound(logs, idx, K, T, rates)
        raw = raw + ScaledValue.sum_logs(logs)
        current = raw.scale(dim * math.log(h) - dim * LOG_TWO_PI)

        if previous is None:
            log_diff = current.log_abs()
        else:
            log_diff = (current - previous).log_abs()
        log_error = float(np.logaddexp(log_diff, log_trunc))
        converged = False
        if previous is not None:
            log_cur = current.log_abs()
            if log_diff == -math.inf:
                converged = True
            elif log_cur != -math.inf:
                converged = math.exp(min(log_diff - log_cur, 0.0)) < config.rel_tol / 4
        estimate = IntegralEstimate(
            log_value=current.log(),
            log_error=log_error,
            nodes_evaluated=nodes,
            method_used=method,
            converged=converged,
            refinements=level,
        )
        logger.debug(f"{method.value} level {level}: h={h:.5f} nodes={nodes} log|I|={current.log_abs():.6f} log_err={log_error:.3f}")
        if converged:
            return estimate
        previous = current

    logger.warning(f"{method.value} quadrature did not reach rel_tol={config.rel_tol} after {config.max_refinements} refinements")
    raise NoConvergence("trapezoid refinement did not converge", estimate=estimate.model_copy(update={"converged": False}))


def integrate_line(integrand: MBIntegrand, contour: ContourSpec, config: QuadratureConfig) -> IntegralEstimate:
    """Trapezoid rule on the truncated line z = c + it with step halving."""
    if integrand.dim != 1:
        raise BadAxis(f"integrate_line needs a 1-dimensional integrand, got dim {integrand.dim}")
    _require_valid(integrand, contour)
    return _trapezoid(integrand, contour, config, MethodUsed.LINE)


def integrate_tensor(integrand: MBIntegrand, contour: ContourSpec, config: QuadratureConfig) -> IntegralEstimate:
    """Tensor-product trapezoid in 2 or 3 dimensions with joint step halving."""
    if integrand.dim not in (2, 3):
        raise BadAxis(f"integrate_tensor supports dim 2 or 3, got {integrand.dim}")
    _require_valid(integrand, contour)
    return _trapezoid(integrand, contour, config, MethodUsed.TENSOR)


def qmc_point_sets(dim: int, config: QuadratureConfig) -> List[np.ndarray]:
    """Scrambled Sobol point sets, one per randomization, fixed by config.seed."""
    m = max(1, math.ceil(math.log2(config.qmc_points)))
    if 2 ** m != config.qmc_points:
        logger.warning(f"qmc_points={config.qmc_points} rounded up to {2 ** m}")
    children = np.random.SeedSequence(config.seed).spawn(config.qmc_randomizations)
    sets = []
    for child in children:
        sampler = qmc.Sobol(d=dim, scramble=True, seed=np.random.default_rng(child))
        sets.append(sampler.random_base2(m=m))
    return sets


def _qmc_mean(compiled: CompiledIntegrand, offsets: np.ndarray, kappa: np.ndarray, u: np.ndarray, jobs: int) -> ScaledValue:
    u = np.clip(u, 1e-16, 1 - 1e-16)
    t = np.log(u / (1 - u)) / kappa[None, :]
    log_jac = -np.sum(np.log(kappa[None, :] * u * (1 - u)), axis=1)
    points = offsets[None, :] + 1j * t
    logs = evaluate_chunked(partial(eval_log_batch, compiled), points, jobs) + log_jac
    return ScaledValue.sum_logs(logs).scale(-math.log(len(u)) - compiled.dim * LOG_TWO_PI)


def integrate_qmc(integrand: MBIntegrand, contour: ContourSpec, config: QuadratureConfig) -> IntegralEstimate:
    """Randomized QMC over the logistic-mapped unit cube.

    Value is the mean over randomizations, error the Student-t 97.5% factor
    times the standard error.
    """
    _require_valid(integrand, contour)
    compiled = compile_integrand(integrand)
    if compiled.is_zero:
        return _zero_estimate()
    rates = np.array(decay_rates(integrand))
    m = max(1, math.ceil(math.log2(config.qmc_points)))
    total = 2 ** m * config.qmc_randomizations
    if total > config.max_nodes:
        raise BudgetExceeded(total, config.max_nodes)

    kappa = rates * QMC_MAP_RATE_FACTOR
    offsets = np.array(contour.offsets, dtype=np.float64)
    means = [_qmc_mean(compiled, offsets, kappa, u, config.jobs) for u in qmc_point_sets(compiled.dim, config)]

    scale = max(v.log_scale for v in means)
    if scale == -math.inf:
        return _zero_estimate().model_copy(update={"nodes_evaluated": total, "method_used": MethodUsed.QMC})
    values = np.array([0j if v.is_zero else v.mantissa * math.exp(v.log_scale - scale) for v in means])
    R = len(values)
    mean = values.mean()
    std = math.sqrt(float(np.sum(np.abs(values - mean) ** 2)) / (R - 1))
    error = float(student_t.ppf(0.975, R - 1)) * std / math.sqrt(R)
    log_value = ScaledValue(scale, complex(mean)).log()
    log_error = scale + math.log(error) if error > 0 else -math.inf
    logger.debug(f"qmc: {R} randomizations x {2 ** m} points, log|I|={log_value.real:.6f} log_err={log_error:.3f}")
    return IntegralEstimate(
        log_value=log_value,
        log_error=log_error,
        nodes_evaluated=total,
        method_used=MethodUsed.QMC,
        converged=True,
    )


def integrate(integrand: MBIntegrand, contour: ContourSpec, config: QuadratureConfig) -> IntegralEstimate:
    """Dispatch on config.method and the integrand dimension."""
    if integrand.delta_constraint:
        raise BadAxis("integrand still carries a sum constraint; reduce it before integrating")
    dim = integrand.dim
    if dim > MAX_DIM:
        raise BadAxis(f"dimension {dim} exceeds the supported maximum of {MAX_DIM}")
    method = config.method
    if method == QuadratureMethod.QMC:
        return integrate_qmc(integrand, contour, config)
    if dim == 1:
        return integrate_line(integrand, contour, config)
    if method == QuadratureMethod.TENSOR:
        if dim > 3:
            raise BadAxis(f"tensor quadrature supports dim <= 3, got {dim}")
        return integrate_tensor(integrand, contour, config)
    if dim <= 3:
        try:
            return integrate_tensor(integrand, contour, config)
        except BudgetExceeded as exc:
            logger.warning(f"Tensor grid too large ({exc.nodes} nodes); falling back to QMC")
            return integrate_qmc(integrand, contour, config)
    return integrate_qmc(integrand, contour, config)
