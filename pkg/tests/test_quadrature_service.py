import math

import numpy as np
import pytest

from app.core.exceptions import BadAxis, BudgetExceeded, Infeasible
from app.schemas.contour import ContourSpec
from app.schemas.quadrature import MethodUsed, QuadratureConfig, QuadratureMethod
from app.services.catalog_service import build_identity, s2_full_integrand, sample_params
from app.services.contour_service import default_contour
from app.services.quadrature_service import integrate, integrate_line, integrate_qmc, integrate_tensor, qmc_point_sets
from app.utils.logsum import relative_log_difference


def _g1_n2(seed=7):
    return build_identity("g1", 2, sample_params("g1", 2, seed))


def test_line_integral_matches_first_lemma(barnes1_case, config):
    estimate = integrate_line(barnes1_case.lhs, ContourSpec(offsets=[0.0]), config)
    assert estimate.method_used == MethodUsed.LINE
    assert estimate.converged
    assert relative_log_difference(estimate.log_value, barnes1_case.rhs_log) < 1e-9
    assert estimate.relative_error < 1e-8


def test_line_rejects_higher_dimension(config):
    case = _g1_n2()
    with pytest.raises(BadAxis):
        integrate_line(case.lhs, default_contour(case.lhs), config)


def test_invalid_contour_is_refused(barnes1_case, config):
    with pytest.raises(Infeasible):
        integrate(barnes1_case.lhs, ContourSpec(offsets=[0.8]), config)


def test_contour_shift_invariance(barnes1_case, config):
    base = integrate(barnes1_case.lhs, ContourSpec(offsets=[0.0]), config)
    shifted = integrate(barnes1_case.lhs, ContourSpec(offsets=[0.2]), config)
    combined = base.error_estimate + shifted.error_estimate
    assert abs(base.value - shifted.value) <= max(combined, 1e-10 * abs(base.value))


def test_tensor_matches_g1_at_n2():
    case = _g1_n2()
    config = QuadratureConfig(rel_tol=1e-7)
    estimate = integrate_tensor(case.lhs, default_contour(case.lhs), config)
    assert estimate.method_used == MethodUsed.TENSOR
    assert relative_log_difference(estimate.log_value, case.rhs_log) < 1e-6


def test_tensor_is_independent_of_worker_count():
    case = _g1_n2(3)
    contour = default_contour(case.lhs)
    one = integrate(case.lhs, contour, QuadratureConfig(rel_tol=1e-6, jobs=1))
    two = integrate(case.lhs, contour, QuadratureConfig(rel_tol=1e-6, jobs=2))
    assert one.log_value == two.log_value
    assert one.nodes_evaluated == two.nodes_evaluated


def test_tensor_budget():
    case = _g1_n2()
    config = QuadratureConfig(method=QuadratureMethod.TENSOR, max_nodes=100)
    with pytest.raises(BudgetExceeded):
        integrate(case.lhs, default_contour(case.lhs), config)


def test_qmc_agrees_within_error_bars():
    case = _g1_n2()
    config = QuadratureConfig(method=QuadratureMethod.QMC, qmc_points=8192, seed=11)
    estimate = integrate(case.lhs, default_contour(case.lhs), config)
    assert estimate.method_used == MethodUsed.QMC
    deviation = relative_log_difference(estimate.log_value, case.rhs_log)
    assert deviation < 1e-3
    assert deviation <= 3 * estimate.relative_error + 1e-12


def test_qmc_is_deterministic_per_seed():
    case = _g1_n2()
    contour = default_contour(case.lhs)
    config = QuadratureConfig(method=QuadratureMethod.QMC, qmc_points=1024, seed=5)
    first = integrate_qmc(case.lhs, contour, config)
    second = integrate_qmc(case.lhs, contour, config)
    assert first.log_value == second.log_value
    assert first.log_error == second.log_error


def test_qmc_point_sets_shape_and_seed():
    config = QuadratureConfig(qmc_points=256, qmc_randomizations=4, seed=2)
    sets = qmc_point_sets(3, config)
    assert len(sets) == 4
    assert all(s.shape == (256, 3) for s in sets)
    assert np.array_equal(sets[0], qmc_point_sets(3, config)[0])
    assert not np.array_equal(sets[0], sets[1])


def test_sum_constrained_integrand_must_be_reduced(config):
    full = s2_full_integrand(2, [0.4], [0.5, 0.6, 0.7])
    with pytest.raises(BadAxis):
        integrate(full, ContourSpec(offsets=[0.0, 0.0]), config)


def test_zero_prefactor_short_circuits(barnes1_case, config):
    zero = barnes1_case.lhs.model_copy(update={"log_prefactor": complex(-math.inf, 0.0)})
    estimate = integrate(zero, ContourSpec(offsets=[0.0]), config)
    assert estimate.method_used == MethodUsed.ZERO
    assert estimate.value == 0


@pytest.mark.slow
def test_g1_n3_qmc():
    case = build_identity("g1", 3, sample_params("g1", 3, 1))
    config = QuadratureConfig(method=QuadratureMethod.QMC, seed=1)
    estimate = integrate(case.lhs, default_contour(case.lhs), config)
    deviation = relative_log_difference(estimate.log_value, case.rhs_log)
    assert deviation < 1e-3
    assert deviation <= 3 * estimate.relative_error + 1e-12


def _wide_strip_g1_n2(rng):
    """g1 at N=2 with every Re alpha, Re beta in [0.7, 1.2], so offsets in [-0.6, 0.6] all separate the poles."""
    def draw():
        return [[rng.uniform(0.7, 1.2), rng.uniform(-0.5, 0.5)] for _ in range(3)]
    return build_identity("g1", 2, {"alpha": draw(), "beta": draw()})


def test_trapezoid_error_falls_geometrically(barnes1_case):
    deviations = []
    for h in [1.0, 0.5, 0.25, 0.125]:
        # rel_tol above 1 stops after one halving, leaving the plain trapezoid sum at step h
        config = QuadratureConfig(rel_tol=10.0, initial_step=2 * h, max_refinements=1)
        estimate = integrate_line(barnes1_case.lhs, ContourSpec(offsets=[0.0]), config)
        deviations.append(relative_log_difference(estimate.log_value, barnes1_case.rhs_log))
    above_floor = [d for d in deviations if d > 1e-13]
    assert len(above_floor) >= 3
    for coarse, fine in zip(above_floor, above_floor[1:]):
        assert coarse > 10 * fine, deviations


@pytest.mark.parametrize("seed", range(5))
def test_doubling_the_truncation_threshold_stays_within_the_error_bar(seed):
    case = build_identity("barnes1", 1, sample_params("barnes1", 1, seed))
    contour = default_contour(case.lhs)
    base = integrate_line(case.lhs, contour, QuadratureConfig(rel_tol=1e-8))
    wide = integrate_line(case.lhs, contour, QuadratureConfig(rel_tol=1e-8, truncation_log_threshold=80.0))
    assert abs(base.value - wide.value) <= base.error_estimate


@pytest.mark.parametrize("seed", range(5))
def test_first_lemma_contour_shift_invariance(seed):
    rng = np.random.default_rng(100 + seed)
    a = [[rng.uniform(0.7, 1.2), rng.uniform(-0.5, 0.5)] for _ in range(2)]
    b = [[rng.uniform(0.7, 1.2), rng.uniform(-0.5, 0.5)] for _ in range(2)]
    case = build_identity("barnes1", 1, {"a": a, "b": b})
    config = QuadratureConfig(rel_tol=1e-8)
    base = integrate(case.lhs, ContourSpec(offsets=[0.0]), config)
    for shift in (0.2, -0.3):
        moved = integrate(case.lhs, ContourSpec(offsets=[shift]), config)
        assert abs(base.value - moved.value) <= base.error_estimate + moved.error_estimate + 1e-12 * abs(base.value)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(5))
def test_g1_n2_contour_shift_invariance(seed):
    case = _wide_strip_g1_n2(np.random.default_rng(200 + seed))
    config = QuadratureConfig(rel_tol=1e-6)
    base = integrate(case.lhs, ContourSpec(offsets=[0.0, 0.0]), config)
    for offsets in ([0.2, 0.2], [0.2, -0.1]):
        moved = integrate(case.lhs, ContourSpec(offsets=offsets), config)
        assert abs(base.value - moved.value) <= base.error_estimate + moved.error_estimate + 1e-12 * abs(base.value)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(3))
def test_g2_n2_qmc_agrees_with_tensor(seed):
    case = build_identity("g2", 2, sample_params("g2", 2, seed))
    contour = default_contour(case.lhs)
    tensor = integrate(case.lhs, contour, QuadratureConfig(method=QuadratureMethod.TENSOR, rel_tol=1e-6))
    qmc = integrate(case.lhs, contour, QuadratureConfig(method=QuadratureMethod.QMC, qmc_points=8192, seed=seed))
    assert qmc.method_used == MethodUsed.QMC
    assert tensor.method_used == MethodUsed.TENSOR
    assert abs(qmc.value - tensor.value) <= 3 * qmc.error_estimate + tensor.error_estimate


def test_estimate_accessors_follow_the_log_fields(barnes1_case, config):
    estimate = integrate_line(barnes1_case.lhs, ContourSpec(offsets=[0.0]), config)
    assert estimate.value == pytest.approx(complex(np.exp(estimate.log_value)), rel=1e-14)
    assert estimate.error_estimate == pytest.approx(math.exp(estimate.log_error), rel=1e-14)
    assert estimate.relative_error == pytest.approx(estimate.error_estimate / abs(estimate.value), rel=1e-12)
