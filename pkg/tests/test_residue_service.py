import cmath

import pytest

from app.core.exceptions import SchemaMismatch, SeriesDivergent
from app.schemas.quadrature import QuadratureConfig
from app.services.catalog_service import build_identity, sample_params, verify
from app.services.residue_service import cross_check_residue


def _rhs(case) -> complex:
    return cmath.exp(case.rhs_log)


@pytest.mark.parametrize("a, b", [([0.5, 0.7], [0.6, 0.9]), ([1.1, 0.3], [0.2, 0.8])])
def test_residue_sum_matches_closed_form(a, b):
    case = build_identity("barnes1", 1, {"a": a, "b": b})
    assert cross_check_residue(case) == pytest.approx(_rhs(case), rel=1e-8)


@pytest.mark.parametrize("a, b", [([0.5, 0.7], [0.6, 0.9]), ([1.1, 0.3], [0.2, 0.8])])
def test_three_way_agreement(a, b):
    case = build_identity("barnes1", 1, {"a": a, "b": b})
    report = verify(case, QuadratureConfig(rel_tol=1e-8))
    quadrature = complex(report.lhs.re, report.lhs.im)
    residues = cross_check_residue(case)
    assert residues == pytest.approx(quadrature, rel=1e-8)
    assert residues == pytest.approx(_rhs(case), rel=1e-8)


@pytest.mark.parametrize("seed", range(5))
def test_seeded_draws_agree_three_ways(seed):
    case = build_identity("barnes1", 1, sample_params("barnes1", 1, seed))
    report = verify(case, QuadratureConfig(rel_tol=1e-8))
    quadrature = complex(report.lhs.re, report.lhs.im)
    residues = cross_check_residue(case)
    assert residues == pytest.approx(_rhs(case), rel=1e-8)
    assert residues == pytest.approx(quadrature, rel=1e-8)
    assert quadrature == pytest.approx(_rhs(case), rel=1e-8)


def test_first_gustafson_at_n_one_is_accepted():
    case = build_identity("g1", 1, {"alpha": [0.5, 0.7], "beta": [0.6, 0.9]})
    assert cross_check_residue(case) == pytest.approx(_rhs(case), rel=1e-8)


def test_pole_collision_is_rejected():
    case = build_identity("barnes1", 1, {"a": [0.5, 0.7], "b": [0.6, 0.6]})
    with pytest.raises(SeriesDivergent):
        cross_check_residue(case)


def test_integer_spaced_poles_are_rejected():
    case = build_identity("barnes1", 1, {"a": [0.5, 0.7], "b": [0.4, 1.4]})
    with pytest.raises(SeriesDivergent):
        cross_check_residue(case)


def test_other_identities_are_rejected():
    case = build_identity("g1", 2, sample_params("g1", 2, 0))
    with pytest.raises(SchemaMismatch):
        cross_check_residue(case)
