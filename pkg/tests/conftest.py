import math

import pytest

from app.schemas.quadrature import QuadratureConfig
from app.services.catalog_service import build_identity


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance cases (QMC in three dimensions, sweeps)")


def assert_log_close(actual: complex, expected: complex, tol: float = 1e-12):
    """Two logs agree in real part and in imaginary part modulo 2*pi."""
    assert abs(actual.real - expected.real) <= tol * max(1.0, abs(expected.real)), (actual, expected)
    phase = math.remainder(actual.imag - expected.imag, 2 * math.pi)
    assert abs(phase) <= tol * max(1.0, abs(expected.imag)), (actual, expected)


@pytest.fixture
def config():
    return QuadratureConfig(rel_tol=1e-8)


@pytest.fixture
def barnes1_case():
    return build_identity("barnes1", 1, {"a": [0.5, 0.7], "b": [0.6, 0.9]})
