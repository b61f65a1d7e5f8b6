import cmath
import logging
import math
from typing import Iterable, Tuple

import numpy as np

from app.core.exceptions import PoleArgument, ZeroBase

logger = logging.getLogger(__name__)

# Lanczos series, g = 607/128 with 14 terms (Numerical Recipes, 3rd ed. gammln).
LANCZOS_SHIFT = 5.24218750000000000
LANCZOS_BASE = 0.999999999999997092
LANCZOS_COEFS = np.array([
    57.1562356658629235, -59.5979603554754912,
    14.1360979747417471, -0.491913816097620199,
    .339946499848118887e-4, .465236289270485756e-4,
    -.983744753048795646e-4, .158088703224912494e-3,
    -.210264441724104883e-3, .217439618115212643e-3,
    -.164318106536763890e-3, .844182239838527433e-4,
    -.261908384015814087e-4, .368991826595316234e-5,
])
SQRT_TWO_PI = 2.5066282746310005
LOG_PI = math.log(math.pi)
LOG_I_HALF = complex(math.log(0.5), math.pi / 2)

POLE_TOLERANCE = 1e-12


def _lanczos(z: np.ndarray) -> np.ndarray:
    """log Gamma for Re z >= 1/2."""
    tmp = z + LANCZOS_SHIFT
    tmp = (z + 0.5) * np.log(tmp) - tmp
    ser = np.full(z.shape, LANCZOS_BASE, dtype=np.complex128)
    y = z
    for c in LANCZOS_COEFS:
        y = y + 1.0
        ser = ser + c / y
    return tmp + np.log(SQRT_TWO_PI * ser / z)


def log_sin_pi(z: np.ndarray) -> np.ndarray:
    """log sin(pi z) without overflow for large |Im z|.

    For Im z >= 0, sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 i pi z}); the lower
    half-plane follows by conjugation.
    """
    z = np.asarray(z, dtype=np.complex128)
    upper = z.imag >= 0
    w = np.where(upper, z, np.conj(z))
    val = -1j * np.pi * w + np.log1p(-np.exp(2j * np.pi * w)) + LOG_I_HALF
    return np.where(upper, val, np.conj(val))


def pole_mask(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    n = np.round(z.real)
    return (n <= 0) & (np.abs(z - n) <= POLE_TOLERANCE)


def log_gamma_array(z) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised principal-branch log Gamma.

    Returns (values, poles). Entries flagged in `poles` hold +inf so that a
    denominator factor turns into an exact zero; callers decide whether a pole
    is an error.
    """
    z = np.asarray(z, dtype=np.complex128)
    poles = pole_mask(z)
    safe = np.where(poles, 0.5 + 0j, z)
    reflect = safe.real < 0.5
    w = np.where(reflect, 1.0 - safe, safe)
    base = _lanczos(w)
    if np.any(reflect):
        reflected = LOG_PI - log_sin_pi(safe) - base
        values = np.where(reflect, reflected, base)
    else:
        values = base
    values = np.where(poles, complex(np.inf, 0.0), values)
    return values, poles


def log_gamma(z: complex) -> complex:
    """Principal log Gamma(z); PoleArgument at non-positive integers."""
    z = complex(z)
    values, poles = log_gamma_array(np.array([z]))
    if poles[0]:
        raise PoleArgument(f"log_gamma evaluated at pole z={z}", {"z": [z.real, z.imag]})
    return complex(values[0])


def gamma_ratio_log(numerators: Iterable[complex], denominators: Iterable[complex]) -> complex:
    """sum log Gamma(numerators) - sum log Gamma(denominators).

    A denominator at a pole makes the ratio vanish (real part -inf).
    """
    num = np.asarray(list(numerators), dtype=np.complex128)
    den = np.asarray(list(denominators), dtype=np.complex128)
    num_vals, num_poles = log_gamma_array(num)
    if np.any(num_poles):
        index = int(np.flatnonzero(num_poles)[0])
        raise PoleArgument(
            f"numerator gamma argument {complex(num[index])} is a pole",
            {"index": index},
        )
    den_vals, den_poles = log_gamma_array(den)
    imag = float(np.sum(num_vals.imag) - np.sum(np.where(den_poles, 0.0, den_vals.imag)))
    if np.any(den_poles):
        return complex(-math.inf, imag)
    real = float(np.sum(num_vals.real) - np.sum(den_vals.real))
    return complex(real, imag)


def chain_constant(alpha: complex, beta: complex, s: float) -> complex:
    """log of Gamma(2s) Gamma(a+b-2s) / (Gamma(a) Gamma(b)), symmetric in (a, b)."""
    a, b = sorted((complex(alpha), complex(beta)), key=lambda v: (v.real, v.imag))
    return gamma_ratio_log([2.0 * s, a + b - 2.0 * s], [a, b])


def complex_power(base: complex, exponent: complex) -> complex:
    """Principal-branch base**exponent."""
    base = complex(base)
    if base == 0:
        raise ZeroBase("complex_power with zero base")
    return cmath.exp(complex(exponent) * cmath.log(base))
