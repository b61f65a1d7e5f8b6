import math
from dataclasses import dataclass

import numpy as np

NEG_INF = float("-inf")


@dataclass(frozen=True)
class ScaledValue:
    """A complex number stored as mantissa * exp(log_scale).

    Products of many gamma factors leave the double range long before the
    ratio we actually compare does, so every accumulation goes through here.
    """

    log_scale: float
    mantissa: complex

    @classmethod
    def zero(cls) -> "ScaledValue":
        return cls(NEG_INF, 0j)

    @classmethod
    def from_log(cls, log_value: complex) -> "ScaledValue":
        if log_value.real == NEG_INF:
            return cls.zero()
        return cls(float(log_value.real), complex(np.exp(1j * log_value.imag)))

    @classmethod
    def sum_logs(cls, log_values: np.ndarray) -> "ScaledValue":
        """Sum exp(log_values) in index order, scaled by the largest real part."""
        log_values = np.asarray(log_values, dtype=np.complex128)
        if log_values.size == 0:
            return cls.zero()
        m = float(np.max(log_values.real))
        if m == NEG_INF:
            return cls.zero()
        mantissa = complex(np.sum(np.exp(log_values - m)))
        return cls(m, mantissa)

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0 or self.log_scale == NEG_INF

    def log_abs(self) -> float:
        if self.is_zero:
            return NEG_INF
        return self.log_scale + math.log(abs(self.mantissa))

    def log(self) -> complex:
        """Principal log of the value; real part -inf for zero."""
        if self.is_zero:
            return complex(NEG_INF, 0.0)
        return complex(self.log_abs(), math.atan2(self.mantissa.imag, self.mantissa.real))

    def to_complex(self) -> complex:
        if self.is_zero:
            return 0j
        with np.errstate(over="ignore"):
            return complex(self.mantissa * np.exp(self.log_scale))

    def scale(self, log_factor: float) -> "ScaledValue":
        if self.is_zero:
            return self
        return ScaledValue(self.log_scale + log_factor, self.mantissa)

    def _aligned(self, other: "ScaledValue"):
        if self.is_zero:
            return other.log_scale, 0j, other.mantissa
        if other.is_zero:
            return self.log_scale, self.mantissa, 0j
        m = max(self.log_scale, other.log_scale)
        return (
            m,
            self.mantissa * math.exp(self.log_scale - m),
            other.mantissa * math.exp(other.log_scale - m),
        )

    def __add__(self, other: "ScaledValue") -> "ScaledValue":
        m, a, b = self._aligned(other)
        return ScaledValue(m, a + b)

    def __sub__(self, other: "ScaledValue") -> "ScaledValue":
        m, a, b = self._aligned(other)
        return ScaledValue(m, a - b)


def relative_log_difference(log_a: complex, log_b: complex) -> float:
    """|a - b| / |b| for two values given as logs; inf when b is zero."""
    if log_b.real == NEG_INF:
        return 0.0 if log_a.real == NEG_INF else math.inf
    if log_a.real == NEG_INF:
        return 1.0
    delta = complex(log_a - log_b)
    if delta.real > 700:
        return math.inf
    return abs(np.expm1(delta))
