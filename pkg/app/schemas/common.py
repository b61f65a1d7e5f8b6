import math
from numbers import Number
from typing import Any, Annotated, List

from pydantic import BeforeValidator, PlainSerializer


def parse_complex(value: Any, allow_neg_inf: bool = False) -> complex:
    """Accept a number, a [re, im] pair or a complex and return a complex.

    Components must be finite; with `allow_neg_inf` the real part may be -inf
    (log of zero).
    """
    if isinstance(value, complex):
        z = value
    elif isinstance(value, bool):
        raise ValueError("booleans are not complex numbers")
    elif isinstance(value, Number):
        z = complex(float(value), 0.0)
    elif isinstance(value, (list, tuple)) and len(value) == 2:
        # JSON has no -inf; serialized log-zeros come back as null
        re = -math.inf if value[0] is None and allow_neg_inf else float(value[0])
        z = complex(re, float(value[1]))
    elif isinstance(value, dict) and {"re", "im"} <= set(value):
        z = complex(float(value["re"]), float(value["im"]))
    else:
        raise ValueError(f"cannot interpret {value!r} as a complex number")
    if math.isnan(z.real) or math.isnan(z.imag):
        raise ValueError("NaN component in complex value")
    if not math.isfinite(z.imag):
        raise ValueError("non-finite imaginary part")
    if not math.isfinite(z.real) and not (allow_neg_inf and z.real == -math.inf):
        raise ValueError("non-finite real part")
    return z


def dump_complex(z: complex) -> List[float]:
    return [float(z.real), float(z.imag)]


Cx = Annotated[
    complex,
    BeforeValidator(parse_complex),
    PlainSerializer(dump_complex, return_type=list),
]

# Log-domain value: a real part of -inf encodes an exact zero.
LogCx = Annotated[
    complex,
    BeforeValidator(lambda v: parse_complex(v, allow_neg_inf=True)),
    PlainSerializer(dump_complex, return_type=list),
]
