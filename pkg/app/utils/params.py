import json
import os
from typing import Any, Dict, List

from app.core.exceptions import SchemaMismatch, UsageError
from app.schemas.common import parse_complex


def load_params(source: str) -> Dict[str, Any]:
    """Parameters from a JSON file path or an inline JSON object."""
    try:
        if os.path.isfile(source):
            with open(source, "r", encoding="utf-8") as f:
                data = json.load(f)
        else:
            data = json.loads(source)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read parameters from {source!r}: {e}")
    if not isinstance(data, dict):
        raise UsageError("parameters must be a JSON object of named values")
    return data


def parse_scalar(name: str, value: Any) -> complex:
    try:
        return parse_complex(value)
    except (TypeError, ValueError) as e:
        raise SchemaMismatch(f"parameter {name!r}: {e}")


def parse_vector(name: str, value: Any, length: int) -> List[complex]:
    """A vector of `length` complex entries; each entry a number or [re, im].

    A bare number is accepted for length-1 vectors.
    """
    if not isinstance(value, (list, tuple)):
        if length == 1:
            return [parse_scalar(name, value)]
        raise SchemaMismatch(f"parameter {name!r} must be a list of {length} values")
    if len(value) != length:
        raise SchemaMismatch(f"parameter {name!r} needs {length} values, got {len(value)}")
    return [parse_scalar(f"{name}[{i}]", v) for i, v in enumerate(value)]


def complex_document(value: complex) -> List[float]:
    return [float(value.real), float(value.imag)]
