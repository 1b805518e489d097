"""Small input-checking helpers used across the public API."""

from __future__ import annotations

import numbers

import numpy as np


def as_complex(value, name="value") -> complex:
    if isinstance(value, numbers.Complex) and not isinstance(value, bool):
        z = complex(value)
    elif isinstance(value, np.ndarray) and value.ndim == 0:
        z = complex(value.item())
    else:
        raise TypeError(f"{name} must be a complex number, got {type(value).__name__}")
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise ValueError(f"{name} must be finite, got {z!r}")
    return z


def as_complex_array(values, name="values") -> np.ndarray:
    arr = np.asarray(values, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_int(value, name, minimum=None, maximum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ValueError(f"{name} must be <= {maximum}, got {value}")
    return value


def check_positive(value, name) -> float:
    value = float(value)
    if not value > 0 or not np.isfinite(value):
        raise ValueError(f"{name} must be a positive finite number, got {value}")
    return value
