"""Small argument-validation helpers shared across modules."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import DomainError


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be a positive finite number, got {value!r}")
    return value


def check_non_negative(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0.0:
        raise DomainError(f"{name} must be a non-negative finite number, got {value!r}")
    return value


def check_finite(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


def check_probability(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value) or not 0.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def check_positive_int(value: int, name: str) -> int:
    if isinstance(value, bool) or int(value) != value or value <= 0:
        raise DomainError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_non_negative_int(value: int, name: str) -> int:
    if isinstance(value, bool) or int(value) != value or value < 0:
        raise DomainError(f"{name} must be a non-negative integer, got {value!r}")
    return int(value)


def as_point(value: Sequence[float], name: str) -> np.ndarray:
    """Coerce to a finite float64 vector of shape (2,)."""
    arr = np.asarray(value, dtype=float)
    if arr.shape != (2,):
        raise DomainError(f"{name} must have shape (2,), got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {arr!r}")
    return arr


def as_points(value, name: str, min_rows: int = 1) -> np.ndarray:
    """Coerce to a finite float64 array of shape (n, 2) with n >= min_rows."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainError(f"{name} must have shape (n, 2), got shape {arr.shape}")
    if arr.shape[0] < min_rows:
        raise DomainError(
            f"{name} needs at least {min_rows} rows, got {arr.shape[0]}"
        )
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must contain only finite values")
    return arr
