"""Input validation helpers shared across the toolkit.

Feature matrices are plain ``(n, d)`` float64 arrays.  Every public entry
point funnels its array arguments through :func:`check_feature_matrix` so
that invariants (two-dimensional, at least one row and one column, all
entries finite) are enforced in one place.
"""

from __future__ import annotations

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    EmptyMatrixError,
    NonFiniteValueError,
    ValidationError,
)


def check_feature_matrix(x, name: str = "X") -> np.ndarray:
    """Validate and return a feature matrix as a float64 ``(n, d)`` array.

    Accepts anything ``np.asarray`` can convert.  Raises
    :class:`EmptyMatrixError` when there are no rows or no columns and
    :class:`NonFiniteValueError` when any entry is NaN or infinite.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if arr.size else arr.reshape(0, 1)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be a 2-D matrix, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise EmptyMatrixError(f"{name} must have at least one row and one column")
    if not np.isfinite(arr).all():
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise NonFiniteValueError(
            f"{name}[{bad[0]}, {bad[1]}] is not finite"
        )
    return arr


def check_vector(x, name: str = "v") -> np.ndarray:
    """Validate and return a finite 1-D float64 vector."""
    arr = np.asarray(x, dtype=float).ravel()
    if arr.size == 0:
        raise ValidationError(f"{name} must not be empty")
    if not np.isfinite(arr).all():
        raise NonFiniteValueError(f"{name} contains non-finite values")
    return arr


def check_same_features(*mats: np.ndarray, names: tuple[str, ...] | None = None) -> int:
    """Check that all matrices share the same column count and return it."""
    dims = [m.shape[1] for m in mats]
    if len(set(dims)) > 1:
        labels = names or tuple(f"arg{i}" for i in range(len(mats)))
        detail = ", ".join(f"{n}: d={d}" for n, d in zip(labels, dims))
        raise DimensionMismatchError(f"feature dimensions differ ({detail})")
    return dims[0]


def check_in_range(
    value: float,
    name: str,
    low: float | None = None,
    high: float | None = None,
    low_open: bool = False,
    high_open: bool = False,
) -> float:
    """Check a scalar parameter against an (optionally open) interval."""
    v = float(value)
    if not np.isfinite(v):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    if low is not None and (v < low or (low_open and v == low)):
        raise ValidationError(f"{name}={value!r} is below the allowed range")
    if high is not None and (v > high or (high_open and v == high)):
        raise ValidationError(f"{name}={value!r} is above the allowed range")
    return v


def check_positive_int(value, name: str) -> int:
    """Check that ``value`` is a positive integer and return it as ``int``."""
    iv = int(value)
    if iv != value or iv < 1:
        raise ValidationError(f"{name} must be a positive integer, got {value!r}")
    return iv


def check_seed(value, name: str = "seed") -> int:
    """Check that ``value`` is a 64-bit unsigned integer seed."""
    iv = int(value)
    if iv != value or not 0 <= iv < 2**64:
        raise ValidationError(f"{name} must be an unsigned 64-bit integer, got {value!r}")
    return iv
