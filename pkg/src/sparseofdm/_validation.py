"""Input validation helpers shared by the estimators and the link chain.

scikit-learn's ``check_array`` refuses complex input, so the complex-valued
checks live here.
"""
import numbers

import numpy as np


def check_complex_vector(x, name="x", length=None, allow_empty=False):
    """Return ``x`` as a finite 1-D complex128 array."""
    arr = np.asarray(x)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size == 0 and not allow_empty:
        raise ValueError(f"{name} must not be empty")
    arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    if length is not None and arr.size != length:
        raise ValueError(f"{name} must have length {length}, got {arr.size}")
    return arr


def check_complex_matrix(a, name="a"):
    arr = np.asarray(a)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def check_index_set(idx, upper, name="indices", allow_empty=False):
    """Validate integer indices in ``[0, upper)`` and return them as int64."""
    arr = np.asarray(idx)
    if arr.ndim == 2 and arr.shape[1] == 1:
        # sklearn-style column vector
        arr = arr[:, 0]
    arr = np.atleast_1d(arr)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        if allow_empty:
            return arr.astype(np.int64)
        raise ValueError(f"{name} must not be empty")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ValueError(f"{name} must be integers")
    arr = arr.astype(np.int64)
    if arr.min() < 0 or arr.max() >= upper:
        raise ValueError(f"{name} out of range [0, {upper})")
    return arr


def check_bits(bits, name="bits"):
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D")
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ValueError(f"{name} must contain only 0/1")
    return arr.astype(np.uint8)


def check_nonnegative(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be a finite nonnegative real, got {value!r}")
    return float(value)


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a finite positive real, got {value!r}")
    return float(value)
