"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

import numbers

import numpy as np

UNIT_CIRCLE_TOL = 1e-12


def check_unit_modulus(t, tol=UNIT_CIRCLE_TOL):
    """Return ``t`` as a complex array, rejecting points off the unit circle."""
    t = np.asarray(t, dtype=complex)
    if t.size and np.max(np.abs(np.abs(t) - 1.0)) > tol:
        raise ValueError(f"evaluation point(s) not on the unit circle (tol {tol:g})")
    return t


def check_square_matrix(value, dim=None, name="matrix"):
    """Coerce ``value`` into a complex ``dim x dim`` array.

    Scalars are accepted when ``dim`` is 1 or None.
    """
    arr = np.asarray(value, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"{name} must be {dim}x{dim}, got {arr.shape[0]}x{arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_increasing(sizes, name="sizes"):
    sizes = [check_positive_int(s, name) for s in sizes]
    if not sizes:
        raise ValueError(f"{name} must be non-empty")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError(f"{name} must be strictly increasing, got {sizes}")
    return sizes
