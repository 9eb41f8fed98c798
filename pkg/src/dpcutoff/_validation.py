"""Small input validation helpers shared by the public API."""

import numbers

import numpy as np
from sklearn.utils import check_array


def check_positive(x, name, *, allow_zero=False):
    """Return ``x`` as a float, raising ``ValueError`` unless it is positive."""
    if isinstance(x, bool) or not isinstance(x, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {type(x).__name__}")
    x = float(x)
    if not np.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x}")
    if x < 0 or (x == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValueError(f"{name} must be {bound}, got {x}")
    return x


def check_index(j, name, *, minimum=1):
    if isinstance(j, bool) or not isinstance(j, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(j).__name__}")
    j = int(j)
    if j < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {j}")
    return j


def check_tau(tau):
    tau = check_positive(tau, "tau")
    if tau <= 1.0:
        raise ValueError(f"tau must be > 1, got {tau}")
    return tau


def check_coefficients(y, name="y"):
    """Validate a finite one-dimensional coefficient sequence as float64."""
    arr = check_array(
        np.asarray(y, dtype=float).reshape(-1) if np.ndim(y) == 0 else y,
        ensure_2d=False,
        dtype=np.float64,
        ensure_min_samples=0,
        input_name=name,
    )
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr
