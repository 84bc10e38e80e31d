"""Input validation helpers shared by the codecs and the estimator layer."""

import numpy as np


def as_bit_array(x, n_bits: int | None = None, name: str = "bits") -> np.ndarray:
    """Coerce to a uint8 array of 0/1 values; optionally pin the last axis."""
    arr = np.asarray(x)
    if arr.dtype == np.uint8:
        bits = arr
        if bits.size and bits.max(initial=0) > 1:
            raise ValueError(f"{name} must contain only 0/1 values")
    else:
        bits = arr.astype(np.uint8)
        if not np.array_equal(bits, arr):
            raise ValueError(f"{name} must contain only 0/1 values")
        if bits.size and bits.max(initial=0) > 1:
            raise ValueError(f"{name} must contain only 0/1 values")
    if n_bits is not None and bits.shape[-1] != n_bits:
        raise ValueError(f"{name}: expected {n_bits} bits, got {bits.shape[-1]}")
    return bits


def as_llr_array(x, n_values: int | None = None, name: str = "llrs") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if np.isnan(arr).any():
        raise ValueError(f"{name} must not contain NaN")
    if n_values is not None and arr.shape[-1] != n_values:
        raise ValueError(f"{name}: expected {n_values} values, got {arr.shape[-1]}")
    return arr


def check_bit_matrix(X, n_cols: int, name: str = "X") -> np.ndarray:
    """Validate a 2-D (n_frames, n_cols) bit matrix, promoting 1-D input."""
    bits = as_bit_array(X, name=name)
    if bits.ndim == 1:
        bits = bits[None, :]
    if bits.ndim != 2:
        raise ValueError(f"{name} must be 1-D or 2-D")
    if bits.shape[1] != n_cols:
        raise ValueError(f"{name} must have {n_cols} columns, got {bits.shape[1]}")
    return bits


def check_llr_matrix(X, n_cols: int, name: str = "X") -> np.ndarray:
    llrs = as_llr_array(X, name=name)
    if llrs.ndim == 1:
        llrs = llrs[None, :]
    if llrs.ndim != 2:
        raise ValueError(f"{name} must be 1-D or 2-D")
    if llrs.shape[1] != n_cols:
        raise ValueError(f"{name} must have {n_cols} columns, got {llrs.shape[1]}")
    return llrs
