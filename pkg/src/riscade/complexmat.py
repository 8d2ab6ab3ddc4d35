"""Complex matrix helpers used by the channel and pilot math.

Matrices are plain numpy complex128 arrays; these wrappers pin down the
shape contracts and the conventions (conjugate transpose, Frobenius norm,
column-major vectorization) the rest of the package relies on.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError


def as_cmatrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got ndim={m.ndim}")
    return m


def matmul(a, b) -> np.ndarray:
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def herm(a) -> np.ndarray:
    """Conjugate transpose."""
    return as_cmatrix(a).conj().T


def fro_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=np.complex128)))


def vec(a) -> np.ndarray:
    """Column-major (stack the columns) vectorization of a matrix."""
    return as_cmatrix(a).flatten(order="F")


def unvec(v, rows: int, cols: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128).ravel()
    if v.size != rows * cols:
        raise ShapeError(f"cannot reshape {v.size} entries to {rows}x{cols}")
    return v.reshape((rows, cols), order="F")
