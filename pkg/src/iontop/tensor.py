"""Dense complex linear algebra kernel.

Operators are plain ``numpy`` arrays of dtype ``complex128``; states are 1-d
arrays. Everywhere in the package the spin factor of a joint space is the
slow (leftmost) index and the boson factor the fast one.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DimensionError, NumericError

MAX_DIM = 5000

# Taylor order for the scaled kernel; with ||G/2^s||_1 <= 0.5 the truncation
# error is below 0.5**19 / 19! ~ 1.6e-23.
_TAYLOR_ORDER = 18
_SCALED_NORM = 0.5


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-d array, got shape {m.shape}")
    return m


def is_unitary(u: np.ndarray, tol: float = 1e-10) -> bool:
    """True if max-entry ``|U^dag U - I| <= tol``."""
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    return unitarity_error(u) <= tol


def unitarity_error(u: np.ndarray) -> float:
    return float(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max())


def is_normalized(psi: np.ndarray, tol: float = 1e-10) -> bool:
    return abs(np.linalg.norm(psi) - 1.0) <= tol


def matrix_exponential(g) -> np.ndarray:
    """Exponential of a square complex matrix.

    Scaling and squaring around a truncated Taylor series. The input is
    scaled by ``2**-s`` until its 1-norm is at most 0.5, the series is summed
    by Horner's rule and the result squared ``s`` times. Diagonal inputs are
    exponentiated entrywise.

    Raises
    ------
    DimensionError
        If ``g`` is not square or larger than ``MAX_DIM``.
    NumericError
        If ``g`` has non-finite entries.
    """
    g = as_matrix(g)
    n, m = g.shape
    if n != m:
        raise DimensionError(f"matrix_exponential needs a square matrix, got {g.shape}")
    if n > MAX_DIM:
        raise DimensionError(f"dimension {n} exceeds guard {MAX_DIM}")
    if not np.all(np.isfinite(g)):
        raise NumericError("matrix has non-finite entries")

    if np.count_nonzero(g - np.diag(np.diagonal(g))) == 0:
        return np.diag(np.exp(np.diagonal(g)))

    norm = np.abs(g).sum(axis=0).max()
    s = 0
    if norm > _SCALED_NORM:
        s = int(math.ceil(math.log2(norm / _SCALED_NORM)))
    a = g / (2.0 ** s)

    eye = np.eye(n, dtype=complex)
    result = eye.copy()
    for k in range(_TAYLOR_ORDER, 0, -1):
        result = eye + (a @ result) / k
    for _ in range(s):
        result = result @ result
    return result


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product with ``a`` as the slow index."""
    a = as_matrix(a)
    b = as_matrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows > MAX_DIM * 4 or cols > MAX_DIM * 4:
        raise DimensionError(f"tensor product of shape ({rows}, {cols}) exceeds guard")
    return np.kron(a, b)


def distance_up_to_global_phase(u, v) -> float:
    """Frobenius distance between ``u`` and ``v`` minimized over a global phase.

    Equals ``sqrt(max(0, 2d - 2|tr(U^dag V)|))`` for unitaries of size ``d``.
    Evaluated as ``||U - e^{i phi} V||_F`` at the optimal phase, which avoids
    the square root of a cancellation.
    """
    u = as_matrix(u)
    v = as_matrix(v)
    if u.shape != v.shape or u.shape[0] != u.shape[1]:
        raise DimensionError(f"shape mismatch: {u.shape} vs {v.shape}")
    overlap = np.vdot(v, u)  # tr(V^dag U)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(u - phase * v))


def max_entry(a) -> float:
    return float(np.abs(a).max())
