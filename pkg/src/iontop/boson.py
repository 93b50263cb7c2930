"""Truncated Fock-space vibrational mode."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionError, TruncationError
from .tensor import matrix_exponential

DEFAULT_CUTOFF = 32


class LeakageWarning(UserWarning):
    """Population in the top Fock levels exceeds the mode's threshold."""


@dataclass(frozen=True)
class FockMode:
    """Basis ``|0> ... |cutoff>``; dimension ``cutoff + 1``."""

    cutoff: int = DEFAULT_CUTOFF
    leakage_threshold: float = 1e-10

    def __post_init__(self):
        if self.cutoff < 4:
            raise DimensionError(f"cutoff must be at least 4, got {self.cutoff}")

    @property
    def dim(self) -> int:
        return self.cutoff + 1

    @property
    def max_excursion(self) -> float:
        """Largest allowed ``|beta|`` for a displacement."""
        return math.sqrt(self.cutoff) / 2


@lru_cache(maxsize=32)
def _annihilation(cutoff: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, cutoff + 1)), 1).astype(complex)
    a.setflags(write=False)
    return a


def annihilation(mode: FockMode) -> np.ndarray:
    return _annihilation(mode.cutoff).copy()


def number_operator(mode: FockMode) -> np.ndarray:
    return np.diag(np.arange(mode.dim)).astype(complex)


def quadrature(mode: FockMode, which: str) -> np.ndarray:
    """``X = (a + a^dag)/sqrt 2`` or ``P = -i (a - a^dag)/sqrt 2``."""
    a = _annihilation(mode.cutoff)
    ad = a.conj().T
    if which == "X":
        return (a + ad) / math.sqrt(2)
    if which == "P":
        return -1j * (a - ad) / math.sqrt(2)
    raise ValueError(f"quadrature must be 'X' or 'P', got {which!r}")


def check_excursion(mode: FockMode, beta: complex) -> None:
    if abs(beta) > mode.max_excursion + 1e-12:
        raise TruncationError(
            f"|beta| = {abs(beta):.4g} exceeds sqrt(cutoff)/2 = {mode.max_excursion:.4g}; "
            "raise the cutoff"
        )


def displacement(mode: FockMode, beta: complex) -> np.ndarray:
    """``exp(beta a^dag - beta* a)`` exponentiated in the truncated space."""
    check_excursion(mode, beta)
    return _displacement(mode.cutoff, complex(beta)).copy()


@lru_cache(maxsize=256)
def _displacement(cutoff: int, beta: complex) -> np.ndarray:
    a = _annihilation(cutoff)
    d = matrix_exponential(beta * a.conj().T - np.conj(beta) * a)
    d.setflags(write=False)
    return d


def leakage(mode: FockMode, psi: np.ndarray) -> float:
    """Population of the top two Fock levels."""
    psi = np.asarray(psi)
    return float(np.sum(np.abs(psi[-2:]) ** 2))


def reference_state(mode: FockMode, kind: str = "ground", n: int = 0,
                    alpha: complex = 0.0) -> np.ndarray:
    """Ground, Fock ``|n>`` or coherent ``|alpha>`` state of the mode.

    A :class:`LeakageWarning` is emitted when the result's leakage exceeds
    ``mode.leakage_threshold``.
    """
    psi = np.zeros(mode.dim, dtype=complex)
    if kind == "ground":
        psi[0] = 1.0
    elif kind == "fock":
        if not 0 <= n <= mode.cutoff - 2:
            raise TruncationError(f"Fock level {n} must be at most cutoff - 2 = {mode.cutoff - 2}")
        psi[n] = 1.0
    elif kind == "coherent":
        psi = displacement(mode, alpha)[:, 0].copy()
    else:
        raise ValueError(f"unknown reference state {kind!r}")
    leak = leakage(mode, psi)
    if leak > mode.leakage_threshold:
        warnings.warn(f"leakage {leak:.3g} above threshold {mode.leakage_threshold:.3g}",
                      LeakageWarning, stacklevel=2)
    return psi
