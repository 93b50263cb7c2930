"""Collective and single-ion spin operators, rotations and coherent states.

Two representations of an N-ion register are supported:

* ``"symmetric"``: the permutation-symmetric (Dicke) sector, basis
  ``|j, m>`` with ``j = N/2`` and ``m`` ascending from ``-j`` to ``j``;
  dimension ``N + 1``.
* ``"full"``: the product space of dimension ``2**N``. Basis states are
  labelled by integer codes in ascending order; ion ``i`` is bit ``i`` of the
  code and a set bit means the ion is excited.

Single-ion operators follow ``sigma_z = (|e><e| - |g><g|) / 2``, so collective
``J_z`` has eigenvalues ``-N/2, ..., N/2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, RepresentationError, StateError
from .tensor import MAX_DIM, matrix_exponential

SYMMETRIC = "symmetric"
FULL = "full"
AXES = ("x", "y", "z")

MAX_FULL_IONS = 12

# single spin-1/2 operators in the (|g>, |e>) basis
_SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)
_SIGMA = {
    "x": np.array([[0, 0.5], [0.5, 0]], dtype=complex),
    "y": np.array([[0, 0.5j], [-0.5j, 0]], dtype=complex),
    "z": np.array([[-0.5, 0], [0, 0.5]], dtype=complex),
}


@dataclass(frozen=True)
class SpinRegister:
    n_ions: int
    representation: str = SYMMETRIC

    def __post_init__(self):
        if self.n_ions < 1:
            raise DimensionError("a register needs at least one ion")
        if self.representation not in (SYMMETRIC, FULL):
            raise RepresentationError(f"unknown representation {self.representation!r}")
        if self.representation == FULL and self.n_ions > MAX_FULL_IONS:
            raise DimensionError(f"full representation limited to {MAX_FULL_IONS} ions")
        if self.representation == SYMMETRIC and self.n_ions + 1 > MAX_DIM:
            raise DimensionError(f"dimension guard {MAX_DIM} exceeded")

    @property
    def j(self) -> float:
        return self.n_ions / 2

    @property
    def dim(self) -> int:
        if self.representation == SYMMETRIC:
            return self.n_ions + 1
        return 2 ** self.n_ions

    @property
    def is_full(self) -> bool:
        return self.representation == FULL

    @classmethod
    def from_j(cls, j: float) -> "SpinRegister":
        n = int(round(2 * j))
        if abs(n - 2 * j) > 1e-12:
            raise DimensionError(f"j must be a half-integer, got {j}")
        return cls(n, SYMMETRIC)


@dataclass(frozen=True)
class SpinState:
    register: SpinRegister
    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=complex)
        if v.shape != (self.register.dim,):
            raise DimensionError(
                f"state of length {v.shape} does not match register dimension {self.register.dim}"
            )
        object.__setattr__(self, "vector", v)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


def _check_axis(axis: str) -> None:
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")


def m_values(register: SpinRegister) -> np.ndarray:
    """``J_z`` eigenvalue of every basis state, in basis order."""
    if register.representation == SYMMETRIC:
        return np.arange(register.n_ions + 1) - register.j
    codes = np.arange(register.dim)
    weight = np.zeros(register.dim)
    for i in range(register.n_ions):
        weight += (codes >> i) & 1
    return weight - register.j


def excitation_bits(register: SpinRegister, ion: int) -> np.ndarray:
    """0/1 excitation of ``ion`` in every full-representation basis state."""
    return (np.arange(register.dim) >> ion) & 1


@lru_cache(maxsize=64)
def _symmetric_ops(n_ions: int):
    j = n_ions / 2
    m = np.arange(n_ions + 1) - j
    # <m+1|J+|m> sits just below the diagonal for ascending m
    jp = np.diag(np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1)), -1).astype(complex)
    jm = jp.conj().T
    ops = {
        "x": (jp + jm) / 2,
        "y": (jp - jm) / 2j,
        "z": np.diag(m).astype(complex),
    }
    for op in ops.values():
        op.setflags(write=False)
    return ops


def _embed_single(n_ions: int, ion: int, op: np.ndarray) -> np.ndarray:
    left = np.eye(2 ** (n_ions - 1 - ion))
    right = np.eye(2 ** ion)
    return np.kron(np.kron(left, op), right)


def collective_operator(register: SpinRegister, axis: str) -> np.ndarray:
    """``J_axis`` in the register's representation."""
    _check_axis(axis)
    if register.representation == SYMMETRIC:
        return _symmetric_ops(register.n_ions)[axis].copy()
    return partial_operator(register, range(register.n_ions), axis)


def single_ion_operator(register: SpinRegister, ion: int, axis: str) -> np.ndarray:
    """``sigma_axis`` on one ion, identity on the others (full representation)."""
    _check_axis(axis)
    if not register.is_full:
        raise RepresentationError("single-ion operators need the full representation")
    if not 0 <= ion < register.n_ions:
        raise IndexError(f"ion {ion} out of range for {register.n_ions} ions")
    return _embed_single(register.n_ions, ion, _SIGMA[axis])


def partial_operator(register: SpinRegister, ions: Iterable[int], axis: str) -> np.ndarray:
    """Sum of ``sigma_axis`` over a subset of ions."""
    ions = tuple(ions)
    out = np.zeros((register.dim, register.dim), dtype=complex)
    for i in ions:
        out += single_ion_operator(register, i, axis)
    return out


def _resolve_targets(register: SpinRegister, targets) -> tuple[int, ...] | None:
    if targets is None or targets == "all":
        return None
    targets = tuple(sorted(set(int(t) for t in targets)))
    if targets == tuple(range(register.n_ions)):
        return None
    if not register.is_full:
        raise RepresentationError("ion subsets need the full representation")
    for t in targets:
        if not 0 <= t < register.n_ions:
            raise IndexError(f"ion {t} out of range for {register.n_ions} ions")
    return targets


def carrier_rotation(register: SpinRegister, axis: str, angle: float,
                     targets: Sequence[int] | str | None = None) -> np.ndarray:
    """``exp(-i * angle * W)`` with ``W`` the (partial) collective operator.

    ``targets`` is ``None``/``"all"`` for every ion, or a collection of ion
    indices (full representation only).
    """
    _check_axis(axis)
    subset = _resolve_targets(register, targets)
    if subset is None:
        w = collective_operator(register, axis)
    else:
        w = partial_operator(register, subset, axis)
    return matrix_exponential(-1j * angle * w)


def basis_state(register: SpinRegister, index: int) -> SpinState:
    v = np.zeros(register.dim, dtype=complex)
    v[index] = 1.0
    return SpinState(register, v)


def dicke_state(register: SpinRegister, m: float) -> SpinState:
    """``|j, m>`` in the symmetric representation."""
    if register.is_full:
        raise RepresentationError("dicke_state builds symmetric-representation states")
    k = m + register.j
    if abs(k - round(k)) > 1e-12 or not 0 <= round(k) <= register.n_ions:
        raise ValueError(f"m = {m} is not valid for j = {register.j}")
    return basis_state(register, int(round(k)))


def spin_coherent_state(register: SpinRegister, theta: float, phi: float) -> SpinState:
    """``exp[i theta (Jx sin(phi) - Jy cos(phi))] |j, -j>``.

    The state points along ``-(sin(theta)cos(phi), sin(theta)sin(phi),
    cos(theta))``; see :func:`coherent_direction`.
    """
    if register.is_full:
        raise RepresentationError("spin coherent states live in the symmetric representation")
    if not -1e-12 <= theta <= math.pi + 1e-12:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    jx = collective_operator(register, "x")
    jy = collective_operator(register, "y")
    gen = 1j * theta * (jx * math.sin(phi) - jy * math.cos(phi))
    psi = matrix_exponential(gen)[:, 0]
    return SpinState(register, psi)


def coherent_amplitudes(j: float, theta, phi) -> np.ndarray:
    """Closed-form amplitudes of :func:`spin_coherent_state` on ``|j, m>``.

    Vectorized over ``theta``/``phi``; the last axis indexes ``m`` ascending.
    Used for fast Husimi grids.
    """
    n = int(round(2 * j))
    k = np.arange(n + 1)  # k = j + m
    theta = np.asarray(theta, dtype=float)[..., None]
    phi = np.asarray(phi, dtype=float)[..., None]
    log_binom = np.array([math.lgamma(n + 1) - math.lgamma(i + 1) - math.lgamma(n - i + 1)
                          for i in k])
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_mag = 0.5 * log_binom + (n - k) * np.log(c) + k * np.log(s)
    mag = np.exp(log_mag)
    # exact zeros at the poles (0 * log 0)
    mag = np.where((k == 0) & (s == 0), np.cos(theta / 2) ** n, mag)
    mag = np.where((k == n) & (c == 0), np.sin(theta / 2) ** n, mag)
    return mag * (-np.exp(-1j * phi)) ** k


def coherent_direction(theta: float, phi: float) -> np.ndarray:
    """Unit vector ``<J>/j`` of the coherent state labelled ``(theta, phi)``."""
    return -np.array([math.sin(theta) * math.cos(phi),
                      math.sin(theta) * math.sin(phi),
                      math.cos(theta)])


def coherent_angles(direction) -> tuple[float, float]:
    """Inverse of :func:`coherent_direction`."""
    x, y, z = -np.asarray(direction, dtype=float) / np.linalg.norm(direction)
    theta = math.acos(max(-1.0, min(1.0, z)))
    phi = math.atan2(y, x) % (2 * math.pi)
    return theta, phi


def expectations(state: SpinState) -> np.ndarray:
    """``(<Jx>, <Jy>, <Jz>)``."""
    v = state.vector
    return np.array([np.vdot(v, collective_operator(state.register, a) @ v).real for a in AXES])


@dataclass(frozen=True)
class HusimiGrid:
    j: float
    theta: np.ndarray  # band midpoints in [0, pi]
    phi: np.ndarray  # left edges of equal steps in [0, 2 pi)
    q: np.ndarray  # shape (n_theta, n_phi)

    @property
    def cell_area(self) -> np.ndarray:
        dtheta = math.pi / len(self.theta)
        dphi = 2 * math.pi / len(self.phi)
        return (np.sin(self.theta) * dtheta * dphi)[:, None] * np.ones(len(self.phi))

    def integral(self) -> float:
        return float((self.q * self.cell_area).sum())

    def centroid(self) -> np.ndarray:
        """Q-weighted mean of the coherent-state directions."""
        w = self.q * self.cell_area
        t, p = np.meshgrid(self.theta, self.phi, indexing="ij")
        dirs = -np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)])
        return (dirs * w).sum(axis=(1, 2)) / w.sum()

    def second_moment(self) -> float:
        """Mean squared distance of the directions from the centroid."""
        c = self.centroid()
        return float(1.0 - c @ c)

    def argmax(self) -> tuple[float, float]:
        i, k = np.unravel_index(np.argmax(self.q), self.q.shape)
        return float(self.theta[i]), float(self.phi[k])

    def rows(self):
        for i, t in enumerate(self.theta):
            for k, p in enumerate(self.phi):
                yield float(t), float(p), float(self.q[i, k])


def husimi_grid(state: SpinState, n_theta: int, n_phi: int) -> HusimiGrid:
    """Husimi density ``(2j+1)/(4 pi) |<gamma(theta, phi)|psi>|^2`` on a grid."""
    if state.register.is_full:
        raise RepresentationError("Husimi grids need the symmetric representation")
    if n_theta < 2 or n_phi < 2:
        raise ValueError("grid needs at least 2 points per axis")
    j = state.register.j
    theta = (np.arange(n_theta) + 0.5) * math.pi / n_theta
    phi = np.arange(n_phi) * 2 * math.pi / n_phi
    t, p = np.meshgrid(theta, phi, indexing="ij")
    amps = coherent_amplitudes(j, t, p)
    overlaps = amps.conj() @ state.vector
    q = (2 * j + 1) / (4 * math.pi) * np.abs(overlaps) ** 2
    return HusimiGrid(j, theta, phi, q)


def measure_jz(state: SpinState, rng_seed: int, n_samples: int) -> np.ndarray:
    """Projective ``J_z`` samples by inverse CDF over ascending ``m``."""
    if state.register.is_full:
        raise RepresentationError("measure_jz samples the symmetric representation")
    if abs(state.norm - 1.0) > 1e-8:
        raise StateError(f"state norm {state.norm} differs from 1 by more than 1e-8")
    probs = np.abs(state.vector) ** 2
    return sample_outcomes(probs, m_values(state.register), rng_seed, n_samples)


def sample_outcomes(probs, outcomes, rng_seed: int, n_samples: int) -> np.ndarray:
    """Inverse-CDF sampling; a uniform draw on a CDF boundary takes the lower outcome."""
    rng = np.random.default_rng(rng_seed)
    cdf = np.cumsum(probs)
    u = rng.random(n_samples) * cdf[-1]
    idx = np.minimum(np.searchsorted(cdf, u, side="left"), len(cdf) - 1)
    return np.asarray(outcomes)[idx]


def embed_symmetric_into_full(state: SpinState) -> SpinState:
    """Map ``|j, m>`` to the uniform superposition of Hamming weight ``m + j``."""
    reg = state.register
    if reg.is_full:
        raise RepresentationError("input must be in the symmetric representation")
    if reg.n_ions > MAX_FULL_IONS:
        raise DimensionError(f"embedding limited to {MAX_FULL_IONS} ions")
    full = SpinRegister(reg.n_ions, FULL)
    out = np.zeros(full.dim, dtype=complex)
    for k, amp in enumerate(state.vector):
        if amp == 0:
            continue
        codes = [sum(1 << i for i in bits) for bits in combinations(range(reg.n_ions), k)]
        out[codes] += amp / math.sqrt(len(codes))
    return SpinState(full, out)
