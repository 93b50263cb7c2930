"""Conditional-displacement pulses on the joint spin (x) mode space.

A conditional displacement is ``exp((beta a^dag - beta* a) (x) W)`` for a
diagonal spin operator ``W``: each spin basis state with ``W``-eigenvalue
``w`` sees the mode displaced by ``beta * w``. Sequences of such pulses whose
net displacement vanishes leave a spin-only unitary behind; the four-pulse
commutator loop produces ``exp(-i kx kp W_A W_B)``.

Joint indices are ``spin * mode.dim + fock``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .boson import FockMode, check_excursion, displacement
from .errors import DimensionError, RepresentationError
from .spin import SpinRegister, carrier_rotation, excitation_bits, m_values
from .tensor import MAX_DIM, distance_up_to_global_phase, matrix_exponential


@dataclass(frozen=True)
class SpinWeight:
    """Diagonal spin operator multiplying a displacement generator.

    ``ions=None`` is collective ``J_z``; otherwise the sum of ``sigma_z`` over
    the listed ions (a single index gives ``sigma_z`` of that ion).
    """

    ions: tuple[int, ...] | None = None

    @classmethod
    def collective(cls) -> "SpinWeight":
        return cls(None)

    @classmethod
    def single(cls, ion: int) -> "SpinWeight":
        return cls((int(ion),))

    @classmethod
    def subset(cls, ions) -> "SpinWeight":
        return cls(tuple(sorted(int(i) for i in ions)))

    def eigenvalues(self, register: SpinRegister) -> np.ndarray:
        if self.ions is None:
            return m_values(register)
        if not register.is_full:
            raise RepresentationError("single-ion weights need the full representation")
        w = np.zeros(register.dim)
        for i in self.ions:
            if not 0 <= i < register.n_ions:
                raise IndexError(f"ion {i} out of range for {register.n_ions} ions")
            w += excitation_bits(register, i) - 0.5
        return w


@dataclass(frozen=True)
class ConditionalDisplacement:
    beta: complex
    weight: SpinWeight = SpinWeight()


@dataclass(frozen=True)
class Carrier:
    axis: str
    angle: float
    targets: tuple[int, ...] | None = None


Pulse = Union[ConditionalDisplacement, Carrier]


def x_pulse(kappa: float, weight: SpinWeight) -> ConditionalDisplacement:
    """``exp(i kappa X (x) W)``."""
    return ConditionalDisplacement(1j * kappa / math.sqrt(2), weight)


def p_pulse(kappa: float, weight: SpinWeight) -> ConditionalDisplacement:
    """``exp(i kappa P (x) W)``."""
    return ConditionalDisplacement(complex(-kappa / math.sqrt(2)), weight)


def _joint_dim(register: SpinRegister, mode: FockMode) -> int:
    n = register.dim * mode.dim
    if n > MAX_DIM:
        raise DimensionError(f"joint dimension {n} exceeds guard {MAX_DIM}")
    return n


def _displacement_blocks(register, mode, beta, weight) -> np.ndarray:
    w = weight.eigenvalues(register)
    check_excursion(mode, abs(beta) * np.abs(w).max())
    cache = {}
    blocks = np.empty((register.dim, mode.dim, mode.dim), dtype=complex)
    for s, ws in enumerate(w):
        if ws not in cache:
            cache[ws] = displacement(mode, beta * ws)
        blocks[s] = cache[ws]
    return blocks


def conditional_displacement_unitary(register: SpinRegister, mode: FockMode,
                                     beta: complex, weight: SpinWeight) -> np.ndarray:
    """Joint unitary of one conditional displacement, assembled blockwise."""
    n = _joint_dim(register, mode)
    blocks = _displacement_blocks(register, mode, beta, weight)
    u = np.zeros((n, n), dtype=complex)
    d = mode.dim
    for s in range(register.dim):
        u[s * d:(s + 1) * d, s * d:(s + 1) * d] = blocks[s]
    return u


def apply_pulse(register: SpinRegister, mode: FockMode, pulse: Pulse, m: np.ndarray) -> np.ndarray:
    """Left-multiply a joint vector or matrix by one pulse without forming it."""
    shape = m.shape
    x = np.asarray(m, dtype=complex).reshape(register.dim, mode.dim, -1)
    if isinstance(pulse, ConditionalDisplacement):
        out = _displacement_blocks(register, mode, pulse.beta, pulse.weight) @ x
    elif isinstance(pulse, Carrier):
        r = carrier_rotation(register, pulse.axis, pulse.angle, pulse.targets)
        out = np.tensordot(r, x, axes=(1, 0))
    else:
        raise TypeError(f"not a pulse: {pulse!r}")
    return out.reshape(shape)


def apply_sequence(register: SpinRegister, mode: FockMode, seq: Sequence[Pulse],
                   m: np.ndarray) -> np.ndarray:
    """Apply pulses in time order (first listed acts first)."""
    if len(seq) == 0:
        raise ValueError("pulse sequence is empty")
    if m.shape[0] != register.dim * mode.dim:
        raise DimensionError(f"leading dimension {m.shape[0]} does not match joint space")
    for pulse in seq:
        m = apply_pulse(register, mode, pulse, m)
    return m


def compose(register: SpinRegister, mode: FockMode, seq: Sequence[Pulse]) -> np.ndarray:
    """Joint unitary ``U_k ... U_2 U_1`` of a time-ordered sequence."""
    n = _joint_dim(register, mode)
    return apply_sequence(register, mode, seq, np.eye(n, dtype=complex))


def loop_sequence(kappa_x: float, kappa_p: float, weight_a: SpinWeight, weight_b: SpinWeight,
                  paper_literal: bool = False) -> list[Pulse]:
    """Four-pulse commutator loop in time order.

    The composed operator is ``e^{iκx X W_A} e^{iκp P W_B} e^{-iκx X W_A}
    e^{-iκp P W_B}`` (rightmost first), which equals ``exp(-i κx κp W_A W_B)``
    on the spin space because ``[X, P] = i``. With ``paper_literal`` the last
    factor takes the uncorrected ``+iκp P`` sign, leaving a net conditional
    displacement ``exp(2iκp P W_B)`` that entangles spin and mode.
    """
    first_p = kappa_p if paper_literal else -kappa_p
    return [
        p_pulse(first_p, weight_b),
        x_pulse(-kappa_x, weight_a),
        p_pulse(kappa_p, weight_b),
        x_pulse(kappa_x, weight_a),
    ]


def factor_vibration(u_joint: np.ndarray, spin_dim: int, boson_dim: int,
                     trusted_levels: int | None = None) -> tuple[np.ndarray, float]:
    """Split a joint unitary into ``U_spin (x) I`` and a residual.

    ``U_spin`` is the vacuum block. The residual is the larger of the worst
    phase-invariant distance between a diagonal Fock block and ``U_spin`` and
    the largest off-diagonal block entry, both over the trusted Fock levels
    ``n < trusted_levels`` (default ``boson_dim // 4``). Levels near the
    cutoff are contaminated by truncation and never inspected.
    """
    u = np.asarray(u_joint)
    if u.shape != (spin_dim * boson_dim, spin_dim * boson_dim):
        raise DimensionError(f"shape {u.shape} does not factor as {spin_dim} x {boson_dim}")
    if trusted_levels is None:
        trusted_levels = max(1, boson_dim // 4)
    trusted_levels = min(trusted_levels, boson_dim)
    u4 = u.reshape(spin_dim, boson_dim, spin_dim, boson_dim)
    u_spin = u4[:, 0, :, 0].copy()
    residual = 0.0
    for n in range(trusted_levels):
        for k in range(trusted_levels):
            block = u4[:, n, :, k]
            if n == k:
                r = distance_up_to_global_phase(block, u_spin)
            else:
                r = float(np.abs(block).max())
            residual = max(residual, r)
    return u_spin, residual


def wrap_phase(x):
    return (np.asarray(x) + np.pi) % (2 * np.pi) - np.pi


def extract_twist(u_spin: np.ndarray, register: SpinRegister) -> float | None:
    """Twist angle ``θ`` of a spin unitary ``∝ exp(-i θ Jz^2)``.

    Read from the phase difference between the ``m = j`` and the smallest
    ``|m|`` diagonal entries. ``None`` when ``Jz^2`` is proportional to the
    identity (a single ion).
    """
    m = m_values(register)
    if register.n_ions < 2:
        return None
    hi = int(np.argmax(m))
    lo = int(np.argmin(np.abs(m)))
    dphase = cmath.phase(u_spin[hi, hi] / u_spin[lo, lo])
    return float(-dphase / (m[hi] ** 2 - m[lo] ** 2))


def verify_nonlinear_top(n_ions: int, kappa_x: float, kappa_p: float, cutoff: int = 32,
                         paper_literal: bool = False) -> dict:
    """Compose the collective loop and compare its spin factor with ``exp(-iθJz^2)``."""
    register = SpinRegister(n_ions)
    mode = FockMode(cutoff)
    w = SpinWeight.collective()
    seq = loop_sequence(kappa_x, kappa_p, w, w, paper_literal=paper_literal)
    u_joint = compose(register, mode, seq)
    u_spin, residual = factor_vibration(u_joint, register.dim, mode.dim)

    theta = kappa_x * kappa_p
    m = m_values(register)
    diag = np.diagonal(u_spin)
    global_phase = cmath.phase(diag[0]) + theta * m[0] ** 2
    phase_errors = np.abs(wrap_phase(np.angle(diag) + theta * m ** 2 - global_phase))
    offdiag = u_spin - np.diag(diag)
    target = matrix_exponential(-1j * theta * np.diag(m ** 2))
    return {
        "n_ions": n_ions,
        "kappa_x": kappa_x,
        "kappa_p": kappa_p,
        "cutoff": cutoff,
        "paper_literal": paper_literal,
        "theta": theta,
        "theta_extracted": extract_twist(u_spin, register),
        "residual": residual,
        "spin_phase_errors": phase_errors.tolist(),
        "offdiag_max": float(np.abs(offdiag).max()),
        "modulus_error": float(np.abs(np.abs(diag) - 1).max()),
        "distance_to_target": distance_up_to_global_phase(u_spin, target),
        "global_phase": float(wrap_phase(global_phase)),
        "u_spin": u_spin,
    }
