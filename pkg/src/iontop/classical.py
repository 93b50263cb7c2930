"""Classical kicked top on the unit sphere.

One period is a rigid kick about ``y`` by ``p`` followed by a twist about
``z`` through the angle ``kappa * z`` (``z`` taken after the kick). This is
the large-``j`` limit of the Floquet operator
``exp(-i kappa Jz^2 / 2j) exp(-i p Jy)``. The reverse order is available as
``order="twist_kick"``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

KICK_TWIST = "kick_twist"
TWIST_KICK = "twist_kick"


@dataclass(frozen=True)
class SpherePoint:
    x: float
    y: float
    z: float

    def __post_init__(self):
        r = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
        if r == 0:
            raise ValueError("cannot place the zero vector on the sphere")
        object.__setattr__(self, "x", self.x / r)
        object.__setattr__(self, "y", self.y / r)
        object.__setattr__(self, "z", self.z / r)

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "SpherePoint":
        """Polar angle ``theta`` from ``+z``, azimuth ``phi``."""
        return cls(math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi),
                   math.cos(theta))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def angles(self) -> tuple[float, float]:
        return math.acos(max(-1.0, min(1.0, self.z))), math.atan2(self.y, self.x) % (2 * math.pi)


def _kick(x, y, z, cp, sp):
    return x * cp + z * sp, y, -x * sp + z * cp


def _twist(x, y, z, kappa):
    c = math.cos(kappa * z)
    s = math.sin(kappa * z)
    return x * c - y * s, x * s + y * c, z


def _step(x, y, z, kappa, cp, sp, order):
    if order == KICK_TWIST:
        x, y, z = _kick(x, y, z, cp, sp)
        return _twist(x, y, z, kappa)
    x, y, z = _twist(x, y, z, kappa)
    return _kick(x, y, z, cp, sp)


def _check_order(order):
    if order not in (KICK_TWIST, TWIST_KICK):
        raise ValueError(f"order must be {KICK_TWIST!r} or {TWIST_KICK!r}")


def classical_step(pt: SpherePoint, kappa: float, p: float,
                   order: str = KICK_TWIST) -> SpherePoint:
    _check_order(order)
    return SpherePoint(*_step(pt.x, pt.y, pt.z, kappa, math.cos(p), math.sin(p), order))


def classical_trajectory(pt: SpherePoint, kappa: float, p: float, steps: int,
                         order: str = KICK_TWIST) -> np.ndarray:
    """Array of shape ``(steps + 1, 3)`` starting with ``pt``."""
    _check_order(order)
    cp, sp = math.cos(p), math.sin(p)
    out = np.empty((steps + 1, 3))
    x, y, z = pt.x, pt.y, pt.z
    out[0] = x, y, z
    for k in range(1, steps + 1):
        x, y, z = _step(x, y, z, kappa, cp, sp, order)
        r = math.sqrt(x * x + y * y + z * z)
        x, y, z = x / r, y / r, z / r
        out[k] = x, y, z
    return out


def max_norm_drift(pt: SpherePoint, kappa: float, p: float, steps: int) -> float:
    """Largest ``| |v| - 1 |`` seen before each renormalization."""
    cp, sp = math.cos(p), math.sin(p)
    x, y, z = pt.x, pt.y, pt.z
    worst = 0.0
    for _ in range(steps):
        x, y, z = _step(x, y, z, kappa, cp, sp, KICK_TWIST)
        r = math.sqrt(x * x + y * y + z * z)
        worst = max(worst, abs(r - 1.0))
        x, y, z = x / r, y / r, z / r
    return worst


def _tangent_seed(x, y, z, direction):
    # any vector not parallel to the point, projected onto the tangent plane
    a = np.asarray(direction, dtype=float) if direction is not None else np.array([0.3, 0.5, 0.8])
    v = np.array([x, y, z])
    t = a - (a @ v) * v
    n = np.linalg.norm(t)
    if n < 1e-8:
        raise ValueError("tangent seed direction is parallel to the point")
    return t / n


def lyapunov_estimate(pt: SpherePoint, kappa: float, p: float, steps: int,
                      tangent=None, order: str = KICK_TWIST) -> float:
    """Mean log stretch per period of a tangent vector.

    The tangent is pushed through the analytic Jacobians of the kick and the
    twist (including the twist angle's dependence on ``z``), projected back
    onto the tangent plane and renormalized every period.
    """
    if steps < 1000:
        raise ValueError("lyapunov_estimate needs at least 1000 steps")
    _check_order(order)
    cp, sp = math.cos(p), math.sin(p)
    x, y, z = pt.x, pt.y, pt.z
    tx, ty, tz = _tangent_seed(x, y, z, tangent)
    total = 0.0
    for _ in range(steps):
        for sub in ((0, 1) if order == KICK_TWIST else (1, 0)):
            if sub == 0:
                x, y, z = _kick(x, y, z, cp, sp)
                tx, ty, tz = _kick(tx, ty, tz, cp, sp)
            else:
                c = math.cos(kappa * z)
                s = math.sin(kappa * z)
                # d/dz of the rotated (x, y) through the angle kappa*z
                dx = kappa * (-x * s - y * c)
                dy = kappa * (x * c - y * s)
                tx, ty = tx * c - ty * s + dx * tz, tx * s + ty * c + dy * tz
                x, y = x * c - y * s, x * s + y * c
        r = math.sqrt(x * x + y * y + z * z)
        x, y, z = x / r, y / r, z / r
        proj = tx * x + ty * y + tz * z
        tx, ty, tz = tx - proj * x, ty - proj * y, tz - proj * z
        n = math.sqrt(tx * tx + ty * ty + tz * tz)
        total += math.log(n)
        tx, ty, tz = tx / n, ty / n, tz / n
    return total / steps


def lyapunov_map(kappa: float, p: float, n_theta: int, n_phi: int, steps: int,
                 order: str = KICK_TWIST) -> np.ndarray:
    """Rows ``(theta, phi, lambda)`` over a grid of band midpoints."""
    rows = []
    for i in range(n_theta):
        theta = (i + 0.5) * math.pi / n_theta
        for k in range(n_phi):
            phi = (k + 0.5) * 2 * math.pi / n_phi
            lam = lyapunov_estimate(SpherePoint.from_angles(theta, phi), kappa, p, steps,
                                    order=order)
            rows.append((theta, phi, lam))
    return np.array(rows)


def bin_coverage(traj: np.ndarray, n_bands: int = 20, n_phi: int = 40) -> float:
    """Fraction of equal-area bins (equal ``z`` bands x ``phi`` sectors) visited."""
    z = np.clip(traj[:, 2], -1, 1 - 1e-15)
    phi = np.arctan2(traj[:, 1], traj[:, 0]) % (2 * np.pi)
    zi = ((z + 1) / 2 * n_bands).astype(int)
    pi_ = np.minimum((phi / (2 * np.pi) * n_phi).astype(int), n_phi - 1)
    visited = np.zeros((n_bands, n_phi), dtype=bool)
    visited[zi, pi_] = True
    return float(visited.mean())
