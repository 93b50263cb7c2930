import json
import math
from pathlib import Path

import numpy as np
import pytest

DATA = Path(__file__).parent / "data"


def wigner_small_d(j: float, beta: float) -> np.ndarray:
    """<j m'| exp(-i beta Jy) |j m> from the explicit factorial sum, m ascending."""
    n = int(round(2 * j))
    ms = [k - j for k in range(n + 1)]
    f = lambda x: math.factorial(int(round(x)))
    c, s = math.cos(beta / 2), math.sin(beta / 2)
    d = np.zeros((n + 1, n + 1))
    for a, mp in enumerate(ms):
        for b, m in enumerate(ms):
            total = 0.0
            pref = math.sqrt(f(j + mp) * f(j - mp) * f(j + m) * f(j - m))
            for k in range(n + 1):
                den = [j + m - k, k, j - k - mp, k - m + mp]
                if any(x < -1e-9 for x in den):
                    continue
                sign = (-1) ** int(round(k - m + mp))
                total += (sign * pref / math.prod(f(x) for x in den)
                          * c ** int(round(2 * j - 2 * k + m - mp))
                          * s ** int(round(2 * k - m + mp)))
            d[a, b] = total
    return d


def random_antihermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = (a + a.conj().T) / 2
    return -1j * scale * h


@pytest.fixture(scope="session")
def top_points():
    """Regular and chaotic seed points for kappa=3, p=pi/2 (found by Lyapunov scans)."""
    return json.loads((DATA / "kicked_top_points.json").read_text())
