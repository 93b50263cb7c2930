"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the summary lines are written
past the capture) or directly with ``python3 tests/test_acceptance.py``.
"""
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from iontop.boson import FockMode, reference_state
from iontop.classical import SpherePoint, classical_trajectory, lyapunov_estimate
from iontop.protocols import (KickedTopParams, cat_state_protocol, controlled_phase,
                              cphase_reference, evolve_kicked_top, floquet_operator,
                              ising_sequence, measurement_record,
                              readout_coupling, readout_target)
from iontop.pulses import SpinWeight, apply_sequence, loop_sequence, verify_nonlinear_top
from iontop.spin import (FULL, SpinRegister, coherent_angles, measure_jz, spin_coherent_state)
from iontop.tensor import distance_up_to_global_phase, unitarity_error

POINTS = json.loads((Path(__file__).parent / "data" / "kicked_top_points.json").read_text())
ISLAND = np.array(POINTS["island"]["point"])
CHAOTIC = np.array(POINTS["chaotic"]["point"])
KAPPA, P = POINTS["kappa"], POINTS["p"]


def report(number, passed, detail, elapsed, budget, request=None):
    line = (f"ACCEPTANCE {number:2d}: {'PASS' if passed else 'FAIL'}  "
            f"{detail}  ({elapsed:.2f} s, budget {budget} s)")
    if request is not None:
        with request.config.pluginmanager.getplugin("capturemanager").global_and_fixture_disabled():
            print("\n" + line)
    else:
        print(line)
    return line


def chi2_pvalue(samples, outcomes, probs, min_expected=5.0):
    """Chi-square goodness of fit, merging sparse bins into one tail bin."""
    n = len(samples)
    counts = np.array([np.sum(samples == o) for o in outcomes], dtype=float)
    expected = n * np.asarray(probs, dtype=float)
    keep = expected >= min_expected
    obs = list(counts[keep])
    exp_ = list(expected[keep])
    if not keep.all():
        obs.append(counts[~keep].sum())
        exp_.append(expected[~keep].sum())
    exp_ = np.array(exp_) * (n / np.sum(exp_))
    return stats.chisquare(obs, exp_).pvalue


def vib_independence(register, seq, spin_vec, mode):
    """Largest spread of the reduced spin action across three mode preparations."""
    reduced = []
    for phi in (reference_state(mode, "ground"), reference_state(mode, "fock", n=3),
                reference_state(mode, "coherent", alpha=1.0)):
        out = apply_sequence(register, mode, seq, np.kron(spin_vec, phi))
        reduced.append(out.reshape(register.dim, mode.dim) @ phi.conj())
    return max(float(np.abs(r - reduced[0]).max()) for r in reduced[1:])


# ---------------------------------------------------------------------------


def criterion_1():
    worst_res = worst_phase = 0.0
    for n in (1, 2, 3, 4):
        for kx in (0.2, 0.3, 0.4):
            for kp in (0.2, 0.3, 0.4):
                r = verify_nonlinear_top(n, kx, kp, cutoff=32)
                worst_res = max(worst_res, r["residual"])
                worst_phase = max(worst_phase, max(r["spin_phase_errors"]), r["offdiag_max"])
    return worst_res < 1e-8 and worst_phase < 1e-8, \
        f"max residual {worst_res:.2e}, max phase error {worst_phase:.2e}", 30


def criterion_2():
    r = verify_nonlinear_top(2, 0.3, 0.3, cutoff=32, paper_literal=True)
    return r["residual"] > 0.1, f"literal residual {r['residual']:.3f}", 5


def criterion_3():
    mode = FockMode(32)
    rng = np.random.default_rng(0)
    reg = SpinRegister(2)
    vec = rng.normal(size=3) + 1j * rng.normal(size=3)
    w = SpinWeight.collective()
    loop = vib_independence(reg, loop_sequence(0.3, 0.3, w, w), vec / np.linalg.norm(vec), mode)
    reg = SpinRegister(2, FULL)
    vec = rng.normal(size=4) + 1j * rng.normal(size=4)
    gate = vib_independence(reg, ising_sequence(0, 1, math.pi), vec / np.linalg.norm(vec), mode)
    return loop < 1e-8 and gate < 1e-8, f"loop spread {loop:.2e}, ising spread {gate:.2e}", 10


def criterion_4():
    worst = 0.0
    for n in (2, 4, 6):
        r = cat_state_protocol(n)
        worst = max(worst, abs(r["population_minus"] - 0.5), abs(r["population_plus"] - 0.5),
                    r["other"])
    odd = {n: round(cat_state_protocol(n)["population_minus"], 6) for n in (3, 5)}
    return worst < 1e-8, f"worst deviation {worst:.2e}; odd-N P(-j)_x {odd}", 5


def criterion_5():
    reg = SpinRegister(2, FULL)
    d = distance_up_to_global_phase(controlled_phase(reg, 0, 1, FockMode(32)),
                                    cphase_reference(reg, 0, 1))
    return d < 1e-8, f"distance {d:.2e}", 5


def criterion_6():
    reg = SpinRegister(4, FULL)
    ds = [distance_up_to_global_phase(readout_coupling(reg, 3, mu, method="pulses"),
                                      readout_target(reg, 3, mu)) for mu in (0.3, 0.7)]
    return max(ds) < 1e-8, f"distances {ds[0]:.2e}, {ds[1]:.2e}", 5


def _moments(start, params, steps):
    initial = spin_coherent_state(params.register, *coherent_angles(start))
    traj = evolve_kicked_top(params, initial, steps, husimi_every=1, husimi_shape=(64, 128))
    return np.array([traj.husimi[k].second_moment() for k in range(steps + 1)]), traj


def criterion_7():
    params = KickedTopParams(40, KAPPA, P)
    unit = unitarity_error(floquet_operator(params))
    start = spin_coherent_state(params.register, *coherent_angles(CHAOTIC))
    drift = float(np.abs(evolve_kicked_top(params, start, 200).norm - 1).max())
    island, _ = _moments(ISLAND, params, 100)
    chaotic, _ = _moments(CHAOTIC, params, 100)
    island_ratio = float(island.max() / island[0])
    chaotic_ratio = float(chaotic.max() / chaotic[0])
    ok = unit < 1e-10 and drift < 1e-9 and island_ratio < 3 and chaotic_ratio > 10
    detail = (f"unitarity {unit:.1e}, drift {drift:.1e}, island max ratio {island_ratio:.2f} "
              f"(needs < 3), chaotic max ratio {chaotic_ratio:.1f} (needs > 10)")
    return ok, detail, 60


def criterion_8():
    params = KickedTopParams(100, KAPPA, P)
    initial = spin_coherent_state(params.register, *coherent_angles(ISLAND))
    quantum = evolve_kicked_top(params, initial, 5).mean_spin()
    classical = classical_trajectory(SpherePoint(*ISLAND), KAPPA, P, 5)
    gap = float(np.abs(quantum - classical).max())
    return gap < 0.05, f"max component gap {gap:.4f}", 30


def criterion_9():
    lam_c = lyapunov_estimate(SpherePoint(*CHAOTIC), KAPPA, P, 100_000)
    lam_i = lyapunov_estimate(SpherePoint(*ISLAND), KAPPA, P, 100_000)
    return lam_c > 0.05 and abs(lam_i) < 0.01, \
        f"chaotic {lam_c:.4f}, island {lam_i:.2e}", 10


def criterion_10():
    reg = SpinRegister(10)
    state = spin_coherent_state(reg, 1.1, 0.4)
    probs = np.abs(state.vector) ** 2
    samples = measure_jz(state, rng_seed=2024, n_samples=100_000)
    p_jz = chi2_pvalue(samples, np.arange(11) - 5.0, probs)
    theta_r = 1.2
    rec = measurement_record(KickedTopParams(1.5, KAPPA, P), 0.0, theta_r, 0.3, 100_000,
                             rng_seed=7)
    p1 = math.sin(theta_r / 2) ** 2
    p_rec = chi2_pvalue(rec.bits, [0, 1], [1 - p1, p1])
    table = np.zeros((2, 2))
    np.add.at(table, (rec.bits[:-1], rec.bits[1:]), 1)
    p_ind = stats.chi2_contingency(table).pvalue
    ok = min(p_jz, p_rec, p_ind) > 1e-3
    return ok, f"p-values: Jz {p_jz:.3f}, record {p_rec:.3f}, independence {p_ind:.3f}", 10


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10}


def evaluate(number, request=None):
    start = time.perf_counter()
    passed, detail, budget = CRITERIA[number]()
    elapsed = time.perf_counter() - start
    within = elapsed < budget
    if not within:
        detail += "; over runtime budget"
    report(number, passed and within, detail, elapsed, budget, request)
    return passed and within, detail


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_acceptance(number, request):
    passed, detail = evaluate(number, request)
    assert passed, detail


if __name__ == "__main__":
    results = [evaluate(k)[0] for k in sorted(CRITERIA)]
    print(f"{sum(results)}/{len(results)} criteria pass")
