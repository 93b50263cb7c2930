"""Command-line driver.

Every subcommand validates its parameters before computing, prints a JSON
report on stdout and, where it produces grids or trajectories, writes CSV
files into ``--out-dir`` (default: ``$IONTOP_OUTPUT_DIR`` or the current
directory). Each CSV starts with a ``# config:`` comment echoing the
parameters. Numbers carry 15 significant digits.

Exit codes: 0 success, 2 invalid input, 3 a verification tolerance failed.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import classical, protocols, pulses
from .boson import FockMode
from .errors import IontopError
from .spin import SpinRegister, coherent_angles, spin_coherent_state
from .tensor import distance_up_to_global_phase

SCHEMA = 1
EXIT_OK, EXIT_INVALID, EXIT_TOLERANCE = 0, 2, 3
OUTPUT_ENV = "IONTOP_OUTPUT_DIR"


def fmt(x: float) -> str:
    return format(float(x), ".15g")


def clean(obj):
    """Make a report JSON-ready with 15 significant digits."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [clean(obj.real), clean(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(fmt(x))
    return obj


def dump(report: dict) -> str:
    return json.dumps(clean({"schema": SCHEMA, **report}), sort_keys=True)


def config_echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def out_dir(args) -> Path:
    d = Path(args.out_dir or os.environ.get(OUTPUT_ENV, "."))
    d.mkdir(parents=True, exist_ok=True)
    return d


def write_csv(path: Path, header: list[str], rows, args) -> Path:
    with open(path, "w", newline="\n") as fh:
        fh.write("# config: " + json.dumps(clean(config_echo(args)), sort_keys=True) + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(v) if isinstance(v, (int, np.integer)) else fmt(v)
                              for v in row) + "\n")
    return path


class ValidationError(IontopError, ValueError):
    pass


def require(cond: bool, message: str) -> None:
    if not cond:
        raise ValidationError(message)


# --------------------------------------------------------------------- subcommands

def cmd_verify_top(args) -> int:
    require(args.n >= 1, "--n must be at least 1")
    require(args.cutoff >= 4, "--cutoff must be at least 4")
    runs = []
    failed = False
    for kx in args.kx:
        for kp in args.kp:
            r = pulses.verify_nonlinear_top(args.n, kx, kp, args.cutoff, args.paper_literal)
            r.pop("u_spin")
            r["max_phase_error"] = max(r["spin_phase_errors"])
            r["passed"] = (r["residual"] <= args.tol and r["max_phase_error"] <= args.tol
                           and r["offdiag_max"] <= args.tol)
            failed |= not r["passed"]
            runs.append(r)
            print(f"{args.n:3d} {kx:8.4g} {kp:8.4g}  theta={r['theta']:.6g}  "
                  f"residual={r['residual']:.3e}  phase={r['max_phase_error']:.3e}  "
                  f"{'ok' if r['passed'] else 'FAIL'}", file=sys.stderr)
    report = runs[0] if len(runs) == 1 else {"runs": runs}
    report["tolerance"] = args.tol
    print(dump(report))
    return EXIT_TOLERANCE if failed else EXIT_OK


def cmd_typo_demo(args) -> int:
    corrected = pulses.verify_nonlinear_top(args.n, args.kx, args.kp, args.cutoff, False)
    literal = pulses.verify_nonlinear_top(args.n, args.kx, args.kp, args.cutoff, True)
    print(dump({
        "n_ions": args.n, "kappa_x": args.kx, "kappa_p": args.kp, "cutoff": args.cutoff,
        "theta": args.kx * args.kp,
        "corrected_residual": corrected["residual"],
        "literal_residual": literal["residual"],
        "literal_distance_to_target": literal["distance_to_target"],
    }))
    return EXIT_OK


def cmd_cat(args) -> int:
    r = protocols.cat_state_protocol(args.n, route=args.route, cutoff=args.cutoff)
    r["state"] = [[z.real, z.imag] for z in r["state"]]
    even = args.n % 2 == 0
    r["clean_two_component"] = bool(
        even and abs(r["population_minus"] - 0.5) <= args.tol
        and abs(r["population_plus"] - 0.5) <= args.tol and r["other"] <= args.tol)
    r["diagnostic_only"] = not even
    print(dump(r))
    if even and not r["clean_two_component"]:
        return EXIT_TOLERANCE
    return EXIT_OK


def _initial_direction(args) -> np.ndarray:
    if args.x is not None or args.y is not None or args.z is not None:
        v = np.array([args.x or 0.0, args.y or 0.0, args.z or 0.0])
        require(np.linalg.norm(v) > 0, "initial direction must be nonzero")
        return v / np.linalg.norm(v)
    return classical.SpherePoint.from_angles(args.theta, args.phi).as_array()


def cmd_kicked_top(args) -> int:
    require(args.steps >= 0, "--steps must be non-negative")
    params = protocols.KickedTopParams(args.j, args.kappa, args.p)
    direction = _initial_direction(args)
    initial = spin_coherent_state(params.register, *coherent_angles(direction))
    traj = protocols.evolve_kicked_top(params, initial, args.steps,
                                       husimi_every=args.husimi_every,
                                       husimi_shape=(args.n_theta, args.n_phi))
    d = out_dir(args)
    files = [str(write_csv(d / f"{args.prefix}_trajectory.csv",
                           ["step", "jx", "jy", "jz", "norm"], traj.rows(), args))]
    for step, grid in traj.husimi.items():
        files.append(str(write_csv(d / f"{args.prefix}_husimi_{step:05d}.csv",
                                   ["theta", "phi", "q"], grid.rows(), args)))
    print(dump({
        "j": args.j, "kappa": args.kappa, "p": args.p, "steps": args.steps,
        "initial_direction": direction,
        "max_norm_drift": float(np.abs(traj.norm - 1).max()),
        "husimi_second_moments": {str(k): g.second_moment() for k, g in traj.husimi.items()},
        "files": files,
    }))
    return EXIT_OK


def cmd_classical(args) -> int:
    d = out_dir(args)
    if args.lyapunov_map:
        rows = classical.lyapunov_map(args.kappa, args.p, args.n_theta, args.n_phi,
                                      max(args.steps, 1000), order=args.order)
        path = write_csv(d / f"{args.prefix}_lyapunov.csv", ["theta", "phi", "lambda"],
                         rows, args)
        print(dump({"kappa": args.kappa, "p": args.p, "points": len(rows),
                    "files": [str(path)]}))
        return EXIT_OK
    start = classical.SpherePoint(*_initial_direction(args))
    traj = classical.classical_trajectory(start, args.kappa, args.p, args.steps, args.order)
    path = write_csv(d / f"{args.prefix}_classical.csv", ["step", "x", "y", "z"],
                     ((k, *row) for k, row in enumerate(traj)), args)
    report = {
        "kappa": args.kappa, "p": args.p, "steps": args.steps, "order": args.order,
        "final": traj[-1],
        "return_distance": float(np.linalg.norm(traj[-1] - traj[0])),
        "files": [str(path)],
    }
    if args.lyapunov:
        report["lyapunov"] = classical.lyapunov_estimate(start, args.kappa, args.p,
                                                         max(args.steps, 1000), order=args.order)
    print(dump(report))
    return EXIT_OK


def cmd_gate(args) -> int:
    register = SpinRegister(2, "full")
    mode = FockMode(args.cutoff)
    if args.type == "cphase":
        seq = protocols.controlled_phase_sequence(0, 1)
        if args.paper_literal:
            seq = [*protocols.ising_sequence(0, 1, math.pi, paper_literal=True), *seq[4:]]
        reference = protocols.cphase_reference(register, 0, 1)
    else:
        seq = protocols.ising_sequence(0, 1, args.chi, paper_literal=args.paper_literal)
        reference = protocols.ising_target(register, 0, 1, args.chi)
    u_joint = pulses.compose(register, mode, seq)
    u, residual = pulses.factor_vibration(u_joint, register.dim, mode.dim)
    distance = distance_up_to_global_phase(u, reference)
    overlap = np.vdot(reference, u)
    global_phase = float(np.angle(overlap)) if abs(overlap) > 0 else 0.0
    labels = ["gg", "ge", "eg", "ee"]  # ion 1, ion 0
    table = {lab: np.exp(-1j * global_phase) * u[k, k] for k, lab in enumerate(labels)}
    passed = residual <= args.tol and distance <= args.tol
    print(dump({
        "type": args.type, "chi": math.pi if args.type == "cphase" else args.chi,
        "cutoff": args.cutoff, "paper_literal": args.paper_literal,
        "truth_table": table, "global_phase": global_phase,
        "offdiag_max": float(np.abs(u - np.diag(np.diagonal(u))).max()),
        "residual": residual, "distance": distance, "tolerance": args.tol, "passed": passed,
    }))
    return EXIT_OK if passed else EXIT_TOLERANCE


def cmd_record(args) -> int:
    require(args.n >= 2, "--n counts the readout ion and must be at least 2")
    require(args.n <= 10, "--n is limited to 10 ions")
    require(args.steps >= 1, "--steps must be positive")
    params = protocols.KickedTopParams((args.n - 1) / 2, args.kappa, args.p)
    direction = _initial_direction(args)
    initial = spin_coherent_state(params.register, *coherent_angles(direction))
    rec = protocols.measurement_record(params, args.mu, args.theta_r, args.phi_r, args.steps,
                                       args.seed, initial=initial)
    d = out_dir(args)
    bits_path = d / f"{args.prefix}_record.txt"
    side_path = d / f"{args.prefix}_record.json"
    bits_path.write_text(rec.bitstring() + "\n")
    sidecar = {**rec.sidecar(), "initial_direction": direction, "config": config_echo(args)}
    side_path.write_text(json.dumps(clean(sidecar), sort_keys=True) + "\n")
    print(dump({"bits": rec.bitstring(), "ones": int(rec.bits.sum()),
                "files": [str(bits_path), str(side_path)], **rec.sidecar()}))
    return EXIT_OK


def parse_pulse(entry: dict) -> pulses.Pulse:
    """One pulse from its JSON form.

    ``{"type": "cond_disp", "beta_re", "beta_im", "weight": "jz" | ion}`` or
    ``{"type": "carrier", "axis", "angle", "targets": "all" | [ions]}``.
    """
    kind = entry.get("type")
    if kind == "cond_disp":
        weight = entry.get("weight", "jz")
        if weight == "jz":
            w = pulses.SpinWeight.collective()
        elif isinstance(weight, int):
            w = pulses.SpinWeight.single(weight)
        elif isinstance(weight, list):
            w = pulses.SpinWeight.subset(weight)
        else:
            raise ValidationError(f"bad weight {weight!r}")
        return pulses.ConditionalDisplacement(
            complex(float(entry.get("beta_re", 0.0)), float(entry.get("beta_im", 0.0))), w)
    if kind == "carrier":
        targets = entry.get("targets", "all")
        targets = None if targets == "all" else tuple(int(t) for t in targets)
        axis = entry.get("axis")
        require(axis in ("x", "y", "z"), f"bad carrier axis {axis!r}")
        return pulses.Carrier(axis, float(entry["angle"]), targets)
    raise ValidationError(f"unknown pulse type {kind!r}")


def cmd_sequence(args) -> int:
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config: {exc}") from exc
    register = SpinRegister(int(cfg["n_ions"]), cfg.get("representation", "symmetric"))
    mode = FockMode(int(cfg.get("cutoff", 32)))
    seq = [parse_pulse(p) for p in cfg["pulses"]]
    require(len(seq) > 0, "pulse list is empty")
    u_spin, residual = pulses.factor_vibration(pulses.compose(register, mode, seq),
                                               register.dim, mode.dim)
    report = {"n_ions": register.n_ions, "representation": register.representation,
              "cutoff": mode.cutoff, "n_pulses": len(seq), "residual": residual,
              "u_spin": u_spin, "tolerance": args.tol, "factorizes": residual <= args.tol}
    print(dump(report))
    return EXIT_OK


# --------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iontop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common_out(p, prefix):
        p.add_argument("--out-dir", default=None, help=f"output directory (env {OUTPUT_ENV})")
        p.add_argument("--prefix", default=prefix)

    def direction(p, theta=0.0, phi=0.0):
        p.add_argument("--theta", type=float, default=theta, help="polar angle from +z")
        p.add_argument("--phi", type=float, default=phi)
        p.add_argument("--x", type=float)
        p.add_argument("--y", type=float)
        p.add_argument("--z", type=float)

    p = sub.add_parser("verify-top", help="verify the nonlinear-top loop")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--kx", type=float, nargs="+", default=[0.3])
    p.add_argument("--kp", type=float, nargs="+", default=[0.3])
    p.add_argument("--cutoff", type=int, default=32)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--paper-literal", action="store_true")
    p.set_defaults(func=cmd_verify_top)

    p = sub.add_parser("typo-demo", help="literal vs corrected loop residuals")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--kx", type=float, default=0.3)
    p.add_argument("--kp", type=float, default=0.3)
    p.add_argument("--cutoff", type=int, default=32)
    p.set_defaults(func=cmd_typo_demo)

    p = sub.add_parser("cat", help="cat state from one-axis twisting")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--route", choices=["auto", "pulses", "direct"], default="auto")
    p.add_argument("--cutoff", type=int, default=64)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_cat)

    p = sub.add_parser("kicked-top", help="quantum kicked-top trajectory")
    p.add_argument("--j", type=float, default=10.0)
    p.add_argument("--kappa", type=float, default=3.0)
    p.add_argument("--p", type=float, default=math.pi / 2)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--husimi-every", type=int, default=None)
    p.add_argument("--n-theta", type=int, default=64)
    p.add_argument("--n-phi", type=int, default=128)
    direction(p)
    common_out(p, "kicked_top")
    p.set_defaults(func=cmd_kicked_top)

    p = sub.add_parser("classical", help="classical map trajectory or Lyapunov map")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--traj", action="store_true", help="trajectory (default)")
    mode.add_argument("--lyapunov-map", action="store_true")
    p.add_argument("--lyapunov", action="store_true", help="also estimate the exponent")
    p.add_argument("--kappa", type=float, default=3.0)
    p.add_argument("--p", type=float, default=math.pi / 2)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--order", choices=[classical.KICK_TWIST, classical.TWIST_KICK],
                   default=classical.KICK_TWIST)
    p.add_argument("--n-theta", type=int, default=30)
    p.add_argument("--n-phi", type=int, default=60)
    direction(p)
    common_out(p, "classical")
    p.set_defaults(func=cmd_classical)

    p = sub.add_parser("gate", help="Ising or controlled-phase gate via pulses")
    p.add_argument("--type", choices=["ising", "cphase"], default="cphase")
    p.add_argument("--chi", type=float, default=math.pi)
    p.add_argument("--cutoff", type=int, default=32)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--paper-literal", action="store_true")
    p.set_defaults(func=cmd_gate)

    p = sub.add_parser("record", help="readout-ion measurement record")
    p.add_argument("--n", type=int, default=4, help="ions including the readout ion")
    p.add_argument("--kappa", type=float, default=3.0)
    p.add_argument("--p", type=float, default=math.pi / 2)
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--theta-r", type=float, default=math.pi / 2)
    p.add_argument("--phi-r", type=float, default=0.0)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    direction(p)
    common_out(p, "record")
    p.set_defaults(func=cmd_record)

    p = sub.add_parser("sequence", help="compose a pulse sequence from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_sequence)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (IontopError, ValueError, IndexError, KeyError, TypeError) as exc:
        print(f"iontop {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
