"""Command-line interface: simulate, report, sweep, find-h0.

Exit codes: 0 success, 2 configuration error, 3 physics precondition
(e.g. a charging report on a map without equilibrium), 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .collision import evolve
from .config import (
    PRESETS,
    SWEEP_PRESETS,
    ScenarioConfig,
    initial_state,
    load_json,
    parse_scenario,
    parse_sweep,
    with_value,
)
from .equilibrium import check_equilibrium, classify, solve_H0
from .errors import ConfigError, DegenerateFixedPointError, NumericalError, PhysicsError, QBattError
from .ergotropy import charging_report, ergotropy, narrow_band_H0, random_unitary_dominance
from .operators import dump_matrix, herm_eig, populations

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_NUMERICAL = 0, 2, 3, 4


def fmt(x) -> str:
    """Shortest round-trip float text; used for every CSV cell."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def _clean(obj: Any) -> Any:
    """Make a structure JSON-safe: numpy -> python, inf -> "inf", nan -> null."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_clean(obj), indent=2) + "\n"


def _write(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, newline="\n")


def closed_form(cfg: ScenarioConfig) -> Optional[dict]:
    """Known analytic values for the named examples."""
    m, b = cfg.model, cfg.beta
    if m.variant == "single_qubit":
        w = m.h * math.tanh(b * m.h / 2)
        return {"ergotropy": w, "w_r": 2 * w, "q_r": -w, "eta": 0.5}
    if m.variant == "two_qubit":
        f = math.sinh(b * m.h) / (1 + math.cosh(b * m.h))
        return {
            "ergotropy": (2 * m.J - m.h) * f,
            "w_r": 2 * m.J * f,
            "q_r": -m.h * f,
            "eta": 1 - m.h / (2 * m.J),
        }
    return None


def _certificate_json(cert) -> Optional[dict]:
    if cert is None:
        return None
    return {
        "valid": cert.valid,
        "residual_U": cert.residual_U,
        "residual_HS": cert.residual_HS,
        "residual_V": cert.residual_V,
        "fixed_point_gap": cert.fixed_point_gap,
        "H0_spectrum": np.linalg.eigvalsh(cert.H0),
    }


def _classify_safe(model):
    try:
        return classify(model)
    except DegenerateFixedPointError as exc:
        return exc


# -- simulate -----------------------------------------------------------------

TRAJECTORY_HEADER = ["n", "W_n", "Q_n", "dE_n", "dS_n", "Sigma_n"]


def simulate(cfg: ScenarioConfig):
    """Run a scenario; returns ``(csv_text, summary_dict)``."""
    model = cfg.collision_model()
    cls = _classify_safe(model)
    pi = None if isinstance(cls, Exception) else cls.pi
    rho0 = initial_state(cfg, model, pi)
    traj = evolve(model, rho0, max_steps=cfg.steps, conv_tol=cfg.conv_tol)
    basis = herm_eig(model.H_S).eigenvectors
    d = model.dS

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n"] + [f"p_{i}" for i in range(d)] + TRAJECTORY_HEADER[1:])
    for rec in traj.records:
        rec.check(model.beta)
        pops = populations(rec.rho_after, basis)
        writer.writerow([rec.n] + [fmt(p) for p in pops] + [fmt(rec.W), fmt(rec.Q), fmt(rec.dE), fmt(rec.dS), fmt(rec.Sigma)])

    summary = {
        "scenario": cfg.name,
        "steps": len(traj.records),
        "converged": traj.converged,
        "totals": {"W": traj.W, "Q": traj.Q, "dE": traj.dE, "Sigma": traj.Sigma},
        "energies": herm_eig(model.H_S).eigenvalues,
        "initial_populations": populations(rho0, basis),
        "final_populations": populations(traj.final, basis),
    }
    if isinstance(cls, DegenerateFixedPointError):
        summary.update(classification="degenerate", fixed_point_dimension=cls.dimension,
                       fixed_point_populations=None, sigma_rate=None, certificate=None)
    else:
        summary.update(
            classification=cls.kind,
            fixed_point_populations=populations(cls.pi, basis),
            sigma_rate=cls.sigma_rate,
            certificate=_certificate_json(cls.certificate),
        )
    return buf.getvalue(), summary


def cmd_simulate(args, cfg: ScenarioConfig) -> int:
    if args.steps is not None:
        cfg.steps = args.steps
    if args.tol is not None:
        cfg.conv_tol = args.tol
    text, summary = simulate(cfg)
    if args.out is None:
        sys.stdout.write(text)
        sys.stdout.write(dumps(summary))
    else:
        out = Path(args.out)
        _write(text, str(out))
        _write(dumps(summary), str(out.with_suffix(".json")))
    return EXIT_OK


# -- report -------------------------------------------------------------------


def report(cfg: ScenarioConfig, seed: int = 0, trials: int = 1000) -> dict:
    """Ergotropy and charging economics of the equilibrium state of a scenario."""
    model = cfg.collision_model()
    cls = _classify_safe(model)
    if isinstance(cls, DegenerateFixedPointError):
        raise PhysicsError(f"map has a degenerate fixed-point subspace (dimension {cls.dimension})")
    if not cls.is_equilibrium:
        raise PhysicsError(f"map has no equilibrium: entropy production at the steady state is {cls.sigma_rate!r} per step")
    if cls.certificate is None:
        raise PhysicsError("map looks dissipationless but no equilibrium operator H0 was found")
    H0 = cls.certificate.H0
    cr = charging_report(model.H_S, H0, model.beta)
    erg = ergotropy(cr.pi, model.H_S)
    bound, beta_star = erg.bound, erg.beta_star
    out = {
        "scenario": cfg.name,
        "beta": model.beta,
        "energies": cr.energies,
        "H0_levels": cr.energies0,
        "populations": cr.populations,
        "ergotropy": cr.ergotropy,
        "ergotropy_spectral": erg.value,
        "passive_populations": cr.passive_populations,
        "w_r": cr.W_R,
        "q_r": cr.Q_R,
        "eta": cr.eta,
        "beta_star": beta_star,
        "bound": bound,
        "permutation": list(cr.permutation),
        "certificate": _certificate_json(cls.certificate),
    }
    cf = closed_form(cfg)
    out["closed_form"] = cf
    out["difference"] = None if cf is None else {
        k: (None if out[k] is None else out[k] - v) for k, v in cf.items()
    }
    out["dominance"] = {
        "trials": trials,
        "seed": seed,
        "max_work": random_unitary_dominance(cr.pi, model.H_S, trials, seed),
    }
    return out


def cmd_report(args, cfg: ScenarioConfig) -> int:
    _write(dumps(report(cfg, seed=args.seed, trials=args.trials)), args.out)
    return EXIT_OK


# -- sweep --------------------------------------------------------------------

SWEEP_HEADER = ["value", "ergotropy", "w_r", "q_r", "eta", "sigma_rate"]


def _sweep_point(sweep, value: float) -> list:
    if sweep.axis == "epsilon":
        nb = sweep.narrow_band
        H_S = np.diag(nb.energies).astype(complex)
        cr = charging_report(H_S, narrow_band_H0(H_S, nb.center, nb.offsets, value), sweep.base.beta)
        return [value, cr.ergotropy, cr.W_R, cr.Q_R, cr.eta, None]
    cfg = with_value(sweep.base, sweep.axis, value)
    model = cfg.collision_model()
    cls = _classify_safe(model)
    if isinstance(cls, DegenerateFixedPointError):
        return [value, None, None, None, None, None]
    if cls.is_equilibrium and cls.certificate is not None:
        cr = charging_report(model.H_S, cls.certificate.H0, model.beta)
        return [value, cr.ergotropy, cr.W_R, cr.Q_R, cr.eta, cls.sigma_rate]
    return [value, ergotropy(cls.pi, model.H_S).value, None, None, None, cls.sigma_rate]


def sweep_rows(sweep, threads: Optional[int] = None) -> list:
    if threads is None:
        threads = int(os.environ.get("QBATT_THREADS", "1") or 1)
    threads = max(1, threads)
    if threads == 1:
        return [_sweep_point(sweep, v) for v in sweep.values]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda v: _sweep_point(sweep, v), sweep.values))


def sweep_csv(sweep, threads: Optional[int] = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["axis"] + SWEEP_HEADER)
    for row in sweep_rows(sweep, threads):
        writer.writerow([sweep.axis] + [fmt(x) for x in row])
    return buf.getvalue()


def cmd_sweep(args, sweep) -> int:
    _write(sweep_csv(sweep), args.out)
    return EXIT_OK


# -- find-h0 ------------------------------------------------------------------


def find_h0_report(cfg: ScenarioConfig) -> dict:
    model = cfg.collision_model()
    sol = solve_H0(model)
    cls = _classify_safe(model)
    out = {
        "scenario": cfg.name,
        "found": sol.H0 is not None,
        "residual": sol.residual,
        "threshold": sol.threshold,
        "null_space_dim": sol.null_space_dim,
        "degenerate_blocks": sol.degenerate_blocks,
        "H0": None if sol.H0 is None else dump_matrix(sol.H0),
        "H0_spectrum": None if sol.H0 is None else np.linalg.eigvalsh(sol.H0),
        "certificate": None if sol.H0 is None else _certificate_json(check_equilibrium(model, sol.H0)),
    }
    if isinstance(cls, DegenerateFixedPointError):
        out.update(classification="degenerate", sigma_rate=None)
    else:
        out.update(classification=cls.kind, sigma_rate=cls.sigma_rate)
    return out


def cmd_find_h0(args, cfg: ScenarioConfig) -> int:
    _write(dumps(find_h0_report(cfg)), args.out)
    return EXIT_OK


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qbatt", description="Collision-model quantum battery simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, presets):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", metavar="PATH", help="JSON config file")
        src.add_argument("--preset", choices=sorted(presets), help="built-in configuration")
        p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
        p.add_argument("--steps", type=int, metavar="N", help="override the step limit")
        p.add_argument("--tol", type=float, metavar="X", help="override the convergence tolerance")
        p.add_argument("--seed", type=int, default=0, metavar="N", help="seed for random-unitary checks")
        p.add_argument("--trials", type=int, default=1000, metavar="N", help="random unitaries for the dominance check")

    common(sub.add_parser("simulate", help="run a trajectory, write CSV + summary JSON"), PRESETS)
    common(sub.add_parser("report", help="ergotropy and charging report of the equilibrium state"), PRESETS)
    common(sub.add_parser("sweep", help="parameter sweep, long-form CSV"), SWEEP_PRESETS)
    common(sub.add_parser("find-h0", help="solve for the equilibrium operator H0"), PRESETS)
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = args.preset if args.preset else load_json(args.config)
        name = args.preset if args.preset else Path(args.config).stem
        if args.command == "sweep":
            return cmd_sweep(args, parse_sweep(raw, name))
        cfg = parse_scenario(raw, name)
        if args.command == "simulate":
            return cmd_simulate(args, cfg)
        if args.command == "report":
            return cmd_report(args, cfg)
        return cmd_find_h0(args, cfg)
    except ConfigError as exc:
        print(f"qbatt: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PhysicsError as exc:
        print(f"qbatt: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except NumericalError as exc:
        print(f"qbatt: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (QBattError, ValueError) as exc:
        print(f"qbatt: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
