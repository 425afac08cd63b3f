"""Command-line entry point: ``radvar <command> [options]``.

Weights are read from a JSON file::

    {
      "problem": {"d": 2, "p": 2.0, "a": 0.0, "b": 1.0},
      "pieces": [
        {"kind": "constant", "params": {"c": 1.0}, "interval": [0.0, 0.4]},
        {"kind": "power_bump", "params": {"m": 1.0, "alpha": 1.5, "compensate": true}, "interval": [0.5, 0.9]},
        {"kind": "tabulated", "params": {"radii": [0.9, 0.95, 1.0], "values": [0.0, 1.0, 1.0]}}
      ]
    }

Artifacts go to ``--out`` (default: ``$RADVAR_OUTPUT_DIR`` or the current
directory).  Exit status is 0 on success, 1 when an inequality fails or a
profile is outside the energy domain, and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .aux_weight import build_aux_weight, eval_truncated
from .generators import BlowupCase, random_profile, random_weight
from .poincare import OrderingViolated, check_pointwise, check_poincare
from .profiles import NotInDomain, read_profile_csv, write_profile_csv
from .quadrature import DEFAULT_CONFIG, AnalysisInconclusive, DomainMismatch, QuadratureConfig, ToleranceNotMet
from .relaxation import density_report, power_blowup
from .variational_solver import DatumNotIntegrable, NonConvergence, SolverConfig, minimize_H
from .weight_model import Constant, PowerBump, ProblemParams, RadialWeightSpec, Tabulated, decompose_degeneracy

ENV_OUTPUT = "RADVAR_OUTPUT_DIR"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# config


def _piece(entry: dict, d: int):
    try:
        kind = entry["kind"]
        params = dict(entry.get("params", {}))
    except (KeyError, TypeError) as exc:
        raise UsageError(f"piece {entry!r} needs 'kind' and 'params'") from exc
    interval = entry.get("interval")
    try:
        if kind == "constant":
            lo, hi = interval
            return Constant(float(params["c"]), float(lo), float(hi))
        if kind == "power_bump":
            lo, hi = interval
            return PowerBump(
                float(params["m"]),
                float(params["alpha"]),
                float(lo),
                float(hi),
                bool(params.get("compensate", True)),
                int(params.get("d", d)),
            )
        if kind == "tabulated":
            return Tabulated(tuple(params["radii"]), tuple(params["values"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad {kind} piece {entry!r}: {exc}") from exc
    raise UsageError(f"unknown piece kind {kind!r} (expected constant, power_bump or tabulated)")


def load_config(path) -> tuple[RadialWeightSpec, ProblemParams]:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"weight config {path} does not exist")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from exc
    try:
        prob = raw["problem"]
        params = ProblemParams(int(prob["d"]), float(prob["p"]), float(prob["a"]), float(prob["b"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: 'problem' needs d, p, a, b ({exc})") from exc
    pieces = raw.get("pieces")
    if not isinstance(pieces, list) or not pieces:
        raise UsageError(f"{path}: 'pieces' must be a non-empty list")
    try:
        spec = RadialWeightSpec(tuple(_piece(e, params.d) for e in pieces))
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from exc
    return spec, params


def _quad_config(args) -> QuadratureConfig:
    kw = {}
    if args.rel_tol is not None:
        kw["rel_tol"] = args.rel_tol
    if args.max_depth is not None:
        kw["max_depth"] = args.max_depth
    try:
        return dataclasses.replace(DEFAULT_CONFIG, **kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(ENV_OUTPUT) or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise UsageError(f"output directory {out} is not writable")
    return out


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path: Path, rows, fields=None) -> None:
    rows = list(rows)
    fields = fields or (list(rows[0]) if rows else [])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for row in rows:
            w.writerow([_fmt(row[k]) for k in fields])


def _summary(out: Path, name: str, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    (out / name).write_text(text)
    sys.stdout.write(text)


def _profile(path):
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"profile CSV {path} does not exist")
    try:
        return read_profile_csv(path)
    except (ValueError, IndexError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# commands


def cmd_analyze_weight(args) -> int:
    spec, params = load_config(args.config)
    out = _out_dir(args)
    decomp = decompose_degeneracy(spec, params, _quad_config(args))
    write_csv(out / "decomposition.csv", decomp.csv_rows(), ["i", "a_i", "b_i", "left_integrable", "right_integrable"])
    _summary(out, "analyze_weight.txt", [f"seed = {args.seed}", f"d = {params.d}, p = {params.p}", decomp.report()])
    return EXIT_OK


def cmd_build_aux_weight(args) -> int:
    spec, params = load_config(args.config)
    out = _out_dir(args)
    cfg = _quad_config(args)
    decomp = decompose_degeneracy(spec, params, cfg)
    aux = build_aux_weight(decomp, spec, params, cfg, mid_rule=args.mid_rule)
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    t = np.linspace(params.a, params.b, args.points)
    rows = [
        {"t": ti, "eta": e, "eta_hat_p": h, "w_tilde": w}
        for ti, e, h, w in zip(t, spec(t), aux.eval(t), eval_truncated(aux, spec, t))
    ]
    write_csv(out / "aux_weight.csv", rows)
    lines = [f"seed = {args.seed}", f"mid_rule = {args.mid_rule}", decomp.report()]
    for k, band in enumerate(aux.bands):
        j = band.jumps
        lines.append(
            f"  interval {k + 1}: mid value {band.mid_value:.17g}, ends ({band.left_value:.17g}, {band.right_value:.17g}),"
            f" jumps q1 {j['q1']:.3g} q2 {j['q2']:.3g}"
        )
    _summary(out, "build_aux_weight.txt", lines)
    return EXIT_OK


def cmd_check_poincare(args) -> int:
    spec, params = load_config(args.config)
    profile = _profile(args.profile)
    out = _out_dir(args)
    cfg = _quad_config(args)
    decomp = decompose_degeneracy(spec, params, cfg)
    aux = build_aux_weight(decomp, spec, params, cfg)
    try:
        rep = check_poincare(profile, aux, spec, params, cfg)
    except NotInDomain as exc:
        _summary(out, "check_poincare.txt", [f"seed = {args.seed}", f"NotInDomain: {exc}"])
        return EXIT_FAIL
    write_csv(out / "poincare.csv", rep.csv_rows())
    ok = rep.total_holds and all(rep.intervalwise_holds)
    lines = [
        f"seed = {args.seed}",
        f"lhs_total = {rep.lhs_total:.17g}",
        f"rhs_total = {rep.rhs_total:.17g}",
        f"total_holds = {_fmt(rep.total_holds)}",
        f"intervalwise_holds = {', '.join(_fmt(x) for x in rep.intervalwise_holds)}",
        f"status = {'satisfied' if ok else 'violated'}",
    ]
    _summary(out, "check_poincare.txt", lines)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_minimize(args) -> int:
    spec, params = load_config(args.config)
    datum = _profile(args.datum)
    out = _out_dir(args)
    cfg = _quad_config(args)
    try:
        scfg = SolverConfig(
            grid_size=args.grid, eps_start=args.eps_start, eps_end=args.eps_end, grad_tol=args.grad_tol
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    decomp = decompose_degeneracy(spec, params, cfg)
    aux = build_aux_weight(decomp, spec, params, cfg)
    status = EXIT_OK
    try:
        res = minimize_H(datum, spec, params, aux, scfg, quad_config=cfg, seed=args.seed)
    except DatumNotIntegrable as exc:
        _summary(out, "minimize.txt", [f"seed = {args.seed}", f"DatumNotIntegrable: {exc}"])
        return EXIT_FAIL
    except NonConvergence as exc:
        res, status = exc.result, EXIT_FAIL
    write_profile_csv(out / "minimizer.csv", res.profile, names=("r", "u0"))
    lines = [
        f"seed = {args.seed}",
        f"converged = {_fmt(res.converged)}",
        f"iterations = {res.iterations}",
        f"grad_norm = {res.grad_norm:.3e}",
        f"certificate = {res.certificate:.3e}",
        f"discrete_h = {res.discrete_h:.17g}",
        res.breakdown.report(),
    ]
    for lo, hi in res.indifferent:
        lines.append(f"H-indifferent: [{lo:.17g}, {hi:.17g}] (u0 = g)")
    _summary(out, "minimize.txt", lines)
    return status


def cmd_relax_demo(args) -> int:
    spec, params = load_config(args.config)
    out = _out_dir(args)
    cfg = _quad_config(args)
    bumps = [q for q in spec.pieces if isinstance(q, PowerBump)]
    if len(spec.pieces) != 1 or not bumps:
        raise UsageError("relax-demo needs a config with a single power_bump piece")
    bump = bumps[0]
    alpha, p = bump.alpha, params.p
    kappa = args.kappa if args.kappa is not None else min(p, 0.5 * (alpha + 1.0))
    gamma = (alpha + 1.0 - kappa) / p
    try:
        blow = power_blowup(bump, params, args.c, gamma)
    except ValueError as exc:
        raise UsageError(f"{exc} (alpha = {alpha}, kappa = {kappa})") from exc
    deltas = BlowupCase(spec, params, blow).deltas(args.deltas, args.gap)
    table = density_report(blow.profile, spec, params, deltas, target=blow.relaxed, config=cfg)
    write_csv(out / "density.csv", table.csv_rows())
    ok = table.converged and table.monotone
    lines = [
        f"seed = {args.seed}",
        f"gamma = {gamma:.17g}, kappa = {blow.kappa:.17g}",
        f"relaxed energy (closed form) = {table.target:.17g}",
        f"final relative gap = {table.final_gap:.3e}",
        f"final fidelity distance = {table.fidelity_dist[-1]:.3e}",
        f"monotone = {_fmt(table.monotone)}",
        f"status = {'converged' if ok else 'not converged'}",
    ]
    _summary(out, "relax_demo.txt", lines)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_fuzz(args) -> int:
    out = _out_dir(args)
    cfg = _quad_config(args)
    rng = np.random.default_rng(args.seed)
    rows, violations = [], 0
    for case in range(args.cases):
        d = int(rng.choice(args.dims))
        p = float(rng.choice(args.powers))
        params = ProblemParams(d, p, 0.0, 1.0)
        spec = random_weight(rng, params)
        aux = build_aux_weight(decompose_degeneracy(spec, params, cfg), spec, params, cfg)
        profile = random_profile(rng, 0.0, 1.0)
        rep = check_poincare(profile, aux, spec, params, cfg)
        k = int(rng.integers(len(aux.bands)))
        band = aux.bands[k]
        u = np.sort(rng.uniform(0.0, 1.0, 2))
        if rng.random() < 0.5:
            zeta, x = band.a + (band.mid - band.a) * u
            zeta = max(zeta, np.nextafter(band.a, band.b))
        else:
            x, zeta = band.mid + (band.b - band.mid) * u
            zeta = min(zeta, np.nextafter(band.b, band.a))
        try:
            pw = check_pointwise(profile, aux, spec, params, float(zeta), float(x), k, cfg)
            pw_ok = pw.satisfied
        except OrderingViolated:
            pw_ok = True
        ok = rep.total_holds and pw_ok
        violations += not ok
        rows.append(
            {
                "case": case,
                "d": d,
                "p": p,
                "n_eta": len(aux.bands),
                "lhs_total": rep.lhs_total,
                "rhs_total": rep.rhs_total,
                "poincare_holds": rep.total_holds,
                "pointwise_holds": pw_ok,
            }
        )
    write_csv(out / "fuzz.csv", rows)
    lines = [f"seed = {args.seed}", f"cases = {args.cases}", f"violations = {violations}"]
    _summary(out, "fuzz.txt", lines)
    return EXIT_OK if violations == 0 else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help=f"output directory (default: ${ENV_OUTPUT} or .)")
    common.add_argument("--rel-tol", type=float, help="relative tolerance of adaptive quadrature")
    common.add_argument("--max-depth", type=int, help="subdivision budget of adaptive quadrature")
    common.add_argument("--seed", type=int, default=0, help="seed recorded in every report")

    parser = argparse.ArgumentParser(prog="radvar", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze-weight", parents=[common], help="degeneracy decomposition of a weight")
    p.add_argument("config")
    p.set_defaults(func=cmd_analyze_weight)

    p = sub.add_parser("build-aux-weight", parents=[common], help="tabulate eta, eta_hat_p and the truncated weight")
    p.add_argument("config")
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--mid-rule", choices=("min", "left"), default="min")
    p.set_defaults(func=cmd_build_aux_weight)

    p = sub.add_parser("check-poincare", parents=[common], help="interval-wise Poincare check for a profile CSV")
    p.add_argument("config")
    p.add_argument("profile", help="CSV with columns r, v")
    p.set_defaults(func=cmd_check_poincare)

    p = sub.add_parser("minimize", parents=[common], help="minimise H for a datum CSV")
    p.add_argument("config")
    p.add_argument("datum", help="CSV with columns r, g")
    p.add_argument("--grid", type=int, default=257)
    p.add_argument("--eps-start", type=float, default=1e-2)
    p.add_argument("--eps-end", type=float, default=1e-10)
    p.add_argument("--grad-tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("relax-demo", parents=[common], help="clip-and-extend table for a matched blow-up profile")
    p.add_argument("config", help="config with a single power_bump piece")
    p.add_argument("--kappa", type=float, help="energy exponent of the blow-up profile (default: min(p, (alpha + 1) / 2))")
    p.add_argument("--c", type=float, default=1.0, help="slope amplitude")
    p.add_argument("--deltas", type=int, default=12)
    p.add_argument("--gap", type=float, default=1e-5, help="target size of both table distances at the smallest delta")
    p.set_defaults(func=cmd_relax_demo)

    p = sub.add_parser("fuzz", parents=[common], help="random Poincare and pointwise checks")
    p.add_argument("--cases", type=int, default=100)
    p.add_argument("--dims", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--powers", type=float, nargs="+", default=[1.5, 2.0, 3.0])
    p.set_defaults(func=cmd_fuzz)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"radvar {args.command}: {exc}\n")
        return EXIT_USAGE
    except (DomainMismatch, AnalysisInconclusive, ToleranceNotMet, NotInDomain, ValueError) as exc:
        sys.stderr.write(f"radvar {args.command}: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
