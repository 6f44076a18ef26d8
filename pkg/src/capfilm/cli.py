"""Command-line front end.

Subcommands: cap | ode | mesh | foliate | verify.  Reports are JSON with a
versioned schema and 17-significant-digit floats; fields/profiles go to CSV
and meshes to OBJ.  Exit codes: 0 success, 1 a requested check failed,
2 invalid configuration, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .axisym import solve_axisym
from .caps import cap_for_volume, cap_table, discrepancy_records
from .errors import CapfilmError, ConfigError
from .foliation import sweep
from .geometry import Tube, inner_offset_domain, wire_from_spec
from .io_utils import write_csv, write_json
from .meshing import init_mesh, write_obj
from .solver import SolveParams, minimize
from .verify import run_acceptance

SCHEMA = 1

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3

_DEFAULT_WIRE = {"kind": "circle", "params": {"radius": 1.0}}


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _effective(args, cfg: dict) -> dict:
    """Flags override config file overrides defaults."""
    eff = {
        "wire": cfg.get("wire", cfg if "kind" in cfg else _DEFAULT_WIRE),
        "delta": cfg.get("delta", 0.1),
        "eps": cfg.get("eps", 0.01),
        "eps_grid": cfg.get("eps_grid"),
        "solver": cfg.get("solver", "cap"),
        "target_edge": cfg.get("target_edge"),
        "tol": cfg.get("tol", 1e-5),
        "jobs": cfg.get("jobs", 1),
        "out": cfg.get("out", "."),
        # mesh-solver loop controls, config-file only
        "solver_params": {
            k: cfg[k]
            for k in ("max_outer", "max_inner", "penalty_growth")
            if k in cfg
        },
    }
    for key in ("delta", "eps", "solver", "target_edge", "tol", "jobs", "out"):
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            eff[key] = val
    if getattr(args, "wire", None) is not None:
        eff["wire"] = {"kind": args.wire, "params": json.loads(args.wire_params or "{}")}
    if getattr(args, "eps_grid", None) is not None:
        eff["eps_grid"] = args.eps_grid
    env_out = os.environ.get("CAPFILM_OUT")
    if env_out:
        eff["out"] = env_out
    _validate(eff)
    return eff


def _validate(eff: dict) -> None:
    delta = eff["delta"]
    if not (isinstance(delta, (int, float)) and math.isfinite(delta) and 0.0 < delta < 0.5):
        raise ConfigError(f"delta must be a finite real in (0, 0.5), got {delta!r}")
    eps = eff["eps"]
    if not (isinstance(eps, (int, float)) and math.isfinite(eps) and eps > 0.0):
        raise ConfigError(f"eps must be a finite positive real, got {eps!r}")
    if eff["solver"] not in ("cap", "ode", "mesh"):
        raise ConfigError(f"solver must be cap|ode|mesh, got {eff['solver']!r}")
    if eff["target_edge"] is not None:
        te = eff["target_edge"]
        if not (isinstance(te, (int, float)) and math.isfinite(te) and te > 0.0):
            raise ConfigError(f"target_edge must be positive, got {te!r}")
    out = Path(eff["out"])
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".capfilm_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory not writable: {exc}") from exc


def _parse_eps_grid(spec) -> list[float]:
    """'lo:hi:n' geometric grid, or an explicit JSON list."""
    if isinstance(spec, (list, tuple)):
        return [float(x) for x in spec]
    parts = str(spec).split(":")
    if len(parts) != 3:
        raise ConfigError("eps grid must be lo:hi:n or a JSON list")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if not (0.0 < lo < hi) or n < 1:
        raise ConfigError("eps grid must satisfy 0 < lo < hi and n >= 1")
    return list(np.geomspace(lo, hi, n))


def _report_skeleton(eff: dict) -> dict:
    return {"schema": SCHEMA, "tool": "capfilm", "version": __version__, "config": eff}


def _cmd_cap(args) -> int:
    eff = _effective(args, _load_config(args.config))
    out = Path(eff["out"])
    cap = cap_for_volume(eff["delta"], eff["eps"])
    report = _report_skeleton(eff)
    report["cap"] = cap.as_dict()
    report["roundtrip_volume_residual"] = cap.volume - eff["eps"]
    write_json(out / "cap.json", report)
    grid = _parse_eps_grid(eff["eps_grid"]) if eff["eps_grid"] else [eff["eps"]]
    rows = cap_table(eff["delta"], grid)
    write_csv(
        out / "cap_table.csv",
        ["eps", "theta", "z_C", "R", "lambda", "apex_height"],
        [[r["eps"], r["theta"], r["z_C"], r["R"], r["lambda"], r["apex_height"]] for r in rows],
    )
    print(f"cap: lambda={cap.lam:.12g} theta={cap.theta:.12g} -> {out/'cap.json'}")
    return EXIT_OK


def _cmd_ode(args) -> int:
    eff = _effective(args, _load_config(args.config))
    out = Path(eff["out"])
    prof = solve_axisym(eff["delta"], eff["eps"])
    report = _report_skeleton(eff)
    report["ode"] = {
        "lambda": prof.lam,
        "theta": prof.contact_angle,
        "residuals": {
            "pole": prof.pole_residual,
            "volume": (prof.half_volume - eff["eps"] / 2.0) / eff["eps"],
        },
        "n_steps": prof.n_steps,
        "volume": prof.volume,
    }
    write_json(out / "ode_report.json", report)
    write_csv(
        out / "profile.csv",
        ["r", "z", "psi"],
        [list(row) for row in prof.samples],
    )
    print(f"ode: lambda={prof.lam:.12g} -> {out/'ode_report.json'}")
    return EXIT_OK


def _cmd_mesh(args) -> int:
    eff = _effective(args, _load_config(args.config))
    out = Path(eff["out"])
    wire = wire_from_spec(eff["wire"])
    tube = Tube(wire, eff["delta"])
    te = eff["target_edge"] or tube.delta / 2.0
    domain = inner_offset_domain(tube)
    mesh0 = init_mesh(domain, tube, te)
    params = SolveParams.from_dict({**eff["solver_params"], "target_edge": te, "tol": eff["tol"]})
    solved, rep = minimize(mesh0, tube, eff["eps"] / 2.0, params)
    report = _report_skeleton(eff)
    report["solve"] = rep.as_dict()
    write_json(out / "solve_report.json", report)
    write_obj(solved, out / "sheet.obj")
    poly = domain.polyline
    if args.export_domain:
        write_csv(
            out / "domain.csv",
            ["s", "x", "y"],
            [[domain.params[i], poly[i, 0], poly[i, 1]] for i in range(poly.shape[0])],
        )
    print(
        f"mesh: lambda_hat={rep.lambda_hat:.12g} contact_dev={rep.contact_angle_max_dev:.3g}"
        f" -> {out/'solve_report.json'}"
    )
    return EXIT_OK


def _cmd_foliate(args) -> int:
    eff = _effective(args, _load_config(args.config))
    out = Path(eff["out"])
    if not eff["eps_grid"]:
        raise ConfigError("foliate requires --eps-grid lo:hi:n")
    grid = _parse_eps_grid(eff["eps_grid"])
    wire = wire_from_spec(eff["wire"])
    tube = Tube(wire, eff["delta"])
    params = None
    if eff["solver"] == "mesh":
        params = SolveParams.from_dict(
            {
                **eff["solver_params"],
                "target_edge": eff["target_edge"] or tube.delta / 2.0,
                "tol": eff["tol"],
            }
        )
    rep = sweep(tube, grid, solver=eff["solver"], params=params, jobs=int(eff["jobs"]))
    report = _report_skeleton(eff)
    report["sweep"] = rep.as_dict()
    write_json(out / "sweep_report.json", report)
    rows = []
    for rec in rep.records:
        poly = rec.footprint_polygon()
        if rec.solver_kind in ("cap", "ode"):
            rr = np.linspace(0.0, rec.footprint_radius(), 64)
            zz = rec.height_at(rr)
            rows.extend([[rec.eps, float(r), float(z)] for r, z in zip(rr, zz)])
        else:
            rr = np.hypot(poly[:, 0], poly[:, 1])
            rows.extend([[rec.eps, float(r), 0.0] for r in rr])
    write_csv(out / "leaves.csv", ["eps", "r", "z"], rows)
    ok = rep.all_ok()
    print(f"foliate: ordering={rep.ordering_ok} symmetry={rep.symmetry_ok} "
          f"bound={rep.curvature_bound_ok} convergence={rep.convergence_ok}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _cmd_verify(args) -> int:
    eff = _effective(args, _load_config(args.config))
    out = Path(eff["out"])
    results = run_acceptance(quick=args.quick)
    report = _report_skeleton(eff)
    report["quick"] = bool(args.quick)
    report["results"] = [r.as_dict() for r in results]
    report["formula_discrepancies"] = discrepancy_records()
    report["all_passed"] = all(r.passed for r in results)
    write_json(out / "verify_report.json", report)
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}")
    print(f"report -> {out/'verify_report.json'}")
    return EXIT_OK if report["all_passed"] else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="capfilm", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--delta", type=float)
        p.add_argument("--eps", type=float)
        p.add_argument("--out")
        p.add_argument("--wire", choices=["circle", "ellipse", "spline"])
        p.add_argument("--wire-params", help='JSON, e.g. \'{"a":1.3,"b":0.8}\'')

    p = sub.add_parser("cap", help="closed-form cap solution for the circle wire")
    common(p)
    p.add_argument("--eps-grid", help="lo:hi:n geometric grid for the CSV table")
    p.set_defaults(func=_cmd_cap)

    p = sub.add_parser("ode", help="meridian shooting solve (circle wire)")
    common(p)
    p.set_defaults(func=_cmd_ode)

    p = sub.add_parser("mesh", help="constrained mesh minimization")
    common(p)
    p.add_argument("--target-edge", type=float, dest="target_edge")
    p.add_argument("--tol", type=float)
    p.add_argument("--export-domain", action="store_true")
    p.set_defaults(func=_cmd_mesh)

    p = sub.add_parser("foliate", help="volume sweep with validators")
    common(p)
    p.add_argument("--eps-grid", help="lo:hi:n geometric grid")
    p.add_argument("--solver", choices=["cap", "ode", "mesh"])
    p.add_argument("--target-edge", type=float, dest="target_edge")
    p.add_argument("--tol", type=float)
    p.add_argument("--jobs", type=int, help="parallel record solves")
    p.set_defaults(func=_cmd_foliate)

    p = sub.add_parser("verify", help="run the acceptance suite")
    common(p)
    p.add_argument("--quick", action="store_true", help="fast subset (< 60 s)")
    p.set_defaults(func=_cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapfilmError as exc:
        print(f"solver error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
