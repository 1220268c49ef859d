"""
Command line front-end.

Subcommands: ``run``, ``classify``, ``limit``, ``soliton``, ``collapse`` and
``curvature``. Each prints a JSON report to stdout, writes it (plus a CSV for
``run``) into the output directory, and exits 0 exactly when its verification
passed. Flags can be preset in a JSON config file given with ``--config``;
explicit flags win over the file.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .curvature import curvature_tensors, sectional, sectional_generic
from .errors import InsufficientWindowError, ThurstonFlowError
from .flow import FlowKind, IntegratorConfig, Trajectory, closed_form, integrate
from .geometry import DiagonalMetric, GeometryKind, structure_constants
from .groups import Lattice, _case_key, _CASE_KEYS, collapse_analysis, standard_lattice
from .rescale import LIMIT_CASES, REFERENCES, run_limit_case
from .singularity import classify, default_horizon
from .soliton import CERTIFICATES, FD_TOL, certify, verify_soliton_equation

__all__ = ["main", "build_parser", "write_trajectory_csv", "read_trajectory_csv", "OUT_ENV"]

OUT_ENV = "THURSTON_FLOWS_OUT"
DEFAULT_SEED = 42
CSV_HEADER = ["t", "A", "B", "C", "K23", "K31", "K12", "M"]


class UsageError(Exception):
    pass


# -- io ------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """One row per accepted step: ``t,A,B,C,K23,K31,K12,M``."""
    K = traj.sectional_history()
    M = np.abs(K).max(axis=1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for t, c, k, m in zip(traj.t, traj.coeffs, K, M):
            w.writerow([_fmt(t), *map(_fmt, c), *map(_fmt, k), _fmt(m)])


def read_trajectory_csv(path, kind, flow) -> Trajectory:
    """Rebuild a :class:`Trajectory` (without dense output) from a CSV."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(CSV_HEADER):
        raise UsageError(f"{path}: expected columns {','.join(CSV_HEADER)}")
    kind, flow = GeometryKind.parse(kind), FlowKind.parse(flow)
    t, coeffs = data[:, 0], data[:, 1:4]
    traj = Trajectory(flow, kind, t, coeffs, "horizon", float(t[-1]))
    # a run that stopped early reached the blow-up threshold
    summary = Path(path).with_name(Path(path).stem + ".summary.json")
    if summary.exists():
        info = json.loads(summary.read_text())
        if info.get("status") == "blowup":
            traj.status, traj.T0 = "blowup", info.get("T0")
    return traj


def _out_dir(args) -> Path:
    d = Path(args.out_dir or os.environ.get(OUT_ENV) or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _emit(args, stem: str, report: dict) -> None:
    report = {**report, "seed": args.seed}
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if not args.no_write:
        (_out_dir(args) / f"{stem}.json").write_text(text + "\n")


_SLUG = {"xcf-": "xcfminus", "xcf+": "xcfplus", "b=c": "beqc", "b!=c": "bneqc"}


def _slug(*parts) -> str:
    return "_".join(_SLUG.get(str(p), str(p)) for p in parts if p is not None)


# -- config handling -------------------------------------------------------------


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    """Parse twice: once to find ``--config``, again with its values as defaults."""
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def _geometry(name, flowable=True) -> GeometryKind:
    try:
        kind = GeometryKind.parse(name)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if flowable and not kind.flowable:
        raise UsageError(f"{kind.value} cannot be flowed")
    return kind


def _flow(name) -> FlowKind:
    try:
        return FlowKind.parse(name)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _metric(args) -> DiagonalMetric:
    if None in (args.A, args.B, args.C):
        raise UsageError("--A, --B and --C are required")
    try:
        return DiagonalMetric(args.A, args.B, args.C)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _integrator(args) -> IntegratorConfig:
    kw = {}
    for name in ("rel_tol", "abs_tol", "max_step", "blowup_threshold", "max_steps", "method"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    return IntegratorConfig(**kw)


# -- commands ------------------------------------------------------------------


def _summary(traj: Trajectory) -> dict:
    return {
        "geometry": traj.kind.value,
        "flow": traj.flow.value,
        "initial": list(map(float, traj.coeffs[0])),
        "final": list(map(float, traj.coeffs[-1])),
        "t_final": float(traj.t[-1]),
        "t_end": float(traj.t_end),
        "status": traj.status,
        "T0": traj.T0,
        "steps": int(len(traj.t)),
    }


def cmd_run(args) -> int:
    kind, flow = _geometry(args.geometry), _flow(args.flow)
    g0 = _metric(args)
    t_end = default_horizon(kind, flow) if args.t_end in (None, "auto") else float(args.t_end)
    traj = integrate(flow, kind, g0, t_end, _integrator(args))
    stem = _slug("run", kind.value, flow.value)
    report = _summary(traj)
    ok = True
    try:
        exact = np.array([closed_form(kind, flow, g0, t).as_array() for t in traj.t])
    except ThurstonFlowError:
        exact = None
    if exact is not None:
        err = float(np.max(np.abs(traj.coeffs - exact) / exact))
        report["closed_form_max_rel_error"] = err
        ok = err < 1e-6
    if not args.no_write:
        path = _out_dir(args) / f"{stem}.csv"
        write_trajectory_csv(traj, path)
        report["csv"] = str(path)
    _emit(args, stem + ".summary", report)
    return 0 if ok else 1


def cmd_classify(args) -> int:
    kind, flow = _geometry(args.geometry), _flow(args.flow)
    if args.trajectory:
        traj = read_trajectory_csv(args.trajectory, kind, flow)
    else:
        g0 = _metric(args)
        t_end = default_horizon(kind, flow) if args.t_end in (None, "auto") else float(args.t_end)
        traj = integrate(flow, kind, g0, t_end, _integrator(args))
    try:
        rep = classify(traj, args.tol)
    except InsufficientWindowError as exc:
        print(f"insufficient fit window: {exc}", file=sys.stderr)
        return 3
    out = rep.to_dict()
    out["residual_cap"] = args.residual_cap
    ok = rep.residual < args.residual_cap
    out["passed"] = ok
    _emit(args, _slug("classify", kind.value, flow.value), out)
    return 0 if ok else 1


def _resolve_limit(args) -> str:
    if args.name:
        if args.name not in LIMIT_CASES:
            raise UsageError(f"unknown limit case {args.name!r}; choose from {sorted(LIMIT_CASES)}")
        return args.name
    if not (args.geometry and args.flow):
        raise UsageError("give a case name or --geometry and --flow")
    flow_text = str(args.flow).lower()
    case = args.case
    # accept fused spellings such as "xcf-bneqc"
    for suffix in ("bneqc", "beqc"):
        if flow_text.endswith(suffix):
            case = case or suffix
            flow_text = flow_text[: -len(suffix)].rstrip("-_") or "xcf"
    kind, flow = _geometry(args.geometry), _flow(flow_text)
    try:
        key = _CASE_KEYS[_case_key(kind, flow, case)]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.reference is None:
        return key
    if args.reference not in REFERENCES:
        raise UsageError(f"unknown reference {args.reference!r}; choose from {sorted(REFERENCES)}")
    matches = [n for n, c in LIMIT_CASES.items()
               if c.kind is kind and c.flow is flow and c.reference == args.reference
               and (n == key or n.startswith(key + "-"))]
    if not matches:
        raise UsageError(f"reference {args.reference!r} is not a limit of {kind.value} under {flow.value}")
    return matches[0]


def cmd_limit(args) -> int:
    name = _resolve_limit(args)
    cmp = run_limit_case(name, n_points=args.points, seed=args.seed, tol=args.tol)
    out = {"case": name, **cmp.to_dict()}
    _emit(args, _slug("limit", name), out)
    return 0 if cmp.converged else 1


def cmd_soliton(args) -> int:
    if args.name not in CERTIFICATES:
        raise UsageError(f"unknown certificate {args.name!r}; choose from {sorted(CERTIFICATES)}")
    cert = certify(args.name)
    out = cert.to_dict()
    eq = verify_soliton_equation(cert.geometry, cert.base_metric, cert.generator(), cert.alpha, cert.flow,
                                 method="fd")
    out["soliton_equation_residual_fd"] = eq
    out["soliton_equation_tol"] = FD_TOL
    out["self_similar_tol"] = cert.tol
    ok = cert.verified and eq < FD_TOL
    out["passed"] = ok
    _emit(args, _slug("soliton", args.name), out)
    return 0 if ok else 1


def cmd_collapse(args) -> int:
    kind, flow = _geometry(args.geometry), _flow(args.flow)
    if args.lattice in (None, "standard"):
        lattice = standard_lattice(kind)
    else:
        try:
            lattice = Lattice.from_json(kind, Path(args.lattice).read_text(), Path(args.lattice).stem)
        except (OSError, ValueError) as exc:
            raise UsageError(f"bad lattice file {args.lattice}: {exc}") from exc
    try:
        _case_key(kind, flow, args.case)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rep = collapse_analysis(kind, flow, lattice, case=args.case)
    out = rep.to_dict()
    out["lattice"] = lattice.name
    out["lattice_illustrative"] = lattice.illustrative
    _emit(args, _slug("collapse", kind.value, flow.value, args.case), out)
    return 0


def cmd_curvature(args) -> int:
    kind = _geometry(args.geometry, flowable=False)
    g = _metric(args)
    ct = curvature_tensors(kind, g)
    out = {
        "geometry": kind.value,
        "metric": list(g),
        "sectional": ct.p_diag.tolist(),
        "ricci": ct.ricci_diag.tolist(),
        "scalar": ct.scalar,
        "cross_curvature": ct.h_diag.tolist(),
    }
    ok = True
    if kind.flowable:
        # closed form vs bracket-table route, on this metric and on random ones
        rng = np.random.default_rng(args.seed)
        sc = structure_constants(kind)
        mets = [g] + [DiagonalMetric(*np.exp(rng.uniform(-3, 3, 3))) for _ in range(args.samples)]
        err = max(float(np.max(np.abs(sectional(kind, m).as_array() - sectional_generic(sc, m).as_array())
                               / np.maximum(1.0, np.abs(sectional_generic(sc, m).as_array()))))
                  for m in mets)
        out["oracle_samples"] = args.samples
        out["oracle_max_error"] = err
        ok = err < 1e-10
    out["passed"] = ok
    _emit(args, _slug("curvature", kind.value), out)
    return 0 if ok else 1


# -- parser --------------------------------------------------------------------


def _common(p):
    p.add_argument("--config", help="JSON file whose keys preset the flags of this command")
    p.add_argument("--out-dir", help=f"output directory (default ${OUT_ENV} or the current directory)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--no-write", action="store_true", help="print only")


def _metric_flags(p):
    p.add_argument("--A", type=float)
    p.add_argument("--B", type=float)
    p.add_argument("--C", type=float)


def _integrator_flags(p):
    p.add_argument("--t-end", default="auto")
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--abs-tol", type=float)
    p.add_argument("--max-step", type=float)
    p.add_argument("--blowup-threshold", type=float)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--method", choices=["auto", "rk45", "radau"])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="thurston-flows", description=__doc__.strip().splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate a flow and write the trajectory CSV")
    _common(p)
    _metric_flags(p)
    _integrator_flags(p)
    p.add_argument("--geometry")
    p.add_argument("--flow")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("classify", help="classify the singularity of a run")
    _common(p)
    _metric_flags(p)
    _integrator_flags(p)
    p.add_argument("--geometry")
    p.add_argument("--flow")
    p.add_argument("--trajectory", help="CSV written by 'run'")
    p.add_argument("--tol", type=float, default=0.05, help="boundedness tolerance on the fitted exponent")
    p.add_argument("--residual-cap", type=float, default=0.02)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("limit", help="rescaled limit against a named reference")
    _common(p)
    p.add_argument("name", nargs="?", help=f"one of {', '.join(LIMIT_CASES)}")
    p.add_argument("--geometry")
    p.add_argument("--flow")
    p.add_argument("--case", help="b=c or b!=c for SL2 cross curvature flow")
    p.add_argument("--reference")
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("soliton", help="verify a named soliton certificate")
    _common(p)
    p.add_argument("name", nargs="?", help=f"one of {', '.join(CERTIFICATES)}")
    p.set_defaults(func=cmd_soliton)

    p = sub.add_parser("collapse", help="collapse analysis of a compact quotient")
    _common(p)
    p.add_argument("--geometry")
    p.add_argument("--flow")
    p.add_argument("--lattice", default="standard", help="'standard' or a JSON list of generators")
    p.add_argument("--case")
    p.set_defaults(func=cmd_collapse)

    p = sub.add_parser("curvature", help="curvature tensors of one metric, with an oracle check")
    _common(p)
    _metric_flags(p)
    p.add_argument("--geometry")
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(func=cmd_curvature)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        for need in ("geometry", "flow"):
            if need in vars(args) and getattr(args, need) is None and args.command in ("run", "classify",
                                                                                         "collapse"):
                raise UsageError(f"--{need} is required")
        if args.command == "curvature" and args.geometry is None:
            raise UsageError("--geometry is required")
        if args.command == "soliton" and args.name is None:
            raise UsageError("a certificate name is required")
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
