"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 numeric or degenerate input,
3 verification failure. Reports are JSON on stdout (or ``--output``);
error objects carry the machine-readable code of the raised exception.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import export, suites
from .confocal import (ConfocalSystem, apollonian_poles, axes_table, elliptic_coordinates,
                       norm_identity_check)
from .errors import GeometryError, NonConvergence, OffSurface
from .staude import FocalConics, focal_radii, staude_length

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2, 3
SCHEMA_VERSION = "v1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers: {text!r}") from exc


def _clean(obj):
    """JSON-ready copy: arrays to lists, non-finite floats to null."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2) + "\n"


def schema(name: str) -> dict:
    ref = resources.files("confocal_quadrics").joinpath("schemas", f"{name}.{SCHEMA_VERSION}.json")
    return json.loads(ref.read_text())


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _system(args) -> ConfocalSystem:
    if args.axes is not None and args.lengths is not None:
        raise UsageError("give either --axes or --lengths, not both")
    if args.lengths is not None:
        return ConfocalSystem.from_lengths(args.lengths)
    if args.axes is not None:
        return ConfocalSystem(args.axes)
    raise UsageError("one of --axes or --lengths is required")


def _point(args, sys_: ConfocalSystem) -> np.ndarray:
    if args.point is None:
        raise UsageError("--point is required")
    x = np.asarray(args.point, dtype=float)
    if x.size != sys_.dim:
        raise UsageError(f"--point has {x.size} coordinates, the system has dimension {sys_.dim}")
    return x


def cmd_elliptic(args) -> tuple[int, str]:
    sys_ = _system(args)
    x = _point(args, sys_)
    ec = elliptic_coordinates(sys_, x, nudge=args.nudge)
    T = axes_table(sys_, ec)
    lhs, rhs = norm_identity_check(ec)
    report = {
        "command": "elliptic",
        "base_sq_axes": sys_.base_sq_axes,
        "point": ec.point,
        "lambdas": ec.lambdas,
        "axes_table": T.entries,
        "norm_check": {"lhs": lhs, "rhs": rhs, "diff": abs(lhs - rhs),
                       "ok": abs(lhs - rhs) <= args.tol * max(1.0, lhs)},
    }
    if args.nudge:
        report["nudged"] = bool(np.any(ec.nudged != 0)) if ec.nudged is not None else False
    return EXIT_OK, dumps(report)


def _mesh_surfaces(args, sys_):
    if not args.lambdas:
        raise UsageError("--lambdas is required for surfaces")
    if args.format == "obj":
        objs = []
        for lam in args.lambdas:
            objs += export.surface_grid(sys_, lam, resolution=args.samples or 24)
        return export.write_obj(objs)
    rng = np.random.default_rng(args.seed)
    rows = []
    for i, lam in enumerate(args.lambdas):
        for p in export.surface_cloud(sys_, lam, args.samples or 200, rng):
            rows.append([i, float(lam), *p])
    header = ["surface", "lambda", *[f"x{i + 1}" for i in range(sys_.dim)]]
    return export.write_csv(header, rows)


def _mesh_focal(args, sys_):
    curves = export.focal_curves(sys_, args.samples or 200)
    if args.format == "obj":
        objs = []
        for name, _, pts in curves:
            idx = list(range(len(pts)))
            if name == "focal_ellipse":
                idx.append(0)
            objs.append(export.MeshObject(name, pts, lines=[tuple(idx)]))
        return export.write_obj(objs)
    rows = [[name, float(t), *p] for name, ts, pts in curves for t, p in zip(ts, pts)]
    return export.write_csv(["curve", "parameter", "x1", "x2", "x3"], rows)


def _mesh_apollonian(args):
    if args.axes is None or args.u is None:
        raise UsageError("apollonian curves need --axes and --u")
    a2 = np.asarray(args.axes, dtype=float)
    u = np.asarray(args.u, dtype=float)
    if a2.size != u.size:
        raise UsageError("--axes and --u must have the same length")
    if a2.size < 2 or np.any(a2 <= 0) or np.any(np.diff(a2) >= 0):
        raise ValueError("squared axes must be positive and strictly decreasing")
    taus, pts, res = export.apollonian_samples(a2, u, args.samples or 200)
    if args.format == "obj":
        if a2.size != 3:
            raise UsageError("OBJ output needs a three-dimensional curve")
        runs = export.polyline_runs(taus, apollonian_poles(a2))
        return export.write_obj([export.MeshObject(f"apollonian_{k}", pts[r], lines=[tuple(range(len(r)))])
                                 for k, r in enumerate(runs)])
    header = ["tau", *[f"x{i + 1}" for i in range(a2.size)], "residual"]
    return export.write_csv(header, [[float(t), *p, float(r)] for t, p, r in zip(taus, pts, res)])


def _mesh_edges(args, sys_):
    x = _point(args, sys_)
    segs = export.edge_segments(sys_, x, nudge=args.nudge)
    if args.format == "obj":
        if sys_.dim != 3:
            raise UsageError("OBJ output needs a three-dimensional family")
        return export.write_obj([export.MeshObject("edge_" + "".join("+" if s > 0 else "-" for s in prof),
                                                   seg, lines=[(0, 1)]) for prof, seg in segs])
    rows = [[k, e, *seg[e]] for k, (_, seg) in enumerate(segs) for e in (0, 1)]
    return export.write_csv(["edge", "end", *[f"x{i + 1}" for i in range(sys_.dim)]], rows)


def cmd_mesh(args) -> tuple[int, str]:
    if args.format == "json":
        raise UsageError("mesh output is obj or csv")
    if args.kind == "apollonian":
        return EXIT_OK, _mesh_apollonian(args)
    sys_ = _system(args)
    if args.format == "obj" and sys_.dim != 3:
        raise UsageError("OBJ output needs a three-dimensional family")
    if args.kind == "surfaces":
        return EXIT_OK, _mesh_surfaces(args, sys_)
    if args.kind == "focal":
        if sys_.dim != 3:
            raise UsageError("focal conic curves need a three-dimensional family")
        return EXIT_OK, _mesh_focal(args, sys_)
    return EXIT_OK, _mesh_edges(args, sys_)


def _radius_report(r) -> dict:
    return {"label": r.label, "sign_profile": list(r.sign_profile), "direction": r.direction,
            "t": r.t, "tau": r.tau, "E": r.E, "H": r.H}


def cmd_staude(args) -> tuple[int, str]:
    sys_ = _system(args)
    if sys_.dim != 3:
        raise UsageError("the string construction is three-dimensional")
    fc = FocalConics(*np.sqrt(sys_.base_sq_axes))
    axes = np.array([fc.a, fc.b, fc.c])
    warning = None
    if args.point is not None:
        P = _point(args, sys_)
    else:
        P = suites.random_ellipsoid_point(np.random.default_rng([args.seed, 0]), axes)
    res = fc.ellipsoid_residual(P)
    if abs(res) > args.tol:
        if not args.project:
            raise OffSurface(f"point is off the ellipsoid (residual {res:.3e}); use --project")
        P = P / math.sqrt(res + 1.0)
        warning = f"point projected radially onto the ellipsoid (residual was {res:.3e})"
    out = staude_length(fc, P, tol=max(args.tol, 1e-12))
    report = {
        "command": "staude",
        "axes": axes,
        "point": P,
        "closed_form": out.closed_form,
        "assembled": out.assembled,
        "per_leg": out.legs,
        "hyperbola_branches": {"same": out.hyperbola_same.length,
                               "opposite": out.hyperbola_opposite.length},
        "radii": [_radius_report(r) for r in focal_radii(fc, P)],
    }
    if warning:
        report["warning"] = warning
    if args.samples:
        vals = []
        for i in range(args.samples):
            Q = suites.random_ellipsoid_point(np.random.default_rng([args.seed, i + 1]), axes)
            vals.append(staude_length(fc, Q).assembled)
        report["sweep"] = {"samples": args.samples, "min": min(vals), "max": max(vals),
                           "max_spread": max(vals) - min(vals),
                           "max_error": max(abs(v - out.closed_form) for v in vals)}
    return EXIT_OK, dumps(report)


def cmd_verify(args) -> tuple[int, str]:
    only = None
    if args.only:
        only = [s for part in args.only for s in part.split(",") if s]
    try:
        summary = suites.run_suites(seed=args.seed, only=only, n=args.n,
                                    inject_failure=args.inject_failure)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc
    code = EXIT_OK if summary["failures"] == 0 else EXIT_VERIFY
    return code, dumps(summary)


def cmd_run(args) -> tuple[int, str]:
    import jsonschema

    try:
        job = json.loads(Path(args.job).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read job file: {exc}") from exc
    try:
        jsonschema.validate(job, schema("job"))
    except jsonschema.ValidationError as exc:
        raise UsageError(f"invalid job: {exc.message}") from exc
    argv = [job["command"]]
    for key, val in job.items():
        if key == "command":
            continue
        flag = "--" + key.replace("_", "-")
        if isinstance(val, bool):
            if val:
                argv.append(flag)
        elif isinstance(val, list):
            text = ",".join(val) if key == "only" else ",".join(repr(float(v)) for v in val)
            argv.append(f"{flag}={text}")
        else:
            argv.append(f"{flag}={val}")
    return _dispatch(build_parser().parse_args(argv))


def _add_system(p):
    p.add_argument("--axes", type=_floats, help="squared semi-axes, comma separated, decreasing")
    p.add_argument("--lengths", type=_floats, help="semi-axis lengths (squared for you)")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="confocal", description="Confocal quadrics toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("elliptic", help="elliptic coordinates of a point")
    _add_system(e)
    e.add_argument("--point", type=_floats)
    e.add_argument("--nudge", action="store_true", help="push near-axis coordinates off the membranes")
    e.add_argument("--tol", type=float, default=1e-9)
    e.add_argument("--output")
    e.add_argument("--format", choices=["json"], default="json")

    m = sub.add_parser("mesh", help="OBJ / CSV export of surfaces and curves")
    _add_system(m)
    m.add_argument("--kind", choices=["surfaces", "focal", "apollonian", "edges"], default="surfaces")
    m.add_argument("--lambdas", type=_floats)
    m.add_argument("--point", type=_floats)
    m.add_argument("--u", type=_floats, help="fixed point of the Apollonian curve")
    m.add_argument("--samples", type=int)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--nudge", action="store_true")
    m.add_argument("--format", choices=["obj", "csv", "json"], default="obj")
    m.add_argument("--output")

    s = sub.add_parser("staude", help="string length over the focal conics")
    _add_system(s)
    s.add_argument("--point", type=_floats)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--samples", type=int, default=0, help="also sweep this many seeded surface points")
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--project", action="store_true", help="project an off-surface point radially")
    s.add_argument("--output")
    s.add_argument("--format", choices=["json"], default="json")

    v = sub.add_parser("verify", help="run the seeded invariant suites")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--only", action="append", help="suite name(s), comma separated")
    v.add_argument("--n", type=int, help="pin the dimension of dimension-dependent suites")
    v.add_argument("--inject-failure", action="store_true",
                   help="perturb the Apollonius identity to check the harness")
    v.add_argument("--output")
    v.add_argument("--format", choices=["json"], default="json")

    r = sub.add_parser("run", help="run a JSON job file")
    r.add_argument("job")
    r.add_argument("--output")
    return p


COMMANDS = {"elliptic": cmd_elliptic, "mesh": cmd_mesh, "staude": cmd_staude,
            "verify": cmd_verify, "run": cmd_run}


def _dispatch(args) -> tuple[int, str]:
    return COMMANDS[args.command](args)


def _error(code: str, message: str) -> str:
    return dumps({"error": {"code": code, "message": message}})


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code, text = _dispatch(args)
    except UsageError as exc:
        sys.stderr.write(f"confocal: error: {exc}\n")
        return EXIT_USAGE
    except GeometryError as exc:
        sys.stdout.write(_error(exc.code, str(exc)))
        return EXIT_INPUT
    except NonConvergence as exc:
        sys.stdout.write(_error(exc.code, str(exc)))
        return EXIT_INPUT
    except ValueError as exc:
        sys.stdout.write(_error("invalid_input", str(exc)))
        return EXIT_INPUT
    _emit(text, getattr(args, "output", None))
    return code


if __name__ == "__main__":
    sys.exit(main())
