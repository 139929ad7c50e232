"""Command-line entry point: ``soapfilm <subcommand> [flags]``.

Exit codes: 0 success, 1 internal or domain error, 2 empty-result
diagnostic, 3 continuation failure, 64 usage.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import boundary as bd
from . import catenoids as cat
from . import checks
from . import deficits as df
from . import lab
from . import pmc
from . import polar
from . import surface as sf
from .errors import ContinuationError, SoapfilmError
from .io import csv_text, dumps, write_csv, write_json

EXIT_OK, EXIT_ERROR, EXIT_EMPTY, EXIT_CONTINUATION, EXIT_USAGE = 0, 1, 2, 3, 64

# estimate -> (x norm, y norm, slope, tolerance)
ESTIMATES = {
    "c0": ("H_linf", "u_c0", 1.0, 0.05),
    "area": ("H_l2", "area_excess", 2.0, 0.10),
    "h1": ("delta_weak", "u_h1", 1.0, 0.05),
    "weak": ("H_l2", "delta_weak", 1.0, 0.05),
}
MIN_R2 = 0.99


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    newton_tol: float = 1e-10
    quad_tol: float = 1e-10
    eig_tol: float = 1e-8
    grid: int = 200
    output_dir: str = "."
    seed: int = 0

    def __post_init__(self):
        for k in ("newton_tol", "quad_tol", "eig_tol"):
            if not getattr(self, k) > 0:
                raise UsageError(f"{k} must be positive")
        if self.grid < 4:
            raise UsageError("grid must be at least 4")

    def path(self, name):
        if name is None or os.path.isabs(name):
            return name
        return os.path.join(self.output_dir, name)


def read_config(path):
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            k, v = (t.strip() for t in line.split("=", 1))
            out[k] = v
    return out


def make_config(args) -> RunConfig:
    cfg = read_config(args.config) if args.config else {}
    unknown = set(cfg) - set(RunConfig.__dataclass_fields__)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    kw = {}
    for name, f in RunConfig.__dataclass_fields__.items():
        flag = getattr(args, name, None)
        if flag is not None:
            kw[name] = flag
        elif name in cfg:
            try:
                kw[name] = type(f.default)(cfg[name])
            except ValueError:
                raise UsageError(f"bad value for {name}: {cfg[name]!r}") from None
    return RunConfig(**kw)


def _emit(obj, out, cfg):
    text = dumps(obj)
    if out:
        write_json(cfg.path(out), obj)
    else:
        sys.stdout.write(text)


def _positive(*pairs):
    for name, v in pairs:
        if v is None or not np.isfinite(v) or v <= 0:
            raise UsageError(f"--{name} must be a positive number")


def _fixture(name):
    """Path of a shipped fixture when ``name`` is not an existing file."""
    if os.path.exists(name):
        return name
    ref = resources.files("soapfilm") / "fixtures" / os.path.basename(name)
    if ref.is_file():
        return str(ref)
    raise UsageError(f"no such file: {name}")


# --- subcommands -------------------------------------------------------------

def cmd_catenoids(args, cfg):
    _positive(("r1", args.r1), ("r2", args.r2), ("sep", args.sep))
    b = cat.TwoCircleBoundary(args.r1, args.r2, args.sep)
    fam = cat.enumerate_family(b, stability=not args.no_stability, eig_grid=cfg.grid)
    sols = [s for s in fam if args.singular or s.kind != "singular-catenoid"]
    _emit({"solutions": [s.to_dict() for s in sols], "diagnostics": fam.diagnostics},
          args.json, cfg)
    if args.singular and not any(s.kind == "singular-catenoid" for s in sols):
        print("no singular catenoid at this separation", file=sys.stderr)
        return EXIT_EMPTY
    return EXIT_OK


def _film_base(args, cfg):
    try:
        size = [float(v) for v in args.size.split(",")] if args.size else []
    except ValueError:
        raise UsageError("--size must be comma-separated numbers") from None
    n = cfg.grid
    if args.shape == "disk":
        R = size[0] if size else 1.0
        _positive(("size", R))
        if args.tilt:
            return polar.polar_disk(R, max(n // 8, 4), max(n // 4, 8))
        return sf.flat_disk(R, n)
    if args.tilt:
        raise UsageError("--tilt needs --shape disk")
    if args.shape == "annulus":
        if len(size) != 2 or not 0 < size[0] < size[1]:
            raise UsageError("annulus needs --size R_in,R_out with 0 < R_in < R_out")
        return sf.flat_annulus(size[0], size[1], n)
    r, sep = (size + [1.0, 0.5][len(size):])[:2]
    _positive(("size", r), ("size", sep))
    return lab.stable_catenoid_base(r, sep, n)


def cmd_film(args, cfg):
    if args.kappa2h is None or not np.isfinite(args.kappa2h) or args.kappa2h < 0:
        raise UsageError("--kappa2h must be a nonnegative number")
    base = _film_base(args, cfg)
    gdir = polar.tilted_direction(args.tilt) if args.tilt else (0.0, 0.0, 1.0)
    try:
        rep = pmc.solve_gravity_film(base, pmc.GravityParams(args.kappa2h, gdir),
                                     tol=cfg.newton_tol)
    except ContinuationError as exc:
        print(f"soapfilm: {exc}", file=sys.stderr)
        print(f"largest_reached = {exc.largest_reached:.17g}", file=sys.stderr)
        return EXIT_CONTINUATION
    if isinstance(base, polar.PolarDisk):
        rows = [("i", "j", "s", "theta", "u")]
        th = 2 * np.pi * base.angle / base.n_theta
        s = np.hypot(*base.points.T)
        rows += [(int(i), int(j), float(a), float(t), float(u))
                 for i, j, a, t, u in zip(base.ring, base.angle, s, th, rep.u)]
        report = {"residual_linf": rep.residual_linf, "newton_iters": rep.newton_iters,
                  "kappa2h": args.kappa2h, "history": rep.history}
    else:
        rows = list(pmc.export_grid_rows(rep.graph))
        report = rep.to_dict()
        report["area_excess"] = rep.graph.area_excess()
        report["u_c0"] = float(np.max(np.abs(rep.graph.u)))
    if args.out:
        write_csv(cfg.path(args.out), rows)
    else:
        sys.stdout.write(csv_text(rows))
    if args.report:
        write_json(cfg.path(args.report), report)
    elif args.out:
        sys.stdout.write(dumps(report))
    return EXIT_OK


def _h_values(spec):
    try:
        a, b, n = spec.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise UsageError("--h must look like a:b:n") from None
    if not (0 < a < b) or n < 2:
        raise UsageError("--h needs 0 < a < b and n >= 2")
    return np.logspace(np.log10(a), np.log10(b), n)


def cmd_sweep(args, cfg):
    if args.p is not None and not args.p >= 1:
        raise UsageError("--p must be at least 1")
    hs = _h_values(args.h) if args.h else lab.default_h_values()
    base = sf.flat_disk(1.0, cfg.grid) if args.base == "disk" else \
        lab.stable_catenoid_base(1.0, 0.5, cfg.grid)
    recs = lab.run_sweep(base, hs, p=args.p or 3.0)
    x, y, target, tol = ESTIMATES[args.estimate]
    rows = [lab.SWEEP_HEADER] + [r.row() for r in recs]
    if args.out:
        write_csv(cfg.path(args.out), rows)
    fit = lab.fit_estimate([r for r in recs if r.h > 0], x, y)
    ok = abs(fit.slope - target) <= tol and fit.r2 >= MIN_R2
    res = {**fit.to_dict(), "x": x, "y": y, "target": target, "tolerance": tol, "passed": ok,
           "constants": lab.measured_constants(recs)}
    _emit(res, args.fit, cfg)
    return EXIT_OK if ok else EXIT_ERROR


def cmd_access(args, cfg):
    b = bd.read_boundary_csv(_fixture(args.input))
    if args.samples:
        if args.samples < 2:
            raise UsageError("--samples must be at least 2")
        b = bd.BoundarySamples(tuple(
            c[np.linspace(0, len(c), min(args.samples, len(c)), endpoint=False).astype(int)]
            for c in b.components))
    rep = bd.accessibility_report(b)
    _emit({"components": rep, "totally_accessible": all(r["accessible_any"] for r in rep)},
          args.json, cfg)
    return EXIT_OK


def cmd_deficits(args, cfg):
    curve = sf.read_profile_csv(_fixture(args.profile))
    flags = tuple("axis" if abs(r) < 1e-12 else "fixed" for r in (curve.r[0], curve.r[-1]))
    curve = sf.ProfileCurve(curve.params, curve.r, curve.z, flags, curve.orientation)
    base = sf.revolution(curve, cfg.grid)
    dual = (np.inf,) if args.dual else ()
    rep = df.deficit_report(base, (1, 2), dual)
    _emit(rep.to_dict(), args.json, cfg)
    return EXIT_OK


def cmd_check(args, cfg):
    if args.suite != "all" and args.suite not in checks.modules():
        raise UsageError(f"--suite must be 'all' or one of {', '.join(checks.modules())}")
    res = checks.run_suite(args.suite, cfg.seed)
    print(checks.format_table(res))
    if args.json:
        write_json(cfg.path(args.json), [r.to_dict() for r in res])
    return EXIT_OK if all(r.passed for r in res) else EXIT_ERROR


# --- parser ------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="soapfilm", description="Soap films, catenoids and deficit estimates.")
    p.add_argument("--config", help="key=value file (flags win)")
    p.add_argument("--newton-tol", dest="newton_tol", type=float)
    p.add_argument("--quad-tol", dest="quad_tol", type=float)
    p.add_argument("--eig-tol", dest="eig_tol", type=float)
    p.add_argument("--grid", type=int, help="meridian intervals")
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--seed", type=int)
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("catenoids", help="enumerate films spanning two coaxial circles")
    s.add_argument("--r1", type=float, required=True)
    s.add_argument("--r2", type=float, required=True)
    s.add_argument("--sep", type=float, required=True)
    s.add_argument("--singular", action="store_true", help="include singular catenoids")
    s.add_argument("--no-stability", action="store_true")
    s.add_argument("--json")
    s.set_defaults(fn=cmd_catenoids)

    s = sub.add_parser("film", help="solve a gravity film")
    s.add_argument("--shape", choices=("disk", "annulus", "catenoid"), required=True)
    s.add_argument("--size", help="disk: R; annulus: R_in,R_out; catenoid: r,sep")
    s.add_argument("--kappa2h", type=float, required=True)
    s.add_argument("--tilt", type=float, default=0.0, help="gravity tilt (polar disk grid)")
    s.add_argument("--out", help="solution grid CSV")
    s.add_argument("--report", help="solve report JSON")
    s.set_defaults(fn=cmd_film)

    s = sub.add_parser("sweep", help="h-sweep and slope fit")
    s.add_argument("--base", choices=("disk", "catenoid"), default="disk")
    s.add_argument("--estimate", choices=tuple(ESTIMATES), required=True)
    s.add_argument("--p", type=float)
    s.add_argument("--h", help="a:b:n log-spaced kappa^2 h values")
    s.add_argument("--out", help="sweep CSV")
    s.add_argument("--fit", help="fit JSON")
    s.set_defaults(fn=cmd_sweep)

    s = sub.add_parser("access", help="accessibility from infinity of a sampled boundary")
    s.add_argument("--input", required=True, help="CSV with header component,x,y,z")
    s.add_argument("--samples", type=int)
    s.add_argument("--json")
    s.set_defaults(fn=cmd_access)

    s = sub.add_parser("deficits", help="deficits of a revolution surface")
    s.add_argument("--profile", required=True, help="CSV with header s,r,z")
    s.add_argument("--dual", action="store_true", help="also bound the dual deficit")
    s.add_argument("--json")
    s.set_defaults(fn=cmd_deficits)

    s = sub.add_parser("check", help="run the invariant suite")
    s.add_argument("--suite", default="all")
    s.add_argument("--json")
    s.set_defaults(fn=cmd_check)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        return args.fn(args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"soapfilm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ContinuationError as exc:
        print(f"continuation failed: {exc}", file=sys.stderr)
        return EXIT_CONTINUATION
    except (SoapfilmError, OSError) as exc:
        print(f"soapfilm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # internal error: report without a traceback
        print(f"soapfilm: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
