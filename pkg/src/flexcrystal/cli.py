"""Command-line entry point.

Exit codes: 0 success, 1 usage or parse error, 2 validation or degeneracy
failure, 3 rotation outside the tridymite solver's neighbourhood.
Artifacts go to standard output (or ``--output``); diagnostics go to
standard error. Angles are radians throughout.
"""
from __future__ import annotations

import argparse
import io
import os
import sys

import numpy as np

from . import cristobalite, framework, quartz, tridymite
from .framework import FrameworkParseError, dumps
from .geom3 import GeometryError, Orthogonal3, rotation_from_axis_angle

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NEIGHBORHOOD = 0, 1, 2, 3
TOL_ENV = "FLEXCRYSTAL_TOL"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_tol() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return 1e-9
    try:
        tol = float(raw)
    except ValueError:
        raise UsageError(f"{TOL_ENV}={raw!r} is not a number") from None
    if not tol > 0:
        raise UsageError(f"{TOL_ENV} must be positive")
    return tol


def _positive_float(text: str) -> float:
    x = float(text)
    if not (x > 0 and np.isfinite(x)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return x


def _seed(text: str) -> int:
    x = int(text)
    if not 0 <= x < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return x


def _vector(text: str) -> np.ndarray:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text!r}") from None
    if len(parts) != 3 or not all(np.isfinite(parts)):
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text!r}")
    return np.array(parts)


def _grid(n: int):
    def parse(text: str) -> tuple[int, ...]:
        try:
            parts = tuple(int(p) for p in text.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated counts") from None
        if len(parts) != n or min(parts) < 1:
            raise argparse.ArgumentTypeError(f"expected {n} counts, each at least 1")
        return parts
    return parse


def _count(text: str) -> int:
    x = int(text)
    if x < 1:
        raise argparse.ArgumentTypeError("count must be at least 1")
    return x


def _rotation(args) -> Orthogonal3:
    norm = np.linalg.norm(args.axis)
    if norm == 0.0:
        raise UsageError("--axis must be a nonzero vector")
    return rotation_from_axis_angle(args.axis / norm, args.angle)


def _emit(text: str, args):
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _note(msg: str):
    print(msg, file=sys.stderr)


def _check_format(args, allowed: tuple[str, ...]) -> str:
    fmt = args.format or allowed[0]
    if fmt not in allowed:
        raise UsageError(f"--format {fmt} is not available here (choose from {', '.join(allowed)})")
    return fmt


def _fragment_text(frag, fmt: str) -> str:
    data = framework.export_json(frag) if fmt == "json" else framework.export_obj(frag)
    return data.decode("utf-8")


# --- quartz ----------------------------------------------------------------

def cmd_quartz(args) -> int:
    tol = args.tol
    if args.action == "realize":
        fmt = _check_format(args, ("json", "obj"))
        if args.random:
            rng = np.random.default_rng(args.seed)
            chart = quartz.QuartzChart(*rng.uniform(0.0, 2.0 * np.pi, 3))
        else:
            chart = quartz.QuartzChart(args.theta, args.phi0, args.phi1)
        cfg = quartz.realize(chart)
        report = framework.validate(cfg.fragment, tol)
        degenerate = quartz.is_degenerate(cfg, tol)
        _note(f"chart theta={chart.theta!r} phi0={chart.phi0!r} phi1={chart.phi1!r}")
        _note(report.summary())
        if degenerate or not report.passed:
            if args.strict:
                _note("error: configuration is degenerate or fails validation (--strict)")
                return EXIT_INVALID
            _note("warning: configuration is degenerate or fails validation")
        _emit(_fragment_text(cfg.fragment, fmt), args)
        return EXIT_OK
    _check_format(args, ("csv",))
    buf = io.StringIO()
    quartz.sweep(tuple(args.grid), buf, tol=tol)
    _emit(buf.getvalue(), args)
    return EXIT_OK


# --- cristobalite ------------------------------------------------------------

def cmd_cristobalite(args) -> int:
    tol = args.tol
    if args.action == "realize":
        fmt = _check_format(args, ("json", "obj"))
        cfg = cristobalite.realize(_rotation(args))
        admissible = cristobalite.is_admissible(cfg, tol)
        _note(f"det_gamma={cfg.det_gamma()!r} admissible={'true' if admissible else 'false'}")
        _note(framework.validate(cfg.fragment, tol).summary())
        if not admissible:
            if args.strict:
                _note("error: generators are linearly dependent (--strict)")
                return EXIT_INVALID
            _note("warning: generators are linearly dependent")
        _emit(_fragment_text(cfg.fragment, fmt), args)
        return EXIT_OK
    _check_format(args, ("csv",))
    buf = io.StringIO()
    cristobalite.admissibility_scan(args.axes, args.angles, buf)
    _emit(buf.getvalue(), args)
    return EXIT_OK


# --- tridymite ------------------------------------------------------------

def branch_document(sol: tridymite.TridymiteSolution) -> dict:
    return {
        "label": sol.label.as_dict(),
        "Q1": sol.Q1.matrix,
        "Q2": sol.Q2.matrix,
        "R0": sol.R0.matrix,
        "R1": sol.R1.matrix,
        "R2": sol.R2.matrix,
        "residual_eq4": sol.closure_residual(),
        "residual_eq2": sol.period_residual(),
        "config": framework.to_document(sol.config),
    }


def cmd_tridymite(args) -> int:
    tol = args.tol
    if args.action == "tangent":
        rep = tridymite.tangent_analysis(args.h)
        sv = " ".join(framework.format_float(s) for s in rep.singular_values)
        _emit(f"{rep.nullity}\nrank {rep.rank}\nsingular_values {sv}\n", args)
        return EXIT_OK

    Q = _rotation(args)
    try:
        if args.action == "oracle":
            rep = tridymite.oracle_solutions(Q, args.grid)
            lines = [str(rep.count)]
            if rep.degenerate:
                lines.append("degenerate circles: counted from the closed-form branches")
            lines += [f"match {k} {framework.format_float(d)}"
                      for k, d in enumerate(rep.match_distances)]
            _emit("\n".join(lines) + "\n", args)
            return EXIT_OK
        sols = tridymite.solve(Q)
    except tridymite.OutsideNeighborhoodError as exc:
        _note(f"error: Q is outside the solvable neighbourhood: {exc}")
        return EXIT_NEIGHBORHOOD

    _check_format(args, ("json",))
    ram = tridymite.ramification_defect(sols, tol)
    _note(f"distinct_branches={ram.distinct}")
    failed = False
    for sol in sols:
        report = framework.validate(sol.config, tol)
        bad = not report.passed or sol.closure_residual() >= tol or sol.period_residual() >= tol
        failed |= bad
        _note(f"branch swap={sol.label.swap} reflect={sol.label.reflect} "
              f"closure={sol.closure_residual():.3e} period={sol.period_residual():.3e} {report.summary()}")
    if failed and args.strict:
        _note("error: a branch fails validation (--strict)")
        return EXIT_INVALID
    if args.branch is not None:
        if not 0 <= args.branch < len(sols):
            raise UsageError(f"--branch must be between 0 and {len(sols) - 1}")
        _emit(_fragment_text(sols[args.branch].config, "json"), args)
    else:
        _emit(dumps([branch_document(s) for s in sols]) + "\n", args)
    return EXIT_OK


# --- validate ------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        if args.path == "-":
            data = sys.stdin.buffer.read()
        else:
            with open(args.path, "rb") as fh:
                data = fh.read()
    except OSError as exc:
        _note(f"error: cannot read {args.path}: {exc.strerror}")
        return EXIT_USAGE
    try:
        real = framework.import_json(data)
    except FrameworkParseError as exc:
        _note(f"error: {exc}")
        return EXIT_USAGE
    report = framework.validate(real, args.tol)
    _emit(report.summary() + "\n", args)
    return EXIT_OK if report.passed else EXIT_INVALID


def build_parser(default_tol: float = 1e-9) -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=_positive_float, default=default_tol,
                        help=f"geometric tolerance (default {default_tol:g}; env {TOL_ENV})")
    common.add_argument("--seed", type=_seed, default=0,
                        help="seed for sampled inputs such as 'quartz realize --random'")
    common.add_argument("-o", "--output", help="write the artifact here instead of stdout")
    common.add_argument("--format", choices=("json", "obj", "csv"))
    common.add_argument("--strict", action="store_true",
                        help="treat degenerate or invalid configurations as failures")

    parser = _Parser(prog="flexcrystal", description=__doc__.splitlines()[0])
    groups = parser.add_subparsers(dest="group", required=True)

    q = groups.add_parser("quartz", help="quartz torus chart").add_subparsers(
        dest="action", required=True)
    qr = q.add_parser("realize", parents=[common])
    qr.add_argument("--theta", type=float, default=0.0)
    qr.add_argument("--phi0", type=float, default=0.0)
    qr.add_argument("--phi1", type=float, default=0.0)
    qr.add_argument("--random", action="store_true", help="draw the chart point from --seed")
    qs = q.add_parser("sweep", parents=[common])
    qs.add_argument("--grid", type=_grid(3), default=(8, 8, 8), help="counts theta,phi0,phi1")
    for p in (qr, qs):
        p.set_defaults(func=cmd_quartz)

    c = groups.add_parser("cristobalite", help="cristobalite rotation chart").add_subparsers(
        dest="action", required=True)
    cr = c.add_parser("realize", parents=[common])
    cr.add_argument("--axis", type=_vector, default=np.array([0.0, 0.0, 1.0]))
    cr.add_argument("--angle", type=float, default=0.0)
    cs = c.add_parser("scan", parents=[common])
    cs.add_argument("--axes", type=_count, default=64)
    cs.add_argument("--angles", type=_count, default=64)
    for p in (cr, cs):
        p.set_defaults(func=cmd_cristobalite)

    t = groups.add_parser("tridymite", help="tridymite four-bar solver").add_subparsers(
        dest="action", required=True)
    ts = t.add_parser("solve", parents=[common])
    ts.add_argument("--branch", type=int, help="emit only this branch's framework JSON")
    to = t.add_parser("oracle", parents=[common])
    to.add_argument("--grid", type=int, default=256)
    for p in (ts, to):
        p.add_argument("--axis", type=_vector, default=np.array([0.0, 0.0, 1.0]))
        p.add_argument("--angle", type=float, default=0.0)
    tt = t.add_parser("tangent", parents=[common])
    tt.add_argument("--h", type=float, default=1e-5, help="finite-difference step")
    for p in (ts, to, tt):
        p.set_defaults(func=cmd_tridymite)

    v = groups.add_parser("validate", parents=[common], help="validate a framework JSON file")
    v.add_argument("path", help="framework JSON file, or - for stdin")
    v.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    try:
        parser = build_parser(_default_tol())
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        _note(f"flexcrystal: error: {exc}")
        return EXIT_USAGE
    except (GeometryError, ValueError) as exc:
        _note(f"flexcrystal: error: {exc}")
        return EXIT_USAGE


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
