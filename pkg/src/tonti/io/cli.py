"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 model error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from ..compiler import PATHS, compile_model
from ..errors import ModelError, NumericalError, TontiError
from ..model import validate_model
from ..quantities import TimeGrid
from .emit import emit_equations, emit_trajectory
from .netlist import load

EXIT_OK, EXIT_USAGE, EXIT_MODEL, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _ic_pair(text):
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected <branch>=<value>, got {text!r}")
    try:
        return key, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"value of {key!r} is not a number") from None


def build_parser():
    p = _Parser(prog="tonti", description="Generate and simulate lumped network equations.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="parse and validate a netlist")
    c.add_argument("file")

    m = sub.add_parser("meshes", help="list declared or discovered meshes")
    m.add_argument("file")

    e = sub.add_parser("equations", help="print the compiled system")
    e.add_argument("file")
    e.add_argument("--path", required=True, choices=PATHS)
    e.add_argument("--format", default="matrix", choices=("matrix", "json"))

    s = sub.add_parser("simulate", help="integrate a dynamic path and write CSV")
    s.add_argument("file")
    s.add_argument("--path", required=True, choices=("psi", "q"))
    s.add_argument("--t-end", type=float, required=True)
    s.add_argument("--dt", type=float, required=True)
    s.add_argument("--t0", type=float, default=0.0)
    s.add_argument("--ic", type=_ic_pair, nargs="*", default=[],
                   help="capacitor voltage or inductor current, branch=value")
    s.add_argument("--branches", action="store_true", help="add v_/j_ columns per branch")
    s.add_argument("-o", "--output", help="CSV file (default: standard output)")

    v = sub.add_parser("verify", help="cross-check against independent references")
    v.add_argument("file")
    return p


def _run(args, out):
    model = load(args.file)
    if args.command == "check":
        cx = model.complex
        report = validate_model(model)
        out.write(f"ok: {cx.n_nodes} nodes, {cx.n_branches} branches, {cx.n_meshes} meshes, "
                  f"{len(model.elements)} elements, {len(model.transducers)} transducers\n")
        for f in report.findings:
            out.write(f"warning: {f.code}: {f.message}\n")
        return EXIT_OK
    if args.command == "meshes":
        for mid, walk in model.complex.meshes:
            out.write(f"{mid}: " + " ".join(("+" if s > 0 else "-") + b for b, s in walk) + "\n")
        return EXIT_OK
    if args.command == "equations":
        out.write(emit_equations(compile_model(model, args.path), args.format))
        return EXIT_OK
    if args.command == "simulate":
        if not args.dt > 0 or args.t_end < args.t0:
            raise _UsageError("need --dt > 0 and --t-end >= --t0")
        from ..solver import integrate

        system = compile_model(model, args.path)
        grid = TimeGrid.span(args.t0, args.t_end, args.dt)
        traj = integrate(system, grid, dict(args.ic))
        text = emit_trajectory(traj, model, branches=args.branches)
        if args.output:
            with open(args.output, "w", newline="\n") as fh:
                fh.write(text)
        else:
            out.write(text)
        return EXIT_OK
    if args.command == "verify":
        from ..verification import verify_model

        report = verify_model(model)
        out.write(str(report) + "\n")
        return EXIT_OK if report.passed else EXIT_NUMERIC
    raise _UsageError(f"unknown command {args.command!r}")


class _UsageError(Exception):
    pass


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _run(args, out)
    except _UsageError as exc:
        err.write(f"tonti: error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        err.write(f"tonti: error: {exc}\n")
        return EXIT_USAGE
    except ModelError as exc:
        err.write(f"tonti: model error: {type(exc).__name__}: {exc}\n")
        return EXIT_MODEL
    except NumericalError as exc:
        err.write(f"tonti: numerical failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    except TontiError as exc:
        err.write(f"tonti: error: {exc}\n")
        return EXIT_MODEL


if __name__ == "__main__":
    raise SystemExit(main())
