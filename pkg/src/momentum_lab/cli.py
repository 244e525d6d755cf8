"""Command-line front end.

    momentum-lab params     --method c2m --m 1 --L 100
    momentum-lab rho        --kappa 1e4 --tol 1e-12
    momentum-lab certify    --method c2m --m 1 --L 1e4
    momentum-lab simulate   --method gd,hb,tm,c2m --iters 100000 --out sim.csv
    momentum-lab complexity --method gd,tm,c2m --out curve.csv

Exit status: 0 on success, 1 on usage or input errors, 2 when a
certificate fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .algorithm import Method
from .bench import DEFAULT_ITERS, make_tmm_oracle, standard_tmm_spec, run_experiment
from .certificates import certify
from .polynomial import DEFAULT_TOL, KAPPA_THRESHOLD, rho_c2m
from .schedules import DEFAULT_EPSILON, complexity_curve, schedule

EXIT_OK, EXIT_USAGE, EXIT_CERT_FAIL = 0, 1, 2

DEFAULT_SIM_METHODS = "gd,hb,tm,c2m"
DEFAULT_CURVE_METHODS = "gd,hb,tm,c2m"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _method_list(text: str) -> list[Method]:
    out = [Method.parse(t) for t in text.split(",") if t.strip()]
    if not out:
        raise ValueError("no methods given")
    return out


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="momentum-lab", description="C2M and friends: tuning, certificates, simulation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common_io(p, default_format):
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--format", choices=("csv", "json"), default=default_format)

    def class_args(p, required=True):
        p.add_argument("--m", type=float, required=required, help="strong convexity modulus")
        p.add_argument("--L", type=float, required=required, help="gradient Lipschitz constant")

    p = sub.add_parser("params", help="tuned (alpha, beta, eta, rho) for one method")
    p.add_argument("--method", required=True)
    class_args(p)
    p.add_argument("--rho", type=float, help="C2M only: rate override")
    p.add_argument("--eps", type=float, default=DEFAULT_EPSILON, help="C2M: rho = rho_C2M + eps")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common_io(p, "json")

    p = sub.add_parser("rho", help="rho_C2M for a condition number")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common_io(p, "csv")

    p = sub.add_parser("certify", help="run the convergence certificates")
    p.add_argument("--method", required=True)
    class_args(p)
    p.add_argument("--rho", type=float, help="C2M only: rate override")
    p.add_argument("--eps", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common_io(p, "json")

    p = sub.add_parser("simulate", help="error curves on the worst-case test function")
    p.add_argument("--method", default=DEFAULT_SIM_METHODS, help="comma-separated methods")
    class_args(p, required=False)
    p.add_argument("--iters", type=int, default=DEFAULT_ITERS)
    common_io(p, "csv")

    p = sub.add_parser("complexity", help="-1/log(rho) against kappa")
    p.add_argument("--method", default=DEFAULT_CURVE_METHODS, help="comma-separated methods")
    p.add_argument("--kappa", type=_float_list,
                   help="comma-separated kappa values (default: 20 log-spaced in [1e3, 1e6])")
    common_io(p, "csv")
    return parser


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def _csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _table(header: Sequence[str], rows: Sequence[Sequence[Any]], fmt: str) -> str:
    if fmt == "csv":
        return _csv(header, rows)
    return _json([dict(zip(header, row)) for row in rows])


def _schedule_from(args):
    method = Method.parse(args.method)
    if args.rho is not None and method is not Method.C2M:
        raise UsageError("--rho only applies to --method c2m")
    if method is Method.CUSTOM:
        raise UsageError("method 'custom' has no schedule")
    return schedule(method, args.m, args.L, rho_override=args.rho, epsilon=args.eps, tol=args.tol)


def cmd_params(args) -> tuple[str, int]:
    s = _schedule_from(args)
    p = s.params
    rec = {"method": s.method.value, "m": p.m, "L": p.L, "kappa": p.kappa,
           "rho": p.rho, "alpha": p.alpha, "beta": p.beta, "eta": p.eta}
    if args.format == "csv":
        return _csv(list(rec), [list(rec.values())]), EXIT_OK
    return _json(rec), EXIT_OK


def cmd_rho(args) -> tuple[str, int]:
    if not args.kappa >= KAPPA_THRESHOLD:
        raise UsageError(f"kappa={args.kappa!r} is below the threshold "
                         f"9+4*sqrt(5) = {KAPPA_THRESHOLD:.3f}")
    value = rho_c2m(args.kappa, args.tol)
    if args.format == "json":
        return _json({"kappa": args.kappa, "rho_c2m": value, "tol": args.tol}), EXIT_OK
    return repr(value) + "\n", EXIT_OK


def cmd_certify(args) -> tuple[str, int]:
    report = certify(_schedule_from(args).params)
    code = EXIT_OK if report.passed else EXIT_CERT_FAIL
    d = report.to_dict()
    if args.format == "csv":
        flat = {k: (";".join(map(repr, v)) if isinstance(v, list) else v) for k, v in d.items()}
        return _csv(list(flat), [list(flat.values())]), code
    return _json(d), code


def cmd_simulate(args) -> tuple[str, int]:
    base = standard_tmm_spec()
    m = base.m if args.m is None else args.m
    L = base.L if args.L is None else args.L
    spec = type(base)(m=m, L=L, r=base.r, directions=base.directions, offsets=base.offsets)
    if args.iters < 1:
        raise UsageError("--iters must be positive")
    methods = _method_list(args.method)
    result = run_experiment(methods, make_tmm_oracle(spec), iters=args.iters)
    rows = []
    for method in methods:
        errs = result[method].trajectory.errors
        rows.extend((k, method.value, float(e)) for k, e in enumerate(errs))
    return _table(("k", "method", "error"), rows, args.format), EXIT_OK


def cmd_complexity(args) -> tuple[str, int]:
    grid = args.kappa if args.kappa else list(np.logspace(3, 6, 20))
    rows = complexity_curve(_method_list(args.method), [float(k) for k in grid])
    return _table(("method", "kappa", "rho", "inv_log_rate"), [tuple(r) for r in rows],
                  args.format), EXIT_OK


COMMANDS = {
    "params": cmd_params,
    "rho": cmd_rho,
    "certify": cmd_certify,
    "simulate": cmd_simulate,
    "complexity": cmd_complexity,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text, code = COMMANDS[args.command](args)
    except (UsageError, ValueError, ArithmeticError) as exc:
        print(f"momentum-lab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"momentum-lab: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
