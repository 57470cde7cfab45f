"""``finpart`` command line.

Every invocation prints exactly one JSON document (or CSV rows with
``--csv``) on stdout.  Exit status is 0 on success, 1 for numerical or
domain failures and 2 for usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from . import combinatorics as cb
from .contour import QuadratureConfig, fpi, fpi_epsilon_oracle
from .errors import FinpartError
from .kernels import REGISTRY, resolve_kernel
from .reglim import METHODS, NAMED_RATIOS, named_reglim
from .specialfun import EVALUATORS
from .stieltjes import StieltjesProblem, stieltjes, stieltjes_leading_asymptotic

log = logging.getLogger("finpart")


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    argv: list[str]
    payload: dict
    status: int
    wall_time: float


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would print text and exit
        raise UsageError(message)


def to_jsonable(x: Any) -> Any:
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, Fraction):
        return cb.format_rational(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": to_jsonable(x.real), "im": to_jsonable(x.imag)}
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in x]
    return str(x)


def parse_complex(text: str) -> complex:
    """``"re"``, ``"re,im"`` or a Python complex literal such as ``"1+2j"``."""
    try:
        if "," in text:
            re_, im_ = text.split(",", 1)
            return complex(float(re_), float(im_))
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise UsageError(f"not a number: {text!r}") from exc


def parse_upper(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity", "+inf"):
        return math.inf
    try:
        return float(text)
    except ValueError as exc:
        raise UsageError(f"--upper must be a number or 'inf', got {text!r}") from exc


def _kernel(spec: str):
    try:
        return resolve_kernel(spec)
    except KeyError as exc:
        known = ", ".join(REGISTRY)
        raise UsageError(f"unknown kernel {spec!r} (known: {known}, or a .json Taylor file)") from exc


def _config(args) -> QuadratureConfig:
    if args.tol is None:
        return QuadratureConfig()
    return QuadratureConfig(rel_tol=args.tol, abs_tol=min(1e-14, args.tol))


# --- subcommands ------------------------------------------------------------

NUMBER_FAMILIES = {
    "bernoulli": (("n",), lambda n: cb.bernoulli_number(n)),
    "bernoulli-higher": (("order", "n"), lambda m, n: cb.bernoulli_higher_order(m, n)),
    "bernoulli2": (("n",), lambda n: cb.bernoulli_second_kind(n)),
    "stirling1": (("n", "k"), lambda n, k: cb.stirling_first_signed(n, k)),
    "stirling2": (("n", "k"), lambda n, k: cb.stirling_second(n, k)),
    "euler": (("n",), lambda n: cb.euler_number(n)),
    "partitions": (("k",), lambda k: [p.multiplicities for p in cb.enumerate_partitions(k)]),
}


def cmd_numbers(args) -> dict:
    names, fn = NUMBER_FAMILIES[args.family]
    if len(args.indices) != len(names):
        raise UsageError(f"numbers {args.family} takes {len(names)} index argument(s): {' '.join(names)}")
    return {"family": args.family, "indices": args.indices, "value": fn(*args.indices)}


def cmd_specialfun(args) -> dict:
    if args.name not in EVALUATORS:
        raise UsageError(f"unknown function {args.name!r} (known: {', '.join(EVALUATORS)})")
    values = [parse_complex(a) for a in args.args]
    try:
        out = EVALUATORS[args.name](*values)
    except TypeError as exc:
        raise UsageError(f"wrong number of arguments for {args.name}") from exc
    return {"name": args.name, "args": values, "value": complex(out)}


def cmd_reglim(args) -> dict:
    if args.name not in NAMED_RATIOS:
        raise UsageError(f"unknown ratio {args.name!r} (known: {', '.join(NAMED_RATIOS)})")
    lam0 = None if args.lambda0 is None else parse_complex(args.lambda0)
    r = named_reglim(args.name, args.method, args.param or (), lam0, args.order)
    return {"value": r.value, "method": r.method, "diagnostics": r.diagnostics}


def cmd_fpi(args) -> dict:
    kernel = _kernel(args.kernel)
    lam = parse_complex(args.lam)
    a = parse_upper(args.upper)
    config = _config(args)
    if args.method == "epsilon":
        r = fpi_epsilon_oracle(kernel, lam, args.log_order, a, config, args.eps)
    else:
        r = fpi(kernel, lam, args.log_order, a, config, args.eps)
    return {"kernel": kernel.id, "value": r.value, "est_error": r.est_error, "diagnostics": r.diagnostics}


def cmd_stieltjes(args) -> dict:
    kernel = _kernel(args.kernel)
    problem = StieltjesProblem(kernel, args.nu, args.log_order, parse_complex(args.omega), parse_upper(args.upper))
    leading = stieltjes_leading_asymptotic(problem)
    if args.asymptotic:
        return {"kernel": kernel.id, "value": leading, "est_error": None, "series": None, "leading_term": leading,
                "diagnostics": {"method": "asymptotic"}}
    r = stieltjes(problem, _config(args))
    d = dict(r.diagnostics)
    series = d.pop("series")
    return {"kernel": kernel.id, "value": r.value, "est_error": r.est_error,
            "series": {"terms": series["terms"], "ratio": series["ratio"], "expected_ratio": series["expected_ratio"],
                       "last_term": series["last_term"]},
            "leading_term": leading, "diagnostics": d}


def cmd_verify(args) -> dict:
    from .verify import run_suite

    out = run_suite(args.suite)
    for line in out["lines"]:
        print(line, file=sys.stderr)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="finpart", description="Finite-part integrals, regularized limits and Stieltjes transforms.")
    p.add_argument("--tol", type=float, help="relative quadrature tolerance (default 1e-13)")
    p.add_argument("--json-indent", type=int, default=None, help="indent the JSON output")
    p.add_argument("--csv", action="store_true", help="emit flattened key,value CSV rows instead of JSON")
    p.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("numbers", help="exact Bernoulli, Stirling, Euler numbers and partitions")
    s.add_argument("family", choices=sorted(NUMBER_FAMILIES))
    s.add_argument("indices", type=int, nargs="+")
    s.set_defaults(func=cmd_numbers)

    s = sub.add_parser("specialfun", help="evaluate a special function")
    s.add_argument("action", choices=["eval"])
    s.add_argument("name")
    s.add_argument("args", nargs="*", help="arguments as re, re,im or 1+2j")
    s.set_defaults(func=cmd_specialfun)

    s = sub.add_parser("reglim", help="regularized limit of a built-in ratio")
    s.add_argument("name")
    s.add_argument("--method", choices=METHODS, default="partition-form")
    s.add_argument("--param", type=float, action="append", help="ratio parameter (repeatable)")
    s.add_argument("--lambda0", help="expansion point (defaults to the ratio's own)")
    s.add_argument("--order", type=int, help="zero order n of the denominator")
    s.set_defaults(func=cmd_reglim)

    s = sub.add_parser("fpi", help="finite-part integral of k(t) ln^n t / t^lambda on (0, a)")
    s.add_argument("--kernel", required=True)
    s.add_argument("--lambda", dest="lam", required=True)
    s.add_argument("--log-order", type=int, default=0)
    s.add_argument("--upper", default="inf")
    s.add_argument("--eps", type=float)
    s.add_argument("--method", choices=["contour", "epsilon"], default="contour")
    s.set_defaults(func=cmd_fpi)

    s = sub.add_parser("stieltjes", help="generalized Stieltjes transform")
    s.add_argument("--kernel", required=True)
    s.add_argument("--nu", type=float, required=True)
    s.add_argument("--log-order", type=int, default=0)
    s.add_argument("--omega", required=True)
    s.add_argument("--upper", default="inf")
    s.add_argument("--asymptotic", action="store_true")
    s.set_defaults(func=cmd_stieltjes)

    s = sub.add_parser("verify", help="run an acceptance suite")
    s.add_argument("suite", choices=["identities", "fpi", "reglim", "stieltjes", "all"])
    s.set_defaults(func=cmd_verify)
    return p


def _flatten(x: Any, prefix: str = "") -> list[tuple[str, Any]]:
    if isinstance(x, dict):
        rows = []
        for k, v in x.items():
            rows += _flatten(v, f"{prefix}.{k}" if prefix else str(k))
        return rows
    if isinstance(x, list):
        rows = []
        for i, v in enumerate(x):
            rows += _flatten(v, f"{prefix}.{i}" if prefix else str(i))
        return rows
    return [(prefix, x)]


def render(payload: dict, indent: int | None = None, as_csv: bool = False) -> str:
    if as_csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        w.writerows(_flatten(payload))
        return buf.getvalue().rstrip("\n")
    return json.dumps(payload, indent=indent, allow_nan=False)


def run(argv: Sequence[str] | None = None) -> RunReport:
    argv = list(sys.argv[1:] if argv is None else argv)
    t0 = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand")
        if args.verbose:
            logging.basicConfig(level=logging.INFO, stream=sys.stderr)
        payload, status = to_jsonable(args.func(args)), 0
        if args.command == "verify" and payload["failed"]:
            status = 1
    except UsageError as exc:
        payload, status = {"error": {"kind": "usage", "detail": str(exc)}}, 2
    except FinpartError as exc:
        payload, status = {"error": {"kind": exc.kind, "detail": str(exc)}}, 1
    except (ValueError, ArithmeticError) as exc:
        payload, status = {"error": {"kind": "numeric", "detail": f"{type(exc).__name__}: {exc}"}}, 1
    return RunReport(argv, payload, status, time.perf_counter() - t0)


def _output_flags(argv: list[str]) -> tuple[int | None, bool]:
    indent = None
    for i, a in enumerate(argv):
        if a == "--json-indent" and i + 1 < len(argv):
            try:
                indent = int(argv[i + 1])
            except ValueError:
                pass
        elif a.startswith("--json-indent="):
            try:
                indent = int(a.split("=", 1)[1])
            except ValueError:
                pass
    return indent, "--csv" in argv


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    report = run(argv)
    indent, as_csv = _output_flags(argv)
    print(render(report.payload, indent, as_csv))
    log.info("finished in %.3fs with status %d", report.wall_time, report.status)
    return report.status


if __name__ == "__main__":
    sys.exit(main())
