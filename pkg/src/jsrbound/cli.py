"""Command-line front end.

Exit codes: 0 success, 2 bad input, 3 enumeration budget exhausted,
4 a verification check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys

from . import __version__
from .bounds import (
    BoundMode,
    BoundSequence,
    CertifiedInterval,
    bochi_check,
    certify,
    omega_recursion_check,
    sweep,
)
from .docio import InputError, load
from .ensemble import ENCLOSURE_SLACK, run_bench
from .linalg import NormKind, eigen_spectral_radius
from .semigroup import DEFAULT_BUDGET, BudgetExhausted, MatrixSet, gsr_lower_estimate

log = logging.getLogger("jsrbound")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BUDGET = 3
EXIT_VERIFY = 4

CSV_COLUMNS = ["n", "lower", "upper", "sigma", "nu", "norm", "mode"]


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _num(x):
    """JSON-safe float: non-finite values become null."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _fmt(x) -> str:
    if x is None:
        return "n/a"
    return repr(float(x))


def interval_obj(iv: CertifiedInterval) -> dict:
    p = iv.params
    return {
        "n": iv.n,
        "lower": _num(iv.lower),
        "upper": _num(iv.upper),
        "exact_zero": iv.exact_zero,
        "status": iv.status,
        "norm": iv.norm.value,
        "mode": iv.mode.value,
        "bochi_constant": None if p is None else p.bochi,
        "sigma": None if p is None else _num(p.sigma),
        "nu": None if p is None else _num(p.nu),
        "set_norm": _num(iv.set_norm),
        "power_d_norm": _num(iv.power_d_norm),
        "power_n_norm": _num(iv.power_n_norm),
        "log_power_n_norm": _num(iv.log_power_n_norm),
        "power_n_root": _num(iv.upper),
        "nodes": iv.nodes,
    }


def _csv_row(iv: CertifiedInterval) -> list:
    p = iv.params
    return [iv.n, "" if iv.lower is None else repr(iv.lower), repr(iv.upper),
            "" if p is None else repr(p.sigma), "" if p is None else repr(p.nu),
            iv.norm.value, iv.mode.value]


def _human_interval(iv: CertifiedInterval, S: MatrixSet) -> str:
    p = iv.params
    lines = [f"matrix set: d={S.dim}, r={S.r}; norm={iv.norm.value}, mode={iv.mode.value}, n={iv.n}"]
    if iv.exact_zero:
        lines.append("result: exact zero (nilpotent by d-product test)")
    elif iv.status == "scalar":
        lines.append("result: 1x1 matrices, rho = max |a| exactly")
    if p is not None:
        lines += [
            f"  C_d            = {p.bochi!r}",
            f"  sigma_d(n)     = {p.sigma!r}",
            f"  nu_d(n)        = {p.nu!r}",
        ]
    lines += [
        f"  ||S||          = {_fmt(iv.set_norm)}",
        f"  ||S^d||        = {_fmt(iv.power_d_norm)}",
        f"  ||S^n||        = {_fmt(iv.power_n_norm)}",
        f"  ||S^n||^(1/n)  = {_fmt(iv.upper)}",
        f"  lower          = {_fmt(iv.lower)}",
        f"  upper          = {_fmt(iv.upper)}",
    ]
    if iv.status not in ("ok", "exact-zero", "scalar"):
        lines.append(f"  status: {iv.status}")
    return "\n".join(lines)


def _load_set(path: str) -> MatrixSet:
    try:
        return load(path).to_matrix_set()
    except InputError as exc:
        raise CliError(f"input error: {exc}", EXIT_INPUT) from None


def _write_csv(rows, header, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def cmd_certify(args, out) -> int:
    S = _load_set(args.file)
    try:
        iv = certify(S, args.n, args.norm, args.mode, args.budget, args.tol,
                     args.force_multi_constant)
    except BudgetExhausted as exc:
        best = None if exc.best is None else exc.best.value
        raise CliError(f"budget exhausted: {exc} (best norm so far {best!r})", EXIT_BUDGET) from None
    if args.format == "json":
        json.dump(interval_obj(iv), out, indent=2)
        out.write("\n")
    elif args.format == "csv":
        _write_csv([_csv_row(iv)], CSV_COLUMNS, out)
    else:
        out.write(_human_interval(iv, S) + "\n")
    return EXIT_BUDGET if iv.lower is None else EXIT_OK


def _sweep_summary(seq: BoundSequence, gsr):
    summary = {"best_lower": _num(seq.best_lower), "best_upper": _num(seq.best_upper)}
    if gsr is not None:
        # kept separate from the certified lower bound
        summary["gsr_lower_estimate"] = gsr
        summary["reported_lower"] = max(seq.best_lower or 0.0, gsr)
    return summary


def cmd_sweep(args, out) -> int:
    S = _load_set(args.file)
    seq = sweep(S, args.n_max, args.norm, args.mode, args.budget, args.tol,
                args.force_multi_constant)
    gsr = None
    if args.gsr_depth:
        try:
            gsr = gsr_lower_estimate(S, args.gsr_depth, args.budget)
        except BudgetExhausted as exc:
            log.warning("product-spectrum estimate skipped: %s", exc)
    summary = _sweep_summary(seq, gsr)
    if args.format == "json":
        obj = {"intervals": [interval_obj(iv) for iv in seq],
               "failures": {str(k): v for k, v in seq.failures.items()}, **summary}
        json.dump(obj, out, indent=2)
        out.write("\n")
    elif args.format == "csv":
        _write_csv([_csv_row(iv) for iv in seq], CSV_COLUMNS, out)
        for key, value in summary.items():
            out.write(f"# {key}={value!r}\n")
        for n, msg in seq.failures.items():
            out.write(f"# failed n={n}: {msg}\n")
    else:
        out.write(f"matrix set: d={S.dim}, r={S.r}; norm={args.norm}, mode={args.mode}\n")
        out.write(f"{'n':>5} {'lower':>22} {'upper':>22} {'sigma':>10} {'nu':>10}  note\n")
        for iv in seq:
            p = iv.params
            sig = "" if p is None else f"{p.sigma:.6g}"
            nu = "" if p is None else f"{p.nu:.6g}"
            note = "exact zero" if iv.exact_zero else ("" if iv.status == "ok" else iv.status)
            out.write(f"{iv.n:>5} {_fmt(iv.lower):>22} {_fmt(iv.upper):>22} {sig:>10} {nu:>10}  {note}\n")
        for n, msg in seq.failures.items():
            out.write(f"{n:>5} failed: {msg}\n")
        for key, value in summary.items():
            out.write(f"{key} = {_fmt(value)}\n")
    incomplete = seq.failures or any(iv.lower is None for iv in seq)
    return EXIT_BUDGET if incomplete else EXIT_OK


def cmd_verify(args, out) -> int:
    S = _load_set(args.file)
    if S.r != 1:
        raise CliError(
            f"verify compares against the eigenvalue oracle and needs a single matrix; got r={S.r}",
            EXIT_INPUT)
    rho = eigen_spectral_radius(S[0])
    results = []

    def report(ok, name, detail):
        results.append(ok)
        out.write(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}\n")

    out.write(f"oracle rho = {rho!r}\n")
    for mode in (BoundMode.EXACT, BoundMode.CLOSED):
        seq = sweep(S, args.n_max, args.norm, mode, args.budget, args.tol,
                    args.force_multi_constant)
        for n, msg in seq.failures.items():
            report(False, f"enclosure n={n} mode={mode.value}", msg)
        for iv in seq:
            how = " via exact-zero path" if iv.exact_zero else ""
            report(iv.contains(rho, ENCLOSURE_SLACK), f"enclosure n={iv.n} mode={mode.value}",
                   f"{_fmt(iv.lower)} <= {rho!r} <= {_fmt(iv.upper)}{how}")
    d = S.dim
    if d >= 2:
        b = bochi_check(S, rho, args.norm, args.budget, args.force_multi_constant)
        report(b.holds, "bochi inequality",
               f"||S^d|| = {b.lhs!r} <= C_d*rho*||S||^(d-1) = {b.rhs!r}")
        if rho > 0:
            k_max = 0
            while d ** (k_max + 1) <= args.n_max:
                k_max += 1
            om = omega_recursion_check(S, rho, k_max, args.norm, args.budget,
                                       args.force_multi_constant)
            for row in om.rows:
                report(row.holds, f"omega recursion k={row.k}",
                       f"log omega_{row.n} = {row.log_omega!r} <= {row.log_bound!r}")
        else:
            out.write("SKIP  omega recursion: rho = 0 (exact-zero path)\n")
    else:
        out.write("SKIP  bochi/omega checks: d = 1\n")
    failed = results.count(False)
    out.write(f"{len(results) - failed} passed, {failed} failed\n")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def cmd_bench(args, out) -> int:
    try:
        res = run_bench(args.seed, args.dims, args.members, args.instances, args.n_max,
                        args.norm, args.mode, args.budget, args.gsr_depth)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_INPUT) from None
    rows = [[r.d, r.r, r.n, repr(r.mean_width_ratio), r.instances, repr(r.bochi)]
            for r in res.rows]
    _write_csv(rows, ["d", "r", "n", "mean_width_ratio", "instances", "bochi_constant"], out)
    for msg in res.failures:
        log.warning("budget: %s", msg)
    for msg in res.violations:
        log.error("violation: %s", msg)
    print(f"violations={len(res.violations)} budget_failures={len(res.failures)}", file=sys.stderr)
    return EXIT_VERIFY if res.violations else EXIT_OK


def _positive(value: str) -> int:
    v = int(value)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _nonnegative_int(value: str) -> int:
    v = int(value)
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def _nonnegative(value: str) -> float:
    v = float(value)
    if not v >= 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--norm", choices=["one", "inf", "two"], default="two")
    common.add_argument("--mode", choices=["exact", "closed"], default="exact")
    common.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET,
                        help="max word extensions per enumeration (default 10^7)")
    common.add_argument("--tol", type=_nonnegative, default=0.0,
                        help="entry tolerance for the nilpotency test (default 0, exact)")
    common.add_argument("--format", choices=["human", "json", "csv"], default="human")
    common.add_argument("--force-multi-constant", action="store_true",
                        help="use d^(3d/2) even for a single matrix")

    parser = argparse.ArgumentParser(
        prog="jsrbound",
        description="Certified enclosures of the (joint) spectral radius.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", parents=[common], help="enclosure from products of length n")
    p.add_argument("file", help="JSON matrix-set document ('-' for stdin)")
    p.add_argument("--n", type=_positive, default=1)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("sweep", parents=[common], help="enclosures for n = 1..n-max")
    p.add_argument("file")
    p.add_argument("--n-max", type=_positive, default=8)
    p.add_argument("--gsr-depth", type=_nonnegative_int, default=0,
                   help="also report max rho(P)^(1/|P|) over products up to this length")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", parents=[common], help="check a single matrix against the eigen oracle")
    p.add_argument("file")
    p.add_argument("--n-max", type=_positive, default=8)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", parents=[common], help="seeded random ensemble benchmark (CSV)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--dims", type=int, nargs="+", default=[2, 3])
    p.add_argument("--members", type=_positive, nargs="+", default=[1])
    p.add_argument("--instances", type=_nonnegative_int, default=50)
    p.add_argument("--n-max", type=_positive, default=10)
    p.add_argument("--gsr-depth", type=_nonnegative_int, default=4)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None, out=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    out = out if out is not None else sys.stdout
    try:
        return args.func(args, out)
    except CliError as exc:
        print(f"jsrbound: {exc}", file=sys.stderr)
        return exc.code
    except BudgetExhausted as exc:
        print(f"jsrbound: budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET


def run(argv) -> tuple[int, str]:
    """Run the CLI in-process and capture stdout (used by the tests)."""
    buf = io.StringIO()
    code = main(argv, buf)
    return code, buf.getvalue()


if __name__ == "__main__":
    sys.exit(main())
