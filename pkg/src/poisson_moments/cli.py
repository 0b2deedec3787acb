"""Command-line front end.

Subcommands: ``moment`` (one value), ``table`` (grid of values as text, CSV
or JSON), ``verify`` (cross-method sweep against the oracle), ``bench``
(median-of-5 timings per method), ``poly`` (exact moment-polynomial
coefficients).

Exit codes: 0 ok, 1 verification failure, 2 usage/validation, 3 method
precondition violation.
"""

from __future__ import annotations

import argparse
import ast
import csv
import json
import math
import sys
import time
from dataclasses import dataclass
from statistics import median
from typing import List, Optional

from . import oracle as oracle_mod
from .core import as_mean
from .hypergeom import katti_abs_moment_with_condition
from .polynomials import moment_polynomials
from .precision import PrecisionSpec
from .recurrences import (CONDITION_FLAG_THRESHOLD, abs_moment_3_closed,
                          abs_moment_5_closed, central_moment_shifted,
                          central_moment_table, mean_deviation,
                          signed_moment_shifted, signed_moment_table)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2
EXIT_PRECONDITION = 3

_MOMENT_METHODS = ("recurrence", "shifted", "katti", "closed", "oracle")

DEFAULT_MEAN_GRID = "0.1,0.5,1,2,5,10,25,50"
DEFAULT_CENTER_GRID = "0,m,fl+0.3,m+1"
DEFAULT_THRESHOLD_GRID = "a,0,m/2"


class UsageError(Exception):
    """Flag/grid validation failure (exit 2)."""


class PreconditionError(Exception):
    """A method was asked for outside its domain (exit 3)."""


# ---------------------------------------------------------------------------
# records and serialization


@dataclass
class OutputRecord:
    m: float
    a: Optional[float]
    b: Optional[float]
    r: int
    method: str
    value: float
    condition: Optional[float]
    certified_error: Optional[float]
    elapsed_ns: int


CSV_HEADER = ["m", "a", "b", "r", "method", "value", "condition",
              "certified_error", "elapsed_ns"]


def _f17(x: Optional[float]) -> str:
    # 17 significant digits round-trip binary64 exactly.
    return "" if x is None else format(float(x), ".17g")


def _record_csv_row(rec: OutputRecord) -> List[str]:
    return [_f17(rec.m), _f17(rec.a), _f17(rec.b), str(rec.r), rec.method,
            _f17(rec.value), _f17(rec.condition), _f17(rec.certified_error),
            str(rec.elapsed_ns)]


def _record_json_obj(rec: OutputRecord) -> dict:
    return {
        "m": rec.m, "a": rec.a, "b": rec.b, "r": rec.r, "method": rec.method,
        "value": rec.value, "condition": rec.condition,
        "certified_error": rec.certified_error, "elapsed_ns": rec.elapsed_ns,
    }


def _record_text(rec: OutputRecord) -> str:
    parts = [f"m={_f17(rec.m)}", f"a={_f17(rec.a) or '-'}",
             f"b={_f17(rec.b) or '-'}", f"r={rec.r}", f"method={rec.method}",
             f"value={_f17(rec.value)}",
             f"condition={_f17(rec.condition) or '-'}",
             f"certified_error={_f17(rec.certified_error) or '-'}",
             f"elapsed_ns={rec.elapsed_ns}"]
    return " ".join(parts)


def _emit_records(records: List[OutputRecord], fmt: str, out) -> None:
    if fmt == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in records:
            writer.writerow(_record_csv_row(rec))
    elif fmt == "json":
        json.dump([_record_json_obj(r) for r in records], out, indent=2)
        out.write("\n")
    else:
        for rec in records:
            out.write(_record_text(rec) + "\n")


# ---------------------------------------------------------------------------
# grid parsing


def _eval_expr(src: str, names: dict) -> float:
    """Tiny arithmetic evaluator for grid tokens like ``fl+0.3`` or ``m/2``."""
    try:
        tree = ast.parse(src.strip(), mode="eval")
    except SyntaxError:
        raise UsageError(f"bad grid expression {src!r}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            try:
                return names[node.id]
            except KeyError:
                raise UsageError(
                    f"unknown name {node.id!r} in grid expression {src!r}"
                ) from None
        if isinstance(node, ast.BinOp):
            ops = {ast.Add: lambda x, y: x + y, ast.Sub: lambda x, y: x - y,
                   ast.Mult: lambda x, y: x * y, ast.Div: lambda x, y: x / y}
            fn = ops.get(type(node.op))
            if fn is not None:
                return fn(ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        raise UsageError(f"unsupported grid expression {src!r}")

    return ev(tree)


def _parse_float_grid(spec: str) -> List[float]:
    """Comma list ``1,2,5`` or range ``start:stop:step`` (stop inclusive)."""
    spec = spec.strip()
    if not spec:
        raise UsageError("empty grid")
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise UsageError(f"range grid must be start:stop:step, got {spec!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise UsageError(f"bad range grid {spec!r}") from None
        if step <= 0:
            raise UsageError("grid step must be positive")
        out = []
        x = start
        while x <= stop * (1 + 1e-12):
            out.append(x)
            x += step
        if not out:
            raise UsageError(f"grid {spec!r} is empty")
        return out
    try:
        out = [float(tok) for tok in spec.split(",") if tok.strip() != ""]
    except ValueError:
        raise UsageError(f"bad grid {spec!r}") from None
    if not out:
        raise UsageError(f"grid {spec!r} is empty")
    return out


def _parse_exprs(spec: str) -> List[str]:
    toks = [tok.strip() for tok in spec.split(",") if tok.strip() != ""]
    if not toks:
        raise UsageError("empty grid")
    return toks


def _dedupe(values: List[float]) -> List[float]:
    seen = set()
    out = []
    for v in values:
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


# ---------------------------------------------------------------------------
# computation dispatch


def _prec_from(args) -> PrecisionSpec:
    try:
        if args.precision_bits is not None:
            return PrecisionSpec.extended(args.precision_bits, rel_tol=args.rel_tol)
        return PrecisionSpec.native(rel_tol=args.rel_tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _oracle_eps(prec: PrecisionSpec) -> float:
    return max(prec.rel_tol * 1e-6, 1e-280)


def _compute_value(method: str, mv: float, a: float, b: Optional[float],
                   r: int, prec: PrecisionSpec):
    """(value, condition or None, certified_error or None).

    Without a threshold the target is E |X - a|^r; with one it is the
    signed moment E (X - a)^r sign(X - b).
    """
    if method == "recurrence":
        if b is None:
            if r % 2 == 0:
                tbl = central_moment_table(mv, a, r, prec)
            else:
                tbl = signed_moment_table(mv, a, a, r, prec)
            v = tbl.values[r]
            v = v if v > 0 else prec.real(0.0)
        else:
            tbl = signed_moment_table(mv, a, b, r, prec)
            v = tbl.values[r]
        return float(v), tbl.condition_at(r), None

    if method == "shifted":
        if r < 1:
            raise PreconditionError("the center-shift identity needs --order >= 1")
        if b is None:
            if r % 2 == 0 or a < 0:
                # even order, or odd order about a negative center where
                # |X - a| = X - a on the whole support
                v = central_moment_shifted(mv, a, r, prec)
            else:
                v = signed_moment_shifted(mv, a, a, r, prec)
            v = v if v > 0 else prec.real(0.0)
        else:
            try:
                v = signed_moment_shifted(mv, a, b, r, prec)
            except ValueError as exc:
                raise PreconditionError(str(exc)) from None
        return float(v), None, None

    if method == "closed":
        if b is not None:
            raise PreconditionError("closed forms cover absolute moments only "
                                    "(drop --threshold)")
        if a != mv:
            raise PreconditionError("closed forms are stated about the mean; "
                                    "--center must equal --mean")
        if r == 1:
            v = mean_deviation(mv, prec)
        elif r == 3:
            v = abs_moment_3_closed(mv, prec)
        elif r == 5:
            v = abs_moment_5_closed(mv, prec)
        else:
            raise PreconditionError("closed forms exist for orders 1, 3 and 5")
        return float(v), None, None

    if method == "katti":
        if b is not None:
            raise PreconditionError("the series route covers absolute moments "
                                    "only (drop --threshold)")
        try:
            v, cond = katti_abs_moment_with_condition(mv, a, r, prec)
        except ValueError as exc:
            raise PreconditionError(str(exc)) from None
        return float(v), cond, None

    if method == "oracle":
        w = (oracle_mod.WeightSpec.abs_power(r, a) if b is None
             else oracle_mod.WeightSpec.signed_power(r, a, b))
        res = oracle_mod.expectation(mv, w, _oracle_eps(prec))
        return float(res.value), None, res.certified_error

    raise UsageError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_moment(args, out) -> int:
    prec = _prec_from(args)
    mv = _mean_or_usage(args.mean)
    if args.order < 0:
        raise UsageError("--order must be nonnegative")
    t0 = time.perf_counter_ns()
    value, cond, cert = _compute_value(args.method, mv, args.center,
                                       args.threshold, args.order, prec)
    elapsed = time.perf_counter_ns() - t0
    rec = OutputRecord(mv, args.center, args.threshold, args.order,
                       args.method, value, cond, cert, elapsed)
    _emit_records([rec], args.format, out)
    return EXIT_OK


def _cmd_table(args, out) -> int:
    prec = _prec_from(args)
    means = [_mean_or_usage(x) for x in _parse_float_grid(args.mean_grid)]
    center_exprs = _parse_exprs(args.centers)
    threshold_exprs = _parse_exprs(args.thresholds) if args.thresholds else None
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in _MOMENT_METHODS:
            raise UsageError(f"unknown method {m!r}")
    if args.max_order < 0:
        raise UsageError("--max-order must be nonnegative")

    records = []
    for mv in means:
        names = {"m": mv, "fl": float(math.floor(mv))}
        centers = _dedupe([_eval_expr(e, names) for e in center_exprs])
        for a in centers:
            if threshold_exprs is None:
                thresholds = [None]
            else:
                tnames = dict(names, a=a)
                thresholds = _dedupe([_eval_expr(e, tnames) for e in threshold_exprs])
            for b in thresholds:
                for r in range(args.max_order + 1):
                    for method in methods:
                        try:
                            t0 = time.perf_counter_ns()
                            value, cond, cert = _compute_value(
                                method, mv, a, b, r, prec)
                            elapsed = time.perf_counter_ns() - t0
                        except PreconditionError:
                            continue  # inapplicable (method, point): skip row
                        records.append(OutputRecord(mv, a, b, r, method,
                                                    value, cond, cert, elapsed))
    _emit_records(records, args.format, out)
    return EXIT_OK


def _cmd_poly(args, out) -> int:
    if args.max_order < 0:
        raise UsageError("--max-order must be nonnegative")
    polys = moment_polynomials(args.max_order)
    if args.format == "json":
        json.dump([{"order": p.order, "coeffs": list(p.coeffs)} for p in polys],
                  out, indent=2)
        out.write("\n")
    elif args.format == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["order", "coeffs"])
        for p in polys:
            writer.writerow([p.order, " ".join(str(c) for c in p.coeffs)])
    else:
        for p in polys:
            out.write(f"mu{p.order}: {list(p.coeffs)}\n")
    return EXIT_OK


def _cmd_bench(args, out) -> int:
    prec = _prec_from(args)
    mv = _mean_or_usage(args.mean)
    if args.max_order < 0:
        raise UsageError("--max-order must be nonnegative")
    orders = range(args.max_order + 1)

    def run_recurrence():
        for r in orders:
            _compute_value("recurrence", mv, mv, None, r, prec)

    def run_oracle():
        for r in orders:
            oracle_mod.expectation(mv, oracle_mod.WeightSpec.abs_power(r, mv),
                                   1e-12)

    results = []
    for name, fn in (("recurrence", run_recurrence), ("oracle", run_oracle)):
        times = []
        for _ in range(args.repeats):
            t0 = time.perf_counter_ns()
            fn()
            times.append(time.perf_counter_ns() - t0)
        results.append({"method": name, "elapsed_ns": int(median(times))})

    if args.format == "json":
        json.dump(results, out, indent=2)
        out.write("\n")
    elif args.format == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["method", "elapsed_ns"])
        for row in results:
            writer.writerow([row["method"], row["elapsed_ns"]])
    else:
        for row in results:
            out.write(f"{row['method']}: {row['elapsed_ns']} ns "
                      f"(median of {args.repeats})\n")
        ratio = results[1]["elapsed_ns"] / max(1, results[0]["elapsed_ns"])
        out.write(f"oracle/recurrence ratio: {ratio:.1f}\n")
    return EXIT_OK


def _cmd_verify(args, out, err) -> int:
    prec = _prec_from(args)
    tol = args.tol
    if not tol > 0:
        raise UsageError("--tol must be positive")
    means = [_mean_or_usage(x) for x in _parse_float_grid(args.mean_grid)]
    center_exprs = _parse_exprs(args.centers)
    threshold_exprs = _parse_exprs(args.thresholds)
    if args.max_order < 0:
        raise UsageError("--max-order must be nonnegative")
    orders = range(args.max_order + 1)
    eps = min(_oracle_eps(prec), tol * 1e-6)

    worst: dict = {}
    failures = []
    flagged = 0
    gated_rows = 0

    def _weight_for(key):
        mv, a, b, r, kind = key
        if kind == "central":
            return oracle_mod.WeightSpec.power(r, a)
        if kind == "signed":
            return oracle_mod.WeightSpec.signed_power(r, a, b)
        return oracle_mod.WeightSpec.abs_power(r, a)

    def check(method, candidate, oracle_res, key, gated=True, row_flagged=False):
        nonlocal flagged, gated_rows
        report = oracle_mod.verify_against(key[0], _weight_for(key), candidate,
                                           tol, oracle_result=oracle_res)
        prev = worst.get(method)
        if prev is None or report.rel_err > prev[0]:
            worst[method] = (report.rel_err, key)
        if row_flagged:
            flagged += 1
        if gated and not row_flagged:
            gated_rows += 1
            if not report.passed:
                failures.append((key, method, report.rel_err))

    oracle_cache: dict = {}

    def oracle_for(key):
        res = oracle_cache.get(key)
        if res is None:
            res = oracle_mod.expectation(key[0], _weight_for(key), eps)
            oracle_cache[key] = res
        return res

    for mv in means:
        names = {"m": mv, "fl": float(math.floor(mv))}
        centers = _dedupe([_eval_expr(e, names) for e in center_exprs])
        for a in centers:
            ctable = central_moment_table(mv, a, args.max_order, prec)
            shift_lo = central_moment_table(mv, a - 1, args.max_order, prec)
            for r in orders:
                key = (mv, a, None, r, "central")
                res = oracle_for(key)
                row_flagged = ctable.condition_at(r) > CONDITION_FLAG_THRESHOLD
                check("recurrence", ctable.values[r], res, key,
                      row_flagged=row_flagged)
                if r >= 1:
                    with prec.working():
                        shifted = prec.real(mv) * shift_lo.values[r - 1] \
                            - prec.real(a) * ctable.values[r - 1]
                    check("shifted", shifted, res, key)
                if a == mv and r in (1, 3, 5):
                    akey = (mv, a, None, r, "abs")
                    ares = oracle_for(akey)
                    closed = {1: mean_deviation, 3: abs_moment_3_closed,
                              5: abs_moment_5_closed}[r](mv, prec)
                    check("closed", closed, ares, akey)
                if r % 2 == 1 and a >= 0:
                    akey = (mv, a, None, r, "abs")
                    ares = oracle_for(akey)
                    kval, _ = katti_abs_moment_with_condition(mv, a, r, prec)
                    # series-route agreement is asserted in extended mode
                    # only; in native mode it is reported, not gated
                    check("katti", kval, ares, akey, gated=prec.is_extended)
            tnames = dict(names, a=a)
            thresholds = _dedupe([_eval_expr(e, tnames) for e in threshold_exprs])
            for b in thresholds:
                stable = signed_moment_table(mv, a, b, args.max_order, prec)
                sshift_lo = signed_moment_table(mv, a - 1, b - 1,
                                                args.max_order, prec)
                for r in orders:
                    key = (mv, a, b, r, "signed")
                    res = oracle_for(key)
                    row_flagged = stable.condition_at(r) > CONDITION_FLAG_THRESHOLD
                    check("recurrence", stable.values[r], res, key,
                          row_flagged=row_flagged)
                    if r >= 1 and b >= 0:
                        with prec.working():
                            shifted = prec.real(mv) * sshift_lo.values[r - 1] \
                                - prec.real(a) * stable.values[r - 1]
                        check("shifted", shifted, res, key)

    out.write(f"verify: tol={_f17(tol)} precision={prec.mode} "
              f"gated_rows={gated_rows} flagged_rows={flagged}\n")
    for method in sorted(worst):
        rel, key = worst[method]
        out.write(f"  {method:<10s} worst_rel_err={rel:.3e} "
                  f"at m={_f17(key[0])} a={_f17(key[1])} "
                  f"b={_f17(key[2]) or '-'} r={key[3]}\n")
    if failures:
        for key, method, rel in failures:
            err.write(f"FAIL method={method} m={_f17(key[0])} a={_f17(key[1])} "
                      f"b={_f17(key[2]) or '-'} r={key[3]} rel_err={rel:.3e}\n")
        out.write(f"result: FAIL ({len(failures)} of {gated_rows} gated rows)\n")
        return EXIT_VERIFY_FAIL
    out.write("result: PASS\n")
    return EXIT_OK


def _mean_or_usage(x) -> float:
    try:
        return as_mean(x)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------
# parser


def _add_common(p) -> None:
    p.add_argument("--precision-bits", type=int, default=None, metavar="BITS",
                   help="use extended precision with this mantissa width "
                        "(>= 64); default is native doubles")
    p.add_argument("--rel-tol", type=float, default=1e-12, metavar="TOL",
                   help="relative tolerance for series loops (default 1e-12)")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text",
                   help="output format (default text)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poisson-moments",
        description="Central, signed and absolute moments of the Poisson "
                    "distribution about arbitrary points, with cross-checked "
                    "methods and a certified brute-force oracle.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moment", help="compute one moment value")
    p.add_argument("--mean", type=float, required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--center", type=float, required=True)
    p.add_argument("--threshold", type=float, default=None,
                   help="sign threshold b: compute E (X-a)^r sign(X-b) "
                        "instead of E |X-a|^r")
    p.add_argument("--method", choices=_MOMENT_METHODS, default="recurrence")
    _add_common(p)

    p = sub.add_parser("table", help="emit a grid of moment values")
    p.add_argument("--mean-grid", default="1,2,5",
                   help="comma list or start:stop:step (default 1,2,5)")
    p.add_argument("--centers", default="m",
                   help="comma list of expressions in m and fl=floor(m) "
                        "(default m)")
    p.add_argument("--thresholds", default=None,
                   help="comma list of expressions in m, fl, a; if given, "
                        "signed moments are emitted")
    p.add_argument("--max-order", type=int, default=4)
    p.add_argument("--methods", default="recurrence",
                   help="comma list of methods (default recurrence); "
                        "inapplicable rows are skipped")
    _add_common(p)

    p = sub.add_parser("verify",
                       help="cross-verify all applicable methods against the "
                            "oracle over a grid")
    p.add_argument("--mean-grid", default=DEFAULT_MEAN_GRID)
    p.add_argument("--centers", default=DEFAULT_CENTER_GRID)
    p.add_argument("--thresholds", default=DEFAULT_THRESHOLD_GRID)
    p.add_argument("--max-order", type=int, default=10)
    p.add_argument("--tol", type=float, default=1e-9,
                   help="pass when |candidate - oracle| <= tol (|oracle|+1)")
    _add_common(p)

    p = sub.add_parser("bench",
                       help="median-of-N timings of the recurrence path vs "
                            "the oracle path")
    p.add_argument("--mean", type=float, required=True)
    p.add_argument("--max-order", type=int, default=10)
    p.add_argument("--repeats", type=int, default=5)
    _add_common(p)

    p = sub.add_parser("poly", help="print exact moment-polynomial coefficients")
    p.add_argument("--max-order", type=int, required=True)
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")

    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "moment":
            return _cmd_moment(args, out)
        if args.command == "table":
            return _cmd_table(args, out)
        if args.command == "verify":
            return _cmd_verify(args, out, err)
        if args.command == "bench":
            return _cmd_bench(args, out)
        if args.command == "poly":
            return _cmd_poly(args, out)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except PreconditionError as exc:
        err.write(f"method precondition violated: {exc}\n")
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
