"""
Command-line front end.

Exit codes: 0 success, 1 a monogamy check failed (negative residual beyond
tolerance or a negative n-SCREN member), 2 malformed input, a numerical
identity not met by a construction, or optimizer non-convergence.
Party indices are 0-based.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .convex_roof import RoofOptions, scren_mixed
from .linalg_core import LayoutError, StateValidationError, partial_trace
from .measures import NegativeMeasureError, scren_pcs_one_vs_rest, scren_pcs_pair
from .monogamy import (
    MonogamyOptions,
    RecursionLimitError,
    ckw_residual_scren,
    derive_seed,
    multiparty_scren_mixed,
    strong_monogamy_residual,
)
from .states import (
    DegenerateReductionError,
    PCSParams,
    PCSState,
    WClassCoefficients,
    build_coherent_superposition,
    build_pcs,
    load_state,
    pcs_to_dict,
    phase_damp,
    reduce_pcs_symbolic,
    sample_random_pcs,
    sample_random_wclass,
)

THREADS_ENV = "PCSMONO_THREADS"
CHANNEL_TOL = 1e-10

SWEEP_COLUMNS = ["index", "n", "d", "p", "lambda", "seed", "lhs", "pairwise_sum", "sm_sum",
                 "ckw_residual", "sm_residual", "spread", "error"]


class InputError(Exception):
    pass


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"{THREADS_ENV} must be an integer >= 1, got {raw!r}")
    if n < 1:
        raise InputError(f"{THREADS_ENV} must be an integer >= 1, got {raw!r}")
    return n


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("value must be > 0")
    return v


def _add_source(p: argparse.ArgumentParser, allow_input: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--standard-w", nargs=2, type=int, metavar=("N", "D"),
                   help="uniform W-class coefficients on N parties of dimension D")
    g.add_argument("--random", nargs=2, type=int, metavar=("N", "D"),
                   help="random W-class coefficients (uniform on the sphere)")
    g.add_argument("--coeffs", type=Path, help="JSON file with the coefficient matrix a[i][j] "
                   "as [re, im] pairs or real numbers")
    if allow_input:
        g.add_argument("--input", type=Path, help="existing state file")
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)


def _add_opt_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--r", type=int, default=None, help="decomposition size (default: sweep rank..rank+2)")
    p.add_argument("--starts", type=int, default=8)
    p.add_argument("--tol", type=_positive, default=1e-7, help="optimizer objective tolerance")
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--force-generic", action="store_true",
                   help="disable PCS closed forms; every term goes through the optimizer")
    p.add_argument("--tol-closed", type=_positive, default=1e-10)
    p.add_argument("--tol-optimizer", type=_positive, default=1e-4)
    p.add_argument("--tol-zero", type=_positive, default=1e-6)
    p.add_argument("--threads", type=int, default=None, help=f"worker threads (default ${THREADS_ENV} or 1)")


def _options(args, workers: Optional[int] = None) -> MonogamyOptions:
    if args.starts < 1:
        raise InputError("--starts must be >= 1")
    if workers is None:
        workers = args.threads or _default_threads()
    if workers < 1:
        raise InputError("--threads must be >= 1")
    roof = RoofOptions(r=args.r, starts=args.starts, tol=args.tol, max_iter=args.max_iter,
                       seed=args.seed, workers=workers)
    return MonogamyOptions(roof=roof, force_generic=args.force_generic, tol_closed=args.tol_closed,
                           tol_optimizer=args.tol_optimizer, tol_zero=args.tol_zero)


def _read_coeffs(path: Path) -> np.ndarray:
    try:
        rows = json.loads(path.read_text())
        if isinstance(rows, dict):
            rows = rows["a"]
        return np.array([[complex(*e) if isinstance(e, list) else complex(e) for e in row]
                         for row in rows], dtype=complex)
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read coefficients from {path}: {exc}")


def _source(args) -> PCSState:
    if getattr(args, "input", None) is not None:
        pcs = load_state(args.input)
        p = pcs.p if args.p is None else args.p
        lam = pcs.lam if args.lam is None else args.lam
        return PCSState(pcs.coeffs, PCSParams(p, lam))
    if args.standard_w is not None:
        coeffs = WClassCoefficients.standard_w(*args.standard_w)
    elif args.random is not None:
        coeffs = sample_random_wclass(*args.random, seed=args.seed)
    else:
        coeffs = WClassCoefficients(_read_coeffs(args.coeffs))
    p = 1.0 if args.p is None else args.p
    lam = 1.0 if args.lam is None else args.lam
    return PCSState(coeffs, PCSParams(p, lam))


def _write(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def cmd_build(args) -> int:
    pcs = _source(args)
    residual = abs(float(np.sum(np.abs(pcs.coeffs.a) ** 2)) - 1.0)
    _write(json.dumps(pcs_to_dict(pcs), indent=2) + "\n", args.output)
    print(f"normalization residual: {residual!r}", file=sys.stderr)
    return 0


def cmd_reduce(args) -> int:
    pcs = load_state(args.input)
    red = reduce_pcs_symbolic(pcs, args.trace)
    keep = [i for i in range(pcs.n) if i not in set(args.trace)]
    numeric = build_pcs(pcs)
    err = float(np.max(np.abs(build_pcs(red).entries - partial_trace(numeric, keep).entries)))
    _write(json.dumps(pcs_to_dict(red), indent=2) + "\n", args.output)
    print(f"max entrywise deviation from numeric partial trace: {err!r}", file=sys.stderr)
    return 0 if err <= args.tol_closed else 2


def cmd_measure(args) -> int:
    pcs = load_state(args.input)
    opts = _options(args)
    f = args.focus
    if args.kind == "one-vs-rest":
        mv = (scren_mixed(build_pcs(pcs), [f], opts.roof) if args.force_generic
              else scren_pcs_one_vs_rest(pcs, f))
    elif args.kind == "pair":
        if args.other is None:
            raise InputError("--other is required for --kind pair")
        if args.force_generic:
            parties = sorted({f, args.other})
            mv = scren_mixed(partial_trace(build_pcs(pcs), parties), [parties.index(f)], opts.roof)
        else:
            mv = scren_pcs_pair(pcs, f, args.other)
    else:
        mv = multiparty_scren_mixed(build_pcs(pcs), f, opts)
    payload = {"kind": args.kind, "focus": f, "value": mv.value, "method": mv.method,
               "seed": args.seed}
    if args.kind == "pair":
        payload["other"] = args.other
    _write(json.dumps(payload, indent=2) + "\n", args.output)
    return 0


def _verify(args, fn) -> int:
    pcs = load_state(args.input)
    opts = _options(args)
    try:
        report = fn(pcs, args.focus, opts)
    except NegativeMeasureError as exc:
        _write(json.dumps({"claim": args.claim, "pass": False, "error": str(exc),
                           "seed": args.seed}, indent=2) + "\n", args.output)
        return 1
    if args.tolerance is not None:
        tol = args.tolerance
        report = replace(report, tolerance=tol, passed=report.residual >= -tol,
                         saturated=abs(report.residual) <= tol)
    _write(report.to_json() + "\n", args.output)
    if not report.passed:
        return 1
    if not report.converged:
        print("optimizer did not converge for at least one term", file=sys.stderr)
        return 2
    return 0


def cmd_verify_monogamy(args) -> int:
    args.claim = "ckw"
    return _verify(args, ckw_residual_scren)


def cmd_verify_strong(args) -> int:
    args.claim = "sm"
    return _verify(args, strong_monogamy_residual)


def cmd_channel(args) -> int:
    pcs = _source(args)
    psi = build_coherent_superposition(pcs.coeffs, pcs.p)
    damped = phase_damp(psi, pcs.lam)
    residual = float(np.max(np.abs(damped.entries - build_pcs(pcs).entries)))
    payload = {
        "dims": list(damped.layout.dims),
        "p": pcs.p,
        "lambda": pcs.lam,
        "re": damped.entries.real.tolist(),
        "im": damped.entries.imag.tolist(),
        "pcs_residual": residual,
    }
    _write(json.dumps(payload) + "\n", args.output)
    print(f"entrywise residual vs PCS form: {residual!r}", file=sys.stderr)
    return 0 if residual <= CHANNEL_TOL else 2


def _sweep_instances(args) -> list[tuple[int, int, Optional[float], Optional[float]]]:
    """(index, seed, p, lambda); p/lambda None means drawn with the coefficients."""
    out = []
    if args.p_grid is not None or args.lambda_grid is not None:
        ps = args.p_grid if args.p_grid is not None else [1.0]
        ls = args.lambda_grid if args.lambda_grid is not None else [1.0]
        combos = [(p, l) for p in ps for l in ls]
        for k in range(args.samples):
            for p, l in combos:
                i = len(out)
                out.append((i, derive_seed(args.seed, i), p, l))
    else:
        for i in range(args.samples):
            out.append((i, derive_seed(args.seed, i), None, None))
    return out


def _sweep_row(inst, args, opts: MonogamyOptions) -> dict:
    i, seed, p, lam = inst
    row = {"index": i, "n": args.n, "d": args.d, "seed": seed}
    try:
        pcs = sample_random_pcs(args.n, args.d, seed)
        if p is not None:
            pcs = PCSState(pcs.coeffs, PCSParams(p, lam))
        row.update({"p": pcs.p, "lambda": pcs.lam})
        o = opts.reseeded(seed)
        ckw = ckw_residual_scren(pcs, 0, o)
        sm = strong_monogamy_residual(pcs, 0, o)
        row.update({
            "lhs": ckw.lhs,
            "pairwise_sum": sum(t.contribution for t in ckw.terms),
            "sm_sum": sum(t.contribution for t in sm.terms),
            "ckw_residual": ckw.residual,
            "sm_residual": sm.residual,
            "spread": max(ckw.max_spread, sm.max_spread),
            "error": "",
        })
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def cmd_sweep(args) -> int:
    if args.samples < 0:
        raise InputError("--samples must be >= 0")
    if args.n < 3 or args.d < 2:
        raise InputError("sweep needs n >= 3 and d >= 2")
    threads = args.threads or _default_threads()
    opts = _options(args, workers=1)
    instances = _sweep_instances(args)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda inst: _sweep_row(inst, args, opts), instances))
    else:
        rows = [_sweep_row(inst, args, opts) for inst in instances]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in SWEEP_COLUMNS])
    _write(buf.getvalue(), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcsmono", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="write a W-class / PCS state file")
    _add_source(p, allow_input=False)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("reduce", help="trace out parties of a PCS state symbolically")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--trace", type=int, nargs="+", required=True)
    p.add_argument("--tol-closed", type=_positive, default=1e-10)
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("measure", help="evaluate a SCREN quantity on a state file")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--kind", choices=["one-vs-rest", "pair", "nscren"], default="one-vs-rest")
    p.add_argument("--focus", type=int, default=0)
    p.add_argument("--other", type=int)
    _add_opt_flags(p)
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_measure)

    for name, fn, what in (("verify-monogamy", cmd_verify_monogamy, "one-vs-rest vs pairwise SCREN"),
                           ("verify-strong", cmd_verify_strong, "strong monogamy residual")):
        p = sub.add_parser(name, help=what)
        p.add_argument("--input", type=Path, required=True)
        p.add_argument("--focus", type=int, default=0)
        p.add_argument("--tolerance", type=_positive, default=None,
                       help="override the residual tolerance")
        _add_opt_flags(p)
        p.add_argument("-o", "--output", type=Path)
        p.set_defaults(func=fn)

    p = sub.add_parser("channel", help="phase-damp a coherent superposition and compare with the PCS form")
    _add_source(p)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_channel)

    p = sub.add_parser("sweep", help="CSV of monogamy residuals over random PCS instances")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--p-grid", type=float, nargs="*")
    p.add_argument("--lambda-grid", type=float, nargs="*")
    _add_opt_flags(p)
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return args.func(args)
    except (InputError, LayoutError, StateValidationError, DegenerateReductionError,
            RecursionLimitError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NegativeMeasureError as exc:
        print(f"negative measure: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # exit-code contract: never escape with a traceback code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
