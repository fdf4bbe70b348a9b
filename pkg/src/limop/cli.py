"""Command line front end.

    limop index <spec> [--out report.json] [--no-oracle]
    limop curve <spec> [--samples N] [--out curve.csv]
    limop suite <dir> [--strict] [--jobs J] [--out summary.csv]

Exit codes: 0 Fredholm (and oracle agreement when run), 1 spec error,
2 not Fredholm, 3 oracle disagreement or non-stabilized counts.
``LIMOP_ORACLE_MAXSIZE`` caps the oracle truncation sizes.
"""

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .band_ops import BlockBandOperator, plus_compression
from .discretization import discretize_convolution, kernel_symbol_curve
from .exceptions import InternalDisagreement, NotFredholm, NotStabilized, SpecError
from .index_engine import index_of, toeplitz_index, wiener_hopf_index
from .oracle import P_INDEPENDENCE_NOTE, oracle_index
from .specfile import load_spec
from .symbols import TWO_PI, arg_increments, det_symbol, refine_curve

EXIT_OK, EXIT_SPEC, EXIT_NOT_FREDHOLM, EXIT_DISAGREE = 0, 1, 2, 3
SPEC_SUFFIXES = (".yaml", ".yml")


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temporary file in the same directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _oracle_cfg(spec, block_dim):
    cfg = spec.oracle
    if spec.kind == "convolution" and not spec.oracle_sizes_given:
        # sizes count blocks; keep the matrix dimension at desk scale
        sizes = tuple(sorted({max(8, n // block_dim) for n in cfg.sizes}))
        cfg = replace(cfg, sizes=sizes)
    return cfg


def _not_fredholm(kind, exc):
    return {"kind": kind, "fredholm": False, "reason": str(exc), "member": exc.member,
            "margin": exc.margin, "p_note": P_INDEPENDENCE_NOTE}


def _run_toeplitz(spec, run_oracle):
    sym = spec.target
    try:
        idx = toeplitz_index(sym, spec.policy)
    except NotFredholm as exc:
        return _not_fredholm("toeplitz", exc), EXIT_NOT_FREDHOLM
    report = {
        "kind": "toeplitz", "fredholm": True, "margin": idx.margin, "ind": int(idx),
        "ind_plus": int(idx), "ind_minus": None, "winding": -int(idx),
        "per_limit_op": [], "oracle_check": None,
        "provenance": {"ind": f"-winding(det symbol) [{idx.recipe}]"},
        "p_note": P_INDEPENDENCE_NOTE,
    }
    code = EXIT_OK
    if run_oracle:
        handle = plus_compression(BlockBandOperator.laurent(sym))
        try:
            res = oracle_index(handle, spec.oracle)
            report["oracle_check"] = {"ind": res.index, "dims": [res.kernel_dim, res.cokernel_dim],
                                      "agree": res.index == int(idx),
                                      "sizes": list(spec.oracle.effective_sizes()),
                                      "note": P_INDEPENDENCE_NOTE}
        except (NotStabilized, ValueError) as exc:
            report["oracle_check"] = {"agree": False, "error": f"{type(exc).__name__}: {exc}",
                                      "note": P_INDEPENDENCE_NOTE}
        if not report["oracle_check"]["agree"]:
            code = EXIT_DISAGREE
    return report, code


def _run_operator(op, spec, run_oracle, kind):
    try:
        rep = index_of(op, spec.policy, _oracle_cfg(spec, op.block_dim), run_oracle=run_oracle)
    except NotFredholm as exc:
        return _not_fredholm(kind, exc), EXIT_NOT_FREDHOLM
    except InternalDisagreement as exc:
        return {"kind": kind, "fredholm": None, "reason": str(exc),
                "p_note": P_INDEPENDENCE_NOTE}, EXIT_DISAGREE
    report = {"kind": kind, **rep.to_dict()}
    return report, (EXIT_OK if rep.agrees else EXIT_DISAGREE)


def _run_convolution(spec, run_oracle):
    conv = spec.target
    disc = discretize_convolution(conv.kernel, conv.config)
    op = disc.operator.with_identity_offset(conv.identity_offset)
    report, code = _run_operator(op, spec, run_oracle, "convolution")
    report["discretization"] = {"cells_per_unit": conv.config.cells_per_unit,
                                "band_cut": disc.band_cut, "dropped_mass": disc.dropped_mass,
                                "defect": disc.defect}
    if code == EXIT_NOT_FREDHOLM:
        return report, code
    scaled = _scaled_kernel(conv)
    try:
        continuous = wiener_hopf_index(scaled, spec.policy)
    except NotFredholm as exc:
        report["wiener_hopf"] = {"error": str(exc)}
        return report, EXIT_NOT_FREDHOLM
    agree = continuous == report.get("ind_plus")
    report["wiener_hopf"] = {"continuous_ind_plus": continuous, "agree": agree,
                             "recipe": "-winding of 1 + k^ over the compactified line"}
    if not agree and code == EXIT_OK:
        code = EXIT_DISAGREE
    return report, code


class _Scaled:
    """``k / identity_offset`` so that the symbol is ``1 + k^``."""

    def __init__(self, kernel, factor):
        self.kernel, self.factor = kernel, factor

    def fourier(self, xi):
        return self.kernel.fourier(xi) / self.factor


def _scaled_kernel(conv):
    if conv.identity_offset == 1:
        return conv.kernel
    return _Scaled(conv.kernel, conv.identity_offset)


def run_spec(spec, run_oracle=None):
    """Index pipeline for a parsed spec; returns ``(report dict, exit code)``."""
    run_oracle = spec.run_oracle if run_oracle is None else run_oracle
    if spec.kind == "toeplitz":
        report, code = _run_toeplitz(spec, run_oracle)
    elif spec.kind == "operator":
        report, code = _run_operator(spec.target, spec, run_oracle, "operator")
    else:
        report, code = _run_convolution(spec, run_oracle)
    report["spec"] = spec.path
    report["exit_code"] = code
    return _jsonable(report), code


def run_index(spec_path, out=None, run_oracle=None):
    """Run one spec file and write its JSON report; returns the exit code."""
    try:
        spec = load_spec(spec_path)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    report, code = run_spec(spec, run_oracle)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    out = out or spec.output.get("report")
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)
    return code


def symbol_curve_rows(spec, samples):
    """``(parameter, value)`` arrays for the curve verb, plus the winding they encode.

    Toeplitz specs sample ``det a(e^{i theta})`` on ``samples + 1`` equally
    spaced angles (refined where needed); convolution specs sample
    ``1 + k^(xi)`` and add the two points at infinity, where the value is 1.
    """
    policy = spec.policy
    if spec.kind == "toeplitz":
        det = det_symbol(spec.target)
        theta = np.linspace(0.0, TWO_PI, samples + 1)
        params, values = refine_curve(lambda th: det.at_angles(th)[..., 0, 0], theta, policy)
        values = values.copy()
        values[-1] = values[0]
        return params, values
    if spec.kind == "convolution":
        policy = replace(policy, initial_points=max(16, samples))
        xi, values = kernel_symbol_curve(_scaled_kernel(spec.target), policy)
        params = np.concatenate([[-np.inf], xi, [np.inf]])
        return params, np.concatenate([[1.0 + 0j], values, [1.0 + 0j]])
    raise SpecError("curve needs a toeplitz or convolution spec", None, spec.path)


def curve_csv(params, values):
    steps = arg_increments(values)
    cumulative = np.concatenate([[0.0], np.cumsum(steps)])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["parameter", "re", "im", "modulus", "cumulative_argument"])
    for p, v, c in zip(params, values, cumulative):
        writer.writerow([repr(float(p)), repr(float(v.real)), repr(float(v.imag)),
                         repr(float(abs(v))), repr(float(c))])
    return buf.getvalue(), float(cumulative[-1])


def emit_symbol_curve(spec_path, samples=None, out=None):
    try:
        spec = load_spec(spec_path)
        samples = int(samples or spec.output.get("samples") or 360)
        params, values = symbol_curve_rows(spec, samples)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except (NotFredholm, ValueError) as exc:
        # NotElliptic, CurveUnderResolved and TailTooFat are ValueErrors
        print(f"curve failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NOT_FREDHOLM
    text, total = curve_csv(params, values)
    out = out or spec.output.get("curve")
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)
    winding = total / TWO_PI
    print(f"winding {int(round(winding))} (cumulative argument {total:.12g})", file=sys.stderr)
    if abs(winding - round(winding)) > 1e-6:
        return EXIT_DISAGREE
    return EXIT_OK


def _suite_row(path):
    start = time.perf_counter()
    row = {"name": Path(path).name, "ind_analytic": "", "ind_oracle": "", "agree": "",
           "status": "", "runtime": 0.0}
    try:
        spec = load_spec(path)
        report, code = run_spec(spec)
    except SpecError as exc:
        row.update(status=f"spec error: {exc}", code=EXIT_SPEC)
    except Exception as exc:  # collected, not fatal to the batch
        row.update(status=f"error: {type(exc).__name__}: {exc}", code=EXIT_SPEC)
    else:
        row["code"] = code
        if report.get("fredholm"):
            row["ind_analytic"] = report["ind"]
            oc = report.get("oracle_check") or {}
            if "ind" in oc:
                row["ind_oracle"] = oc["ind"]
            row["agree"] = oc.get("agree", "") if oc else ""
            row["status"] = {EXIT_OK: "ok", EXIT_DISAGREE: "disagree"}.get(code, str(code))
            if "error" in oc:
                row["status"] = oc["error"]
        else:
            row["status"] = "not fredholm"
    row["runtime"] = round(time.perf_counter() - start, 3)
    return row


def run_suite(dir_path, strict=False, jobs=1):
    """Run every spec in a directory; returns ``(rows, exit code)``."""
    paths = sorted(str(p) for p in Path(dir_path).iterdir() if p.suffix in SPEC_SUFFIXES)
    if jobs > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_suite_row, paths))
    else:
        rows = [_suite_row(p) for p in paths]
    codes = {r["code"] for r in rows}
    if EXIT_DISAGREE in codes:
        code = EXIT_DISAGREE
    elif EXIT_SPEC in codes:
        code = EXIT_SPEC
    elif strict and EXIT_NOT_FREDHOLM in codes:
        code = EXIT_NOT_FREDHOLM
    else:
        code = EXIT_OK
    return rows, code


SUITE_COLUMNS = ("name", "ind_analytic", "ind_oracle", "agree", "runtime", "status")


def format_table(rows):
    cells = [SUITE_COLUMNS] + [tuple(str(r[c]) for c in SUITE_COLUMNS) for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(SUITE_COLUMNS))]
    return "\n".join("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip()
                     for row in cells) + "\n"


def build_parser():
    parser = argparse.ArgumentParser(prog="limop", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="index report for one spec file")
    p.add_argument("spec")
    p.add_argument("--out", help="report path (default: spec output.report or stdout)")
    p.add_argument("--no-oracle", action="store_true", help="skip the finite-section oracle")

    p = sub.add_parser("curve", help="symbol curve as CSV")
    p.add_argument("spec")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--out", help="CSV path (default: spec output.curve or stdout)")

    p = sub.add_parser("suite", help="run every spec in a directory")
    p.add_argument("dir")
    p.add_argument("--strict", action="store_true", help="fail on non-Fredholm specs too")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="also write the summary as CSV")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "index":
        return run_index(args.spec, args.out, False if args.no_oracle else None)
    if args.command == "curve":
        if args.samples is not None and args.samples < 2:
            print("error: --samples must be at least 2", file=sys.stderr)
            return EXIT_SPEC
        return emit_symbol_curve(args.spec, args.samples, args.out)
    if not Path(args.dir).is_dir():
        print(f"error: {args.dir} is not a directory", file=sys.stderr)
        return EXIT_SPEC
    rows, code = run_suite(args.dir, args.strict, max(1, args.jobs))
    sys.stdout.write(format_table(rows))
    if args.out:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, SUITE_COLUMNS, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        atomic_write(args.out, buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
