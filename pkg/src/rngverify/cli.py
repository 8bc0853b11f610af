"""Command-line entry point.

Exit codes: 0 when the verdict is pass, 1 for warn or fail (the report tells
which), 2 for usage or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from . import nist, synth
from .config import AnalysisConfig, load_config
from .erf_fit import fit_erf, fit_erf_extended
from .errors import RngVerifyError
from .pipeline import (
    FORMATS,
    analyze_with_curves,
    ingest,
    iter_binary_chunks,
    iter_chunks,
    monitor,
    open_stream,
    read_bitfile,
    write_plots,
    write_series,
)
from .report import FitSummary, dumps_report, emit_report
from .series import cdf_points, normalize, rank

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

_log = logging.getLogger("rngverify")


def _config(args) -> AnalysisConfig:
    cfg = load_config(args.config) if args.config else AnalysisConfig()
    overrides = {}
    if getattr(args, "chunk_size", None) is not None:
        overrides["chunk_size"] = args.chunk_size
    if getattr(args, "consecutive_alarms", None) is not None:
        overrides["consecutive_alarms"] = args.consecutive_alarms
    if overrides:
        cfg = AnalysisConfig.model_validate({**cfg.model_dump(), **overrides})
    return cfg


def cmd_analyze(args) -> int:
    cfg = _config(args)
    series = ingest(args.file, args.format)
    report, curves = analyze_with_curves(series, cfg, descriptor=Path(args.file).name)
    if args.plots:
        write_plots(curves, args.plots)
    if args.json:
        emit_report(report, args.json)
        print(f"verdict: {report.verdict}", file=sys.stderr)
        for f in report.flags:
            print(f"  [{f.severity}] {f.criterion}: {f.detail}", file=sys.stderr)
    else:
        sys.stdout.write(dumps_report(report))
    return EXIT_PASS if report.verdict == "pass" else EXIT_FAIL


def cmd_monitor(args) -> int:
    cfg = _config(args)
    if args.format == "csv":
        chunks = iter_chunks(ingest(args.file, "csv"), cfg.chunk_size)
        fh = None
    else:
        fh = open_stream(args.file)
        chunks = iter_binary_chunks(fh, args.format, cfg.chunk_size)
    alarms = 0
    try:
        for rec in monitor(chunks, cfg):
            alarms += rec.alarm
            line = {
                "chunk": rec.index,
                "verdict": rec.verdict,
                "alarm": rec.alarm,
                "error": rec.error,
                "report": json.loads(rec.report.model_dump_json()) if rec.report else None,
            }
            print(json.dumps(line, separators=(",", ":")), flush=True)
    finally:
        if fh is not None and fh is not sys.stdin.buffer:
            fh.close()
    return EXIT_FAIL if alarms else EXIT_PASS


def cmd_synth(args) -> int:
    n, seed = args.n, args.seed
    if args.kind == "gaussian":
        values = synth.gaussian(n, seed)
    elif args.kind == "ar1":
        values = synth.ar1(n, args.rho, seed)
    elif args.kind == "duplicate_halves":
        values = synth.duplicate_halves(n, args.jitter, seed)
    else:
        values = synth.sinusoid_drift(n, args.amplitude, args.period or n, seed)
    if args.quantize:
        values = synth.quantize(values, args.quantize)
    write_series(args.out, values, "f64le")
    return EXIT_PASS


def cmd_nist(args) -> int:
    bits = read_bitfile(args.bitfile)
    rep = nist.run_battery(bits, alpha=args.alpha)
    out = {
        "n_bits": rep.n_bits,
        "all_passed": rep.all_passed,
        "empty": rep.empty,
        "results": [
            {"name": r.name, "statistic": r.statistic, "p_value": r.p_value, "passed": r.passed}
            for r in rep.results
        ],
        "skipped": [{"name": n, "reason": why} for n, why in rep.skipped],
    }
    print(json.dumps(out, indent=2))
    return EXIT_PASS if rep.all_passed and not rep.empty else EXIT_FAIL


def cmd_fit(args) -> int:
    series = ingest(args.file, args.format)
    points = cdf_points(rank(normalize(series), "ascending"))
    fit = fit_erf_extended(points) if args.extended else fit_erf(points)
    print(FitSummary.from_fit(fit).model_dump_json(indent=2))
    return EXIT_PASS if fit.converged else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rngverify",
        description="Ranked-amplitude and correlation checks for raw RNG output.",
    )
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run every criterion on one file")
    a.add_argument("file")
    a.add_argument("--format", choices=FORMATS, default="f64le")
    a.add_argument("--config", help="JSON file with AnalysisConfig fields")
    a.add_argument("--plots", metavar="DIR", help="write two-column curve files here")
    a.add_argument("--json", metavar="OUT", help="write the report here instead of stdout")
    a.set_defaults(func=cmd_analyze)

    m = sub.add_parser("monitor", help="analyze a stream chunk by chunk")
    m.add_argument("file", help="input file, or - for stdin")
    m.add_argument("--chunk-size", type=int, required=True)
    m.add_argument("--format", choices=FORMATS, default="f64le")
    m.add_argument("--config")
    m.add_argument("--consecutive-alarms", type=int)
    m.set_defaults(func=cmd_monitor)

    s = sub.add_parser("synth", help="write a synthetic f64le stream")
    s.add_argument("kind", choices=("gaussian", "ar1", "duplicate_halves", "sinusoid_drift"))
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--rho", type=float, default=0.0)
    s.add_argument("--jitter", type=float, default=0.0)
    s.add_argument("--amplitude", type=float, default=1.0)
    s.add_argument("--period", type=float)
    s.add_argument("--quantize", type=int, metavar="BITS", help="quantize to this bit depth")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    b = sub.add_parser("nist", help="run the NIST battery on a packed bit file")
    b.add_argument("bitfile")
    b.add_argument("--alpha", type=float, default=nist.ALPHA)
    b.set_defaults(func=cmd_nist)

    f = sub.add_parser("fit", help="erf fit of one series' ranked amplitudes")
    f.add_argument("file")
    f.add_argument("--format", choices=FORMATS, default="f64le")
    f.add_argument("--extended", action="store_true", help="also grid-search theta")
    f.set_defaults(func=cmd_fit)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (RngVerifyError, OSError, ValidationError, json.JSONDecodeError) as exc:
        print(f"rngverify: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
