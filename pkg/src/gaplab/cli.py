"""Command line entry point: gaplab {run,sweep,converge,oracle} <config.json>."""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import runner
from .errors import GapLabError

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _parser():
    p = argparse.ArgumentParser(prog="gaplab", description="Eigenvalue-gap experiments for -Laplacian + V.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="JSON run configuration")
    common.add_argument("--out", help="directory for report.json and report.csv")
    common.add_argument("--quiet", action="store_true", help="print nothing on success")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="single run")
    sw = sub.add_parser("sweep", parents=[common], help="one run per value of a config field")
    sw.add_argument("--axis", required=True, help="dotted config field (potential.c) or alias c / d / length")
    sw.add_argument("--values", required=True, help="comma-separated values (may be empty)")
    cv = sub.add_parser("converge", parents=[common], help="refinement study")
    cv.add_argument("--steps", type=int, required=True, help="number of mesh halvings (>= 2)")
    sub.add_parser("oracle", parents=[common], help="compare the iterative solver with the dense oracle")
    return p


def _write(out, payload, csv_text=None):
    if not out:
        return
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "report.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if csv_text is not None:
        with open(os.path.join(out, "report.csv"), "w") as fh:
            fh.write(csv_text)


def _print_checks(rep, stream):
    print(f"{rep.row['run_id']}: lambda1={rep.spectrum['lambda1']:.12g} lambda2={rep.spectrum['lambda2']:.12g} "
          f"gap={rep.spectrum['gap']:.12g}", file=stream)
    for c in rep.gap.checks:
        tag = "" if c.blocking else " (advisory)"
        print(f"  {c.status:7s} {c.name:18s} value={c.value:.6g} bound={c.bound:.6g} "
              f"margin={c.margin:.3g}{tag} {c.note}".rstrip(), file=stream)
    print(f"status: {rep.status}", file=stream)


def _values(text):
    return [float(v) for v in text.split(",") if v.strip()]


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    out = sys.stdout
    try:
        if args.command == "sweep":
            with open(args.config) as fh:
                base = runner.parse_config(fh.read()).raw
            res = runner.sweep(base, args.axis, _values(args.values))
            payload = {"axis": res.axis, "values": res.values, "status": res.status,
                       "errors": {str(k): v for k, v in res.errors.items()},
                       "runs": [r.to_dict() if r else None for r in res.reports]}
            _write(args.out, payload, res.csv)
            if not args.quiet:
                out.write(res.csv)
            if res.errors:
                return EXIT_ERROR
            return EXIT_FAIL if res.status == "FAIL" else EXIT_PASS
        cfg = runner.load_config(args.config)
        if args.command == "run":
            rep = runner.run(cfg)
            _write(args.out, rep.to_dict(), runner.csv_text([rep.row]))
            if not args.quiet:
                _print_checks(rep, out)
            return rep.exit_code
        if args.command == "converge":
            table = runner.converge(cfg, args.steps)
            _write(args.out, table)
            if not args.quiet:
                json.dump(table, out, indent=2)
                out.write("\n")
            return EXIT_PASS
        result = runner.oracle(cfg)
        _write(args.out, result)
        if not args.quiet:
            json.dump(result, out, indent=2)
            out.write("\n")
        return EXIT_PASS if result["status"] == "PASS" else EXIT_FAIL
    except (GapLabError, OSError, ValueError, TypeError, KeyError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        _write(getattr(args, "out", None), err)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
