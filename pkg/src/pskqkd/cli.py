"""Command-line entry point: ``pskqkd {sweep,correlations,optimize,validate}``.

Exit codes: 0 success, 1 configuration error, 2 numerical/physicality failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .channel import Detection, DetectorParams, LinkParams
from .errors import ConfigError, PhysicalityError
from .keyrate import secret_key_rate
from .sweep import (
    SweepConfig,
    dump_config,
    emit_csv,
    format_float,
    make_scheme,
    optimize_variance,
    parse_config_text,
    run_sweep,
    sweep_correlation,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

# flag -> config key
_SWEEP_FLAGS = {
    "protocol": "protocol",
    "detection": "detection",
    "va": "va",
    "beta": "beta",
    "eta": "eta",
    "eps_ele": "eps_ele",
    "mu": "mu_db_per_km",
    "excess_noise": "excess_noise",
    "start": "distance_start",
    "stop": "distance_stop",
    "step": "distance_step",
    "path": "path",
    "seed": "seed",
    "output": "output",
}


def _add_hardware_flags(p, with_defaults: bool):
    d = (lambda v: v) if with_defaults else (lambda v: None)
    p.add_argument("--beta", type=float, default=d(0.8), help="reconciliation efficiency (default 0.8)")
    p.add_argument("--eta", type=float, default=d(0.6), help="detector efficiency (default 0.6)")
    p.add_argument("--eps-ele", dest="eps_ele", type=float, default=d(0.05),
                   help="electronic noise, shot-noise units (default 0.05)")
    p.add_argument("--mu", type=float, default=d(0.2), help="fiber loss in dB/km (default 0.2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pskqkd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="key rate versus distance, written as CSV")
    sw.add_argument("--config", help="key = value config file; flags override it")
    sw.add_argument("--protocol", help="psk4, psk8 or gaussian")
    sw.add_argument("--detection", help="homodyne or heterodyne")
    sw.add_argument("--va", help="modulation variance, or 'optimize'")
    _add_hardware_flags(sw, with_defaults=False)
    sw.add_argument("--excess-noise", dest="excess_noise", help="comma-separated list")
    sw.add_argument("--start", type=float, help="first distance (km)")
    sw.add_argument("--stop", type=float, help="last distance (km)")
    sw.add_argument("--step", type=float, help="distance step (km)")
    sw.add_argument("--path", help="closed, matrix or both")
    sw.add_argument("--seed", type=int)
    sw.add_argument("--output", "-o", help="CSV path, '-' for stdout")
    sw.add_argument("--workers", type=int, default=1, help="threads; never changes the output")
    sw.add_argument("--print-config", action="store_true", help="print the resolved config and exit")

    co = sub.add_parser("correlations", help="Z_4, Z_8 and Z_G versus modulation variance")
    co.add_argument("--va-start", type=float, default=0.0)
    co.add_argument("--va-stop", type=float, default=3.0)
    co.add_argument("--va-step", type=float, default=0.05)
    co.add_argument("--output", "-o", default="-")

    op = sub.add_parser("optimize", help="best modulation variance for one link")
    op.add_argument("--protocol", default="psk8")
    op.add_argument("--detection", default="homodyne")
    op.add_argument("--length", type=float, required=True, help="fiber length (km)")
    op.add_argument("--excess-noise", dest="excess_noise", type=float, default=0.005)
    op.add_argument("--path", default="closed")
    _add_hardware_flags(op, with_defaults=True)

    sub.add_parser("validate", help="run the oracle and path cross-checks")
    return parser


def _sweep(args) -> int:
    values = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            values = parse_config_text(fh.read())
    for flag, key in _SWEEP_FLAGS.items():
        v = getattr(args, flag)
        if v is not None:
            values[key] = v
    config = SweepConfig.from_mapping(values)
    if args.print_config:
        sys.stdout.write(dump_config(config))
        return EXIT_OK
    rows = run_sweep(config, workers=args.workers)
    emit_csv(rows, config.output, config)
    return EXIT_OK


def _correlations(args) -> int:
    n = int(np.floor((args.va_stop - args.va_start) / args.va_step + 1e-9)) + 1
    grid = [round(args.va_start + i * args.va_step, 10) for i in range(n)]
    lines = ["V_A,Z_4,Z_8,Z_G"]
    lines += [",".join(format_float(v) for v in row) for row in sweep_correlation(grid)]
    text = "\n".join(lines) + "\n"
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return EXIT_OK


def _optimize(args) -> int:
    try:
        detection = Detection(args.detection.lower())
        link = LinkParams(args.length, args.excess_noise, args.mu)
        det = DetectorParams(detection, args.eta, args.eps_ele)
        make_scheme(args.protocol, 1.0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    res = optimize_variance(args.protocol, detection, link, det, args.beta, args.path)
    fixed = secret_key_rate(make_scheme(args.protocol, 1.0), link, det, args.beta, args.path).delta_i
    print(f"V_A* = {format_float(res.va)}")
    print(f"delta_I* = {format_float(res.delta_i)}")
    print(f"delta_I(V_A=1) = {format_float(fixed)}")
    print(f"method = {res.method} ({res.n_evaluations} evaluations)")
    return EXIT_OK


def _validate(_args) -> int:
    from .validation import run_all

    results = run_all()
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERIC


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "sweep": _sweep,
        "correlations": _correlations,
        "optimize": _optimize,
        "validate": _validate,
    }[args.command]
    try:
        return handler(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PhysicalityError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
