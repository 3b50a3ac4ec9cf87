"""Command-line front end.

Exit status: 0 success, 1 evaluation error (or a failed validation),
2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from .config import ConfigError, linear_to_db
from .design import (
    DesignError,
    SearchBracket,
    duplex_crossover_antennas,
    duplex_crossover_loop_interference,
    optimal_relay_power_homogeneous,
    optimize_relay_power,
    required_antennas,
    required_source_power,
)
from .experiments import AXES, OUTPUTS, PRESETS, SweepSpec, run_preset, run_sweep, run_validation
from .io import format_cell, parse_config, parse_value, write_csv

DESIGN_KINDS = {
    "optimal-relay-power": "closed-form relay power (homogeneous gains)",
    "optimize-relay-power": "relay power by golden-section search",
    "crossover-li": "loop-interference level where FD and HD rates meet",
    "crossover-antennas": "smallest M with FD at least as good as HD",
    "required-source-power": "smallest p_S reaching --target (p_R = K p_S)",
    "required-antennas": "smallest M reaching --target (exact rate)",
}


class _UsageError(Exception):
    pass


def _split(text):
    return [t for t in (s.strip() for s in text.split(",")) if t]


def _overrides(pairs):
    out = {}
    for item in pairs or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise _UsageError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = val.strip()
    return out


def _emit(result, out):
    if out:
        result.to_csv(out)
        return
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(result.columns)
    for row in result.rows:
        w.writerow([format_cell(v) for v in row])


def _cmd_sweep(args):
    if not args.config or not args.axis or not args.values:
        raise _UsageError("sweep needs --config, --axis and --values")
    cfg = parse_config(args.config)
    values = [parse_value(v) for v in _split(args.values)]
    outputs = _split(args.outputs)
    try:
        spec = SweepSpec(cfg, args.axis, tuple(values), tuple(outputs))
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    _emit(run_sweep(spec, args.mc_n, args.seed), args.out)
    return 0


def _cmd_validate(args):
    if not args.config:
        raise _UsageError("validate needs --config")
    cfg = parse_config(args.config)
    if args.mc_n < 1000:
        raise _UsageError("validate needs --mc-n >= 1000")
    report = run_validation(cfg, args.mc_n, args.seed)
    print(report.to_text())
    if args.out:
        report.to_csv(args.out)
    return 0 if report.passed else 1


def _bracket(args, default_lo, default_hi):
    lo = parse_value(args.lo) if args.lo is not None else default_lo
    hi = parse_value(args.hi) if args.hi is not None else default_hi
    return SearchBracket(lo, hi, args.tol)


def _cmd_design(args):
    if not args.config:
        raise _UsageError("design needs --config")
    cfg = parse_config(args.config)
    kind = args.kind
    needs_target = kind in ("required-source-power", "required-antennas")
    if needs_target and args.target is None:
        raise _UsageError(f"{kind} needs --target")
    power = True
    if kind == "optimal-relay-power":
        value = optimal_relay_power_homogeneous(cfg)
    elif kind == "optimize-relay-power":
        value = optimize_relay_power(cfg, _bracket(args, 1e-4, 1e4))
    elif kind == "crossover-li":
        value = duplex_crossover_loop_interference(cfg, _bracket(args, 1e-4, 1e4))
    elif kind == "crossover-antennas":
        value = duplex_crossover_antennas(cfg, _bracket(args, 1, 100_000))
        power = False
    elif kind == "required-source-power":
        value = required_source_power(cfg, args.target, _bracket(args, 1e-6, 1e4))
    else:
        value = required_antennas(cfg, args.target, args.max_M)
        power = False
    if power:
        db = float(linear_to_db(value))
        print(f"{kind}: {value:.6g} linear = {db:.2f} dB")
    else:
        db = math.nan
        print(f"{kind}: {value}")
    if args.out:
        write_csv(args.out, ["kind", "value", "value_dB"], [[kind, float(value), db]], append=True)
    return 0


def _cmd_preset(args):
    overrides = _overrides(args.set)
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON ({exc})") from None
        overrides = {**data, **overrides}
    _emit(run_preset(args.name, args.mc_n, args.seed, overrides), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--mc-n", type=int, default=10_000, help="Monte-Carlo realizations")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="CSV output path (stdout if omitted)")

    p = argparse.ArgumentParser(prog="fdrelay", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sweep", parents=[common], help="one-parameter sweep")
    s.add_argument("--axis", choices=AXES)
    s.add_argument("--values", help="comma-separated; powers accept a dB suffix")
    s.add_argument("--outputs", default="exact", help=f"comma-separated subset of {OUTPUTS}")
    s.set_defaults(func=_cmd_sweep)

    v = sub.add_parser("validate", parents=[common], help="closed form vs Monte Carlo")
    v.set_defaults(func=_cmd_validate)

    d = sub.add_parser("design", parents=[common], help="design queries")
    d.add_argument("kind", choices=sorted(DESIGN_KINDS),
                   help="; ".join(f"{k}: {h}" for k, h in DESIGN_KINDS.items()))
    d.add_argument("--target", type=float, help="target sum rate, bits/s/Hz")
    d.add_argument("--max-M", dest="max_M", type=int, default=100_000)
    d.add_argument("--lo", help="bracket low end (dB suffix allowed)")
    d.add_argument("--hi", help="bracket high end (dB suffix allowed)")
    d.add_argument("--tol", type=float, default=1e-4, help="relative tolerance")
    d.set_defaults(func=_cmd_design)

    r = sub.add_parser("preset", parents=[common], help="reproduce a figure's data")
    r.add_argument("name", choices=sorted(PRESETS))
    r.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config field for every curve")
    r.set_defaults(func=_cmd_preset)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    try:
        return args.func(args)
    except (_UsageError, ConfigError, FileNotFoundError) as exc:
        print(f"fdrelay: error: {exc}", file=sys.stderr)
        return 2
    except (DesignError, ArithmeticError, ValueError, KeyError) as exc:
        print(f"fdrelay: evaluation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
