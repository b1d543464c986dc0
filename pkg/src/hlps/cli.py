"""Command-line entry point: ``hlps run | sweep | entropy-table | timing``."""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__, report
from .config import _VARY_CONVERTERS, RunConfig, parse_config, with_overrides
from .errors import ConfigInvalid, ConfigSyntax, HlpsError
from .metrics import uniform_entropy
from .sim import SWEEPABLE, generate_scenario, linearity, run_simulation, sweep, timing_probe

SEED_ENV = "HLPS_SEED"


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def load_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from exc
    cfg = parse_config(text)
    env_seed = os.environ.get(SEED_ENV)
    if env_seed not in (None, ""):
        try:
            seed = int(env_seed)
        except ValueError:
            raise ConfigInvalid("seed", f"{SEED_ENV}={env_seed!r} is not an integer")
        cfg = with_overrides(cfg, seed=seed)
    return cfg


def _apply_output_flags(cfg: RunConfig, args) -> RunConfig:
    changes = {}
    if args.out is not None:
        changes["path"] = args.out
    if args.format is not None:
        changes["format"] = args.format
    if getattr(args, "trace", False):
        changes["trace"] = True
    return with_overrides(cfg, **changes) if changes else cfg


def _emit(doc: dict, cfg: RunConfig) -> None:
    text = report.encode(doc, cfg.format)
    if cfg.path:
        report.write_atomic(cfg.path, text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    cfg = _apply_output_flags(load_config(args.config), args)
    scenario = generate_scenario(cfg.scenario_params())
    result = run_simulation(scenario)
    doc = report.build_run_report(cfg, scenario.users, result, trace=cfg.trace)
    _emit(doc, cfg)
    return 0


def _parse_vary(items: list[str]) -> dict[str, tuple]:
    vary = {}
    for item in items:
        key, sep, values = item.partition("=")
        key = key.strip()
        if not sep or not values.strip():
            raise UsageError(f"--vary expects key=v1,v2,..., got {item!r}")
        if key not in SWEEPABLE:
            raise UsageError(f"cannot vary {key!r}; choose from {', '.join(SWEEPABLE)}")
        try:
            vary[key] = _VARY_CONVERTERS[key](values)
        except ValueError as exc:
            raise UsageError(f"bad values for {key}: {exc}") from exc
    return vary


def cmd_sweep(args) -> int:
    cfg = _apply_output_flags(load_config(args.config), args)
    vary = dict(cfg.vary)
    vary.update(_parse_vary(args.vary or []))
    if not vary:
        raise UsageError("nothing to sweep: give --vary or a [vary] section")
    cfg = with_overrides(cfg, vary=vary)
    rows = sweep(cfg.scenario_params(), vary, workers=args.workers)
    _emit(report.build_sweep_report(cfg, rows), cfg)
    return 0


def cmd_entropy_table(args) -> int:
    if not args.k:
        raise UsageError("--k needs at least one value")
    rows = [(k, uniform_entropy(k)) for k in args.k]
    out = ["k,entropy_bits"]
    out += [f"{k},{h:.5f}" for k, h in rows]
    sys.stdout.write("\r\n".join(out) + "\r\n")
    return 0


def cmd_timing(args) -> int:
    if args.reps < 3:
        raise UsageError("--reps must be at least 3")
    if not args.sizes or any(n < 1 for n in args.sizes):
        raise UsageError("--sizes must be positive integers")
    samples = timing_probe(args.sizes, args.reps)
    out = ["n,median_ms"]
    out += [f"{n},{t * 1000.0:.6f}" for n, t in samples]
    sys.stdout.write("\r\n".join(out) + "\r\n")
    if len(samples) >= 2:
        slope, r2 = linearity(samples)
        print(f"# linear fit: slope_ms_per_point={slope * 1000.0:.3e} r2={r2:.4f}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hlps", description=__doc__)
    ap.add_argument("--version", action="version", version=f"hlps {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario and write a report")
    run.add_argument("--config", required=True)
    run.add_argument("--out", help="output file (default: stdout)")
    run.add_argument("--format", choices=("csv", "json"))
    run.add_argument("--trace", action="store_true", help="include every message of every round")
    run.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", help="simulate a parameter grid")
    sw.add_argument("--config", required=True)
    sw.add_argument("--vary", action="append", metavar="KEY=V1,V2,...",
                    help=f"repeatable; KEY in {{{', '.join(SWEEPABLE)}}}")
    sw.add_argument("--out")
    sw.add_argument("--format", choices=("csv", "json"))
    sw.add_argument("--workers", type=int, default=1)
    sw.set_defaults(func=cmd_sweep)

    et = sub.add_parser("entropy-table", help="log2(k) for anonymity set sizes")
    et.add_argument("--k", type=_int_list, required=True)
    et.set_defaults(func=cmd_entropy_table)

    tm = sub.add_parser("timing", help="time the final-location computation")
    tm.add_argument("--sizes", type=_int_list, default=[1000, 10000, 100000, 1000000])
    tm.add_argument("--reps", type=int, default=5)
    tm.set_defaults(func=cmd_timing)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (ConfigSyntax, ConfigInvalid) as exc:
        print(f"hlps: config error: {exc}", file=sys.stderr)
        return 1
    except (HlpsError, ValueError, OSError) as exc:
        print(f"hlps: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
