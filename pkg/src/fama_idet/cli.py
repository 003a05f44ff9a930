"""Command-line entry point.

Exit codes: 0 success, 1 failed trend check (``figure --check``),
2 configuration or usage error, 3 numeric error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .channel import SystemParams, port_correlation
from .config import SweepSpec, parse_config
from .errors import ConfigError, DomainError, NumericError, RangeError, UsageError
from .montecarlo import MCConfig

EXIT_OK = 0
EXIT_CHECK = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

_POINT_OUTPUTS = {
    "wdt-outage": ("wdt_outage", "system_wdt_outage"),
    "wet-outage": ("wet_outage", "wet_outage_gl"),
    "throughput": ("reliable_throughput",),
    "avg-energy": ("avg_energy", "avg_energy_gl", "avg_energy_gl_verbatim"),
}


def _add_run_flags(p: argparse.ArgumentParser, *, default_trials=None):
    p.add_argument("--seed", type=int, help="Monte Carlo seed (64-bit unsigned)")
    p.add_argument("--trials", type=int, default=default_trials, help="Monte Carlo trials")
    p.add_argument("--quad-order", type=int, help="Gauss-Laguerre order (default 150)")
    p.add_argument("--workers", type=int, default=1, help="worker threads")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--plot", nargs="?", const=True, default=None, metavar="SVG",
                   help="also write an SVG plot (default path: --out with .svg)")


def _add_point_flags(p: argparse.ArgumentParser):
    d = SystemParams()
    p.add_argument("--N", type=int, default=d.n_pairs, help="AP-UE pairs")
    p.add_argument("--K", type=int, default=d.n_ports, help="ports")
    p.add_argument("--W", type=float, default=d.antenna_size, help="antenna size in wavelengths")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--gamma-db", type=float, help="SINR threshold in dB (default 3.6)")
    g.add_argument("--gamma", type=float, help="SINR threshold, linear")
    p.add_argument("--Qth", type=float, default=d.harvest_threshold, help="harvest threshold, W")
    p.add_argument("--alpha", type=float, default=d.ts_ratio, help="time-switching ratio")
    p.add_argument("--P", type=float, default=d.tx_power, help="transmit power, W")
    p.add_argument("--T", type=float, default=d.period, help="period, s")
    p.add_argument("--noise-power", type=float, default=None, help="noise power (default: SIR model)")
    p.add_argument("--mc", action="store_true", help="add Monte Carlo columns")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fama-idet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mu", help="port correlation for antenna size W")
    p.add_argument("W", type=float)

    for name in _POINT_OUTPUTS:
        p = sub.add_parser(name, help=f"evaluate {name.replace('-', ' ')} at one point")
        _add_point_flags(p)
        _add_run_flags(p, default_trials=100_000)

    p = sub.add_parser("sweep", help="run a sweep from a config file")
    p.add_argument("config")
    p.add_argument("--mc", action="store_true", help="enable Monte Carlo if the config has no [mc]")
    _add_run_flags(p)

    p = sub.add_parser("figure", help="run a figure preset")
    p.add_argument("name", choices=("fig2", "fig3", "fig4", "fig5"))
    g = p.add_mutually_exclusive_group()
    g.add_argument("--mc", action="store_true", default=None,
                   help="force Monte Carlo columns on (fig4 uses a reduced trial count)")
    g.add_argument("--no-mc", dest="mc", action="store_false", help="closed forms only")
    p.add_argument("--check", action="store_true", help="print the preset's trend checks")
    _add_run_flags(p)

    sub.add_parser("specfun-selftest", help="cross-check special functions")
    return parser


def _point_spec(args) -> SweepSpec:
    d = SystemParams()
    if args.gamma is not None:
        gamma = args.gamma
    elif args.gamma_db is not None:
        gamma = 10.0 ** (args.gamma_db / 10.0)
    else:
        gamma = d.sinr_threshold
    try:
        base = SystemParams(n_pairs=args.N, n_ports=args.K, antenna_size=args.W, tx_power=args.P,
                            period=args.T, ts_ratio=args.alpha, sinr_threshold=gamma,
                            harvest_threshold=args.Qth, noise_power=args.noise_power)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    try:
        mc = MCConfig(trials=args.trials, seed=args.seed or 0, batch=10_000) if args.mc else None
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    return SweepSpec(axis="K", values=(args.K,), base=base, outputs=_POINT_OUTPUTS[args.command],
                     mc=mc, quadrature_order=args.quad_order or 150)


def _apply_overrides(spec: SweepSpec, args, *, enable_mc=False) -> SweepSpec:
    try:
        return _overridden(spec, args, enable_mc)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def _overridden(spec: SweepSpec, args, enable_mc: bool) -> SweepSpec:
    changes = {}
    mc = spec.mc
    if mc is None and enable_mc:
        mc = MCConfig(trials=args.trials or 10_000, seed=args.seed or 0)
    if mc is not None:
        if args.trials is not None:
            mc = replace(mc, trials=args.trials, batch=min(mc.batch, args.trials) or 1)
        if args.seed is not None:
            mc = replace(mc, seed=args.seed)
        changes["mc"] = mc
    if spec.baseline is not None and args.seed is not None:
        changes["baseline"] = replace(spec.baseline, seed=args.seed)
    if args.quad_order is not None:
        changes["quadrature_order"] = args.quad_order
    return replace(spec, **changes) if changes else spec


def _plot_path(args, default_stem):
    if args.plot is None:
        return None
    if isinstance(args.plot, str):
        return args.plot
    if args.out:
        return os.path.splitext(args.out)[0] + ".svg"
    return default_stem + ".svg"


def _run_and_emit(spec: SweepSpec, args, plot_stem: str):
    from .sweep import columns, emit_plot, failure_report, render_csv, run_sweep

    records = run_sweep(spec, workers=args.workers)
    text = render_csv(records, columns(spec))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    path = _plot_path(args, plot_stem)
    if path:
        emit_plot(records, path)
    failures = failure_report(records)
    for line in failures:
        print(f"error: {line}", file=sys.stderr)
    return text, (EXIT_NUMERIC if failures else EXIT_OK)


def _dispatch(args) -> int:
    if args.command == "mu":
        print(format(port_correlation(args.W).mu, ".17g"))
        return EXIT_OK
    if args.command == "specfun-selftest":
        from .selftest import run_selftest

        return EXIT_OK if run_selftest() else EXIT_NUMERIC
    if getattr(args, "workers", 1) < 1:
        raise UsageError("--workers must be >= 1")
    if args.command in _POINT_OUTPUTS:
        _, code = _run_and_emit(_point_spec(args), args, args.command)
        return code
    if args.command == "sweep":
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
        spec = _apply_overrides(parse_config(text), args, enable_mc=args.mc)
        stem = os.path.splitext(os.path.basename(args.config))[0]
        _, code = _run_and_emit(spec, args, stem)
        return code
    if args.command == "figure":
        from .presets import check_trends, figure_preset
        from .sweep import read_csv

        spec = _apply_overrides(figure_preset(args.name, mc=args.mc), args)
        text, code = _run_and_emit(spec, args, args.name)
        if args.check:
            results = check_trends(args.name, read_csv(text))
            for desc, ok in results:
                print(f"{'PASS' if ok else 'FAIL'}  {desc}", file=sys.stderr)
            if code == EXIT_OK and not all(ok for _, ok in results):
                code = EXIT_CHECK
        return code
    raise UsageError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, UsageError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, DomainError, RangeError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
