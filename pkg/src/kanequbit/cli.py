"""Command-line interface.

Exit codes: 0 success, 1 domain error (unphysical state, invalid file, failed
check), 2 usage error (bad flags, conflicting configuration).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .dynamics import METHODS, integrate
from .experiments import (
    CALIBRATED_GAMMA_D,
    FIGURE_IDS,
    ScenarioRun,
    figure_scenario,
    run_scenario,
    sweep,
)
from .io import (
    ConfigError,
    build_config,
    emit_svg,
    parse_angle,
    parse_config,
    parse_list,
    validate_csv,
    write_csv,
    write_sweep_csv,
)
from .observables import series
from .selftest import run_selftest

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kanequbit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one configuration")
    sim.add_argument("--config", type=Path, help="key = value configuration file")
    sim.add_argument("--scenario", choices=FIGURE_IDS)
    sim.add_argument("--init", help="x, y, z or sx,sy,sz")
    sim.add_argument("--theta", help="polarization angle, e.g. 0.5 or pi/4")
    sim.add_argument("--kappa")
    sim.add_argument("--omega")
    sim.add_argument("--epsilon")
    sim.add_argument("--gamma-d", dest="gamma_d")
    sim.add_argument("--tau-max", dest="tau_max")
    sim.add_argument("--dtau")
    sim.add_argument("--stride")
    sim.add_argument("--method", choices=METHODS)
    sim.add_argument("--out", dest="output")
    sim.add_argument("--plot", type=Path, help="also write an SVG plot here")

    fig = sub.add_parser("figure", help="run a figure preset")
    fig.add_argument("--id", required=True, choices=FIGURE_IDS)
    fig.add_argument("--out", required=True, type=Path)
    fig.add_argument("--plot", type=Path)
    fig.add_argument("--method", choices=METHODS, default="rk4")
    fig.add_argument("--gamma-d", dest="gamma_d", type=float, default=CALIBRATED_GAMMA_D)

    sw = sub.add_parser("sweep", help="Cartesian sweep over kappa and theta")
    sw.add_argument("--init", default="y")
    sw.add_argument("--kappa-list", required=True)
    sw.add_argument("--theta-list", required=True)
    sw.add_argument("--gamma-d", dest="gamma_d", type=float, default=CALIBRATED_GAMMA_D)
    sw.add_argument("--tau-max", dest="tau_max", type=float)
    sw.add_argument("--dtau", type=float, default=1e-3)
    sw.add_argument("--track", choices=("purity", "bloch_norm", "fidelity"), default="purity")
    sw.add_argument("--method", choices=METHODS, default="rk4")
    sw.add_argument("--out", required=True, type=Path)
    sw.add_argument("--plot", type=Path)

    val = sub.add_parser("validate", help="check an observable CSV")
    val.add_argument("path", type=Path)

    sub.add_parser("selftest", help="run the analytic checks")
    return p


def _write_runs(runs: list[ScenarioRun], out: Path, meta: dict) -> list[Path]:
    if len(runs) == 1:
        paths = [out]
    else:
        paths = [
            out.with_name(f"{out.stem}_kappa{run.kappa:g}_theta{run.theta:.6g}{out.suffix}")
            for run in runs
        ]
    for run, path in zip(runs, paths):
        write_csv(run.series, path)
    meta = dict(meta, files=[p.name for p in paths])
    out.with_name(out.stem + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return paths


def _cmd_figure(args) -> int:
    spec = figure_scenario(args.id, gamma_d=args.gamma_d)
    runs = run_scenario(spec, method=args.method)
    paths = _write_runs(runs, args.out, spec.metadata())
    if args.plot:
        if len(runs) == 1:
            emit_svg(runs[0].series, args.plot, title=f"figure {args.id}")
        else:
            emit_svg([(r.label, r.series) for r in runs], args.plot, spec.tracked, f"figure {args.id}")
    for path in paths:
        print(path)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    flags = {
        k: getattr(args, k)
        for k in ("scenario", "init", "theta", "kappa", "omega", "epsilon", "gamma_d",
                  "tau_max", "dtau", "stride", "method", "output")
        if getattr(args, k) is not None
    }
    if args.config is not None:
        if set(flags) - {"output", "method"}:
            raise UsageError("--config cannot be combined with parameter flags")
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read {args.config}: {exc.strerror}") from None
        cfg = parse_config(text)
        overrides = {k: v for k, v in flags.items() if k in ("output", "method")}
        if overrides:
            cfg = type(cfg)(**{**cfg.__dict__, **overrides})
    else:
        cfg = build_config(flags)
    if cfg.output is None:
        raise UsageError("no output path: pass --out or set 'output' in the config")
    out = Path(cfg.output)
    plot = args.plot or (out.with_suffix(".svg") if cfg.emit_plot else None)

    if cfg.is_scenario:
        spec = figure_scenario(cfg.scenario)
        runs = run_scenario(spec, method=cfg.method)
        for path in _write_runs(runs, out, spec.metadata()):
            print(path)
        if plot:
            emit_svg([(r.label, r.series) for r in runs], plot, spec.tracked)
        return EXIT_OK

    traj = integrate(cfg.params, cfg.init, cfg.tau_max, cfg.dtau, method=cfg.method, stride=cfg.stride)
    obs = series(traj)
    write_csv(obs, out)
    if plot:
        emit_svg(obs, plot)
    print(out)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    try:
        kappas = parse_list(args.kappa_list)
        thetas = parse_list(args.theta_list, parse_angle)
    except ValueError as exc:
        raise UsageError(f"bad grid: {exc}") from None
    result = sweep(
        args.init, thetas, kappas, args.gamma_d, args.tau_max,
        dtau=args.dtau, tracked=args.track, method=args.method,
    )
    write_sweep_csv(result, args.out)
    if args.plot:
        emit_svg(result, args.plot, args.track)
    print(args.out)
    return EXIT_OK


def _cmd_validate(args) -> int:
    problems = validate_csv(args.path)
    for problem in problems:
        print(f"{args.path}: {problem}", file=sys.stderr)
    if problems:
        return EXIT_DOMAIN
    print(f"{args.path}: ok")
    return EXIT_OK


def _cmd_selftest(args) -> int:
    return EXIT_OK if run_selftest() else EXIT_DOMAIN


COMMANDS = {
    "simulate": _cmd_simulate,
    "figure": _cmd_figure,
    "sweep": _cmd_sweep,
    "validate": _cmd_validate,
    "selftest": _cmd_selftest,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"kanequbit {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"kanequbit {args.command}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
