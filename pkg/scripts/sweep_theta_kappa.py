"""Sweep polarization angle and drive strength for one initial state and print
half-times, envelope rates and the abrupt/gradual label.

    python3 scripts/sweep_theta_kappa.py --init y --out sweep_y.csv
"""

import argparse
import math
from pathlib import Path

import numpy as np

from kanequbit.experiments import CALIBRATED_GAMMA_D, sweep
from kanequbit.io import emit_svg, write_sweep_csv


def _fmt(x):
    return "-" if x is None else f"{x:.4g}"


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--init", default="y", choices=("x", "y", "z"))
    p.add_argument("--thetas", type=int, default=7, help="points in [0, pi/2]")
    p.add_argument("--kappas", type=float, nargs="+", default=[0.05, 0.07, 0.09])
    p.add_argument("--gamma-d", type=float, default=CALIBRATED_GAMMA_D)
    p.add_argument("--track", default="purity", choices=("purity", "bloch_norm", "fidelity"))
    p.add_argument("--out", type=Path, help="sweep CSV")
    p.add_argument("--plot", type=Path, help="SVG with one curve per grid point")
    args = p.parse_args()

    thetas = np.linspace(0.0, math.pi / 2, args.thetas).tolist()
    result = sweep(args.init, thetas, args.kappas, args.gamma_d, tracked=args.track, stride=100)

    print(f"init={args.init} gamma_d={args.gamma_d:g} tracked={args.track}")
    print(f"{'kappa':>6} {'theta/pi':>8} {'half':>8} {'rate':>8} {'plateau':>8}  label")
    for row in result.rows:
        print(
            f"{row.kappa:>6g} {row.theta / math.pi:>8.4f} {_fmt(row.half_time):>8} "
            f"{_fmt(row.rate_estimate):>8} {_fmt(row.plateau_end):>8}  {row.classification}"
        )
    if args.out:
        write_sweep_csv(result, args.out)
    if args.plot:
        emit_svg(result, args.plot, args.track)


if __name__ == "__main__":
    main()
