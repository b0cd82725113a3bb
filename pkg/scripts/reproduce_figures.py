"""Run every figure preset and write its CSV(s), metadata and an SVG plot.

    python3 scripts/reproduce_figures.py --out-dir figures
"""

import argparse
import json
import time
from pathlib import Path

from kanequbit.experiments import CALIBRATED_GAMMA_D, FIGURE_IDS, figure_scenario, run_scenario
from kanequbit.io import emit_svg, write_csv
from kanequbit.observables import decay_summary


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out-dir", type=Path, default=Path("figures"))
    p.add_argument("--gamma-d", type=float, default=CALIBRATED_GAMMA_D)
    p.add_argument("--ids", nargs="*", default=list(FIGURE_IDS), choices=FIGURE_IDS)
    args = p.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    for fig_id in args.ids:
        start = time.perf_counter()
        spec = figure_scenario(fig_id, gamma_d=args.gamma_d)
        runs = run_scenario(spec)
        files = []
        for run in runs:
            name = f"fig{fig_id}.csv" if len(runs) == 1 else f"fig{fig_id}_kappa{run.kappa:g}_theta{run.theta:.6g}.csv"
            write_csv(run.series, args.out_dir / name)
            files.append(name)
        meta = dict(spec.metadata(), files=files)
        (args.out_dir / f"fig{fig_id}.meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        emit_svg([(r.label, r.series) for r in runs], args.out_dir / f"fig{fig_id}.svg", spec.tracked, f"figure {fig_id}")

        halves = []
        for run in runs:
            h = decay_summary(run.series, spec.tracked).half_time
            halves.append("-" if h is None else f"{h:.2f}")
        print(f"{fig_id:>3}  {spec.tracked:<10} half-times {', '.join(halves):<24} {time.perf_counter() - start:.2f} s")


if __name__ == "__main__":
    main()
