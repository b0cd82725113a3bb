"""Analytic checks runnable without pytest (``kanequbit selftest``)."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .dynamics import ModelParams, expm, fixed_point, generator, integrate, propagate_exact
from .experiments import figure_scenario, run_scenario, saturation_check
from .io import format_number
from .observables import LN2, entropy, fidelity, purity, series
from .qubit import bloch_to_density, density_to_bloch


def _pure_dephasing():
    params = ModelParams(0.0, 0.3, 0.5)
    traj = integrate(params, (0, 1, 0), 20.0, 1e-3)
    err_y = np.max(np.abs(traj.states[:, 1] - np.exp(-0.5 * traj.tau)))
    obs = series(traj)
    err_p = np.max(np.abs(obs.purity - 0.5 * (1 + np.exp(-traj.tau))))
    return err_y <= 1e-8 and err_p <= 1e-8, f"max errors {err_y:.2e}, {err_p:.2e}"


def _solver_agreement():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(10):
        params = ModelParams(rng.uniform(0, 2 * math.pi), rng.uniform(0, 1), rng.uniform(0, 1))
        v = rng.normal(size=3)
        s0 = v / np.linalg.norm(v) * rng.uniform(0, 1) ** (1 / 3)
        runs = [integrate(params, s0, 5.0, 1e-3, method=m).states for m in ("rk4", "exact", "oracle")]
        worst = max(worst, *(np.max(np.abs(a - b)) for a, b in zip(runs, runs[1:] + runs[:1])))
    return worst <= 1e-6, f"max pairwise difference {worst:.2e}"


def _expm_rotation():
    a = np.array([[0.0, -2.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    want = np.array([[math.cos(2), -math.sin(2), 0], [math.sin(2), math.cos(2), 0], [0, 0, 1]])
    err = np.max(np.abs(expm(a) - want))
    return err <= 1e-14, f"error {err:.2e}"


def _state_algebra():
    s = np.array([0.3, -0.4, 0.5])
    back = density_to_bloch(bloch_to_density(s)).as_array()
    ok = np.max(np.abs(back - s)) <= 1e-14
    ok &= abs(purity((0, 0, 0)) - 0.5) < 1e-15 and abs(entropy((0, 0, 0)) - LN2) < 1e-15
    rho_up, rho_down = bloch_to_density((0, 1, 0)), bloch_to_density((0, -1, 0))
    ok &= fidelity(rho_up, rho_down) < 1e-15
    return bool(ok), "round trip, purity, entropy, fidelity"


def _generator_structure():
    params = ModelParams(1.1, 0.4, 0.3)
    m = generator(params)
    ok = abs(np.trace(m) + 0.6) < 1e-15 and fixed_point(params).value == "unique_origin"
    s = np.array([0.2, 0.1, -0.7])
    ok &= np.max(np.abs(propagate_exact(params, s, 1.5) - expm(m * 1.5) @ s)) == 0
    return bool(ok), "trace and fixed point"


def _saturation():
    run = run_scenario(figure_scenario("1a"))[0]
    report = saturation_check(run.series, run.params)
    return report.passed, f"final purity {report.final_purity:.6f}"


def _csv_format():
    ok = format_number(LN2) == "0.693147180559945" and format_number(-0.0) == "0"
    return ok, "15-digit rendering"


CHECKS: dict[str, Callable[[], tuple]] = {
    "pure dephasing closed form": _pure_dephasing,
    "rk4 / exact / oracle agreement": _solver_agreement,
    "matrix exponential of a rotation": _expm_rotation,
    "state algebra": _state_algebra,
    "generator structure": _generator_structure,
    "saturation of preset 1a": _saturation,
    "csv number format": _csv_format,
}


def run_selftest(echo: Callable[[str], None] = print) -> bool:
    all_ok = True
    for name, check in CHECKS.items():
        try:
            ok, detail = check()
        except Exception as exc:  # report and keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        all_ok &= bool(ok)
        echo(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return all_ok
