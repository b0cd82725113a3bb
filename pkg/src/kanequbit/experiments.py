"""Figure presets, parameter sweeps and the long-time saturation check."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .dynamics import DEFAULT_DTAU, Method, ModelParams, Trajectory, integrate
from .observables import (
    LN2,
    DecaySummary,
    ObservableSeries,
    Tracked,
    decay_summary,
    series,
)
from .qubit import AXIS_STATES, BlochVector, check_physical

PI = math.pi

# Dephasing rate used by every figure preset. Chosen in the underdamped regime
# of the weakest drive (gamma_d < kappa = 2 omega at kappa = 0.05), so that all
# presets saturate by tau = 10 / gamma_d.
CALIBRATED_GAMMA_D = 0.02
# Recorded with every figure output; the factor-2 caption variant is not used.
KAPPA_CONVENTION = "kappa = 4 B_ac / B_z^2, omega = kappa / 2"
DEFAULT_ROWS = 5000

InitialState = Union[str, BlochVector, Sequence[float]]


def resolve_initial_state(init: InitialState) -> BlochVector:
    if isinstance(init, str):
        try:
            return AXIS_STATES[init.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown initial state {init!r}; use x, y, z or a vector") from None
    return BlochVector.of(check_physical(BlochVector.of(init)))


def initial_state_label(init: InitialState) -> str:
    if isinstance(init, str):
        return init.strip().lower()
    s = BlochVector.of(init)
    return f"({s.sx:.15g};{s.sy:.15g};{s.sz:.15g})"


def default_tau_max(gamma_d: float) -> float:
    return 10.0 / gamma_d


def _default_stride(tau_max: float, dtau: float, rows: int = DEFAULT_ROWS) -> int:
    n = int(round(tau_max / dtau))
    stride = max(1, n // rows)
    while n % stride:
        stride -= 1
    return stride


@dataclass(frozen=True)
class ScenarioSpec:
    id: str
    initial_state: InitialState
    theta_list: tuple
    kappa_list: tuple
    gamma_d: float = CALIBRATED_GAMMA_D
    tau_max: Optional[float] = None
    dtau: float = DEFAULT_DTAU
    stride: Optional[int] = None
    tracked: Tracked = "purity"
    caption: str = ""

    def __post_init__(self):
        if not self.theta_list or not self.kappa_list:
            raise ValueError(f"scenario {self.id!r}: parameter lists must be non-empty")
        resolve_initial_state(self.initial_state)
        if self.tau_max is None:
            if self.gamma_d <= 0:
                raise ValueError(f"scenario {self.id!r}: tau_max is required when gamma_d = 0")
            object.__setattr__(self, "tau_max", default_tau_max(self.gamma_d))
        if self.stride is None:
            object.__setattr__(self, "stride", _default_stride(self.tau_max, self.dtau))

    def grid(self):
        """``(theta, kappa)`` pairs in output order: theta outer, kappa inner."""
        return list(itertools.product(self.theta_list, self.kappa_list))

    def metadata(self) -> dict:
        return {
            "id": self.id,
            "initial_state": initial_state_label(self.initial_state),
            "theta_list": list(self.theta_list),
            "kappa_list": list(self.kappa_list),
            "gamma_d": self.gamma_d,
            "tau_max": self.tau_max,
            "dtau": self.dtau,
            "stride": self.stride,
            "tracked": self.tracked,
            "kappa_convention": KAPPA_CONVENTION,
            "abrupt_threshold": 1.0 / self.gamma_d if self.gamma_d else None,
            "caption": self.caption,
        }


_K3 = (0.05, 0.07, 0.09)

# id -> (initial state, thetas, kappas, tracked observable, tau_max override, caption)
_PRESETS = {
    "1a": ("y", (0.0,), (0.05,), "purity", None, "purity/entropy, rho(0)=(1+sigma_y)/2, theta=0"),
    "1b": ("y", (PI / 4,), (0.05,), "purity", None, "purity/entropy, rho(0)=(1+sigma_y)/2, theta=pi/4"),
    "1c": ("y", (PI / 3,), (0.05,), "purity", None, "purity/entropy, rho(0)=(1+sigma_y)/2, theta=pi/3"),
    "1d": ("y", (PI / 2,), (0.05,), "purity", None, "purity/entropy, rho(0)=(1+sigma_y)/2, theta=pi/2"),
    "2a": ("x", (PI / 4,), (0.05,), "purity", None, "purity/entropy, rho(0)=(1+sigma_x)/2, kappa=0.05"),
    "2b": ("x", (PI / 4,), (0.09,), "purity", None, "purity/entropy, rho(0)=(1+sigma_x)/2, kappa=0.09"),
    "2c": ("z", (PI / 4,), (0.05,), "purity", None, "purity/entropy, rho(0)=(1+sigma_z)/2, kappa=0.05"),
    "2d": ("z", (PI / 4,), (0.09,), "purity", None, "purity/entropy, rho(0)=(1+sigma_z)/2, kappa=0.09"),
    "3a": ("x", (PI / 2, 0.0, PI / 3), (0.05,), "bloch_norm", None, "|s|, rho(0)=(1+sigma_x)/2"),
    "3b": ("y", (PI / 2, 0.0, PI / 3), (0.05,), "bloch_norm", None, "|s|, rho(0)=(1+sigma_y)/2"),
    "4": ("z", (PI / 4,), _K3, "bloch_norm", None, "|s|, rho(0)=(1+sigma_z)/2, theta=pi/4"),
    "5a": ("x", (0.0,), _K3, "fidelity", None, "fidelity, rho(0)=(1+sigma_x)/2, theta=0"),
    "5b": ("x", (PI / 3,), _K3, "fidelity", None, "fidelity, rho(0)=(1+sigma_x)/2, theta=pi/3"),
    "6a": ("y", (0.0,), _K3, "fidelity", None, "fidelity, rho(0)=(1+sigma_y)/2, theta=0"),
    "6b": ("y", (PI / 3,), _K3, "fidelity", None, "fidelity, rho(0)=(1+sigma_y)/2, theta=pi/3"),
    "7a": ("z", (0.0,), _K3, "fidelity", None, "fidelity, rho(0)=(1+sigma_z)/2, theta=0"),
    "7b": ("z", (0.0,), _K3, "fidelity", 50.0, "fidelity, rho(0)=(1+sigma_z)/2, theta=0, short window"),
}

FIGURE_IDS = tuple(_PRESETS)


def figure_scenario(id: str, gamma_d: float = CALIBRATED_GAMMA_D) -> ScenarioSpec:
    try:
        init, thetas, kappas, tracked, tau_max, caption = _PRESETS[id]
    except KeyError:
        raise ValueError(f"unknown figure id {id!r}; known: {', '.join(FIGURE_IDS)}") from None
    return ScenarioSpec(
        id=id,
        initial_state=init,
        theta_list=thetas,
        kappa_list=kappas,
        gamma_d=gamma_d,
        tau_max=tau_max,
        tracked=tracked,
        caption=caption,
    )


@dataclass(frozen=True)
class ScenarioRun:
    theta: float
    kappa: float
    params: ModelParams
    trajectory: Trajectory
    series: ObservableSeries

    @property
    def label(self) -> str:
        return f"kappa={self.kappa:g}, theta={self.theta:.4g}"


def run_scenario(spec: ScenarioSpec, method: Method = "rk4") -> list[ScenarioRun]:
    s0 = resolve_initial_state(spec.initial_state)
    runs = []
    for theta, kappa in spec.grid():
        params = ModelParams.from_raw(theta, kappa, gamma_d=spec.gamma_d)
        traj = integrate(params, s0, spec.tau_max, spec.dtau, method=method, stride=spec.stride)
        runs.append(ScenarioRun(theta, kappa, params, traj, series(traj)))
    return runs


@dataclass(frozen=True)
class SweepRow:
    kappa: float
    theta: float
    initial_state: str
    final_purity: float
    final_entropy: float
    min_fidelity: float
    half_time: Optional[float]
    plateau_end: Optional[float]
    classification: str
    rate_estimate: Optional[float]


SWEEP_COLUMNS = tuple(SweepRow.__dataclass_fields__)


@dataclass(frozen=True)
class SweepResult:
    rows: list
    tracked: str
    gamma_d: float
    tau_max: float
    # Full series per row, same order; used for plotting.
    series: list = field(default_factory=list, repr=False)


def sweep(
    initial_state: InitialState,
    theta_grid: Sequence[float],
    kappa_grid: Sequence[float],
    gamma_d: float = CALIBRATED_GAMMA_D,
    tau_max: Optional[float] = None,
    *,
    dtau: float = DEFAULT_DTAU,
    stride: Optional[int] = None,
    tracked: Tracked = "purity",
    method: Method = "rk4",
) -> SweepResult:
    """Run every ``(kappa, theta)`` combination and summarise its decay.

    Rows are ordered kappa-major, theta-minor.
    """
    if not len(theta_grid) or not len(kappa_grid):
        raise ValueError("sweep grids must be non-empty")
    s0 = resolve_initial_state(initial_state)
    label = initial_state_label(initial_state)
    if tau_max is None:
        tau_max = default_tau_max(gamma_d)
    if stride is None:
        stride = _default_stride(tau_max, dtau)
    rows, all_series = [], []
    for kappa, theta in itertools.product(kappa_grid, theta_grid):
        params = ModelParams.from_raw(theta, kappa, gamma_d=gamma_d)
        obs = series(integrate(params, s0, tau_max, dtau, method=method, stride=stride))
        summary: DecaySummary = decay_summary(obs, tracked)
        rows.append(
            SweepRow(
                kappa=kappa,
                theta=theta,
                initial_state=label,
                final_purity=float(obs.purity[-1]),
                final_entropy=float(obs.entropy[-1]),
                min_fidelity=float(obs.fidelity.min()),
                half_time=summary.half_time,
                plateau_end=summary.plateau_end,
                classification=summary.classification,
                rate_estimate=summary.rate_estimate,
            )
        )
        all_series.append(obs)
    return SweepResult(rows, tracked, gamma_d, tau_max, all_series)


@dataclass(frozen=True)
class SaturationReport:
    status: str  # "pass" | "fail" | "inconclusive"
    final_purity: float
    final_entropy: float
    final_bloch_norm: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def saturation_check(
    obs: ObservableSeries, params: ModelParams, tol: float = 0.01, norm_max: float = 0.1
) -> SaturationReport:
    """Check that the series ends at the maximally mixed state.

    Needs a record of at least ``10 / gamma_d``; shorter ones are inconclusive.
    """
    p, e, n = float(obs.purity[-1]), float(obs.entropy[-1]), float(obs.bloch_norm[-1])
    need = math.inf if params.gamma_d == 0 else 10.0 / params.gamma_d
    # grid arithmetic may leave the last point a few ulps short of 10/gamma_d
    if obs.tau[-1] < need * (1 - 1e-12):
        return SaturationReport(
            "inconclusive", p, e, n, f"record ends at tau={obs.tau[-1]:.6g}, need {need:.6g}"
        )
    failures = []
    if abs(p - 0.5) >= tol:
        failures.append(f"purity {p:.6g}")
    if abs(e - LN2) >= tol:
        failures.append(f"entropy {e:.6g}")
    if n >= norm_max:
        failures.append(f"|s| {n:.6g}")
    if failures:
        return SaturationReport("fail", p, e, n, "not saturated: " + ", ".join(failures))
    return SaturationReport("pass", p, e, n)
