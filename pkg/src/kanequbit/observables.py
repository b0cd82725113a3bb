"""Purity, entropy, Bloch-vector length and fidelity along a trajectory."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .dynamics import ModelParams, Trajectory
from .qubit import (
    PHYSICAL_TOL,
    BlochLike,
    UnphysicalStateError,
    as_bloch_array,
    validate_density,
)

LN2 = math.log(2.0)
RANGE_SLACK = 1e-9
# det(rho) below this is roundoff on a pure state; sqrt would magnify it to ~1e-8.
_DET_FLOOR = 1e-15
PLATEAU_PURITY = 0.99

FidelityKind = Literal["uhlmann", "overlap"]
Tracked = Literal["purity", "bloch_norm", "fidelity"]


def _norms(s, tol: float = PHYSICAL_TOL) -> np.ndarray:
    arr = np.asarray(s.as_array() if hasattr(s, "as_array") else s, dtype=float)
    if arr.shape[-1] != 3:
        raise ValueError(f"Bloch vectors need 3 components, got shape {arr.shape}")
    n = np.sqrt(np.sum(arr * arr, axis=-1))
    if np.any(~np.isfinite(n)) or np.any(n > 1.0 + tol):
        raise UnphysicalStateError(f"Bloch vector norm exceeds 1 (max {np.max(n)!r})")
    return np.minimum(n, 1.0)


def _scalar_or_array(x: np.ndarray):
    return float(x) if np.ndim(x) == 0 else x


def bloch_norm(s: BlochLike):
    arr = np.asarray(s.as_array() if hasattr(s, "as_array") else s, dtype=float)
    return _scalar_or_array(np.sqrt(np.sum(arr * arr, axis=-1)))


def purity(s: BlochLike):
    """``tr(rho^2) = (1 + |s|^2) / 2``; accepts one vector or an ``(n, 3)`` stack."""
    n = _norms(s)
    return _scalar_or_array(0.5 * (1.0 + n * n))


def entropy_from_norm(n) -> np.ndarray:
    n = np.clip(np.asarray(n, dtype=float), 0.0, 1.0)
    lam_plus = 0.5 * (1.0 + n)
    lam_minus = 0.5 * (1.0 - n)
    # lambda ln(lambda) -> 0 as lambda -> 0; lam_plus >= 1/2 never vanishes.
    safe = np.where(lam_minus > 0, lam_minus, 1.0)
    minus_term = np.where(lam_minus > 0, lam_minus * np.log(safe), 0.0)
    return -(lam_plus * np.log(lam_plus) + minus_term)


def entropy(s: BlochLike):
    """Von Neumann entropy in nats, ``-sum lambda ln lambda`` with ``lambda = (1 +- |s|)/2``."""
    return _scalar_or_array(entropy_from_norm(_norms(s)))


def fidelity(rho0: np.ndarray, rho_t: np.ndarray, kind: FidelityKind = "uhlmann") -> float:
    """Fidelity between two qubit density matrices.

    ``"uhlmann"`` uses the 2x2 closed form ``tr(rho0 rho_t) + 2 sqrt(det rho0 det rho_t)``;
    ``"overlap"`` returns the bare ``tr(rho0 rho_t)``.
    """
    for rho in (rho0, rho_t):
        report = validate_density(np.asarray(rho, dtype=complex))
        if not report.passed:
            raise UnphysicalStateError(f"invalid density matrix: {report}")
    rho0 = np.asarray(rho0, dtype=complex)
    rho_t = np.asarray(rho_t, dtype=complex)
    overlap = float(np.trace(rho0 @ rho_t).real)
    if kind == "overlap":
        return min(max(overlap, 0.0), 1.0)
    if kind != "uhlmann":
        raise ValueError(f"unknown fidelity kind {kind!r}")
    det0, det_t = (float(np.linalg.det(r).real) for r in (rho0, rho_t))
    if det0 <= _DET_FLOOR or det_t <= _DET_FLOOR:
        return min(max(overlap, 0.0), 1.0)
    return min(max(overlap + 2.0 * math.sqrt(det0 * det_t), 0.0), 1.0)


def fidelity_bloch(s0: BlochLike, states, kind: FidelityKind = "uhlmann"):
    """Fidelity of each Bloch vector in ``states`` against ``s0``, in Bloch form."""
    s0 = as_bloch_array(s0)
    states = np.asarray(states, dtype=float)
    n0 = _norms(s0)
    nt = _norms(states)
    value = 0.5 * (1.0 + states @ s0)
    if kind == "uhlmann":
        det0 = 0.25 * (1.0 - n0 * n0)
        det_t = 0.25 * (1.0 - nt * nt)
        prod = np.where((det0 > _DET_FLOOR) & (det_t > _DET_FLOOR), det0 * det_t, 0.0)
        value = value + 2.0 * np.sqrt(prod)
    elif kind != "overlap":
        raise ValueError(f"unknown fidelity kind {kind!r}")
    return _scalar_or_array(np.clip(value, 0.0, 1.0))


@dataclass(frozen=True)
class ObservableSeries:
    tau: np.ndarray
    states: np.ndarray
    purity: np.ndarray
    entropy: np.ndarray
    bloch_norm: np.ndarray
    fidelity: np.ndarray
    params: Optional[ModelParams] = None
    fidelity_kind: str = "uhlmann"

    def __len__(self) -> int:
        return len(self.tau)

    @classmethod
    def from_states(
        cls,
        tau,
        states,
        params: Optional[ModelParams] = None,
        fidelity_kind: FidelityKind = "uhlmann",
    ) -> "ObservableSeries":
        tau = np.asarray(tau, dtype=float)
        states = np.asarray(states, dtype=float).reshape(-1, 3)
        norms = _norms(states)
        if len(states):
            fid = np.atleast_1d(fidelity_bloch(states[0], states, fidelity_kind))
        else:
            fid = np.empty(0)
        return cls(
            tau=tau,
            states=states,
            purity=0.5 * (1.0 + norms * norms),
            entropy=entropy_from_norm(norms),
            bloch_norm=norms,
            fidelity=fid,
            params=params,
            fidelity_kind=fidelity_kind,
        )

    def range_violations(self, slack: float = RANGE_SLACK) -> list[str]:
        """Names of observables that leave their physical range."""
        bounds = {
            "purity": (0.5, 1.0),
            "entropy": (0.0, LN2),
            "bloch_norm": (0.0, 1.0),
            "fidelity": (0.0, 1.0),
        }
        bad = []
        for name, (lo, hi) in bounds.items():
            values = getattr(self, name)
            if len(values) and (values.min() < lo - slack or values.max() > hi + slack):
                bad.append(name)
        return bad


def series(trajectory: Trajectory, fidelity_kind: FidelityKind = "uhlmann") -> ObservableSeries:
    return ObservableSeries.from_states(
        trajectory.tau, trajectory.states, trajectory.params, fidelity_kind
    )


@dataclass(frozen=True)
class DecaySummary:
    tracked: str
    half_time: Optional[float]
    rate_estimate: Optional[float]
    plateau_end: Optional[float]
    classification: str
    threshold: float


def _first_crossing(tau: np.ndarray, y: np.ndarray, level: float) -> Optional[float]:
    below = np.flatnonzero(y <= level)
    if not len(below):
        return None
    i = int(below[0])
    if i == 0:
        return float(tau[0])
    y0, y1 = y[i - 1], y[i]
    t0, t1 = tau[i - 1], tau[i]
    return float(t0 + (level - y0) * (t1 - t0) / (y1 - y0))


def _excess(series: ObservableSeries, tracked: Tracked) -> np.ndarray:
    """Distance of the tracked observable from its value at the maximally mixed state,
    expressed as a Bloch-vector amplitude so all three share one decay rate."""
    if tracked == "purity":
        return np.sqrt(np.clip(2.0 * series.purity - 1.0, 0.0, None))
    if tracked == "bloch_norm":
        return series.bloch_norm
    n0 = series.bloch_norm[0]
    floor = 0.5 * (1.0 + math.sqrt(max(1.0 - n0 * n0, 0.0)))
    return np.abs(series.fidelity - floor)


def _envelope_rate(tau: np.ndarray, amp: np.ndarray) -> Optional[float]:
    keep = amp > 1e-10
    tau, amp = tau[keep], amp[keep]
    if len(tau) < 2:
        return None
    interior = (amp[1:-1] >= amp[:-2]) & (amp[1:-1] > amp[2:])
    peaks = np.flatnonzero(interior) + 1
    if len(peaks) >= 3:
        tau, amp = tau[peaks], amp[peaks]
    slope = np.polyfit(tau, np.log(amp), 1)[0]
    return float(-slope)


def plateau_end(series: ObservableSeries, level: float = PLATEAU_PURITY) -> Optional[float]:
    """End of the initial stretch over which purity stays at or above ``level``."""
    p = series.purity
    if not len(p) or p[0] < level:
        return None
    below = np.flatnonzero(p < level)
    last = int(below[0]) - 1 if len(below) else len(p) - 1
    return float(series.tau[last])


def decay_summary(
    series: ObservableSeries,
    tracked: Tracked = "purity",
    *,
    gamma_d: Optional[float] = None,
    threshold: Optional[float] = None,
) -> DecaySummary:
    """Half-time, envelope rate and abrupt/gradual label for one observable.

    The half-time is the first (interpolated) time the observable reaches the
    midpoint of its range. It is reported only when the series has settled:
    the last tenth of the record moves by less than 1% of the range and ends
    within 1% of the minimum. The envelope rate is the negative log-slope of
    the decaying amplitude (peaks, when it oscillates) from the half-time on.
    A decay is "abrupt" when its half-time is below ``threshold``, which
    defaults to ``1 / gamma_d``.
    """
    if tracked not in ("purity", "bloch_norm", "fidelity"):
        raise ValueError(f"cannot track {tracked!r}")
    if gamma_d is None and series.params is not None:
        gamma_d = series.params.gamma_d
    if threshold is None:
        threshold = 1.0 / gamma_d if gamma_d else math.inf

    tau = series.tau
    y = getattr(series, tracked)
    plateau = plateau_end(series)
    if len(y) < 2:
        return DecaySummary(tracked, None, None, plateau, "gradual", threshold)

    hi, lo = float(y.max()), float(y.min())
    span = hi - lo
    half = None
    if span > 1e-12:
        tail = y[int(0.9 * (len(y) - 1)) :]
        settled = (y[-1] - lo) <= 0.01 * span and (tail.max() - tail.min()) <= 0.01 * span
        if settled:
            half = _first_crossing(tau, y, 0.5 * (hi + lo))

    rate = None
    if half is not None:
        window = tau >= half
        rate = _envelope_rate(tau[window], _excess(series, tracked)[window])
    label = "abrupt" if half is not None and half < threshold else "gradual"
    return DecaySummary(tracked, half, rate, plateau, label, threshold)
