"""Equation of motion for the driven, dephased qubit in scaled time.

In Bloch form the averaged master equation is the linear system ``ds/dtau = M s``::

    ds_x/dtau =  omega cos(theta) s_z - gamma_d s_x
    ds_y/dtau =  omega sin(theta) s_z - gamma_d s_y
    ds_z/dtau = -omega (cos(theta) s_x + sin(theta) s_y)

i.e. a rotation at angular speed ``omega`` about ``(-sin theta, cos theta, 0)`` plus
dephasing of the transverse components at rate ``gamma_d``.

Three solvers produce a :class:`Trajectory`:

* ``"rk4"``: classical fixed-step Runge-Kutta on the Bloch vector.
* ``"exact"``: repeated application of ``exp(M dtau)`` (own scaling-and-squaring).
* ``"oracle"``: Runge-Kutta on the 2x2 density matrix itself, built from the
  commutator form of the equation and converted back to Bloch vectors at the end.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from .qubit import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    BlochLike,
    BlochVector,
    as_bloch_array,
    bloch_components,
    bloch_to_density,
    check_physical,
    validate_density,
    UnphysicalStateError,
)

TWO_PI = 2.0 * math.pi
DEFAULT_DTAU = 1e-3

Method = Literal["rk4", "exact", "oracle"]
METHODS = ("rk4", "exact", "oracle")


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless model parameters.

    ``omega`` and ``gamma_d`` are rates per unit scaled time ``tau = B_z^2 t``.
    The optional raw block records where they came from: ``omega = kappa / 2``
    with ``kappa = 4 B_ac / B_z^2``, and ``gamma_d = 2 epsilon``.
    """

    theta: float
    omega: float
    gamma_d: float
    kappa: Optional[float] = None
    epsilon: Optional[float] = None

    def __post_init__(self):
        for name in ("theta", "omega", "gamma_d"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.omega < 0 or self.gamma_d < 0:
            raise ValueError("omega and gamma_d must be non-negative")
        if not 0.0 <= self.theta < TWO_PI:
            raise ValueError(f"theta must lie in [0, 2pi), got {self.theta!r}")
        if self.kappa is not None and not math.isclose(
            self.omega, self.kappa / 2, rel_tol=1e-15, abs_tol=0.0
        ):
            raise ValueError("omega must equal kappa / 2 when kappa is given")
        if self.epsilon is not None and not math.isclose(
            self.gamma_d, 2 * self.epsilon, rel_tol=1e-15, abs_tol=0.0
        ):
            raise ValueError("gamma_d must equal 2 * epsilon when epsilon is given")

    @classmethod
    def from_raw(
        cls,
        theta: float,
        kappa: float,
        epsilon: Optional[float] = None,
        gamma_d: Optional[float] = None,
    ) -> "ModelParams":
        """Build from the field ratio ``kappa`` and either ``epsilon`` or ``gamma_d``."""
        if (epsilon is None) == (gamma_d is None):
            raise ValueError("give exactly one of epsilon and gamma_d")
        if epsilon is not None:
            gamma_d = 2.0 * epsilon
        return cls(theta, kappa / 2.0, gamma_d, kappa=kappa, epsilon=epsilon)

    @property
    def rotation_axis(self) -> np.ndarray:
        return np.array([-math.sin(self.theta), math.cos(self.theta), 0.0])


def bloch_rhs(params: ModelParams, s: BlochLike) -> np.ndarray:
    sx, sy, sz = as_bloch_array(s)
    c, sn = math.cos(params.theta), math.sin(params.theta)
    w, g = params.omega, params.gamma_d
    return np.array(
        [w * c * sz - g * sx, w * sn * sz - g * sy, -w * (c * sx + sn * sy)]
    )


def generator(params: ModelParams) -> np.ndarray:
    """The 3x3 matrix ``M`` with ``ds/dtau = M s``."""
    c, sn = math.cos(params.theta), math.sin(params.theta)
    w, g = params.omega, params.gamma_d
    return np.array(
        [
            [-g, 0.0, w * c],
            [0.0, -g, w * sn],
            [-w * c, -w * sn, 0.0],
        ]
    )


def expm(a: np.ndarray, *, theta_max: float = 0.5, order: int = 13) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a truncated Taylor kernel.

    ``a`` is scaled by ``2**-k`` until its 1-norm is at most ``theta_max``; the
    degree-``order`` Taylor polynomial is evaluated by Horner's rule and squared
    ``k`` times. At the defaults the truncation error is below 1e-19 relative.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expm needs a square matrix, got shape {a.shape}")
    norm = float(np.max(np.sum(np.abs(a), axis=0))) if a.size else 0.0
    if not math.isfinite(norm):
        raise ValueError("expm of a non-finite matrix")
    k = 0
    if norm > theta_max:
        k = int(math.ceil(math.log2(norm / theta_max)))
    scaled = a / (2.0**k)
    eye = np.eye(a.shape[0], dtype=np.result_type(a, float))
    out = eye.copy()
    for j in range(order, 0, -1):
        out = eye + (scaled @ out) / j
    for _ in range(k):
        out = out @ out
    return out


def propagate_exact(params: ModelParams, s0: BlochLike, tau: float) -> np.ndarray:
    """``exp(M tau) s0``."""
    if not tau >= 0:
        raise ValueError(f"tau must be non-negative, got {tau!r}")
    return expm(generator(params) * tau) @ as_bloch_array(s0)


def rk4_step(params: ModelParams, s: BlochLike, dtau: float) -> np.ndarray:
    if not dtau > 0:
        raise ValueError(f"dtau must be positive, got {dtau!r}")
    s = as_bloch_array(s)
    k1 = bloch_rhs(params, s)
    k2 = bloch_rhs(params, s + 0.5 * dtau * k1)
    k3 = bloch_rhs(params, s + 0.5 * dtau * k2)
    k4 = bloch_rhs(params, s + dtau * k3)
    return s + (dtau / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _rk4_matrix(a: np.ndarray) -> np.ndarray:
    # One RK4 step of the linear system x' = L x with a = dtau * L is exactly
    # multiplication by this degree-4 polynomial.
    eye = np.eye(a.shape[0], dtype=a.dtype)
    return eye + a @ (eye + a @ (eye / 2 + a @ (eye / 6 + a / 24)))


def _density_rhs(params: ModelParams, rho: np.ndarray) -> np.ndarray:
    drive = math.cos(params.theta) * SIGMA_Y - math.sin(params.theta) * SIGMA_X
    comm = drive @ rho - rho @ drive
    inner = SIGMA_Z @ rho - rho @ SIGMA_Z
    double = SIGMA_Z @ inner - inner @ SIGMA_Z
    return -0.5j * params.omega * comm - 0.25 * params.gamma_d * double


def density_rhs_oracle(params: ModelParams, rho: np.ndarray) -> np.ndarray:
    """``d rho / dtau`` from the commutator form of the master equation.

    ``-i (omega/2) [cos(theta) sigma_y - sin(theta) sigma_x, rho]
    - (gamma_d/4) [sigma_z, [sigma_z, rho]]``
    """
    rho = np.asarray(rho, dtype=complex)
    report = validate_density(rho)
    if not report.passed:
        raise UnphysicalStateError(f"invalid density matrix: {report}")
    return _density_rhs(params, rho)


def liouvillian(params: ModelParams) -> np.ndarray:
    """4x4 matrix of ``rho -> d rho/dtau`` acting on row-major ``vec(rho)``."""
    cols = []
    for k in range(4):
        unit = np.zeros(4, dtype=complex)
        unit[k] = 1.0
        cols.append(_density_rhs(params, unit.reshape(2, 2)).reshape(4))
    return np.stack(cols, axis=1)


class FixedPointSet(str, enum.Enum):
    UNIQUE_ORIGIN = "unique_origin"
    Z_AXIS_LINE = "z_axis_line"
    ROTATION_AXIS_LINE = "rotation_axis_line"
    WHOLE_BALL = "whole_ball"


def fixed_point(params: ModelParams) -> FixedPointSet:
    """Describe the stationary set of ``ds/dtau = M s`` inside the ball."""
    if params.omega > 0:
        if params.gamma_d > 0:
            return FixedPointSet.UNIQUE_ORIGIN
        return FixedPointSet.ROTATION_AXIS_LINE
    if params.gamma_d > 0:
        return FixedPointSet.Z_AXIS_LINE
    return FixedPointSet.WHOLE_BALL


@dataclass(frozen=True)
class Trajectory:
    tau: np.ndarray
    states: np.ndarray
    params: ModelParams
    initial_state: BlochVector
    method: str = "rk4"
    dtau: float = DEFAULT_DTAU
    # Only the oracle path keeps its density matrices, shape (n, 2, 2).
    rho: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        for arr in (self.tau, self.states, self.rho):
            if arr is not None:
                arr.flags.writeable = False

    def __len__(self) -> int:
        return len(self.tau)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


_WIDE = np.longdouble


def _orbit(step: np.ndarray, x0: np.ndarray, n: int, block: int = 1024) -> np.ndarray:
    """``[x0, step x0, step^2 x0, ..., step^n x0]`` evaluated a block at a time."""
    dim = x0.shape[0]
    dtype = np.result_type(step, x0)
    block = max(1, min(block, n + 1))
    powers = np.empty((block, dim, dim), dtype=dtype)
    powers[0] = np.eye(dim)
    for j in range(1, block):
        powers[j] = step @ powers[j - 1]
    jump = step @ powers[-1]
    out = np.empty((n + 1, dim), dtype=dtype)
    start = x0.astype(dtype)
    k = 0
    while k <= n:
        m = min(block, n + 1 - k)
        out[k : k + m] = powers[:m] @ start
        start = jump @ start
        k += m
    return out


def _grid_size(tau_max: float, dtau: float, stride: int) -> int:
    if not (math.isfinite(tau_max) and tau_max > 0):
        raise ValueError(f"tau_max must be positive and finite, got {tau_max!r}")
    if not (math.isfinite(dtau) and dtau > 0):
        raise ValueError(f"dtau must be positive and finite, got {dtau!r}")
    if dtau > tau_max:
        raise ValueError("dtau must not exceed tau_max")
    if stride < 1:
        raise ValueError("stride must be at least 1")
    n = int(round(tau_max / dtau))
    if abs(n * dtau - tau_max) > 1e-9 * tau_max:
        raise ValueError(f"tau_max={tau_max} is not a multiple of dtau={dtau}")
    if n % stride:
        raise ValueError(f"{n} steps are not divisible by stride {stride}")
    return n


def integrate(
    params: ModelParams,
    s0: BlochLike,
    tau_max: float,
    dtau: float = DEFAULT_DTAU,
    method: Method = "rk4",
    stride: int = 1,
) -> Trajectory:
    """Evolve ``s0`` on the grid ``0, dtau, ..., tau_max``.

    ``stride`` keeps every ``stride``-th grid point; the step size used by the
    solver is always ``dtau``.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    s0_arr = check_physical(s0)
    n = _grid_size(tau_max, dtau, stride)
    m_out = n // stride
    tau = np.arange(m_out + 1) * (stride * dtau)
    rho = None

    # Propagation runs in extended precision: in float64 the rounded step matrix
    # alone lets |s| creep past 1 + 1e-12 within ~1e5 unitary steps.
    if method == "oracle":
        lv = liouvillian(params).astype(np.clongdouble)
        step = np.linalg.matrix_power(_rk4_matrix(lv * _WIDE(dtau)), stride)
        rho0 = bloch_to_density(s0_arr).reshape(4).astype(np.clongdouble)
        rho = _orbit(step, rho0, m_out).astype(complex).reshape(-1, 2, 2)
        states = bloch_components(rho)
    else:
        m = generator(params).astype(_WIDE) * _WIDE(dtau)
        one = _rk4_matrix(m) if method == "rk4" else expm(m)
        step = np.linalg.matrix_power(one, stride)
        states = _orbit(step, s0_arr.astype(_WIDE), m_out).astype(float)
    states[0] = s0_arr
    return Trajectory(
        tau=tau,
        states=states,
        params=params,
        initial_state=BlochVector.of(s0_arr),
        method=method,
        dtau=dtau,
        rho=rho,
    )
