"""Qubit state algebra: Bloch vectors, density matrices and their validation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

PHYSICAL_TOL = 1e-12

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class UnphysicalStateError(ValueError):
    """Raised when a vector or matrix does not describe a qubit state."""


@dataclass(frozen=True)
class BlochVector:
    sx: float
    sy: float
    sz: float

    @classmethod
    def of(cls, s: "BlochLike") -> "BlochVector":
        if isinstance(s, BlochVector):
            return s
        arr = np.asarray(s, dtype=float).reshape(-1)
        if arr.shape != (3,):
            raise ValueError(f"Bloch vector needs 3 components, got {arr.shape[0]}")
        return cls(float(arr[0]), float(arr[1]), float(arr[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.sx, self.sy, self.sz])

    @property
    def norm(self) -> float:
        return math.sqrt(self.sx**2 + self.sy**2 + self.sz**2)

    def __iter__(self):
        return iter((self.sx, self.sy, self.sz))


BlochLike = Union[BlochVector, Sequence[float], np.ndarray]

# Named pure states polarized along the positive axes.
AXIS_STATES = {
    "x": BlochVector(1.0, 0.0, 0.0),
    "y": BlochVector(0.0, 1.0, 0.0),
    "z": BlochVector(0.0, 0.0, 1.0),
}


def as_bloch_array(s: BlochLike) -> np.ndarray:
    if isinstance(s, BlochVector):
        return s.as_array()
    arr = np.asarray(s, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"Bloch vector must have shape (3,), got {arr.shape}")
    return arr


def check_physical(s: BlochLike, tol: float = PHYSICAL_TOL) -> np.ndarray:
    """Return ``s`` as an array, raising if it lies outside the unit ball."""
    arr = as_bloch_array(s)
    if not np.all(np.isfinite(arr)):
        raise UnphysicalStateError(f"non-finite Bloch vector {arr}")
    n = float(np.linalg.norm(arr))
    if n > 1.0 + tol:
        raise UnphysicalStateError(f"Bloch vector norm {n!r} exceeds 1")
    return arr


def bloch_to_density(s: BlochLike) -> np.ndarray:
    """Density matrix ``(1 + s.sigma) / 2`` for a Bloch vector inside the unit ball."""
    sx, sy, sz = check_physical(s)
    return 0.5 * np.array(
        [[1.0 + sz, sx - 1j * sy], [sx + 1j * sy, 1.0 - sz]], dtype=complex
    )


def density_to_bloch(rho: np.ndarray) -> BlochVector:
    """Bloch components ``s_i = tr(rho sigma_i)`` of a valid density matrix.

    Raises:
        UnphysicalStateError: if ``rho`` is not Hermitian or not unit trace.
    """
    rho = np.asarray(rho, dtype=complex)
    report = validate_density(rho)
    if report.hermiticity_defect > PHYSICAL_TOL or report.trace_defect > PHYSICAL_TOL:
        raise UnphysicalStateError(
            f"not a density matrix: hermiticity defect {report.hermiticity_defect:.3g}, "
            f"trace defect {report.trace_defect:.3g}"
        )
    return BlochVector(*_bloch_components(rho))


def _bloch_components(rho: np.ndarray) -> tuple[float, float, float]:
    # Closed forms of tr(rho sigma_i).
    sx = (rho[0, 1] + rho[1, 0]).real
    sy = (1j * (rho[0, 1] - rho[1, 0])).real
    sz = (rho[0, 0] - rho[1, 1]).real
    return float(sx), float(sy), float(sz)


def bloch_components(rho: np.ndarray) -> np.ndarray:
    """Unchecked Bloch components for a matrix or a stack of matrices ``(..., 2, 2)``."""
    rho = np.asarray(rho, dtype=complex)
    sx = (rho[..., 0, 1] + rho[..., 1, 0]).real
    sy = (1j * (rho[..., 0, 1] - rho[..., 1, 0])).real
    sz = (rho[..., 0, 0] - rho[..., 1, 1]).real
    return np.stack([sx, sy, sz], axis=-1)


@dataclass(frozen=True)
class ValidationReport:
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    passed: bool


def validate_density(rho: np.ndarray, tol: float = PHYSICAL_TOL) -> ValidationReport:
    """Measure how far a 2x2 matrix is from being a density matrix.

    The smallest eigenvalue comes from the closed form for the Hermitian part,
    ``tr/2 - sqrt((a - d)^2 / 4 + |b|^2)``, so no eigensolver is involved.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {rho.shape}")
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    tr = rho[0, 0] + rho[1, 1]
    trace_defect = float(abs(tr - 1.0))
    a, d = rho[0, 0].real, rho[1, 1].real
    b = 0.5 * (rho[0, 1] + np.conj(rho[1, 0]))
    min_eig = 0.5 * (a + d) - math.sqrt(0.25 * (a - d) ** 2 + abs(b) ** 2)
    passed = herm <= tol and trace_defect <= tol and min_eig >= -tol
    return ValidationReport(herm, trace_defect, float(min_eig), bool(passed))


def density_eigenvalues(s: BlochLike) -> tuple[float, float]:
    n = float(np.linalg.norm(as_bloch_array(s)))
    return (1.0 - n) / 2.0, (1.0 + n) / 2.0
