"""Risk inclination operator and its spectrum.

The operator is the quadratic form

    H = (P - p0)**2 / (2 m) + m * omega**2 * (Q - q0)**2 / 2,   omega = 2 pi / theta,

acting on position amplitudes.  A non-zero noncommutativity ``big_theta``
enters only through the effective constant ``sqrt(hbar_e**2 + big_theta**2)``
that replaces ``hbar_e`` wherever it appears.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from .errors import ConvergenceError, DomainError, GridTooSmallWarning
from .phase import Grid, Representation, Wavefunction, tail_mass, wavenumbers

Kinetic = Literal["spectral", "finite-difference"]

RESIDUAL_TOL = 1e-8
EDGE_MASS_TOL = 1e-10


@dataclass(frozen=True)
class RiskParams:
    m: float = 1.0
    theta: float = 2.0 * math.pi
    hbar_e: float = 1.0
    big_theta: float = 0.0
    q0: float = 0.0
    p0: float = 0.0

    def __post_init__(self) -> None:
        if not self.m > 0:
            raise DomainError(f"m must be positive, got {self.m}")
        if not self.theta > 0:
            raise DomainError(f"theta must be positive, got {self.theta}")
        if not self.hbar_e > 0:
            raise DomainError(f"hbar_e must be positive, got {self.hbar_e}")
        if not self.big_theta >= 0:
            raise DomainError(f"big_theta must be non-negative, got {self.big_theta}")
        for name in ("q0", "p0"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    @property
    def omega(self) -> float:
        return 2.0 * math.pi / self.theta

    @property
    def effective_hbar(self) -> float:
        return effective_planck(self.hbar_e, self.big_theta)

    @property
    def quantum(self) -> float:
        """Level spacing ``hbar_eff * omega``."""
        return self.effective_hbar * self.omega

    def classical(self, q: NDArray | float, p: NDArray | float) -> NDArray | float:
        """The same quadratic form evaluated on phase-space points."""
        return (p - self.p0) ** 2 / (2.0 * self.m) + 0.5 * self.m * self.omega**2 * (q - self.q0) ** 2

    def exact_level(self, n: int) -> float:
        return self.quantum * (n + 0.5)


def effective_planck(hbar_e: float, big_theta: float) -> float:
    if not hbar_e > 0:
        raise DomainError(f"hbar_e must be positive, got {hbar_e}")
    if not big_theta >= 0:
        raise DomainError(f"big_theta must be non-negative, got {big_theta}")
    return math.hypot(hbar_e, big_theta)


@dataclass(frozen=True)
class SpectralResult:
    eigenvalues: NDArray[np.float64]
    eigenstates: list[Wavefunction]
    residuals: NDArray[np.float64]

    def __len__(self) -> int:
        return len(self.eigenvalues)


def _kinetic_spectral(params: RiskParams, grid: Grid) -> NDArray[np.complex128]:
    hbar = params.effective_hbar
    symbol = (hbar * wavenumbers(grid) - params.p0) ** 2 / (2.0 * params.m)
    col = np.fft.ifft(symbol)
    t = scipy.linalg.circulant(col)
    return 0.5 * (t + t.conj().T)


def _kinetic_finite_difference(params: RiskParams, grid: Grid) -> NDArray[np.complex128]:
    # periodic 3-point stencils; eigenvalue error is O(spacing**2)
    n, h = grid.n_points, grid.spacing
    hbar = params.effective_hbar
    eye = np.eye(n)
    up = np.roll(eye, 1, axis=1)
    down = up.T
    d2 = (up - 2.0 * eye + down) / h**2
    d1 = (up - down) / (2.0 * h)
    p = -1j * hbar * d1
    t = -(hbar**2) * d2 / (2.0 * params.m) - params.p0 * p / params.m + params.p0**2 / (2.0 * params.m) * eye
    return 0.5 * (t + t.conj().T)


def build_risk_operator(
    params: RiskParams, grid: Grid, kinetic: Kinetic = "spectral"
) -> NDArray[np.float64] | NDArray[np.complex128]:
    """Dense Hermitian matrix of the risk operator on position amplitudes.

    ``kinetic="spectral"`` applies the momentum term exactly through the
    discrete Fourier pair of the periodic grid.  ``"finite-difference"`` uses
    periodic central differences instead and carries an O(spacing**2) error.
    """
    if kinetic == "spectral":
        t = _kinetic_spectral(params, grid)
    elif kinetic == "finite-difference":
        t = _kinetic_finite_difference(params, grid)
    else:
        raise DomainError(f"unknown kinetic scheme {kinetic!r}")
    v = 0.5 * params.m * params.omega**2 * (grid.points - params.q0) ** 2
    h = t + np.diag(v)
    if params.p0 == 0:
        # the kinetic symbol is even, so the matrix is real symmetric
        return np.ascontiguousarray(h.real)
    return h


def _fix_phase(vec: NDArray[np.complex128], grid: Grid, q0: float) -> NDArray[np.complex128]:
    # nearest point to q0 carrying non-negligible amplitude, ties go right
    mag = np.abs(vec)
    significant = mag > 1e-6 * mag.max()
    dist = np.abs(grid.points - q0)
    dist = np.where(significant, dist, np.inf)
    best = np.flatnonzero(dist <= dist.min() + 1e-12 * grid.spacing)
    i = int(best[-1])
    return vec * (np.conj(vec[i]) / mag[i])


def spectrum(
    params: RiskParams, grid: Grid, k: int, kinetic: Kinetic = "spectral"
) -> SpectralResult:
    """Lowest ``k`` eigenpairs of the risk operator.

    Eigenstates are normalized on the grid and phase-fixed to be real and
    positive at the significant grid point nearest ``q0``.
    """
    if not 1 <= k < grid.n_points / 4:
        raise DomainError(f"k must satisfy 1 <= k < n_points/4, got {k}")
    h = build_risk_operator(params, grid, kinetic)
    vals, vecs = scipy.linalg.eigh(h, subset_by_index=[0, k - 1])
    residuals = np.linalg.norm(h @ vecs - vecs * vals, axis=0)
    worst = float(residuals.max())
    if worst > RESIDUAL_TOL:
        raise ConvergenceError(f"eigenpair residual {worst:.3e} exceeds {RESIDUAL_TOL:g}")

    scale = 1.0 / math.sqrt(grid.spacing)
    states = []
    for j in range(k):
        amps = _fix_phase(vecs[:, j], grid, params.q0) * scale
        psi = Wavefunction(grid, amps, Representation.POSITION, params.effective_hbar)
        edge = tail_mass(psi)
        if edge > EDGE_MASS_TOL:
            warnings.warn(
                f"level {j}: mass {edge:.2e} within the outer 5% of the grid",
                GridTooSmallWarning,
                stacklevel=2,
            )
        states.append(psi)
    return SpectralResult(np.asarray(vals, dtype=float), states, residuals)


def minimal_risk_constant(params: RiskParams, grid: Grid) -> float:
    """``2 * theta`` times the lowest eigenvalue."""
    return 2.0 * params.theta * float(spectrum(params, grid, 1).eigenvalues[0])
