"""Grids, wavefunctions and the position <-> momentum transform.

Everything downstream works on a uniform periodic grid whose right endpoint
is excluded, so that the discrete Fourier pair used by
:func:`change_representation` is exactly unitary.  Inner products are plain
Riemann sums (uniform weights times spacing).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DegenerateState, DomainError

_TINY_NORM = 1e-300


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``q_min + i * spacing`` for ``i in range(n_points)``."""

    q_min: float
    q_max: float
    n_points: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.q_min) and math.isfinite(self.q_max)):
            raise DomainError("grid bounds must be finite")
        if not self.q_min < self.q_max:
            raise DomainError(f"empty interval [{self.q_min}, {self.q_max})")
        n = self.n_points
        if int(n) != n or n < 8 or (int(n) & (int(n) - 1)) != 0:
            raise DomainError(f"n_points must be a power of two >= 8, got {n}")
        object.__setattr__(self, "n_points", int(n))

    @property
    def spacing(self) -> float:
        return (self.q_max - self.q_min) / self.n_points

    @property
    def points(self) -> NDArray[np.float64]:
        return self.q_min + self.spacing * np.arange(self.n_points)

    def nearest_index(self, x: float) -> int:
        i = int(round((x - self.q_min) / self.spacing))
        return min(max(i, 0), self.n_points - 1)

    def contains(self, x: float) -> bool:
        return self.q_min <= x <= self.points[-1]


def make_grid(q_min: float, q_max: float, n_points: int) -> Grid:
    return Grid(float(q_min), float(q_max), n_points)


def conjugate_grid(grid: Grid, hbar_e: float, dual_min: float | None = None) -> Grid:
    """Grid of the conjugate variable, with ``spacing * conj.spacing = 2 pi hbar / N``.

    The conjugate axis is centred on zero unless ``dual_min`` pins its left end.
    """
    n = grid.n_points
    dp = 2.0 * math.pi * hbar_e / (n * grid.spacing)
    p_min = -0.5 * n * dp if dual_min is None else float(dual_min)
    return Grid(p_min, p_min + n * dp, n)


class Representation(enum.Enum):
    POSITION = "position"
    MOMENTUM = "momentum"

    @property
    def other(self) -> "Representation":
        if self is Representation.POSITION:
            return Representation.MOMENTUM
        return Representation.POSITION


@dataclass(frozen=True, eq=False)
class Wavefunction:
    """Complex amplitudes sampled on ``grid`` in one representation.

    ``dual_min`` records the left end of the conjugate axis this state came
    from (if any), which makes a round trip through
    :func:`change_representation` land back on the original grid.
    """

    grid: Grid
    amplitudes: NDArray[np.complex128]
    representation: Representation = Representation.POSITION
    hbar_e: float = 1.0
    dual_min: float | None = None
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.grid.n_points,):
            raise DomainError(
                f"expected {self.grid.n_points} amplitudes, got shape {amps.shape}"
            )
        if not np.all(np.isfinite(amps)):
            raise DomainError("amplitudes must be finite")
        if not self.hbar_e > 0:
            raise DomainError(f"hbar_e must be positive, got {self.hbar_e}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def axis(self) -> NDArray[np.float64]:
        return self.grid.points

    @property
    def density(self) -> NDArray[np.float64]:
        """Unnormalized ``|amplitude|**2``."""
        return np.abs(self.amplitudes) ** 2

    def with_amplitudes(self, amplitudes: ArrayLike) -> "Wavefunction":
        return replace(self, amplitudes=np.asarray(amplitudes, dtype=np.complex128))


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


def squared_norm(psi: Wavefunction) -> float:
    return float(np.sum(psi.density) * psi.grid.spacing)


def _checked_norm(psi: Wavefunction) -> float:
    nrm = squared_norm(psi)
    if not (math.isfinite(nrm) and nrm > _TINY_NORM):
        raise DegenerateState(f"squared norm {nrm!r} is zero or underflows")
    return nrm


def normalize(psi: Wavefunction) -> Wavefunction:
    nrm = _checked_norm(psi)
    return psi.with_amplitudes(psi.amplitudes / math.sqrt(nrm))


def probability_density(psi: Wavefunction) -> NDArray[np.float64]:
    """Density of the normalized state; sums to ``1 / spacing``."""
    return psi.density / _checked_norm(psi)


def change_representation(psi: Wavefunction) -> Wavefunction:
    """Map position amplitudes to momentum amplitudes or back.

    Forward kernel ``exp(-i p q / hbar) / sqrt(2 pi hbar)``, inverse with the
    conjugate kernel; both evaluated exactly on the grid pair by one FFT plus
    two diagonal phases, so the map is unitary to rounding error.
    """
    hbar = psi.hbar_e
    src = psi.grid
    dst = conjugate_grid(src, hbar, psi.dual_min)
    n = src.n_points
    x = src.points
    y = dst.points
    pref = src.spacing / math.sqrt(2.0 * math.pi * hbar)
    if psi.representation is Representation.POSITION:
        pre = psi.amplitudes * np.exp(-1j * (x - src.q_min) * dst.q_min / hbar)
        out = pref * np.exp(-1j * y * src.q_min / hbar) * np.fft.fft(pre)
    else:
        pre = psi.amplitudes * np.exp(1j * (x - src.q_min) * dst.q_min / hbar)
        out = pref * n * np.exp(1j * y * src.q_min / hbar) * np.fft.ifft(pre)
    return Wavefunction(
        grid=dst,
        amplitudes=out,
        representation=psi.representation.other,
        hbar_e=hbar,
        dual_min=src.q_min,
        meta=dict(psi.meta),
    )


def to_position(psi: Wavefunction) -> Wavefunction:
    if psi.representation is Representation.POSITION:
        return psi
    return change_representation(psi)


def to_momentum(psi: Wavefunction) -> Wavefunction:
    if psi.representation is Representation.MOMENTUM:
        return psi
    return change_representation(psi)


def wavenumbers(grid: Grid) -> NDArray[np.float64]:
    return 2.0 * np.pi * np.fft.fftfreq(grid.n_points, d=grid.spacing)


def apply_momentum(psi: Wavefunction, power: int = 1) -> NDArray[np.complex128]:
    """``P**power`` applied spectrally to a position-representation state."""
    if psi.representation is not Representation.POSITION:
        raise DomainError("apply_momentum expects a position-representation state")
    symbol = (psi.hbar_e * wavenumbers(psi.grid)) ** power
    return np.fft.ifft(symbol * np.fft.fft(psi.amplitudes))


def moments(psi: Wavefunction) -> Moments:
    """Mean and variance of the coordinate in ``psi``'s own representation."""
    w = probability_density(psi) * psi.grid.spacing
    x = psi.axis
    mean = float(np.sum(w * x))
    var = float(np.sum(w * (x - mean) ** 2))
    return Moments(mean=mean, variance=max(var, 0.0))


def inner(a: Wavefunction, b: Wavefunction) -> complex:
    """``<a|b>`` by Riemann sum; both states must share grid and representation."""
    if a.grid != b.grid or a.representation is not b.representation:
        raise DomainError("inner product needs states on the same grid and representation")
    return complex(np.sum(np.conj(a.amplitudes) * b.amplitudes) * a.grid.spacing)


def tail_mass(psi: Wavefunction, fraction: float = 0.05) -> float:
    """Probability carried by the outer ``fraction`` of the grid on either side."""
    w = probability_density(psi) * psi.grid.spacing
    k = max(1, int(math.ceil(fraction * psi.grid.n_points)))
    return float(np.sum(w[:k]) + np.sum(w[-k:]))


def gaussian(
    grid: Grid,
    center: float = 0.0,
    width: float = math.sqrt(0.5),
    *,
    hbar_e: float = 1.0,
    mean_conjugate: float = 0.0,
    representation: Representation = Representation.POSITION,
) -> Wavefunction:
    """Normalized Gaussian whose density has standard deviation ``width``.

    ``mean_conjugate`` adds a plane-wave factor so the conjugate variable has
    that mean.  Narrow or broad instances stand in for delta states and plane
    waves, which have no finite norm.
    """
    if not width > 0:
        raise DomainError(f"width must be positive, got {width}")
    x = grid.points - center
    sign = 1.0 if representation is Representation.POSITION else -1.0
    amps = np.exp(-(x**2) / (4.0 * width**2) + sign * 1j * mean_conjugate * x / hbar_e)
    psi = Wavefunction(grid, amps, representation, hbar_e)
    return normalize(psi)


def from_density(
    grid: Grid,
    density: ArrayLike,
    representation: Representation = Representation.POSITION,
    hbar_e: float = 1.0,
) -> Wavefunction:
    """Real non-negative amplitude whose modulus squared reproduces ``density``.

    Used to feed marginals of mixed (e.g. thermal) strategies into code that
    only looks at ``|amplitude|**2``.
    """
    rho = np.asarray(density, dtype=float)
    if np.any(rho < 0):
        raise DomainError("density must be non-negative")
    return normalize(Wavefunction(grid, np.sqrt(rho), representation, hbar_e))
