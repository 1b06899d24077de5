"""Phase-space densities of risk-operator states.

Pure level ``n`` has Wigner function

    W_n = (-1)**n / (pi hbar) * exp(-2 H / (hbar omega)) * L_n(4 H / (hbar omega))

and the Gibbs mixture over levels collapses to the Gaussian
``(omega / 2 pi) * x * exp(-x H)`` with ``x = (2 / hbar omega) tanh(beta hbar omega / 2)``.
Here ``H`` is the classical risk form and ``hbar`` the effective constant.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError, GridTooSmall
from .phase import Grid, make_grid
from .risk import RiskParams

BOUNDARY_TOL = 1e-12
# H grows quadratically towards the edge, so the risk integrand gets a looser guard
INTEGRAND_TOL = 1e-10
# exp(-y/2) underflows past this, whatever L_n(y) is
_Y_CUTOFF = 1400.0


@dataclass(frozen=True)
class PhaseGrid:
    q: Grid
    p: Grid

    @property
    def cell_measure(self) -> float:
        return self.q.spacing * self.p.spacing

    def mesh(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """``(Q, P)`` arrays of shape ``(q.n_points, p.n_points)``."""
        return np.meshgrid(self.q.points, self.p.points, indexing="ij")

    def as_dict(self) -> dict[str, float | int]:
        return {
            "q_min": self.q.q_min,
            "q_max": self.q.q_max,
            "q_points": self.q.n_points,
            "p_min": self.p.q_min,
            "p_max": self.p.q_max,
            "p_points": self.p.n_points,
        }


class DensityKind(enum.Enum):
    WIGNER = "wigner"
    THERMAL = "thermal"
    MIXTURE = "mixture"
    GENERIC = "generic"


@dataclass(frozen=True, eq=False)
class PhaseDensity:
    phase_grid: PhaseGrid
    values: NDArray[np.float64]
    kind: DensityKind
    level: int | None = None
    beta: float | None = None

    @property
    def mass(self) -> float:
        return float(self.values.sum() * self.phase_grid.cell_measure)

    def q_marginal(self) -> NDArray[np.float64]:
        return self.values.sum(axis=1) * self.phase_grid.p.spacing

    def p_marginal(self) -> NDArray[np.float64]:
        return self.values.sum(axis=0) * self.phase_grid.q.spacing


@dataclass(frozen=True)
class ThermalParams:
    beta: float
    params: RiskParams

    def __post_init__(self) -> None:
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise DomainError(f"beta must be positive and finite, got {self.beta}")

    @property
    def x(self) -> float:
        q = self.params.quantum
        return (2.0 / q) * math.tanh(0.5 * self.beta * q)


def laguerre(n: int, x: ArrayLike) -> NDArray[np.float64] | float:
    """``L_n(x)`` from ``(k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}``."""
    if n < 0:
        raise DomainError(f"Laguerre degree must be >= 0, got {n}")
    xs = np.asarray(x, dtype=float)
    prev = np.ones_like(xs)
    if n == 0:
        return float(prev) if prev.ndim == 0 else prev
    cur = 1.0 - xs
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - xs) * cur - k * prev) / (k + 1)
    return float(cur) if cur.ndim == 0 else cur


def _scaled_energy(params: RiskParams, pgrid: PhaseGrid) -> NDArray[np.float64]:
    qq, pp = pgrid.mesh()
    return 4.0 * params.classical(qq, pp) / params.quantum


def _check_boundary(values: NDArray[np.float64], what: str, tol: float = BOUNDARY_TOL) -> None:
    peak = float(np.abs(values).max())
    edge = max(
        np.abs(values[0]).max(),
        np.abs(values[-1]).max(),
        np.abs(values[:, 0]).max(),
        np.abs(values[:, -1]).max(),
    )
    if peak == 0 or edge > tol * peak:
        raise GridTooSmall(f"{what}: boundary/peak ratio {edge / peak if peak else math.inf:.2e}")


def _wigner_levels(params: RiskParams, pgrid: PhaseGrid, n_max: int):
    """Yield ``(n, W_n)`` for ``n = 0..n_max`` sharing one Laguerre recurrence."""
    y = _scaled_energy(params, pgrid)
    damp = np.where(y < _Y_CUTOFF, np.exp(-0.5 * np.minimum(y, _Y_CUTOFF)), 0.0)
    norm = 1.0 / (math.pi * params.effective_hbar)
    prev = np.ones_like(y)
    cur = 1.0 - y
    for n in range(n_max + 1):
        if n == 0:
            ln = prev
        elif n == 1:
            ln = cur
        else:
            prev, cur = cur, ((2 * n - 1 - y) * cur - (n - 1) * prev) / n
            ln = cur
        with np.errstate(invalid="ignore", over="ignore"):
            w = np.where(damp > 0, norm * (-1.0) ** n * damp * ln, 0.0)
        yield n, w


def wigner_excited(n: int, params: RiskParams, pgrid: PhaseGrid) -> PhaseDensity:
    if n < 0:
        raise DomainError(f"level must be >= 0, got {n}")
    for level, w in _wigner_levels(params, pgrid, n):
        if level == n:
            _check_boundary(w, f"W_{n}")
            return PhaseDensity(pgrid, w, DensityKind.WIGNER, level=n)
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class GibbsWeights:
    weights: NDArray[np.float64]
    tail: float

    @property
    def total(self) -> float:
        return float(self.weights.sum()) + self.tail


def gibbs_weights(beta: float, params: RiskParams, n_max: int) -> GibbsWeights:
    """Geometric level weights ``w_n`` for ``n <= n_max`` and the mass beyond."""
    if not (beta > 0 and math.isfinite(beta)):
        raise DomainError(f"beta must be positive and finite, got {beta}")
    if n_max < 0:
        raise DomainError(f"n_max must be >= 0, got {n_max}")
    step = beta * params.quantum
    n = np.arange(n_max + 1)
    weights = np.exp(-step * n) * -math.expm1(-step)
    return GibbsWeights(weights, math.exp(-step * (n_max + 1)))


def gibbs_mixture(beta: float, params: RiskParams, pgrid: PhaseGrid, n_max: int) -> PhaseDensity:
    """Truncated level sum ``sum_{n <= n_max} w_n W_n`` (no tail correction)."""
    gw = gibbs_weights(beta, params, n_max)
    acc = np.zeros((pgrid.q.n_points, pgrid.p.n_points))
    for n, w in _wigner_levels(params, pgrid, n_max):
        acc += gw.weights[n] * w
    return PhaseDensity(pgrid, acc, DensityKind.MIXTURE, beta=beta)


def thermal_density(beta: float, params: RiskParams, pgrid: PhaseGrid) -> PhaseDensity:
    x = ThermalParams(beta, params).x
    qq, pp = pgrid.mesh()
    values = (params.omega / (2.0 * math.pi)) * x * np.exp(-x * params.classical(qq, pp))
    return PhaseDensity(pgrid, values, DensityKind.THERMAL, beta=beta)


def mean_risk(rho: PhaseDensity, params: RiskParams) -> float:
    """Phase-space average of the classical risk form under ``rho``."""
    qq, pp = rho.phase_grid.mesh()
    h = params.classical(qq, pp)
    _check_boundary(rho.values * (1.0 + h), "mean_risk integrand", INTEGRAND_TOL)
    return float(np.sum(h * rho.values) * rho.phase_grid.cell_measure)


def entropy(rho: PhaseDensity) -> float:
    if rho.kind is DensityKind.WIGNER and rho.level != 0:
        raise DomainError("entropy is undefined for excited pure-state Wigner functions")
    v = rho.values
    if np.any(v < 0):
        raise DomainError("entropy needs a non-negative density")
    live = v > 1e-300
    return float(-np.sum(v[live] * np.log(v[live])) * rho.phase_grid.cell_measure)


def _next_pow2(n: float) -> int:
    return 1 << max(3, math.ceil(math.log2(max(n, 8))))


def auto_phase_grid(
    params: RiskParams,
    *,
    betas: tuple[float, ...] = (),
    levels: tuple[int, ...] = (),
    n_points: int | None = None,
    factor: float = 8.0,
) -> PhaseGrid:
    """Square-ish grid centred on ``(q0, p0)`` wide enough for every requested state.

    Each half-width is ``factor * max(delta_q, delta_p)`` over the hottest
    state requested.  Without ``n_points`` the resolution is chosen so the
    oscillations of the highest level stay resolved.
    """
    mw = params.m * params.omega
    hbar = params.effective_hbar
    var_q, var_p = [], []
    for n in levels or ((0,) if not betas else ()):
        var_q.append(hbar * (n + 0.5) / mw)
        var_p.append(hbar * (n + 0.5) * mw)
    for b in betas:
        x = ThermalParams(b, params).x
        var_q.append(1.0 / (x * params.m * params.omega**2))
        var_p.append(params.m / x)
    spread = math.sqrt(max(max(var_q), max(var_p)))
    half = factor * spread
    if n_points is None:
        # band limit of the densities scales like spread/hbar
        n_points = _next_pow2(max(128.0, 1.5 * half * (factor * spread / hbar) / math.pi))
    return PhaseGrid(
        make_grid(params.q0 - half, params.q0 + half, n_points),
        make_grid(params.p0 - half, params.p0 + half, n_points),
    )
