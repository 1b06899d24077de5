"""Player strategies: correlated coherent states, delta approximants,
the two-player intention density and demand/supply acceptance profiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, GridTooSmall
from .phase import (
    Grid,
    Representation,
    Wavefunction,
    apply_momentum,
    gaussian,
    moments,
    normalize,
    probability_density,
    squared_norm,
    tail_mass,
    to_momentum,
    to_position,
)

TAIL_TOL = 1e-10


@dataclass(frozen=True)
class CoherentParams:
    r: float = 0.0
    eta: float = 1.0
    q0: float = 0.0
    p0: float = 0.0

    def __post_init__(self) -> None:
        if not abs(self.r) < 1.0:
            raise DomainError(f"correlation r must satisfy |r| < 1, got {self.r}")
        if not self.eta > 0:
            raise DomainError(f"eta must be positive, got {self.eta}")

    @property
    def chirp(self) -> float:
        """``r / sqrt(1 - r**2)``."""
        return self.r / math.sqrt(1.0 - self.r**2)


@dataclass(frozen=True)
class Dispersions:
    delta_q: float
    delta_p: float
    covariance: float

    @property
    def corr(self) -> float:
        return self.covariance / (self.delta_q * self.delta_p)

    @property
    def uncertainty_product(self) -> float:
        """``delta_p * delta_q * sqrt(1 - corr**2)``; bounded below by hbar/2."""
        c = min(abs(self.corr), 1.0)
        return self.delta_p * self.delta_q * math.sqrt(1.0 - c * c)


def annihilation_coefficients(cp: CoherentParams) -> tuple[complex, complex]:
    """Coefficients ``(a, b)`` of ``C = a Q + b P``.

    ``a = (1 - i r/sqrt(1-r**2)) / (2 eta)`` and ``b = i eta``.  The minus sign
    in ``a`` makes ``r`` the measured position-momentum correlation of the
    eigenvectors under ``P = -i hbar d/dq``; with a plus sign they would carry
    correlation ``-r`` (i.e. the plus-sign operator at ``r`` equals this one at
    ``-r``).
    """
    return (1.0 - 1j * cp.chirp) / (2.0 * cp.eta), 1j * cp.eta


def annihilation_eigenvalue(cp: CoherentParams) -> complex:
    a, b = annihilation_coefficients(cp)
    return a * cp.q0 + b * cp.p0


def apply_annihilation(cp: CoherentParams, psi: Wavefunction) -> NDArray[np.complex128]:
    psi = to_position(psi)
    a, b = annihilation_coefficients(cp)
    return a * psi.axis * psi.amplitudes + b * apply_momentum(psi)


def eigen_residual(cp: CoherentParams, psi: Wavefunction) -> float:
    """``||(C - c) psi|| / ||psi||`` with ``c`` the eigenvalue fixed by (q0, p0)."""
    psi = to_position(psi)
    diff = apply_annihilation(cp, psi) - annihilation_eigenvalue(cp) * psi.amplitudes
    return math.sqrt(float(np.sum(np.abs(diff) ** 2)) / np.sum(psi.density))


def coherent_strategy(cp: CoherentParams, grid: Grid, hbar_e: float = 1.0) -> Wavefunction:
    """Normalized eigenvector of ``C`` with ``<Q> = q0`` and ``<P> = p0``.

    Closed form ``exp(-(1 - i rho)(q - q0)**2 / (4 eta**2 hbar) + i p0 (q - q0)/hbar)``
    with ``rho = r/sqrt(1-r**2)``.  Its position spread is ``eta*sqrt(hbar)`` for
    every ``r``; ``r`` only shears the state in phase space.
    """
    if not hbar_e > 0:
        raise DomainError(f"hbar_e must be positive, got {hbar_e}")
    x = grid.points - cp.q0
    alpha = (1.0 - 1j * cp.chirp) / (4.0 * cp.eta**2 * hbar_e)
    amps = np.exp(-alpha * x**2 + 1j * cp.p0 * x / hbar_e)
    psi = normalize(Wavefunction(grid, amps, Representation.POSITION, hbar_e))
    edge_q = tail_mass(psi)
    edge_p = tail_mass(to_momentum(psi))
    if edge_q > TAIL_TOL or edge_p > TAIL_TOL:
        raise GridTooSmall(
            f"coherent state leaks to the grid edge (position {edge_q:.2e}, momentum {edge_p:.2e})"
        )
    return psi


def nominal_dispersions(cp: CoherentParams, hbar_e: float = 1.0) -> Dispersions:
    """Alternative labelling ``delta_p = hbar/(2 eta)``, ``delta_q = eta/sqrt(1-r**2)``.

    This saturates the same bound as :func:`coherent_strategy` but uses a
    different meaning for ``eta``; it is *not* what the operator ``C``
    produces.  Kept for comparison only.
    """
    dq = cp.eta / math.sqrt(1.0 - cp.r**2)
    dp = hbar_e / (2.0 * cp.eta)
    return Dispersions(dq, dp, cp.r * dq * dp)


def dispersions(psi: Wavefunction) -> Dispersions:
    """Spreads of Q and P plus the symmetrized covariance ``<(QP+PQ)/2> - <Q><P>``."""
    pos = to_position(psi)
    mom = to_momentum(psi)
    mq = moments(pos)
    mp = moments(mom)
    nrm = squared_norm(pos)
    qp = np.sum(np.conj(pos.amplitudes) * pos.axis * apply_momentum(pos)) * pos.grid.spacing / nrm
    cov = float(qp.real) - mq.mean * mp.mean
    return Dispersions(mq.std, mp.std, cov)


def delta_strategy(
    a: float, epsilon: float, grid: Grid, hbar_e: float = 1.0
) -> Wavefunction:
    """Gaussian stand-in for the sharp strategy at log-price ``a``.

    The density has standard deviation ``epsilon``; the withdrawal price
    ``exp(a)`` is attached as ``meta["price"]``.
    """
    if not epsilon >= 4.0 * grid.spacing:
        raise DomainError(
            f"epsilon={epsilon} under-resolves the grid (need >= {4.0 * grid.spacing})"
        )
    margin = 0.05 * (grid.q_max - grid.q_min)
    if not grid.q_min + margin <= a <= grid.q_max - margin:
        raise DomainError(f"log-price {a} is not in the grid interior")
    psi = gaussian(grid, a, epsilon, hbar_e=hbar_e)
    if tail_mass(psi) > TAIL_TOL:
        raise DomainError(f"epsilon={epsilon} too broad for the grid around {a}")
    return Wavefunction(
        psi.grid,
        psi.amplitudes,
        psi.representation,
        hbar_e,
        meta={"log_price": float(a), "price": math.exp(a), "epsilon": float(epsilon)},
    )


@dataclass(frozen=True)
class IntentionDensity:
    """Joint density of Alice's price ``q`` and Bob's price ``p`` on a grid."""

    q_grid: Grid
    p_grid: Grid
    values: NDArray[np.float64]

    @property
    def cell_measure(self) -> float:
        return self.q_grid.spacing * self.p_grid.spacing

    @property
    def mass(self) -> float:
        return float(self.values.sum() * self.cell_measure)

    def q_marginal(self) -> NDArray[np.float64]:
        return self.values.sum(axis=1) * self.p_grid.spacing

    def p_marginal(self) -> NDArray[np.float64]:
        return self.values.sum(axis=0) * self.q_grid.spacing


def intention_density(alice: Wavefunction, bob: Wavefunction) -> IntentionDensity:
    if alice.representation is not Representation.POSITION:
        raise DomainError("alice's demand state must be in the position representation")
    if bob.representation is not Representation.MOMENTUM:
        raise DomainError("bob's supply state must be in the momentum representation")
    rho_a = probability_density(alice)
    rho_b = probability_density(bob)
    return IntentionDensity(alice.grid, bob.grid, np.outer(rho_a, rho_b))


class AcceptanceCurve:
    """Cumulative distribution of a state's density in its own coordinate.

    The sampled density is interpolated with a shape-preserving cubic, whose
    antiderivative is non-decreasing, and rescaled so the last grid point
    carries cumulative mass exactly 1.
    """

    def __init__(self, psi: Wavefunction) -> None:
        x = psi.axis
        rho = probability_density(psi)
        self._lo = float(x[0])
        self._hi = float(x[-1])
        # zero-valued runs trip a harmless 1/0 in the slope harmonic mean
        with np.errstate(divide="ignore", over="ignore"):
            self._anti = PchipInterpolator(x, rho).antiderivative()
        self._total = float(self._anti(self._hi))

    def cdf(self, x: ArrayLike) -> NDArray[np.float64] | float:
        xs = np.asarray(x, dtype=float)
        inside = np.clip(xs, self._lo, self._hi)
        out = np.clip(self._anti(inside) / self._total, 0.0, 1.0)
        out = np.where(xs >= self._hi, 1.0, np.where(xs <= self._lo, 0.0, out))
        return float(out) if out.ndim == 0 else out


def demand_profile(psi: Wavefunction, x: ArrayLike) -> NDArray[np.float64] | float:
    """Probability a buyer in ``psi`` accepts market log-price ``x``.

    The buyer refuses prices below the revealed value and accepts anything at
    or above it, so this is the position mass on ``{q <= x}``.
    """
    if psi.representation is not Representation.POSITION:
        raise DomainError("demand_profile expects a position-representation state")
    return AcceptanceCurve(psi).cdf(x)


def supply_profile(psi: Wavefunction, x: ArrayLike) -> NDArray[np.float64] | float:
    """Probability a seller in ``psi`` accepts ``x``: momentum mass on ``{p >= x}``."""
    if psi.representation is not Representation.MOMENTUM:
        raise DomainError("supply_profile expects a momentum-representation state")
    return 1.0 - AcceptanceCurve(psi).cdf(x)
