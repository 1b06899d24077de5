"""Trader-versus-Rest-of-the-World market simulator.

Each tick the Rest of the World (RW) quotes a log-price drawn from its price
law.  Every player is first re-measured: with probability ``f`` (the switch
probability) its basis flips to the opposite one, otherwise it is measured
in the demand basis again.  Players in the demand basis buy one unit with
probability ``demand_profile(x)``, players in the supply basis sell one unit
with probability ``supply_profile(x)``.  The tick clears iff at least one buy
and one sell happen, at the quoted price.

Repeated same-basis measurement (``f -> 0``) leaves nobody on the sell side
and the quotation process dies out.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import DomainError
from .phase import (
    Grid,
    Representation,
    Wavefunction,
    from_density,
    gaussian,
    make_grid,
    normalize,
)
from .strategies import AcceptanceCurve


class Basis(enum.IntEnum):
    DEMAND = 0
    SUPPLY = 1


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True, eq=False)
class Player:
    id: str
    demand_state: Wavefunction
    supply_state: Wavefunction
    basis: Basis = Basis.DEMAND
    frozen_ticks: int = 0

    def __post_init__(self) -> None:
        if self.demand_state.representation is not Representation.POSITION:
            raise DomainError(f"player {self.id}: demand state must be in the position representation")
        if self.supply_state.representation is not Representation.MOMENTUM:
            raise DomainError(f"player {self.id}: supply state must be in the momentum representation")
        object.__setattr__(self, "demand_state", normalize(self.demand_state))
        object.__setattr__(self, "supply_state", normalize(self.supply_state))
        object.__setattr__(self, "basis", Basis(self.basis))

    @classmethod
    def from_marginals(
        cls,
        id: str,
        q_grid: Grid,
        q_density: NDArray[np.float64],
        p_grid: Grid,
        p_density: NDArray[np.float64],
        basis: Basis = Basis.DEMAND,
    ) -> "Player":
        """Player driven by the marginals of a mixed strategy."""
        return cls(
            id,
            from_density(q_grid, q_density, Representation.POSITION),
            from_density(p_grid, p_density, Representation.MOMENTUM),
            basis,
        )

    @cached_property
    def _demand_curve(self) -> AcceptanceCurve:
        return AcceptanceCurve(self.demand_state)

    @cached_property
    def _supply_curve(self) -> AcceptanceCurve:
        return AcceptanceCurve(self.supply_state)

    def buy_probability(self, x):
        return self._demand_curve.cdf(x)

    def sell_probability(self, x):
        return 1.0 - self._supply_curve.cdf(x)

    def covers(self, lo: float, hi: float) -> bool:
        return (
            self.demand_state.grid.contains(lo)
            and self.demand_state.grid.contains(hi)
            and self.supply_state.grid.contains(lo)
            and self.supply_state.grid.contains(hi)
        )


@dataclass(frozen=True, eq=False)
class RWStrategy:
    """Price law of the Rest of the World, piecewise constant on grid cells.

    Sampling inverts the cell-wise linear CDF, so every draw is a
    deterministic function of one uniform variate.
    """

    grid: Grid
    density: NDArray[np.float64]

    def __post_init__(self) -> None:
        rho = np.asarray(self.density, dtype=float)
        if rho.shape != (self.grid.n_points,) or np.any(rho < 0) or not np.all(np.isfinite(rho)):
            raise DomainError("price density must be finite, non-negative and match the grid")
        total = rho.sum() * self.grid.spacing
        if not total > 0:
            raise DomainError("price density has zero mass")
        rho = rho / total
        rho.setflags(write=False)
        object.__setattr__(self, "density", rho)

    @classmethod
    def gaussian(cls, center: float = 0.0, std: float = 1.0, grid: Grid | None = None) -> "RWStrategy":
        grid = grid or make_grid(center - 10.0 * std, center + 10.0 * std, 4096)
        return cls(grid, np.exp(-0.5 * ((grid.points - center) / std) ** 2))

    @classmethod
    def concentrated(cls, pin_price: float, epsilon: float = 1e-4, n_points: int = 1024) -> "RWStrategy":
        """Monopolist quote: a Gaussian of width ``epsilon`` around ``pin_price``."""
        if not epsilon > 0:
            raise DomainError(f"epsilon must be positive, got {epsilon}")
        return cls.gaussian(pin_price, epsilon, make_grid(pin_price - 10 * epsilon, pin_price + 10 * epsilon, n_points))

    @cached_property
    def _edges(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        dx = self.grid.spacing
        xs = np.append(self.grid.points - 0.5 * dx, self.grid.points[-1] + 0.5 * dx)
        cdf = np.concatenate(([0.0], np.cumsum(self.density) * dx))
        cdf /= cdf[-1]
        return cdf, xs

    @property
    def support(self) -> tuple[float, float]:
        xs = self._edges[1]
        return float(xs[0]), float(xs[-1])

    def sample(self, rng: np.random.Generator, size: int) -> NDArray[np.float64]:
        cdf, xs = self._edges
        return np.interp(rng.random(size), cdf, xs)

    @property
    def mean(self) -> float:
        return float(np.sum(self.grid.points * self.density) * self.grid.spacing)

    @property
    def variance(self) -> float:
        mu = self.mean
        dx = self.grid.spacing
        return float(np.sum((self.grid.points - mu) ** 2 * self.density) * dx + dx * dx / 12.0)

    def expectation(self, f) -> float:
        """``integral f(x) rho(x) dx`` by the midpoint rule on the price cells."""
        return float(np.sum(f(self.grid.points) * self.density) * self.grid.spacing)


@dataclass(frozen=True)
class SimConfig:
    players: tuple[Player, ...]
    rw: RWStrategy
    ticks: int = 10_000
    switch_probability: float = 1.0
    crash_threshold: float = 0.05
    rng_seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "players", tuple(self.players))
        if int(self.ticks) != self.ticks or self.ticks < 1:
            raise DomainError(f"ticks must be a positive integer, got {self.ticks}")
        if not 0.0 <= self.switch_probability <= 1.0:
            raise DomainError(f"switch_probability must be in [0, 1], got {self.switch_probability}")
        if not 0.0 <= self.crash_threshold <= 1.0:
            raise DomainError(f"crash_threshold must be in [0, 1], got {self.crash_threshold}")


@dataclass(frozen=True, eq=False)
class SimReport:
    switch_probability: float
    rng_seed: int
    buys_per_tick: NDArray[np.int64]
    sells_per_tick: NDArray[np.int64]
    transactions_per_tick: NDArray[np.int64]
    price_series: NDArray[np.float64]
    crash_threshold: float
    frozen_ticks: NDArray[np.int64] = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def ticks(self) -> int:
        return len(self.price_series)

    @property
    def cleared(self) -> NDArray[np.bool_]:
        return self.transactions_per_tick > 0

    @property
    def transaction_rate(self) -> float:
        return float(np.mean(self.cleared))

    @property
    def price_variance(self) -> float:
        if self.ticks < 2:
            return 0.0
        return float(np.var(self.price_series, ddof=1))

    @property
    def crashed(self) -> bool:
        return self.transaction_rate < self.crash_threshold


@dataclass(frozen=True)
class TickResult:
    buys: int
    sells: int

    @property
    def transactions(self) -> int:
        return min(self.buys, self.sells)

    @property
    def transacted(self) -> bool:
        return self.transactions > 0


def _check_price_range(players: Sequence[Player], lo: float, hi: float) -> None:
    for pl in players:
        if not pl.covers(lo, hi):
            raise DomainError(f"price range [{lo}, {hi}] leaves the grid of player {pl.id}")


def clear_tick(players: Sequence[Player], rw_price: float, rng: np.random.Generator) -> TickResult:
    """One quotation round at ``rw_price`` with players in their current bases."""
    _check_price_range(players, rw_price, rw_price)
    u = rng.random(len(players))
    buys = sells = 0
    for pl, ui in zip(players, u):
        if pl.basis is Basis.DEMAND:
            buys += bool(ui < pl.buy_probability(rw_price))
        else:
            sells += bool(ui < pl.sell_probability(rw_price))
    return TickResult(buys, sells)


def basis_schedule(
    initial: NDArray[np.int64], uniforms: NDArray[np.float64], switch_probability: float
) -> NDArray[np.int64]:
    """Basis of every player at every tick, shape ``(ticks, players)``.

    At tick ``t`` a player flips if ``uniforms[t] < f`` and is reset to the
    demand basis otherwise.  After the last reset the basis simply alternates,
    so the whole path follows from the index of that reset.
    """
    ticks = uniforms.shape[0]
    t = np.arange(ticks)[:, None]
    reset = uniforms >= switch_probability
    last = np.maximum.accumulate(np.where(reset, t, -1), axis=0)
    return np.where(last >= 0, (t - last) % 2, (initial[None, :] + t + 1) % 2)


def _final_streaks(bases: NDArray[np.int64], initial_frozen: NDArray[np.int64]) -> NDArray[np.int64]:
    ticks, n = bases.shape
    if ticks == 0 or n == 0:
        return initial_frozen.copy()
    changed = bases != bases[-1][None, :]
    idx = np.where(changed, np.arange(ticks)[:, None], -1).max(axis=0)
    streak = ticks - 1 - idx
    return np.where(idx < 0, streak + initial_frozen, streak)


def simulate(config: SimConfig) -> SimReport:
    """Run ``config.ticks`` quotation rounds; deterministic given ``rng_seed``."""
    players = config.players
    n, ticks = len(players), int(config.ticks)
    rng = make_rng(config.rng_seed)
    prices = config.rw.sample(rng, ticks)
    basis_u = rng.random((ticks, n))
    accept_u = rng.random((ticks, n))
    if n:
        _check_price_range(players, float(prices.min()), float(prices.max()))

    initial = np.array([int(p.basis) for p in players], dtype=np.int64)
    bases = basis_schedule(initial, basis_u, config.switch_probability)
    p_buy = np.column_stack([p.buy_probability(prices) for p in players]) if n else np.zeros((ticks, 0))
    p_sell = np.column_stack([p.sell_probability(prices) for p in players]) if n else np.zeros((ticks, 0))
    buy = (bases == Basis.DEMAND) & (accept_u < p_buy)
    sell = (bases == Basis.SUPPLY) & (accept_u < p_sell)
    buys = buy.sum(axis=1).astype(np.int64)
    sells = sell.sum(axis=1).astype(np.int64)
    frozen = np.array([p.frozen_ticks for p in players], dtype=np.int64)
    return SimReport(
        switch_probability=float(config.switch_probability),
        rng_seed=int(config.rng_seed),
        buys_per_tick=buys,
        sells_per_tick=sells,
        transactions_per_tick=np.minimum(buys, sells),
        price_series=prices,
        crash_threshold=float(config.crash_threshold),
        frozen_ticks=_final_streaks(bases, frozen),
    )


def zeno_experiment(config: SimConfig, frequencies: Sequence[float]) -> list[SimReport]:
    """One run per switch probability, all on ``config.rng_seed``."""
    return [simulate(replace(config, switch_probability=float(f))) for f in frequencies]


def monopolist_experiment(config: SimConfig, pin_price: float, epsilon: float = 1e-4) -> SimReport:
    """Same run with the RW price law collapsed onto ``pin_price``."""
    return simulate(replace(config, rw=RWStrategy.concentrated(pin_price, epsilon)))


def expected_acceptance(player: Player, rw: RWStrategy, basis: Basis) -> float:
    """Per-tick acceptance probability of ``player`` in ``basis`` against ``rw``."""
    if basis is Basis.DEMAND:
        return rw.expectation(player.buy_probability)
    return rw.expectation(player.sell_probability)


def symmetric_population(
    n_pairs: int,
    grid: Grid | None = None,
    *,
    spread: float = 1.0,
    center: float = 0.0,
    hbar_e: float = 1.0,
) -> tuple[Player, ...]:
    """``n_pairs`` buyers and ``n_pairs`` sellers with identical Gaussian strategies.

    Demand states are Gaussians in log-price with standard deviation
    ``spread``; supply states are the same Gaussians built directly on the
    momentum axis.
    """
    if n_pairs < 0:
        raise DomainError(f"n_pairs must be >= 0, got {n_pairs}")
    grid = grid or make_grid(center - 12.0 * spread, center + 12.0 * spread, 1024)
    demand = gaussian(grid, center, spread, hbar_e=hbar_e)
    supply = gaussian(grid, center, spread, hbar_e=hbar_e, representation=Representation.MOMENTUM)
    players = []
    for i in range(n_pairs):
        players.append(Player(f"buyer-{i}", demand, supply, Basis.DEMAND))
        players.append(Player(f"seller-{i}", demand, supply, Basis.SUPPLY))
    return tuple(players)


def seed_sweep(config: SimConfig, seeds: Sequence[int]) -> list[SimReport]:
    return [simulate(replace(config, rng_seed=int(s))) for s in seeds]


def rate_statistics(reports: Sequence[SimReport]) -> tuple[float, float]:
    """Mean transaction rate across runs and its standard error."""
    rates = np.array([r.transaction_rate for r in reports])
    if len(rates) < 2:
        return float(rates.mean()) if len(rates) else 0.0, 0.0
    return float(rates.mean()), float(rates.std(ddof=1) / math.sqrt(len(rates)))
