"""Quantum market games: risk-inclination operator, strategies, phase-space
densities and a Zeno-effect market simulator."""

from .errors import (
    ConvergenceError,
    DegenerateState,
    DomainError,
    GridTooSmall,
    GridTooSmallWarning,
    IoError,
    QMarketError,
)
from .phase import (
    Grid,
    Moments,
    Representation,
    Wavefunction,
    change_representation,
    make_grid,
    moments,
    normalize,
)
from .risk import (
    RiskParams,
    SpectralResult,
    build_risk_operator,
    effective_planck,
    minimal_risk_constant,
    spectrum,
)
from .strategies import (
    CoherentParams,
    Dispersions,
    IntentionDensity,
    coherent_strategy,
    delta_strategy,
    demand_profile,
    dispersions,
    intention_density,
    supply_profile,
)
from .wigner import (
    PhaseDensity,
    PhaseGrid,
    ThermalParams,
    entropy,
    gibbs_weights,
    laguerre,
    mean_risk,
    thermal_density,
    wigner_excited,
)
from .market import (
    Basis,
    Player,
    RWStrategy,
    SimConfig,
    SimReport,
    clear_tick,
    monopolist_experiment,
    simulate,
    zeno_experiment,
)

__version__ = "0.1.0"
