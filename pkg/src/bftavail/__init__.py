"""Steady-state availability of Byzantine fault-tolerant clusters.

The cluster is modelled as a two-dimensional breakdown/repair CTMC over
(honest up, Byzantine up) counts; availability is the stationary mass of
states holding a > 2N/3 honest quorum, optionally averaged over a
distribution for the number of Byzantine nodes.
"""

from .availability import (
    AvailabilityResult,
    MeanAvailabilityResult,
    SweepTable,
    max_tolerated_faults,
    mean_availability,
    quorum_threshold,
    scenario_availability,
    sweep_n,
    sweep_ratio,
)
from .distributions import FaultDistribution, paper_preset
from .errors import DomainError, SolverError
from .model import GeneratorMatrix, Scenario, SystemConfig, build_generator, build_scenario, state_count
from .simulation import SimConfig, SimEstimate, simulate
from .solver import StationaryDistribution, solve, solve_replaced_equation, solve_svd

__all__ = [
    "AvailabilityResult",
    "DomainError",
    "FaultDistribution",
    "GeneratorMatrix",
    "MeanAvailabilityResult",
    "Scenario",
    "SimConfig",
    "SimEstimate",
    "SolverError",
    "StationaryDistribution",
    "SweepTable",
    "SystemConfig",
    "build_generator",
    "build_scenario",
    "max_tolerated_faults",
    "mean_availability",
    "paper_preset",
    "quorum_threshold",
    "scenario_availability",
    "simulate",
    "solve",
    "solve_replaced_equation",
    "solve_svd",
    "state_count",
    "sweep_n",
    "sweep_ratio",
]
