"""Quorum-gated availability and its mean over a fault-count distribution."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .distributions import FaultDistribution
from .errors import DomainError, SolverError
from .model import MIN_SERVERS, Scenario, SystemConfig, build_generator, build_scenario
from .solver import StationaryDistribution, solve

DistFactory = Callable[[int], FaultDistribution]


def _check_n(n: int) -> None:
    if int(n) != n or n < MIN_SERVERS:
        raise DomainError(f"N must be an integer >= {MIN_SERVERS}, got {n}")


def quorum_threshold(n: int) -> int:
    """Smallest honest-up count strictly above ``2N/3``."""
    _check_n(n)
    return (2 * n) // 3 + 1


def max_tolerated_faults(n: int) -> int:
    """Largest ``f`` with ``f < N/3``."""
    _check_n(n)
    return -(-n // 3) - 1


@dataclass(frozen=True)
class AvailabilityResult:
    scenario: Scenario
    availability: float


@dataclass(frozen=True)
class MeanAvailabilityResult:
    config: SystemConfig
    distribution: str
    mean_availability: float
    per_f_breakdown: tuple[tuple[int, float, float], ...]


def availability(dist: StationaryDistribution, threshold: int | None = None) -> AvailabilityResult:
    """Total probability of states with at least ``threshold`` honest nodes up.

    ``threshold`` defaults to the BFT quorum of the scenario's cluster size.
    """
    sc = dist.scenario
    t = quorum_threshold(sc.config.n_servers) if threshold is None else threshold
    if t > sc.h:
        return AvailabilityResult(sc, 0.0)
    a = float(dist.as_lattice()[max(t, 0):].sum())
    return AvailabilityResult(sc, min(max(a, 0.0), 1.0))


def scenario_availability(config: SystemConfig, f: int, solver: str | None = None) -> AvailabilityResult:
    """A_{h,f} for ``h = N - f``; returns 0 without solving below quorum capacity."""
    sc = build_scenario(config, f)
    if quorum_threshold(config.n_servers) > sc.h:
        return AvailabilityResult(sc, 0.0)
    try:
        stationary = solve(build_generator(sc), solver)
    except SolverError as exc:
        raise SolverError(f"N={config.n_servers}, f={f}: {exc}") from exc
    return availability(stationary)


def _cell(args: tuple[int, float, float, int, str | None]) -> float:
    n, xi, eta, f, solver = args
    return scenario_availability(SystemConfig(n, xi, eta), f, solver).availability


def _compute_cells(cells: Iterable[tuple[int, float, float, int]], solver: str | None, jobs: int) -> dict:
    todo = sorted(set(cells))
    args = [(*c, solver) for c in todo]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(_cell, args, chunksize=max(1, len(args) // (4 * jobs))))
    else:
        values = [_cell(a) for a in args]
    return dict(zip(todo, values))


def _check_support(config: SystemConfig, fault_dist: FaultDistribution) -> np.ndarray:
    n = config.n_servers
    if fault_dist.support != n:
        raise DomainError(f"distribution support [0, {fault_dist.support}] does not match N={n}")
    p = fault_dist.probabilities()
    if abs(p.sum() - 1.0) > 1e-12:
        raise DomainError(f"fault distribution is not normalised (sum {p.sum():.15g})")
    return p


def mean_availability(
    config: SystemConfig,
    fault_dist: FaultDistribution,
    solver: str | None = None,
    jobs: int = 1,
) -> MeanAvailabilityResult:
    """Mean availability over ``f ~ fault_dist``.

    Every ``f < N/3`` is solved; mass at ``f >= N/3`` contributes zero
    availability and is *not* renormalised away.
    """
    p = _check_support(config, fault_dist)
    n, xi, eta = config.n_servers, config.breakdown_rate, config.repair_rate
    fmax = max_tolerated_faults(n)
    cells = _compute_cells(((n, xi, eta, f) for f in range(fmax + 1)), solver, jobs)
    breakdown = []
    for f in range(n + 1):
        a = cells[(n, xi, eta, f)] if f <= fmax else 0.0
        breakdown.append((f, float(p[f]), a))
    total = math.fsum(pf * a for _, pf, a in breakdown)
    return MeanAvailabilityResult(config, fault_dist.describe(), min(total, 1.0), tuple(breakdown))


@dataclass(frozen=True)
class SweepTable:
    """Rows keyed by N, one column per distribution or ratio."""

    columns: tuple[str, ...]
    rows: tuple[tuple[int, tuple[float, ...]], ...]

    def column(self, name: str) -> np.ndarray:
        k = self.columns.index(name)
        return np.array([vals[k] for _, vals in self.rows])

    @property
    def n_values(self) -> np.ndarray:
        return np.array([n for n, _ in self.rows])


def _sweep(
    grid: list[tuple[int, float, str, FaultDistribution]],
    n_values: Sequence[int],
    columns: Sequence[str],
    solver: str | None,
    jobs: int,
) -> SweepTable:
    needed = []
    pmfs = {}
    for n, ratio, col, dist in grid:
        p = _check_support(SystemConfig.from_ratio(n, ratio), dist)
        pmfs[(n, col)] = (ratio, p)
        fmax = max_tolerated_faults(n)
        needed.extend((n, float(ratio), 1.0, f) for f in range(fmax + 1) if p[f] > 0)
    cells = _compute_cells(needed, solver, jobs)
    rows = []
    for n in n_values:
        vals = []
        for col in columns:
            ratio, p = pmfs[(n, col)]
            fmax = max_tolerated_faults(n)
            terms = [p[f] * cells[(n, float(ratio), 1.0, f)] for f in range(fmax + 1) if p[f] > 0]
            vals.append(min(math.fsum(terms), 1.0))
        rows.append((int(n), tuple(vals)))
    return SweepTable(tuple(columns), tuple(rows))


def sweep_n(
    n_range: Iterable[int],
    ratio: float,
    fault_dists: dict[str, DistFactory],
    solver: str | None = None,
    jobs: int = 1,
) -> SweepTable:
    """Mean availability for every N in ``n_range`` and every named factory.

    Factories are called per N so location parameters track the cluster size.
    Cells shared between distributions are solved once.
    """
    n_values = sorted(set(int(n) for n in n_range))
    for n in n_values:
        _check_n(n)
    if not ratio > 0:
        raise DomainError(f"ratio must be positive, got {ratio}")
    grid = [(n, ratio, name, make(n)) for n in n_values for name, make in fault_dists.items()]
    return _sweep(grid, n_values, list(fault_dists), solver, jobs)


def sweep_ratio(
    n_list: Iterable[int],
    ratios: Sequence[float],
    fault_dist: DistFactory,
    solver: str | None = None,
    jobs: int = 1,
) -> SweepTable:
    """Mean availability per (N, ratio) with the repair rate held at 1."""
    n_values = sorted(set(int(n) for n in n_list))
    for n in n_values:
        _check_n(n)
    if any(not r > 0 for r in ratios):
        raise DomainError("ratios must be positive")
    if len(set(ratios)) != len(ratios):
        raise DomainError(f"duplicate ratios in {list(ratios)}")
    columns = [f"{r:g}" for r in ratios]
    grid = [(n, r, col, fault_dist(n)) for n in n_values for r, col in zip(ratios, columns)]
    return _sweep(grid, n_values, columns, solver, jobs)
