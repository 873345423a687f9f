"""State lattice and generator matrix of the breakdown/repair CTMC.

A scenario with ``h`` honest and ``f`` Byzantine nodes has states ``(i, j)``
where ``i`` honest and ``j`` Byzantine nodes are up. States are flattened
row-major, ``i`` outer and ``j`` inner.

The generator is stored in balance-equation orientation: row ``k`` is the
balance equation of state ``k``, so the stationary vector satisfies
``Q @ P == 0``. Its *columns* sum to zero. :meth:`GeneratorMatrix.rate_matrix`
returns the conventional orientation (``-Q.T``) whose rows sum to zero.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import TextIO

import numpy as np
import scipy.sparse as sp

from .errors import DomainError

MIN_SERVERS = 4


@dataclass(frozen=True)
class SystemConfig:
    """Cluster size and per-node breakdown / facility repair rates."""

    n_servers: int
    breakdown_rate: float
    repair_rate: float

    def __post_init__(self):
        if int(self.n_servers) != self.n_servers or self.n_servers < MIN_SERVERS:
            raise DomainError(f"n_servers must be an integer >= {MIN_SERVERS}, got {self.n_servers}")
        self._check_rates()

    def _check_rates(self):
        if not (self.breakdown_rate > 0 and np.isfinite(self.breakdown_rate)):
            raise DomainError(f"breakdown_rate must be positive, got {self.breakdown_rate}")
        if not (self.repair_rate > 0 and np.isfinite(self.repair_rate)):
            raise DomainError(f"repair_rate must be positive, got {self.repair_rate}")
        if self.ratio >= 1:
            warnings.warn(
                f"breakdown/repair ratio {self.ratio:g} >= 1; availability will be poor",
                RuntimeWarning,
                stacklevel=3,
            )

    @classmethod
    def unchecked(cls, n_servers: int, breakdown_rate: float, repair_rate: float) -> SystemConfig:
        """Config that skips the BFT minimum cluster size (rates still checked).

        Only for studying the bare lattice chain, e.g. the two-state case.
        """
        if int(n_servers) != n_servers or n_servers < 0:
            raise DomainError(f"n_servers must be a non-negative integer, got {n_servers}")
        self = object.__new__(cls)
        object.__setattr__(self, "n_servers", int(n_servers))
        object.__setattr__(self, "breakdown_rate", breakdown_rate)
        object.__setattr__(self, "repair_rate", repair_rate)
        self._check_rates()
        return self

    @classmethod
    def from_ratio(cls, n_servers: int, ratio: float) -> SystemConfig:
        """Config with repair rate fixed at 1 and breakdown rate ``ratio``."""
        return cls(n_servers, float(ratio), 1.0)

    @property
    def ratio(self) -> float:
        return self.breakdown_rate / self.repair_rate


@dataclass(frozen=True)
class Scenario:
    config: SystemConfig
    byzantine_count: int
    honest_count: int

    def __post_init__(self):
        n = self.config.n_servers
        if not (0 <= self.byzantine_count <= n and 0 <= self.honest_count <= n):
            raise DomainError(
                f"counts out of range: h={self.honest_count}, f={self.byzantine_count}, N={n}"
            )
        if self.honest_count + self.byzantine_count != n:
            raise DomainError(
                f"h + f must equal N: {self.honest_count} + {self.byzantine_count} != {n}"
            )

    @classmethod
    def lattice(cls, h: int, f: int, breakdown_rate: float, repair_rate: float) -> Scenario:
        """Scenario for an arbitrary ``(h, f)`` lattice, bypassing the N >= 4 rule."""
        return cls(SystemConfig.unchecked(h + f, breakdown_rate, repair_rate), f, h)

    @property
    def h(self) -> int:
        return self.honest_count

    @property
    def f(self) -> int:
        return self.byzantine_count

    @property
    def shape(self) -> tuple[int, int]:
        return (self.h + 1, self.f + 1)


def build_scenario(config: SystemConfig, f: int) -> Scenario:
    """Resolve ``f`` Byzantine nodes into a scenario with ``h = N - f``."""
    if int(f) != f or f < 0:
        raise DomainError(f"f must be a non-negative integer, got {f}")
    f = int(f)
    if f > config.n_servers:
        raise DomainError(f"f={f} exceeds N={config.n_servers}")
    return Scenario(config, f, config.n_servers - f)


def state_count(scenario: Scenario) -> int:
    return (scenario.h + 1) * (scenario.f + 1)


def flat_index(scenario: Scenario, i: int, j: int) -> int:
    if not (0 <= i <= scenario.h and 0 <= j <= scenario.f):
        raise IndexError(f"state ({i}, {j}) outside lattice {scenario.shape}")
    return i * (scenario.f + 1) + j


def lattice_index(scenario: Scenario, k: int) -> tuple[int, int]:
    """Inverse of :func:`flat_index`."""
    if not 0 <= k < state_count(scenario):
        raise IndexError(f"flat index {k} outside [0, {state_count(scenario)})")
    return divmod(k, scenario.f + 1)


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    """Balance-equation coefficient matrix held as COO triplets.

    ``rows``/``cols``/``values`` are sorted row-major; the dense array is
    materialised on first access.
    """

    scenario: Scenario
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    @property
    def dimension(self) -> int:
        return state_count(self.scenario)

    @cached_property
    def dense(self) -> np.ndarray:
        q = np.zeros((self.dimension, self.dimension))
        q[self.rows, self.cols] = self.values
        q.setflags(write=False)
        return q

    def sparse(self) -> sp.csr_matrix:
        n = self.dimension
        return sp.csr_matrix((self.values, (self.rows, self.cols)), shape=(n, n))

    def rate_matrix(self) -> np.ndarray:
        """Conventional generator: entry ``[s, t]`` is the rate from s to t."""
        return -self.dense.T

    @property
    def row_scale(self) -> float:
        return float(np.max(np.abs(self.values), initial=0.0))

    def write_triplets(self, stream: TextIO) -> None:
        """Write ``row col value`` lines in row-major order."""
        for r, c, v in zip(self.rows, self.cols, self.values):
            stream.write(f"{r} {c} {float(v)!r}\n")


def build_generator(scenario: Scenario) -> GeneratorMatrix:
    """Assemble the balance-equation matrix with a vectorised stencil sweep."""
    h, f = scenario.h, scenario.f
    xi = scenario.config.breakdown_rate
    eta = scenario.config.repair_rate
    i, j = np.meshgrid(np.arange(h + 1), np.arange(f + 1), indexing="ij")
    i, j = i.ravel(), j.ravel()
    k = i * (f + 1) + j

    parts = []
    # out-flow: one repair per dimension that still has a node down
    diag = ((i < h).astype(float) + (j < f)) * eta + (i + j) * xi
    parts.append((k, k, diag))
    m = j > 0
    parts.append((k[m], k[m] - 1, np.full(m.sum(), -eta)))
    m = i > 0
    parts.append((k[m], k[m] - (f + 1), np.full(m.sum(), -eta)))
    m = i < h
    parts.append((k[m], k[m] + (f + 1), -(i[m] + 1) * xi))
    m = j < f
    parts.append((k[m], k[m] + 1, -(j[m] + 1) * xi))

    rows = np.concatenate([p[0] for p in parts])
    cols = np.concatenate([p[1] for p in parts])
    vals = np.concatenate([np.asarray(p[2], dtype=float) for p in parts])
    keep = vals != 0.0
    rows, cols, vals = rows[keep], cols[keep], vals[keep]
    order = np.lexsort((cols, rows))
    return GeneratorMatrix(scenario, rows[order], cols[order], vals[order])
