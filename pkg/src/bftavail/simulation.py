"""Discrete-event simulation of the breakdown/repair chain.

Used as an end-to-end check on the analytic pipeline: the long-run fraction
of time spent with a quorum of honest nodes up should match ``A_{h,f}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .availability import quorum_threshold
from .errors import DomainError
from .model import Scenario, flat_index, state_count

# per-replication streams: Philox keyed by (seed, replication)
_CHUNK = 4096


@dataclass(frozen=True)
class SimConfig:
    scenario: Scenario
    horizon: float
    warmup: float | None = None
    seed: int = 0
    replications: int = 10
    threshold: int | None = None  # honest-up count needed; defaults to the BFT quorum

    def __post_init__(self):
        if not self.horizon > 0:
            raise DomainError(f"horizon must be positive, got {self.horizon}")
        if self.warmup is None:
            object.__setattr__(self, "warmup", 0.01 * self.horizon)
        if not 0 <= self.warmup < self.horizon:
            raise DomainError(f"warmup must lie in [0, horizon), got {self.warmup}")
        if int(self.replications) != self.replications or self.replications < 1:
            raise DomainError(f"replications must be a positive integer, got {self.replications}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class SimEstimate:
    mean_availability: float
    standard_error: float
    replication_values: tuple[float, ...] = field(default=())


def transition_table(scenario: Scenario, breakdown=None, repair=None) -> dict:
    """Map ``(i, j) -> [((i', j'), rate), ...]`` for every lattice state.

    Rates default to the scenario's floats; pass exact numbers such as
    :class:`fractions.Fraction` for symbolic comparison.
    """
    xi = scenario.config.breakdown_rate if breakdown is None else breakdown
    eta = scenario.config.repair_rate if repair is None else repair
    h, f = scenario.h, scenario.f
    table = {}
    for i in range(h + 1):
        for j in range(f + 1):
            moves = []
            if i > 0:
                moves.append(((i - 1, j), i * xi))
            if j > 0:
                moves.append(((i, j - 1), j * xi))
            if i < h:
                moves.append(((i + 1, j), eta))
            if j < f:
                moves.append(((i, j + 1), eta))
            table[(i, j)] = moves
    return table


def _compile(scenario: Scenario):
    """Flattened total rates, cumulative jump probabilities and targets."""
    n = state_count(scenario)
    table = transition_table(scenario)
    totals = np.zeros(n)
    cum = np.ones((n, 4))
    targets = np.zeros((n, 4), dtype=np.int64)
    for (i, j), moves in table.items():
        k = flat_index(scenario, i, j)
        rates = np.array([r for _, r in moves])
        total = rates.sum()
        if not total > 0:
            raise DomainError(f"state ({i}, {j}) has zero total out-rate")
        totals[k] = total
        cum[k, : len(moves)] = np.cumsum(rates) / total
        for m, (dst, _) in enumerate(moves):
            targets[k, m] = flat_index(scenario, *dst)
        targets[k, len(moves):] = targets[k, len(moves) - 1]
    return totals, cum, targets


def _replicate(cfg: SimConfig, rep: int, compiled, up: np.ndarray) -> float:
    totals, cum, targets = compiled
    rng = np.random.Generator(np.random.Philox(key=[cfg.seed, rep]))
    sc = cfg.scenario
    state = flat_index(sc, sc.h, sc.f)
    t = 0.0
    avail = 0.0
    warm, end = cfg.warmup, cfg.horizon
    totals_l = totals.tolist()
    cum_l = cum.tolist()
    targets_l = targets.tolist()
    up_l = up.tolist()
    while True:
        holds = rng.standard_exponential(_CHUNK).tolist()
        picks = rng.random(_CHUNK).tolist()
        for e, u in zip(holds, picks):
            t_next = t + e / totals_l[state]
            if up_l[state]:
                lo = t if t > warm else warm
                hi = t_next if t_next < end else end
                if hi > lo:
                    avail += hi - lo
            if t_next >= end:
                return avail / (end - warm)
            t = t_next
            row = cum_l[state]
            m = 0
            while u >= row[m] and m < 3:
                m += 1
            state = targets_l[state][m]


def simulate(cfg: SimConfig) -> SimEstimate:
    """Time-average availability estimated from independent replications.

    Each replication starts with every node up and is deterministic in
    ``(seed, replication index)``.
    """
    sc = cfg.scenario
    t = quorum_threshold(sc.config.n_servers) if cfg.threshold is None else cfg.threshold
    compiled = _compile(sc)
    i_of_state = np.arange(state_count(sc)) // (sc.f + 1)
    up = i_of_state >= t
    values = [_replicate(cfg, r, compiled, up) for r in range(cfg.replications)]
    m = math.fsum(values) / len(values)
    se = float(np.std(values, ddof=1) / math.sqrt(len(values))) if len(values) > 1 else math.nan
    return SimEstimate(m, se, tuple(values))


def exact_rates(scenario: Scenario, breakdown: Fraction, repair: Fraction) -> dict:
    """Off-diagonal rates as exact fractions, keyed by flat ``(src, dst)``."""
    out = {}
    for src, moves in transition_table(scenario, breakdown, repair).items():
        for dst, rate in moves:
            out[(flat_index(scenario, *src), flat_index(scenario, *dst))] = rate
    return out
