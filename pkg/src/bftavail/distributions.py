"""Probability mass functions for the number of Byzantine nodes.

Every pmf is evaluated in log space and exponentiated after subtracting the
largest log-term, so large ``N`` with large Poisson rates never overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import DomainError

KINDS = ("uniform", "poisson", "binomial", "degenerate")


@dataclass(frozen=True)
class FaultDistribution:
    """A pmf over ``f = 0..support``.

    ``params`` holds ``(a, b)`` for uniform, ``(lam,)`` for the
    right-truncated Poisson, ``(n, q)`` for binomial and ``(x0,)`` for
    degenerate.
    """

    kind: str
    params: tuple
    support: int
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if int(self.support) != self.support or self.support < 0:
            raise DomainError(f"support bound must be a non-negative integer, got {self.support}")
        _validate(self.kind, self.params, self.support)

    def probabilities(self) -> np.ndarray:
        """The full pmf vector of length ``support + 1``."""
        return _pmf_vector(self.kind, self.params, self.support)

    def describe(self) -> str:
        if self.label:
            return self.label
        args = ", ".join(f"{p:g}" for p in self.params)
        return f"{self.kind}({args})"


def uniform(a: int, b: int, support: int) -> FaultDistribution:
    return FaultDistribution("uniform", (int(a), int(b)), support)


def right_truncated_poisson(lam: float, support: int) -> FaultDistribution:
    return FaultDistribution("poisson", (float(lam),), support)


def binomial(n: int, q: float, support: int | None = None) -> FaultDistribution:
    return FaultDistribution("binomial", (int(n), float(q)), n if support is None else support)


def degenerate(x0: int, support: int) -> FaultDistribution:
    return FaultDistribution("degenerate", (int(x0),), support)


def _validate(kind, params, support):
    if kind == "uniform":
        a, b = params
        if b < a or a < 0 or b > support:
            raise DomainError(f"uniform needs 0 <= a <= b <= {support}, got a={a}, b={b}")
    elif kind == "poisson":
        (lam,) = params
        if not (lam > 0 and math.isfinite(lam)):
            raise DomainError(f"Poisson rate must be positive, got {lam}")
    elif kind == "binomial":
        n, q = params
        if not 0.0 <= q <= 1.0:
            raise DomainError(f"binomial q must lie in [0, 1], got {q}")
        if n < 0 or n > support:
            raise DomainError(f"binomial n must lie in [0, {support}], got {n}")
    elif kind == "degenerate":
        (x0,) = params
        if not 0 <= x0 <= support:
            raise DomainError(f"degenerate location must lie in [0, {support}], got {x0}")
    else:
        raise DomainError(f"unknown distribution kind {kind!r}")


def _normalize_log(logw: np.ndarray) -> np.ndarray:
    return np.exp(logw - logsumexp(logw))


def _pmf_vector(kind, params, support):
    x = np.arange(support + 1)
    if kind == "uniform":
        a, b = params
        return np.where((x >= a) & (x <= b), 1.0 / (b - a + 1), 0.0)
    if kind == "poisson":
        (lam,) = params
        return _normalize_log(x * math.log(lam) - gammaln(x + 1))
    if kind == "binomial":
        n, q = params
        p = np.zeros(support + 1)
        k = np.arange(n + 1)
        if q == 0.0:
            p[0] = 1.0
        elif q == 1.0:
            p[n] = 1.0
        else:
            logc = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
            p[: n + 1] = np.exp(logc + k * math.log(q) + (n - k) * math.log1p(-q))
        return p
    (x0,) = params
    return (x == x0).astype(float)


def pmf(dist: FaultDistribution, f: int) -> float:
    if int(f) != f or not 0 <= f <= dist.support:
        raise DomainError(f"f must be an integer in [0, {dist.support}], got {f}")
    return float(dist.probabilities()[int(f)])


def mean(dist: FaultDistribution) -> float:
    x = np.arange(dist.support + 1)
    return float(np.dot(x, dist.probabilities()))


def variance(dist: FaultDistribution) -> float:
    x = np.arange(dist.support + 1)
    p = dist.probabilities()
    mu = np.dot(x, p)
    return float(np.dot((x - mu) ** 2, p))


def _fig3_uniform(n):
    return uniform(0, n, n)


def _fig3_poisson(n):
    return right_truncated_poisson(n / 6, n)


def _fig3_binomial(n):
    return binomial(n, 1 / 6)


def _fig3_degenerate(n, rounding="floor"):
    return degenerate(locate(n / 6, rounding), n)


def _fig4_poisson(n):
    return right_truncated_poisson(n / 2, n)


def _fig4_binomial(n):
    return binomial(n, 1 / 2)


def _fig4_degenerate(n, rounding="floor"):
    return degenerate(locate(n / 2, rounding), n)


PRESETS = {
    "fig3_uniform": _fig3_uniform,
    "fig3_poisson": _fig3_poisson,
    "fig3_binomial": _fig3_binomial,
    "fig3_degenerate": _fig3_degenerate,
    "fig4_uniform": _fig3_uniform,
    "fig4_poisson": _fig4_poisson,
    "fig4_binomial": _fig4_binomial,
    "fig4_degenerate": _fig4_degenerate,
}


def locate(x: float, rounding: str = "floor") -> int:
    """Integer location for a fractional parameter such as ``N/6``."""
    if rounding == "floor":
        return math.floor(x)
    if rounding == "round":
        # half-up, not banker's rounding
        return math.floor(x + 0.5)
    raise ValueError(f"rounding must be 'floor' or 'round', got {rounding!r}")


def paper_preset(name: str, n: int, rounding: str = "floor") -> FaultDistribution:
    """Figure-reproduction distribution ``name`` for a cluster of ``n`` nodes.

    ``rounding`` only affects the degenerate presets.
    """
    if n < 4:
        raise DomainError(f"presets need n >= 4, got {n}")
    try:
        factory = PRESETS[name]
    except KeyError:
        raise DomainError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    dist = factory(n, rounding) if name.endswith("degenerate") else factory(n)
    return FaultDistribution(dist.kind, dist.params, dist.support, label=name)
