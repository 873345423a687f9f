"""Stationary distribution of a generator matrix.

Two independent routes are provided: the null space via SVD, and a direct
solve after replacing the last balance equation by the normalisation row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SolverError
from .model import GeneratorMatrix, Scenario, flat_index

NULL_TOL = 1e-10
RESIDUAL_TOL = 1e-9
SUM_TOL = 1e-10
NEGATIVE_TOL = 1e-12
MAX_CONDITION = 1e14
# above this many states the replaced-equation route is the default
SVD_STATE_LIMIT = 2500

SOLVERS = ("svd", "replaced")


@dataclass(frozen=True, eq=False)
class StationaryDistribution:
    scenario: Scenario
    probabilities: np.ndarray

    def __getitem__(self, ij: tuple[int, int]) -> float:
        i, j = ij
        return float(self.probabilities[flat_index(self.scenario, i, j)])

    def as_lattice(self) -> np.ndarray:
        """Probabilities reshaped to ``(h + 1, f + 1)``."""
        return self.probabilities.reshape(self.scenario.shape)


def _finalize(q: GeneratorMatrix, p: np.ndarray) -> StationaryDistribution:
    if p.size == 0 or not np.all(np.isfinite(p)):
        raise SolverError("non-finite stationary vector")
    if p[np.argmax(np.abs(p))] < 0:
        p = -p
    p = p / p.sum()
    if p.min() < -NEGATIVE_TOL:
        raise SolverError(f"stationary vector has significant negative entries (min {p.min():.3e})")
    p = np.clip(p, 0.0, None)
    p = p / p.sum()
    if abs(p.sum() - 1.0) > SUM_TOL:
        raise SolverError("normalisation failed")
    if q.values.size:
        residual = np.max(np.abs(q.sparse() @ p))
        if residual > RESIDUAL_TOL * q.row_scale:
            raise SolverError(f"residual {residual:.3e} too large")
    p.setflags(write=False)
    return StationaryDistribution(q.scenario, p)


def solve_svd(q: GeneratorMatrix) -> StationaryDistribution:
    """Right singular vector of the smallest singular value of ``Q``."""
    a = q.dense
    if a.shape[0] == 1:
        return _finalize(q, np.ones(1))
    # rates are validated finite at construction
    _, s, vh = scipy.linalg.svd(np.array(a), lapack_driver="gesdd", check_finite=False, overwrite_a=True)
    if s[-1] > NULL_TOL * s[0]:
        raise SolverError(f"generator is not singular (sigma_min/sigma_max = {s[-1] / s[0]:.3e})")
    if s[-2] <= NULL_TOL * s[0]:
        raise SolverError("null space has dimension > 1; chain is not irreducible")
    return _finalize(q, vh[-1].copy())


def _replaced_system(q: GeneratorMatrix) -> tuple[sp.csc_matrix, np.ndarray]:
    n = q.dimension
    keep = q.rows != n - 1
    rows = np.concatenate([q.rows[keep], np.full(n, n - 1)])
    cols = np.concatenate([q.cols[keep], np.arange(n)])
    vals = np.concatenate([q.values[keep], np.ones(n)])
    a = sp.csc_matrix((vals, (rows, cols)), shape=(n, n))
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    return a, rhs


def solve_replaced_equation(q: GeneratorMatrix) -> StationaryDistribution:
    """Solve ``Q P = 0`` with the last equation swapped for ``sum(P) = 1``.

    Uses a sparse LU factorisation; the 1-norm condition number is estimated
    from the factors and anything above ``MAX_CONDITION`` is rejected.
    """
    a, rhs = _replaced_system(q)
    n = a.shape[0]
    try:
        lu = spla.splu(a)
    except RuntimeError as exc:  # exactly singular
        raise SolverError(f"replaced system is singular: {exc}") from exc
    inv = spla.LinearOperator((n, n), matvec=lu.solve, rmatvec=lambda x: lu.solve(x, trans="T"))
    cond = spla.norm(a, 1) * (spla.onenormest(inv) if n > 1 else abs(1.0 / a[0, 0]))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SolverError(f"replaced system is ill-conditioned (cond ~ {cond:.3e})")
    return _finalize(q, lu.solve(rhs))


def solve(q: GeneratorMatrix, method: str | None = None) -> StationaryDistribution:
    """Dispatch by ``method``; ``None`` picks SVD for small chains."""
    if method is None:
        method = "svd" if q.dimension <= SVD_STATE_LIMIT else "replaced"
    if method == "svd":
        return solve_svd(q)
    if method == "replaced":
        return solve_replaced_equation(q)
    raise ValueError(f"unknown solver {method!r}; expected one of {SOLVERS}")
