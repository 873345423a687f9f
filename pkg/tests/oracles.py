"""Independent reference computations used by the tests.

Nothing here calls into the package's numerical code paths.
"""

import math
from collections import deque
from fractions import Fraction

import numpy as np


def kron(a, b):
    return 1 if a == b else 0


def balance_matrix(h, f, xi, eta):
    """Coefficient matrix built equation by equation with explicit Kronecker deltas."""
    n = (h + 1) * (f + 1)
    q = np.zeros((n, n))

    def idx(i, j):
        return i * (f + 1) + j

    for i in range(h + 1):
        for j in range(f + 1):
            row = idx(i, j)
            q[row, row] += (2 - kron(i, h) - kron(j, f)) * eta + (i + j) * xi
            if 1 - kron(j, 0):
                q[row, idx(i, j - 1)] += -eta
            if 1 - kron(i, 0):
                q[row, idx(i - 1, j)] += -eta
            if 1 - kron(i, h):
                q[row, idx(i + 1, j)] += -(i + 1) * xi
            if 1 - kron(j, f):
                q[row, idx(i, j + 1)] += -(j + 1) * xi
    return q


def birth_death_log_weights(h, rho):
    """log(rho^i / i!) for i = 0..h."""
    return [i * math.log(rho) - math.lgamma(i + 1) for i in range(h + 1)]


def _lse(xs):
    m = max(xs)
    return m + math.log(math.fsum(math.exp(x - m) for x in xs))


def birth_death_stationary(h, rho):
    """Stationary pmf of the 1-D chain with up-rate eta and down-rate i*xi (rho = eta/xi)."""
    lw = birth_death_log_weights(h, rho)
    z = _lse(lw)
    return np.array([math.exp(w - z) for w in lw])


def birth_death_tail(h, rho, t):
    """P(i >= t) under the stationary pmf, computed in log space."""
    if t > h:
        return 0.0
    lw = birth_death_log_weights(h, rho)
    return math.exp(_lse(lw[t:]) - _lse(lw))


def reachable_all(adj, n):
    """Strong connectivity by forward and backward BFS from state 0."""
    def bfs(graph):
        seen = {0}
        dq = deque([0])
        while dq:
            u = dq.popleft()
            for v in graph.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    dq.append(v)
        return len(seen) == n

    rev = {}
    for u, vs in adj.items():
        for v in vs:
            rev.setdefault(v, []).append(u)
    return bfs(adj) and bfs(rev)


def exact_truncated_poisson(lam: Fraction, n: int):
    w = [lam**x / math.factorial(x) for x in range(n + 1)]
    z = sum(w)
    return [x / z for x in w]


def exact_binomial(n: int, q: Fraction):
    return [math.comb(n, x) * q**x * (1 - q) ** (n - x) for x in range(n + 1)]
