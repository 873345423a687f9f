import io
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bftavail.errors import DomainError
from bftavail.model import (
    Scenario,
    SystemConfig,
    build_generator,
    build_scenario,
    flat_index,
    lattice_index,
    state_count,
)
from oracles import balance_matrix, reachable_all


@pytest.fixture
def cfg4():
    return SystemConfig(4, 0.015, 1.0)


def test_build_scenario_examples(cfg4):
    sc = build_scenario(cfg4, 1)
    assert (sc.h, sc.f) == (3, 1)
    sc = build_scenario(SystemConfig(16, 0.015, 1.0), 2)
    assert (sc.h, sc.f) == (14, 2)
    with pytest.raises(DomainError):
        build_scenario(cfg4, 5)
    with pytest.raises(DomainError):
        build_scenario(cfg4, -1)


@pytest.mark.parametrize("n, xi, eta", [(3, 0.01, 1), (4, 0, 1), (4, 0.01, -1), (4.5, 0.01, 1)])
def test_config_rejects_bad_values(n, xi, eta):
    with pytest.raises(DomainError):
        SystemConfig(n, xi, eta)


def test_config_warns_on_large_ratio():
    with pytest.warns(RuntimeWarning):
        SystemConfig(4, 2.0, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        SystemConfig(4, 0.02, 1.0)


def test_scenario_requires_counts_sum_to_n(cfg4):
    with pytest.raises(DomainError):
        Scenario(cfg4, 1, 2)


@pytest.mark.parametrize("h, f, expected", [(3, 1, 8), (14, 2, 45), (0, 0, 1)])
def test_state_count(h, f, expected):
    assert state_count(Scenario.lattice(h, f, 0.015, 1.0)) == expected


def test_flat_index_is_bijective():
    sc = Scenario.lattice(5, 3, 0.015, 1.0)
    seen = set()
    for i in range(6):
        for j in range(4):
            k = flat_index(sc, i, j)
            assert k == i * 4 + j
            assert lattice_index(sc, k) == (i, j)
            seen.add(k)
    assert seen == set(range(24))
    with pytest.raises(IndexError):
        flat_index(sc, 6, 0)


def test_two_state_chain():
    xi, eta = 0.015, 1.0
    q = build_generator(Scenario.lattice(1, 0, xi, eta)).dense
    # row 0 is state (0,0): leaves by repair; row 1 is (1,0): leaves by breakdown
    np.testing.assert_array_equal(q, [[eta, -xi], [-eta, xi]])
    p = np.array([xi, eta])
    assert np.abs(q @ p).max() == 0.0


def test_breakdown_rate_scales_with_up_nodes():
    xi, eta = 0.015, 1.0
    sc = Scenario.lattice(2, 0, xi, eta)
    q = build_generator(sc).dense
    k = flat_index(sc, 2, 0)
    assert q[k, k] == pytest.approx(2 * xi, abs=0)


def test_all_up_corner_has_no_repair_outflow():
    xi, eta = 0.015, 1.0
    sc = Scenario.lattice(1, 1, xi, eta)
    q = build_generator(sc).dense
    k = flat_index(sc, 1, 1)
    assert q[k, k] == 2 * xi


lattice = st.tuples(st.integers(0, 12), st.integers(0, 8))
rates = st.tuples(
    st.floats(1e-3, 0.5, allow_nan=False),
    st.floats(1.0, 10.0, allow_nan=False),
)


@settings(max_examples=60, deadline=None)
@given(lattice, rates)
def test_stencil_matches_index_by_index_construction(hf, r):
    (h, f), (xi, eta) = hf, r
    q = build_generator(Scenario.lattice(h, f, xi, eta))
    np.testing.assert_array_equal(q.dense, balance_matrix(h, f, xi, eta))


@pytest.mark.parametrize("h, f", [(0, 0), (1, 0), (4, 0), (3, 1), (14, 2), (40, 20), (86, 42)])
def test_flow_conservation(h, f):
    q = build_generator(Scenario.lattice(h, f, 0.015, 1.0))
    g = q.rate_matrix()
    assert np.abs(g.sum(axis=1)).max() <= 1e-12
    assert np.abs(q.dense.sum(axis=0)).max() <= 1e-12
    assert np.all(np.diag(q.dense) >= 0)
    assert np.all(np.diag(g) <= 0)


def test_balance_rows_do_not_sum_to_zero():
    # documents the orientation: equations are rows, so only columns balance
    q = build_generator(Scenario.lattice(1, 0, 0.015, 1.0)).dense
    assert q.sum(axis=1) == pytest.approx([1 - 0.015, 0.015 - 1])


@settings(max_examples=40, deadline=None)
@given(lattice, rates)
def test_sparsity_and_connectivity(hf, r):
    (h, f), (xi, eta) = hf, r
    q = build_generator(Scenario.lattice(h, f, xi, eta))
    d = q.dense
    assert np.count_nonzero(d, axis=1).max() <= 5
    adj = {}
    for row, col in zip(*np.nonzero(d)):
        if row != col:
            # Q[row, col] couples col's probability into row's balance: flow col -> row
            adj.setdefault(int(col), []).append(int(row))
    assert reachable_all(adj, q.dimension)


@pytest.mark.parametrize("h, f", [(3, 1), (5, 2), (10, 4), (2, 7)])
def test_swap_symmetry(h, f):
    a = build_generator(Scenario.lattice(h, f, 0.02, 1.5)).dense
    b = build_generator(Scenario.lattice(f, h, 0.02, 1.5)).dense
    # (i, j) in the first lattice is (j, i) in the second
    perm = np.array([j * (h + 1) + i for i in range(h + 1) for j in range(f + 1)])
    np.testing.assert_array_equal(a, b[np.ix_(perm, perm)])


@pytest.mark.parametrize("h, f", [(1, 0), (4, 0), (3, 1), (14, 2)])
def test_generator_is_singular(h, f):
    s = np.linalg.svd(build_generator(Scenario.lattice(h, f, 0.015, 1.0)).dense, compute_uv=False)
    assert s[-1] <= 1e-10 * s[0]


def test_triplet_export_round_trip():
    q = build_generator(Scenario.lattice(3, 1, 0.015, 1.0))
    buf = io.StringIO()
    q.write_triplets(buf)
    lines = buf.getvalue().splitlines()
    parsed = [tuple(line.split()) for line in lines]
    keys = [(int(r), int(c)) for r, c, _ in parsed]
    assert keys == sorted(keys)
    back = np.zeros((q.dimension, q.dimension))
    for r, c, v in parsed:
        back[int(r), int(c)] = float(v)
    np.testing.assert_array_equal(back, q.dense)


def test_sparse_and_dense_agree():
    q = build_generator(Scenario.lattice(6, 3, 0.01, 1.0))
    np.testing.assert_array_equal(q.sparse().toarray(), q.dense)
