"""J1 distance against a brute-force oracle.

The oracle enumerates every monotone interleaving of the two jump sequences
(lattice walks with horizontal, vertical and diagonal steps), takes the
largest value gap along the walk, and solves a linear program for the
smallest time displacement that realises the interleaving.  The distance is
the minimum over walks of the larger of the two.
"""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from extremal_limit.errors import DomainError
from extremal_limit.simulate import PiecewiseConstantPath
from extremal_limit.skorohod import j1_distance, sup_distance

TOL = 1e-9


def step(times, values, initial=0.0, horizon=1.0):
    return PiecewiseConstantPath(horizon, initial, np.asarray(times, float), np.asarray(values, float))


def walks(m, n):
    if m == 0 and n == 0:
        yield [(0, 0)]
        return
    for di, dj in ((1, 0), (0, 1), (1, 1)):
        if di <= m and dj <= n:
            for w in walks(m - di, n - dj):
                yield w + [(m, n)]


def time_cost(walk, a, b, horizon):
    m = a.size
    if m == 0:
        return 0.0
    # variables a'_1..a'_m, eps; minimise eps
    c = np.zeros(m + 1)
    c[-1] = 1.0
    rows, rhs = [], []
    eq_rows, eq_rhs = [], []

    def row(entries):
        r = np.zeros(m + 1)
        for k, v in entries:
            r[k] += v
        return r

    for i in range(m):
        rows += [row([(i, 1), (m, -1)]), row([(i, -1), (m, -1)])]
        rhs += [a[i], -a[i]]
        if i + 1 < m:
            rows.append(row([(i, 1), (i + 1, -1)]))
            rhs.append(0.0)
    bq = np.concatenate([[0.0], b, [horizon]])
    for (i0, j0), (i1, j1) in zip(walk, walk[1:]):
        if i1 == i0 + 1:
            k = i0
            if j1 == j0 + 1:
                eq_rows.append(row([(k, 1)]))
                eq_rhs.append(bq[j1])
            else:
                rows += [row([(k, -1)]), row([(k, 1)])]
                rhs += [-bq[j0], bq[j0 + 1]]
    res = linprog(c, A_ub=np.array(rows), b_ub=np.array(rhs),
                  A_eq=np.array(eq_rows) if eq_rows else None,
                  b_eq=np.array(eq_rhs) if eq_rows else None,
                  bounds=[(0.0, horizon)] * m + [(0.0, None)], method="highs")
    return res.fun if res.status == 0 else np.inf


def j1_oracle(p, q):
    a, b = p.jump_times, q.jump_times
    pv = np.concatenate([[p.initial_value], p.post_jump_values])
    qv = np.concatenate([[q.initial_value], q.post_jump_values])
    best = np.inf
    for w in walks(a.size, b.size):
        value = max(abs(pv[i] - qv[j]) for i, j in w)
        if value >= best:
            continue
        best = min(best, max(value, time_cost(w, a, b, p.horizon)))
    return best


def path_strategy(max_jumps):
    values = st.sampled_from([0.0, 0.3, 0.5, 1.0, 1.2, 2.0])
    return st.integers(0, max_jumps).flatmap(lambda k: st.tuples(
        st.lists(st.floats(0.01, 0.99), min_size=k, max_size=k, unique=True),
        st.lists(values, min_size=k, max_size=k),
        values,
    )).map(lambda tv: step(sorted(tv[0]), tv[1], tv[2]))


# ------------------------------------------------------------ examples

def test_identical_paths():
    p = step([0.2, 0.7], [1.0, -0.5], 0.3)
    assert j1_distance(p, p) <= TOL and sup_distance(p, p) == 0.0


def test_constant_paths():
    assert sup_distance(step([], [], 0.0), step([], [], 1.7)) == pytest.approx(1.7)
    assert j1_distance(step([], [], 0.0), step([], [], 1.7)) == pytest.approx(1.7)


def test_displaced_jump():
    for d in (0.05, 0.2):
        p, q = step([0.5], [1.0]), step([0.5 + d], [1.0])
        assert sup_distance(p, q) == 1.0
        assert j1_distance(p, q, 1e-6) <= d + 1e-6


def test_value_mismatch():
    p, q = step([0.5], [1.0]), step([0.5], [0.6])
    assert j1_distance(p, q, 1e-6) == pytest.approx(0.4, abs=1e-6)


def test_two_jumps_against_one():
    p = step([0.4, 0.45], [0.5, 1.0])
    q = step([0.42], [1.0])
    assert j1_distance(p, q) == pytest.approx(0.5, abs=TOL)
    assert j1_distance(q, p) == pytest.approx(0.5, abs=TOL)


def test_errors():
    p = step([0.5], [1.0])
    with pytest.raises(DomainError):
        j1_distance(p, step([0.5], [1.0], horizon=2.0))
    with pytest.raises(DomainError):
        j1_distance(p, p, tol=0.0)
    drift = PiecewiseConstantPath(1.0, 0.0, np.array([0.5]), np.array([1.0]), drift=0.1)
    with pytest.raises(DomainError):
        sup_distance(p, drift)


def test_sup_distance_catches_gap_between_jumps():
    p, q = step([0.5], [1.0]), step([0.5 + 1e-9], [1.0])
    assert sup_distance(p, q) == 1.0


# ----------------------------------------------------------- oracle

@settings(max_examples=120, deadline=None)
@given(path_strategy(3), path_strategy(3))
def test_matches_bruteforce_oracle(p, q):
    assert j1_distance(p, q, TOL) == pytest.approx(j1_oracle(p, q), abs=1e-7)


def test_oracle_enumerates_delannoy_walks():
    assert sum(1 for _ in walks(3, 3)) == 63


# ------------------------------------------------------- properties

@settings(max_examples=200, deadline=None)
@given(path_strategy(5), path_strategy(5))
def test_symmetry_and_dominance(p, q):
    d = j1_distance(p, q, TOL)
    assert abs(d - j1_distance(q, p, TOL)) <= 2 * TOL
    assert d <= sup_distance(p, q) + TOL
    assert j1_distance(p, p, TOL) <= TOL


@settings(max_examples=150, deadline=None)
@given(path_strategy(4), path_strategy(4), path_strategy(4))
def test_triangle(p, q, r):
    assert j1_distance(p, r, TOL) <= j1_distance(p, q, TOL) + j1_distance(q, r, TOL) + 3 * TOL
