"""Uniform and Skorohod J1 distances between step paths on [0, S].

For step paths ``p`` (jumps ``a_1 < ... < a_m``, values ``p_0 .. p_m``) and
``q`` (jumps ``b_j``, values ``q_j``) a time change only moves the jumps of
``p``.  Composing, the pair of current states walks monotonically through
the lattice ``(i, j)`` from ``(0, 0)`` to ``(m, n)``: a ``p`` jump on its own,
a ``q`` jump on its own, or both at once when a moved ``a_i`` lands exactly
on ``b_j``.  ``J1 <= eps`` holds iff some walk visits only states with
``|p_i - q_j| <= eps`` and the moved jumps can be placed in order, each
within ``eps`` of where it started.

Feasibility only changes at ``0``, ``|p_i - q_j|`` or ``|a_i - b_j|``, so
bisecting over that sorted candidate set gives the distance exactly; ``tol``
only absorbs floating-point rounding in the feasibility check.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .simulate import PiecewiseConstantPath


def _step_path(p: PiecewiseConstantPath):
    if p.drift != 0.0:
        raise DomainError("path distances need driftless step paths")
    return p.jump_times, np.concatenate([[p.initial_value], p.post_jump_values])


def _check_pair(p, q):
    if not np.isclose(p.horizon, q.horizon, rtol=0, atol=1e-12):
        raise DomainError("paths must share the same horizon")


def sup_distance(p: PiecewiseConstantPath, q: PiecewiseConstantPath) -> float:
    """Uniform distance, attained on the union of jump times and 0."""
    _check_pair(p, q)
    _step_path(p)
    _step_path(q)
    pts = np.union1d(np.union1d(p.jump_times, q.jump_times), [0.0])
    return float(np.max(np.abs(p(pts) - q(pts))))


def _feasible(a, pv, b, qv, horizon, eps) -> bool:
    m, n = a.size, b.size
    if abs(pv[0] - qv[0]) > eps:
        return False
    # bounds for a'_i: q jumps padded by the interval ends
    bq = np.concatenate([[0.0], b, [horizon]])
    inf = np.inf
    # earliest[i][j]: smallest position of the last moved p jump over walks reaching (i, j)
    earliest = np.full((m + 1, n + 1), inf)
    earliest[0, 0] = 0.0
    ok = np.abs(pv[:, None] - qv[None, :]) <= eps
    for i in range(m + 1):
        for j in range(n + 1):
            e = earliest[i, j]
            if e == inf:
                continue
            # q jump b_{j+1} after the moved a_i
            if j < n and ok[i, j + 1] and e <= bq[j + 1]:
                if e < earliest[i, j + 1]:
                    earliest[i, j + 1] = e
            if i < m:
                ai = a[i]
                # a jump at the horizon has to stay there
                low = horizon if ai >= horizon else max(ai - eps, e, bq[j])
                # p jump alone, strictly inside the current q interval
                if ok[i + 1, j]:
                    high = min(ai + eps, bq[j + 1], horizon)
                    if low <= high and low < earliest[i + 1, j]:
                        earliest[i + 1, j] = low
                # p jump moved onto b_{j+1}
                if j < n and ok[i + 1, j + 1]:
                    target = b[j]
                    if abs(ai - target) <= eps and target >= e and \
                            (ai >= horizon) == (target >= horizon):
                        if target < earliest[i + 1, j + 1]:
                            earliest[i + 1, j + 1] = target
    return bool(earliest[m, n] < inf)


def j1_distance(p: PiecewiseConstantPath, q: PiecewiseConstantPath,
                tol: float = 1e-9) -> float:
    """Skorohod J1 distance on [0, S] to within ``tol``."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    _check_pair(p, q)
    a, pv = _step_path(p)
    b, qv = _step_path(q)
    horizon = max(p.horizon, q.horizon)
    upper = sup_distance(p, q)
    cands = np.concatenate([[0.0, upper],
                            np.abs(pv[:, None] - qv[None, :]).ravel(),
                            np.abs(a[:, None] - b[None, :]).ravel()])
    cands = np.unique(cands[cands <= upper])
    slack = 0.5 * tol
    lo, hi = 0, cands.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(a, pv, b, qv, horizon, cands[mid] + slack):
            hi = mid
        else:
            lo = mid + 1
    return float(cands[lo])
