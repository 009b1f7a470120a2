"""Samplers for log-scaled subordinators and the extremal process.

Each public sampler comes in two shapes: a single-replicate version driven
by an :class:`~extremal_limit.rng.RngSpec`, and a ``*_batch`` version that
runs ``n`` replicates in fixed blocks (block ``b`` uses
``RngSpec(master_seed, b, stream)``).  Both share the same block kernel, so
a single replicate is exactly a batch of size one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .levy import LevyModel, small_jump_mean, tail_mass
from .rng import RngSpec, run_blocks

INVERSION_BRACKET = 1e-12
_TINY = np.nextafter(0.0, 1.0)


def _strictly_increasing(a):
    return a.size < 2 or bool(np.all(np.diff(a) > 0))


@dataclass(frozen=True)
class GridSample:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).ravel()
        values = np.asarray(self.values, dtype=float).ravel()
        if times.shape != values.shape:
            raise DomainError("times and values must have equal length")
        if np.any(times < 0) or not _strictly_increasing(times):
            raise DomainError("times must be nonnegative and strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class PiecewiseConstantPath:
    """Cadlag step path on [0, horizon], optionally plus a linear drift."""

    horizon: float
    initial_value: float
    jump_times: np.ndarray
    post_jump_values: np.ndarray
    drift: float = 0.0

    def __post_init__(self):
        jt = np.asarray(self.jump_times, dtype=float).ravel()
        pv = np.asarray(self.post_jump_values, dtype=float).ravel()
        if not self.horizon > 0:
            raise DomainError("horizon must be positive")
        if jt.shape != pv.shape:
            raise DomainError("jump_times and post_jump_values must have equal length")
        if jt.size and (jt[0] <= 0 or jt[-1] > self.horizon):
            raise DomainError("jump times must lie in (0, horizon]")
        if not _strictly_increasing(jt):
            raise DomainError("jump times must be strictly increasing")
        object.__setattr__(self, "jump_times", jt)
        object.__setattr__(self, "post_jump_values", pv)
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "initial_value", float(self.initial_value))

    @property
    def n_jumps(self) -> int:
        return self.jump_times.size

    def __call__(self, times):
        return evaluate_path(self, times).values


@dataclass(frozen=True)
class PathBatch:
    """Many step paths stored contiguously: path ``i`` owns the jumps
    ``offsets[i]:offsets[i+1]``."""

    horizon: float
    initial_values: np.ndarray
    offsets: np.ndarray
    jump_times: np.ndarray
    values: np.ndarray
    drift: float = 0.0

    def __len__(self):
        return self.initial_values.size

    def path(self, i: int) -> PiecewiseConstantPath:
        lo, hi = self.offsets[i], self.offsets[i + 1]
        return PiecewiseConstantPath(self.horizon, self.initial_values[i],
                                     self.jump_times[lo:hi], self.values[lo:hi],
                                     self.drift)

    def counts(self):
        return np.diff(self.offsets)

    def evaluate(self, times) -> np.ndarray:
        """Right-continuous values, shape ``(n_paths, len(times))``."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(times < 0) or np.any(times > self.horizon):
            raise DomainError("evaluation times must lie in [0, horizon]")
        out = np.empty((len(self), times.size))
        start = self.offsets[:-1]
        for k, tau in enumerate(times):
            c = np.concatenate([[0], np.cumsum(self.jump_times <= tau)])
            n_before = c[self.offsets[1:]] - c[start]
            last = np.maximum(start + n_before - 1, 0)
            picked = self.values[last] if self.values.size else np.zeros(len(self))
            out[:, k] = np.where(n_before > 0, picked, self.initial_values) + self.drift * tau
        return out

    def first_jump_times(self) -> np.ndarray:
        """Time of each path's first jump; ``inf`` if it has none."""
        has = self.counts() > 0
        out = np.full(len(self), np.inf)
        out[has] = self.jump_times[self.offsets[:-1][has]]
        return out

    def jump_ratios(self) -> np.ndarray:
        """Post-jump over pre-jump value for every jump of every path."""
        prev = np.empty_like(self.values)
        if self.values.size:
            prev[1:] = self.values[:-1]
            firsts = self.offsets[:-1][self.counts() > 0]
            prev[firsts] = self.initial_values[self.counts() > 0]
        return self.values / prev


def _concat_batches(parts, horizon, drift=0.0) -> PathBatch:
    inits, offs, times, vals = [], [np.array([0])], [], []
    shift = 0
    for init, counts, t, v in parts:
        inits.append(init)
        offs.append(shift + np.cumsum(counts))
        shift += int(counts.sum())
        times.append(t)
        vals.append(v)
    return PathBatch(horizon, np.concatenate(inits), np.concatenate(offs),
                     np.concatenate(times), np.concatenate(vals), drift)


# --------------------------------------------------------------- gamma

def _check_gamma_grid(gamma, lam, t_grid):
    if not (gamma > 0 and lam > 0):
        raise DomainError("gamma and lambda must be positive")
    t = np.asarray(t_grid, dtype=float).ravel()
    if t.size == 0 or np.any(~(t > 0)) or not _strictly_increasing(t):
        raise DomainError("time grid must be nonempty, positive and strictly increasing")
    return t


def log_gamma_variates(gen, shape, size):
    """log of Gamma(shape, 1) variates without underflow for tiny shapes.

    Uses ``G(a) = G(a + 1) * U**(1/a)`` in distribution.
    """
    shape = np.asarray(shape, dtype=float)
    g = gen.standard_gamma(shape + 1.0, size=size)
    u = gen.random(size=size)
    return np.log(g) + np.log1p(-u) / shape


def _gamma_log_kernel(gamma, lam, t):
    dt = np.diff(np.concatenate([[0.0], t]))

    def kernel(gen, size):
        incr = log_gamma_variates(gen, gamma * dt, (size, dt.size)) - np.log(lam)
        return np.logaddexp.accumulate(incr, axis=1)

    return kernel


def sample_gamma_log_batch(gamma, lam, t_grid, n, master_seed, stream=()):
    """``log X`` at the grid times for ``n`` gamma-process replicates, shape ``(n, k)``."""
    t = _check_gamma_grid(gamma, lam, t_grid)
    parts = run_blocks(_gamma_log_kernel(gamma, lam, t), n, master_seed, stream)
    return np.concatenate(parts) if parts else np.empty((0, t.size))


def sample_gamma_on_grid(gamma, lam, t_grid, rng: RngSpec) -> GridSample:
    """Gamma process values at the grid times from independent gamma increments."""
    t = _check_gamma_grid(gamma, lam, t_grid)
    logs = _gamma_log_kernel(gamma, lam, t)(rng.generator(), 1)[0]
    return GridSample(t, np.exp(logs))


# ------------------------------------------------- truncated subordinator

def invert_tail(model: LevyModel, v, eps: float):
    """Jump sizes ``x`` in [eps, 1] with ``tail_mass(x) = v``.

    Bisection runs on ``w = -log x`` down to a bracket of width 1e-12, which
    bounds the relative (hence also the absolute) error in ``x`` and keeps
    working when ``eps`` is far below 1e-12.
    """
    v = np.asarray(v, dtype=float)
    lo = np.zeros(v.shape)
    hi = np.full(v.shape, -np.log(eps))
    while v.size and np.max(hi - lo) > INVERSION_BRACKET:
        mid = 0.5 * (lo + hi)
        # tail above v means x is still too small, i.e. w too large
        too_far = np.asarray(tail_mass(model, np.exp(-mid))) > v
        hi = np.where(too_far, mid, hi)
        lo = np.where(too_far, lo, mid)
    return np.exp(-0.5 * (lo + hi))


def _jump_rate(model, eps):
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    rate = tail_mass(model, eps)
    if not np.isfinite(rate):
        raise DomainError(f"jump rate above eps={eps:g} is not finite")
    return rate


def _segment_cumsum(x, counts):
    """Cumulative sums restarted at each segment boundary.

    A single global cumsum would lose tiny jumps against the running total of
    earlier paths, so segments are padded into rows and summed separately.
    """
    if x.size == 0:
        return x.copy()
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    col = np.arange(x.size) - np.repeat(starts, counts)
    row = np.repeat(np.arange(counts.size), counts)
    padded = np.zeros((counts.size, int(counts.max())))
    padded[row, col] = x
    return np.cumsum(padded, axis=1)[row, col]


def _compound_poisson_kernel(model, eps, horizon, rate):
    def kernel(gen, size):
        counts = gen.poisson(rate * horizon, size=size)
        total = int(counts.sum())
        times = horizon - gen.uniform(0.0, horizon, size=total)
        sizes = invert_tail(model, gen.uniform(0.0, rate, size=total), eps)
        owner = np.repeat(np.arange(size), counts)
        order = np.lexsort((times, owner))
        times, sizes = times[order], sizes[order]
        return np.zeros(size), counts, times, _segment_cumsum(sizes, counts)

    return kernel


def truncated_subordinator_batch(model, eps, horizon, n, master_seed, stream=(),
                                 compensate_drift=True) -> PathBatch:
    """Compound Poisson paths with the jumps of ``model`` above ``eps``.

    With ``compensate_drift`` the omitted small-jump mean is added back as a
    linear drift (stored on the batch, applied at evaluation).
    """
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    rate = _jump_rate(model, eps)
    drift = small_jump_mean(model, eps) if compensate_drift else 0.0
    parts = run_blocks(_compound_poisson_kernel(model, eps, horizon, rate),
                       n, master_seed, stream)
    return _concat_batches(parts, horizon, drift)


def sample_truncated_subordinator(model, eps, horizon, compensate_drift,
                                  rng: RngSpec) -> PiecewiseConstantPath:
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    rate = _jump_rate(model, eps)
    drift = small_jump_mean(model, eps) if compensate_drift else 0.0
    _, counts, times, values = _compound_poisson_kernel(model, eps, horizon, rate)(
        rng.generator(), 1)
    return PiecewiseConstantPath(horizon, 0.0, times, values, drift)


def truncated_marginal_batch(model, eps, t, n, master_seed, stream=(),
                             compensate_drift=True) -> np.ndarray:
    """``X_t`` of the eps-truncated subordinator for ``n`` replicates."""
    rate = _jump_rate(model, eps)
    drift = small_jump_mean(model, eps) if compensate_drift else 0.0

    def kernel(gen, size):
        counts = gen.poisson(rate * t, size=size)
        sizes = invert_tail(model, gen.uniform(0.0, rate, size=int(counts.sum())), eps)
        owner = np.repeat(np.arange(size), counts)
        return np.bincount(owner, weights=sizes, minlength=size) + drift * t

    parts = run_blocks(kernel, n, master_seed, stream)
    return np.concatenate(parts) if parts else np.empty(0)


# ---------------------------------------------------------- log scaling

def log_scale(sample: GridSample, t: float, z: float) -> GridSample:
    """Map observations at times ``t*s`` to ``min(z, -t*log x)`` at times ``s``.

    ``x = 0`` maps to ``z``.
    """
    if not (t > 0 and z > 0):
        raise DomainError("t and z must be positive")
    x = sample.values
    if np.any(x < 0):
        raise DomainError("values must be nonnegative")
    with np.errstate(divide="ignore"):
        y = np.minimum(z, -t * np.log(x))
    return GridSample(sample.times / t, y)


def log_scale_path(path: PiecewiseConstantPath, t: float, z: float) -> PiecewiseConstantPath:
    """``s -> min(z, -t*log X_{ts})`` for a driftless subordinator path.

    Jumps that leave the truncated value unchanged are dropped.
    """
    if not (t > 0 and z > 0):
        raise DomainError("t and z must be positive")
    if path.drift != 0.0:
        raise DomainError("log_scale_path needs a driftless step path")
    if path.initial_value != 0.0:
        raise DomainError("subordinator paths start at 0")
    with np.errstate(divide="ignore"):
        y = np.minimum(z, -t * np.log(path.post_jump_values))
    keep = y < z
    s = np.minimum(path.jump_times[keep] / t, path.horizon / t)
    return PiecewiseConstantPath(path.horizon / t, z, s, y[keep])


# ------------------------------------------------------ extremal process

def _check_s_grid(gamma, s_grid):
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    s = np.asarray(s_grid, dtype=float).ravel()
    if s.size == 0 or np.any(~(s > 0)) or not _strictly_increasing(s):
        raise DomainError("s_grid must be nonempty, positive and strictly increasing")
    return s


def _fidi_kernel(gamma, s):
    ds = np.diff(np.concatenate([[0.0], s]))

    def kernel(gen, size):
        z = gen.standard_exponential(size=(size, s.size))
        return np.minimum.accumulate(z / ds, axis=1) / gamma

    return kernel


def extremal_fidi_batch(gamma, s_grid, n, master_seed, stream=()) -> np.ndarray:
    """Exact draws of the extremal process at the grid times, shape ``(n, k)``."""
    s = _check_s_grid(gamma, s_grid)
    parts = run_blocks(_fidi_kernel(gamma, s), n, master_seed, stream)
    return np.concatenate(parts) if parts else np.empty((0, s.size))


def sample_extremal_fidi(gamma, s_grid, rng: RngSpec) -> GridSample:
    """Running minimum of ``Z_i / (s_i - s_{i-1})``, scaled by ``1/gamma``."""
    s = _check_s_grid(gamma, s_grid)
    return GridSample(s, _fidi_kernel(gamma, s)(rng.generator(), 1)[0])


def _markov_kernel(gamma, z, horizon):
    def kernel(gen, size):
        state = np.full(size, float(z))
        clock = np.zeros(size)
        alive = np.arange(size)
        owners, times, values = [], [], []
        while alive.size:
            hold = gen.standard_exponential(alive.size) / (gamma * state[alive])
            arrival = clock[alive] + hold
            jumped = arrival <= horizon
            alive, arrival = alive[jumped], arrival[jumped]
            u = np.maximum(gen.random(alive.size), _TINY)
            state[alive] *= u
            clock[alive] = arrival
            owners.append(alive)
            times.append(arrival)
            values.append(state[alive])
        owner = np.concatenate(owners) if owners else np.empty(0, int)
        order = np.argsort(owner, kind="stable")
        counts = np.bincount(owner, minlength=size)
        return (np.full(size, float(z)), counts,
                np.concatenate(times)[order], np.concatenate(values)[order])

    return kernel


def _check_markov(gamma, z, horizon):
    if not (gamma > 0 and z > 0 and horizon > 0):
        raise DomainError("gamma, z and horizon must be positive")


def extremal_markov_batch(gamma, z, horizon, n, master_seed, stream=()) -> PathBatch:
    """Truncated extremal paths started at ``z``, simulated jump by jump."""
    _check_markov(gamma, z, horizon)
    parts = run_blocks(_markov_kernel(gamma, z, horizon), n, master_seed, stream)
    return _concat_batches(parts, horizon)


def sample_extremal_markov(gamma, z, horizon, rng: RngSpec) -> PiecewiseConstantPath:
    """From state x hold an Exp(gamma*x) time, then jump to x*U, U ~ U[0, 1]."""
    _check_markov(gamma, z, horizon)
    init, _, times, values = _markov_kernel(gamma, z, horizon)(rng.generator(), 1)
    return PiecewiseConstantPath(horizon, init[0], times, values)


def evaluate_path(path: PiecewiseConstantPath, times) -> GridSample:
    """Right-continuous evaluation, drift included."""
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(t < 0) or np.any(t > path.horizon):
        raise DomainError("evaluation times must lie in [0, horizon]")
    k = np.searchsorted(path.jump_times, t, side="right")
    vals = np.where(k > 0, path.post_jump_values[np.maximum(k - 1, 0)]
                    if path.n_jumps else 0.0, path.initial_value)
    return GridSample(t, vals + path.drift * t)
