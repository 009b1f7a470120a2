"""Empirical distribution tools and the convergence experiments."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .levy import LevyModel, gamma_marginal_cdf
from .rng import stream_tag
from .simulate import (
    extremal_fidi_batch,
    extremal_markov_batch,
    sample_gamma_log_batch,
    truncated_marginal_batch,
    truncated_subordinator_batch,
)

LATTICE_PROBS = (0.2, 0.4, 0.6, 0.8)


def ks_statistic(sample, cdf, cdf_left=None) -> float:
    """Two-sided Kolmogorov-Smirnov distance between the ECDF of ``sample`` and ``cdf``.

    For a reference law with atoms pass ``cdf_left`` (the left limit
    ``F(x-)``); the lower envelope then uses it and the statistic stays the
    exact supremum.
    """
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise DomainError("sample must be nonempty")
    F = np.asarray(cdf(x), dtype=float)
    Fl = F if cdf_left is None else np.asarray(cdf_left(x), dtype=float)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - F)
    d_minus = np.max(Fl - (i - 1) / n)
    return float(max(d_plus, d_minus, 0.0))


def two_sample_ks(a, b) -> float:
    """Sup distance between two ECDFs; ties and atoms are handled exactly."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise DomainError("samples must be nonempty")
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def exponential_cdf(rate):
    return lambda x: -np.expm1(-rate * np.maximum(np.asarray(x, dtype=float), 0.0))


def uniform_cdf(x):
    return np.clip(np.asarray(x, dtype=float), 0.0, 1.0)


def truncated_exponential_cdfs(rate, z):
    """CDF and left-limit CDF of ``min(z, Exp(rate))``: atom of mass ``exp(-rate z)`` at ``z``."""
    base = exponential_cdf(rate)

    def cdf(x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= z, 1.0, base(x))

    def cdf_left(x):
        x = np.asarray(x, dtype=float)
        return np.where(x > z, 1.0, base(x))

    return cdf, cdf_left


@dataclass
class SweepResult:
    """One row per parameter value; columns have equal length."""

    parameter_name: str
    parameters: list
    statistic_name: str
    statistics: list
    sample_counts: list
    seeds: list
    extra: dict = field(default_factory=dict)
    details: list = field(default_factory=list)

    def __post_init__(self):
        n = len(self.parameters)
        cols = [self.statistics, self.sample_counts, self.seeds, *self.extra.values()]
        if any(len(c) != n for c in cols):
            raise ValueError("SweepResult columns must have equal length")

    @property
    def columns(self):
        return [self.parameter_name, self.statistic_name, *self.extra, "n"]

    def rows(self):
        extra = list(self.extra.values())
        for k, p in enumerate(self.parameters):
            yield [p, self.statistics[k], *(c[k] for c in extra), self.sample_counts[k]]


def _check_t_list(t_list):
    t = [float(v) for v in t_list]
    if not t or any(not v > 0 for v in t):
        raise DomainError("t must be positive")
    return t


# ----------------------------------------------------------- marginals

def exact_marginal_gap(gamma, lam, t, x_grid=None) -> float:
    """Sup over ``x_grid`` of ``|P(-t log X_t <= x) - (1 - exp(-gamma x))|``.

    The prelimit law is exact through the regularised incomplete gamma
    function.  The default grid is dense near 0, where the gap peaks.
    """
    if not (gamma > 0 and lam > 0 and t > 0):
        raise DomainError("gamma, lambda and t must be positive")
    if x_grid is None:
        x_grid = np.concatenate([np.linspace(-1.0, 0.0, 201),
                                 np.geomspace(1e-8, 50.0 / gamma, 20000)])
    x = np.asarray(x_grid, dtype=float)
    with np.errstate(over="ignore"):
        level = np.exp(-x / t)
    prelimit = 1.0 - gamma_marginal_cdf(gamma, lam, t, level)
    limit = exponential_cdf(gamma)(x)
    return float(np.max(np.abs(prelimit - limit)))


def gamma_log_marginal(gamma, lam, t, n, seed):
    """``n`` exact draws of ``-t log X_t`` for the gamma process."""
    stream = (stream_tag("marginal"), stream_tag(repr(float(t))))
    logx = sample_gamma_log_batch(gamma, lam, [t], n, seed, stream)[:, 0]
    return -t * logx, stream


def marginal_limit_sweep(gamma, lam, t_list, n, seed, with_exact_gap=True) -> SweepResult:
    """KS distance of ``-t log X_t`` to Exp(gamma) along ``t_list`` (gamma process, exact)."""
    t_list = _check_t_list(t_list)
    ks, seeds, gaps = [], [], []
    cdf = exponential_cdf(gamma)
    for t in t_list:
        y, stream = gamma_log_marginal(gamma, lam, t, n, seed)
        ks.append(ks_statistic(y, cdf))
        seeds.append((seed, stream))
        if with_exact_gap:
            gaps.append(exact_marginal_gap(gamma, lam, t))
    extra = {"exact_gap": gaps} if with_exact_gap else {}
    return SweepResult("t", t_list, "ks", ks, [n] * len(t_list), seeds, extra)


def truncated_log_marginal(model: LevyModel, eps, t, n, seed, compensate_drift=True):
    """``n`` draws of ``-t log X_t`` from the eps-truncated subordinator."""
    stream = (stream_tag("truncated-marginal"), stream_tag(repr(float(t))))
    x = truncated_marginal_batch(model, eps, t, n, seed, stream, compensate_drift)
    with np.errstate(divide="ignore"):
        return -t * np.log(x)


def min_ks_over_exponentials(sample, gammas) -> float:
    """Smallest KS distance of ``sample`` to Exp(g) over the rates ``gammas``."""
    return min(ks_statistic(sample, exponential_cdf(g)) for g in gammas)


# ---------------------------------------------------------------- fidi

def extremal_joint_survival(gamma, s_grid, x) -> np.ndarray:
    """``P(E_{s_i} > x_i for all i)`` of the extremal process.

    From the min-of-exponentials construction this is
    ``exp(-gamma * sum_i (s_i - s_{i-1}) * max_{k>=i} x_k^+)``.  ``x`` may
    carry leading batch dimensions.
    """
    s = np.asarray(s_grid, dtype=float).ravel()
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != s.size:
        raise DomainError("thresholds and s_grid must have the same length")
    if np.any(~(s > 0)) or np.any(np.diff(s) <= 0):
        raise DomainError("s_grid must be positive and strictly increasing")
    ds = np.diff(np.concatenate([[0.0], s]))
    tail_max = np.maximum.accumulate(np.maximum(x, 0.0)[..., ::-1], axis=-1)[..., ::-1]
    out = np.exp(-gamma * np.sum(ds * tail_max, axis=-1))
    return float(out) if out.ndim == 0 else out


def truncated_joint_survival(gamma, s_grid, x, z):
    """Joint survival of ``min(z, E_s)``: zero once any threshold reaches ``z``."""
    x = np.asarray(x, dtype=float)
    base = extremal_joint_survival(gamma, s_grid, x)
    return np.where(np.any(x >= z, axis=-1), 0.0, base)


def threshold_lattice(gamma, s_grid, z, probs=LATTICE_PROBS) -> np.ndarray:
    """Product lattice of marginal limit-law quantiles, clipped below ``z``."""
    s = np.asarray(s_grid, dtype=float)
    per_coord = [np.minimum(-np.log1p(-np.asarray(probs)) / (gamma * si), z) for si in s]
    return np.array(list(itertools.product(*per_coord)))


@dataclass
class FidiResult:
    t: float
    max_discrepancy: float
    thresholds: np.ndarray
    empirical: np.ndarray
    theoretical: np.ndarray
    n: int
    seed: tuple


def empirical_joint_survival(samples, thresholds) -> np.ndarray:
    """Fraction of sample rows exceeding each threshold row in every coordinate."""
    samples = np.asarray(samples, dtype=float)
    out = np.empty(len(thresholds))
    for j, th in enumerate(np.asarray(thresholds, dtype=float)):
        out[j] = np.mean(np.all(samples > th, axis=1))
    return out


def fidi_convergence_experiment(t, s_grid, n, z, seed, *, gamma=1.0, lam=1.0,
                                model: LevyModel | None = None, eps=None,
                                thresholds=None) -> FidiResult:
    """Compare ``(min(z, -t log X_{t s_i}))_i`` with the truncated extremal law.

    Without ``model`` the gamma process with ``(gamma, lam)`` is sampled
    exactly.  With ``model`` the eps-truncated (drift-compensated) sampler is
    used and the limit rate is ``model.gamma_theoretical``; ``eps`` defaults
    to ``exp(-z/t - 10)``.
    """
    if not (t > 0 and z > 0):
        raise DomainError("t and z must be positive")
    s = np.asarray(s_grid, dtype=float)
    stream = (stream_tag("fidi"), stream_tag(repr(float(t))))
    if model is None:
        logx = sample_gamma_log_batch(gamma, lam, t * s, n, seed, stream)
    else:
        if model.gamma_theoretical is None:
            raise DomainError("a model-driven fidi run needs a theoretical gamma")
        # jumps below exp(-z/t) decide when the scaled path leaves the cap z
        floor = np.exp(-z / t)
        if eps is None:
            eps = floor * np.exp(-10.0)
        if not 0 < eps <= floor:
            raise DomainError(f"eps must lie in (0, exp(-z/t)] = (0, {floor:.3g}]")
        gamma = model.gamma_theoretical
        paths = truncated_subordinator_batch(model, eps, t * s[-1], n, seed, stream)
        with np.errstate(divide="ignore"):
            logx = np.log(paths.evaluate(t * s))
    y = np.minimum(z, -t * logx)
    if thresholds is None:
        thresholds = threshold_lattice(gamma, s, z)
    thresholds = np.atleast_2d(np.asarray(thresholds, dtype=float))
    emp = empirical_joint_survival(y, thresholds)
    theo = truncated_joint_survival(gamma, s, thresholds, z)
    return FidiResult(float(t), float(np.max(np.abs(emp - theo))), thresholds, emp,
                      theo, int(n), (seed, stream))


def fidi_sweep(t_list, s_grid, n, z, seed, **kwargs) -> SweepResult:
    t_list = _check_t_list(t_list)
    results = [fidi_convergence_experiment(t, s_grid, n, z, seed, **kwargs) for t in t_list]
    return SweepResult("t", t_list, "max_discrepancy",
                       [r.max_discrepancy for r in results], [n] * len(t_list),
                       [r.seed for r in results], details=results)


# ---------------------------------------------------- extremal process

@dataclass
class ExtremalChecks:
    holding_ks: float
    jump_ratio_ks: float
    two_sampler_ks: float
    law_ks: float
    transition_max_discrepancy: float
    n: int


def extremal_process_checks(gamma, z, s, n, seed, x_points=20) -> ExtremalChecks:
    """Structural checks of the truncated extremal process started at ``z``.

    * first holding time against Exp(gamma z);
    * first jump ratio against U[0, 1];
    * Markov sampler at time ``s`` against ``min(z, fidi sampler)`` (two-sample KS);
    * Markov sampler at ``s`` against the truncated exponential law (KS with atom);
    * survival ``P(zeta_s > x)`` against ``exp(-gamma s x)`` on ``x_points`` levels below ``z``.
    """
    if not (gamma > 0 and z > 0 and s > 0):
        raise DomainError("gamma, z and s must be positive")
    # long enough that a censored first holding time has probability exp(-50)
    horizon = max(s, 50.0 / (gamma * z))
    paths = extremal_markov_batch(gamma, z, horizon, n, seed, (stream_tag("markov"),))
    first = paths.first_jump_times()
    holding_ks = ks_statistic(first, exponential_cdf(gamma * z))
    has = paths.counts() > 0
    first_ratio = paths.values[paths.offsets[:-1][has]] / z
    ratio_ks = ks_statistic(first_ratio, uniform_cdf)

    markov_at_s = paths.evaluate([s])[:, 0]
    fidi_at_s = np.minimum(z, extremal_fidi_batch(gamma, [s], n, seed,
                                                  (stream_tag("fidi-marginal"),))[:, 0])
    two_ks = two_sample_ks(markov_at_s, fidi_at_s)
    cdf, cdf_left = truncated_exponential_cdfs(gamma * s, z)
    law_ks = ks_statistic(markov_at_s, cdf, cdf_left)

    xs = np.linspace(0.0, z, x_points + 2)[1:-1]
    emp = np.array([np.mean(markov_at_s > x) for x in xs])
    transition = float(np.max(np.abs(emp - np.exp(-gamma * s * xs))))
    return ExtremalChecks(holding_ks, ratio_ks, two_ks, law_ks, transition, int(n))
