"""Levy measures of pure-jump subordinators restricted to (0, 1].

Integrals against a Levy measure are computed in log coordinates
``y = exp(-w)``, where the measure becomes ``weight(w) dw`` on ``[0, inf)``
with ``weight(w) = density(exp(-w)) * exp(-w)``.  A density of order
``1/y`` at zero turns into a bounded weight, which is what keeps the
quadrature well conditioned.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np
from scipy import special

from .errors import DomainError, ModelInvalidError
from .quadrature import quad

ABS_TOL = 1e-9
REL_TOL = 1e-8
_LN10 = np.log(10.0)
_CHECK_GRID = np.logspace(-8, 0, 9)


def _product(g, q):
    # 0 * inf can occur far out in the log coordinate, where g has underflowed
    with np.errstate(invalid="ignore", over="ignore"):
        return np.where(g == 0.0, 0.0, g * q)


@dataclass(frozen=True)
class LevyModel:
    """A Levy measure on (0, 1] with whatever closed forms are known.

    ``weight`` is the measure in log coordinates (see module docstring).  It
    is derived from ``density`` when not given.  ``full_density`` describes
    the unrestricted measure on (0, inf) for models that have mass above 1;
    only the gamma model uses it.
    """

    name: str
    tail: Optional[Callable] = None
    density: Optional[Callable] = None
    phi_closed_form: Optional[Callable] = None
    gamma_theoretical: Optional[float] = None
    params: Mapping[str, float] = field(default_factory=dict)
    weight: Optional[Callable] = None
    full_density: Optional[Callable] = None
    rho_value: float = field(init=False, default=float("nan"))

    def __post_init__(self):
        if self.tail is None and self.density is None:
            raise ModelInvalidError(f"{self.name}: need a tail or a density")
        if self.weight is None and self.density is not None:
            density = self.density

            def weight(w):
                y = np.exp(-np.asarray(w, dtype=float))
                with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                    return np.where(y > 0.0, density(y) * y, 0.0)

            object.__setattr__(self, "weight", weight)
        self._check()

    def _check(self):
        grid = np.logspace(-12, 0, 49)
        tails = np.array([tail_mass(self, x) for x in grid]) if self.tail is None \
            else np.asarray(self.tail(grid), dtype=float)
        if not np.all(np.isfinite(tails)) or np.any(tails < 0):
            raise ModelInvalidError(f"{self.name}: tail must be finite and nonnegative")
        if np.any(np.diff(tails) > 1e-12 * np.maximum(1.0, np.abs(tails[:-1]))):
            raise ModelInvalidError(f"{self.name}: tail must be nonincreasing")
        if abs(tails[-1]) > 1e-12:
            raise ModelInvalidError(f"{self.name}: tail(1) must be 0")
        if self.tail is not None and self.density is not None:
            for x in _CHECK_GRID:
                closed = float(self.tail(x))
                integrated = _integrate_weight(self, lambda w: np.ones_like(w),
                                               0.0, -np.log(x))
                if abs(closed - integrated) > 1e-7 * max(1.0, abs(closed)):
                    raise ModelInvalidError(
                        f"{self.name}: density does not integrate to tail at x={x:g}"
                        f" ({integrated!r} vs {closed!r})")
        object.__setattr__(self, "rho_value", _rho(self))


def _integrate_weight(model, g, a, b, points=(), abs_tol=ABS_TOL, rel_tol=REL_TOL):
    """Integrate ``g(w) * weight(w)`` over ``[a, b]`` in log coordinates."""
    weight = model.weight
    return quad(lambda w: _product(g(w), weight(w)), a, b, points=points,
                abs_tol=abs_tol, rel_tol=rel_tol)


# ---------------------------------------------------------------- models

def GammaModel(gamma: float, lam: float) -> LevyModel:
    """Gamma subordinator, density ``gamma * exp(-lam*x) / x``, cut to (0, 1].

    ``lam = 0`` is admitted: the restricted measure ``gamma/x`` still has
    finite first moment.  The unrestricted closed form
    ``gamma * log(1 + u/lam)`` and ``full_density`` need ``lam > 0``.
    """
    gamma = float(gamma)
    lam = float(lam)
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    if not lam >= 0:
        raise DomainError("lambda must be nonnegative")
    if lam > 0:
        e1_at_one = special.exp1(lam)

        def tail(x):
            return gamma * (special.exp1(lam * np.asarray(x, dtype=float)) - e1_at_one)

        def phi(u):
            return gamma * np.log1p(np.asarray(u, dtype=float) / lam)

        def full_density(y):
            y = np.asarray(y, dtype=float)
            return gamma * np.exp(-lam * y) / y
    else:
        def tail(x):
            return -gamma * np.log(np.asarray(x, dtype=float))

        phi = None
        full_density = None

    def density(y):
        y = np.asarray(y, dtype=float)
        return gamma * np.exp(-lam * y) / y

    def weight(w):
        return gamma * np.exp(-lam * np.exp(-np.asarray(w, dtype=float)))

    return LevyModel(
        name="gamma", tail=tail, density=density, phi_closed_form=phi,
        gamma_theoretical=gamma, params={"gamma": gamma, "lambda": lam},
        weight=weight, full_density=full_density,
    )


def LogTailModel(gamma: float) -> LevyModel:
    """Tail ``-gamma * log(x)``; the S7 ratio equals ``gamma`` exactly."""
    gamma = float(gamma)
    if not gamma > 0:
        raise DomainError("gamma must be positive")

    def tail(x):
        return -gamma * np.log(np.asarray(x, dtype=float))

    def density(y):
        return gamma / np.asarray(y, dtype=float)

    def weight(w):
        return np.full_like(np.asarray(w, dtype=float), gamma)

    return LevyModel(name="logtail", tail=tail, density=density,
                     gamma_theoretical=gamma, params={"gamma": gamma},
                     weight=weight)


def StableModel(alpha: float, c: float = 1.0) -> LevyModel:
    """Stable-like density ``c*alpha*x**(-1-alpha)`` on (0, 1]; violates S7."""
    alpha = float(alpha)
    c = float(c)
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    if not c > 0:
        raise DomainError("c must be positive")

    def tail(x):
        return c * (np.asarray(x, dtype=float) ** -alpha - 1.0)

    def density(y):
        return c * alpha * np.asarray(y, dtype=float) ** (-1.0 - alpha)

    def weight(w):
        with np.errstate(over="ignore"):
            return c * alpha * np.exp(alpha * np.asarray(w, dtype=float))

    return LevyModel(name="stable", tail=tail, density=density,
                     params={"alpha": alpha, "c": c}, weight=weight)


MODELS = {"gamma": GammaModel, "logtail": LogTailModel, "stable": StableModel}


def make_model(name: str, **params) -> LevyModel:
    """Build a built-in model from its name and keyword parameters."""
    try:
        factory = MODELS[name]
    except KeyError:
        raise DomainError(f"unknown model {name!r}; choose from {sorted(MODELS)}") from None
    return factory(**params)


# ------------------------------------------------------------ operations

def _check_unit_interval(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)) or np.any(x > 1):
        raise DomainError("x must lie in (0, 1]")
    return x


def tail_mass(model: LevyModel, x):
    """nu(x, 1]; closed form when the model has one, quadrature otherwise."""
    xs = _check_unit_interval(x)
    if model.tail is not None:
        out = np.asarray(model.tail(xs), dtype=float)
        out = np.where(xs == 1.0, 0.0, out)
    else:
        one = lambda w: np.ones_like(w)  # noqa: E731
        out = np.array([_integrate_weight(model, one, 0.0, -np.log(v))
                        for v in np.atleast_1d(xs)]).reshape(xs.shape)
    return float(out) if out.ndim == 0 else out


def small_jump_mean(model: LevyModel, eps: float) -> float:
    """Mean jump mass below ``eps`` per unit time, the integral of y nu(dy) on (0, eps]."""
    if not 0 < eps <= 1:
        raise DomainError("eps must lie in (0, 1]")
    return _integrate_weight(model, lambda w: np.exp(-w), -np.log(eps), np.inf,
                             abs_tol=1e-14, rel_tol=1e-10)


def laplace_exponent(model: LevyModel, u, unrestricted: bool = False):
    """phi(u) as the integral of (1 - exp(-u*y)) against the Levy measure.

    By default the measure on (0, 1] is used.  ``unrestricted=True`` adds the
    mass above 1 for models carrying ``full_density``.
    """
    us = np.asarray(u, dtype=float)
    if np.any(~(us >= 0)):
        raise DomainError("u must be nonnegative")
    out = np.array([_phi_one(model, v, unrestricted) for v in np.atleast_1d(us)])
    return float(out[0]) if us.ndim == 0 else out.reshape(us.shape)


def _phi_one(model, u, unrestricted):
    if u == 0:
        return 0.0
    points = (np.log(u),) if u > 1 else ()
    val = _integrate_weight(model, lambda w: -np.expm1(-u * np.exp(-w)),
                            0.0, np.inf, points=points)
    if unrestricted and model.full_density is not None:
        fd = model.full_density
        val += quad(lambda y: -np.expm1(-u * y) * fd(y), 1.0, np.inf,
                    abs_tol=ABS_TOL, rel_tol=REL_TOL)
    return val


def _decade_sums(g, weight, max_decades=300):
    """Sum of the weighted integral over successive decades of y.

    Raises :class:`ModelInvalidError` if the partial sums stop converging.
    """
    total = 0.0
    small = 0
    for k in range(max_decades):
        block = quad(lambda w: _product(g(w), weight(w)), k * _LN10, (k + 1) * _LN10,
                     abs_tol=1e-15, rel_tol=1e-12)
        total += block
        if abs(block) <= 1e-13 * max(abs(total), 1e-300):
            small += 1
            if small >= 2:
                return total
        else:
            small = 0
    raise ModelInvalidError("rho diverges: decade partial sums are not Cauchy")


def _rho(model):
    values = []
    if model.tail is not None:
        tail = model.tail
        values.append(_decade_sums(lambda w: np.exp(-w) * tail(np.exp(-w)),
                                   lambda w: np.ones_like(w)))
    if model.weight is not None:
        values.append(_decade_sums(lambda w: np.exp(-w), model.weight))
    rho_val = values[0]
    if not np.isfinite(rho_val) or rho_val <= 0:
        raise ModelInvalidError(f"{model.name}: rho must be positive and finite")
    if len(values) == 2 and abs(values[0] - values[1]) > 1e-7 * max(1.0, rho_val):
        raise ModelInvalidError(
            f"{model.name}: rho by tail ({values[0]!r}) and by moment "
            f"({values[1]!r}) disagree")
    return rho_val


def rho(model: LevyModel) -> float:
    """Integral of y nu(dy) over (0, 1], equal to the integral of the tail."""
    return model.rho_value


def condition_S7_profile(model: LevyModel, x_grid):
    """Ratios ``-tail_mass(x) / log(x)`` along a decreasing grid in (0, 1)."""
    x = np.asarray(x_grid, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise DomainError("x_grid must be a nonempty sequence")
    if np.any(~(x > 0)) or np.any(x >= 1):
        raise DomainError("x_grid values must lie in (0, 1)")
    if np.any(np.diff(x) >= 0):
        raise DomainError("x_grid must be strictly decreasing")
    return -np.asarray(tail_mass(model, x)) / np.log(x)


def condition_S5_profile(model: LevyModel, s_grid):
    """Ratios ``phi(s) / log(s)`` along an increasing grid in (1, inf).

    Uses ``phi_closed_form`` when present (for the gamma model that is the
    unrestricted exponent), quadrature over (0, 1] otherwise.
    """
    s = np.asarray(s_grid, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise DomainError("s_grid must be a nonempty sequence")
    if np.any(~(s > 1)) or np.any(~np.isfinite(s)):
        raise DomainError("s_grid values must be finite and exceed 1")
    if np.any(np.diff(s) <= 0):
        raise DomainError("s_grid must be strictly increasing")
    if model.phi_closed_form is not None:
        phi = np.asarray(model.phi_closed_form(s), dtype=float)
    else:
        phi = laplace_exponent(model, s)
    return phi / np.log(s)


def gamma_marginal_cdf(gamma, lam, t, x):
    """P(X_t <= x) for the gamma subordinator: regularised lower incomplete
    gamma with shape ``gamma*t`` evaluated at ``lam*x``."""
    if not (gamma > 0 and lam > 0 and t > 0):
        raise DomainError("gamma, lambda and t must be positive")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("x must be nonnegative")
    with np.errstate(invalid="ignore"):
        out = special.gammainc(gamma * t, lam * x)
    out = np.where(np.isposinf(x), 1.0, out)
    return float(out) if out.ndim == 0 else out


def condition_S6_profile(model: LevyModel, x_grid):
    """Ratios ``log G_1(x) / log(x)``; only the gamma model has G_1 in closed form."""
    if model.name != "gamma" or not model.params.get("lambda", 0) > 0:
        raise DomainError("S6 profile needs a gamma model with positive lambda")
    x = np.asarray(x_grid, dtype=float)
    if np.any(~(x > 0)) or np.any(x >= 1) or np.any(np.diff(x) >= 0):
        raise DomainError("x_grid must be strictly decreasing in (0, 1)")
    g = gamma_marginal_cdf(model.params["gamma"], model.params["lambda"], 1.0, x)
    return np.log(g) / np.log(x)


@dataclass(frozen=True)
class ProfileVerdict:
    holds: bool
    estimate: float
    reason: str


def assess_profile(values) -> ProfileVerdict:
    """Classify a limit-condition profile as settling or diverging.

    A profile fails when it is monotone and its last value has moved by more
    than a factor 10 away from its first (towards infinity or towards zero).
    """
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        return ProfileVerdict(False, float("nan"), "non-finite ratios")
    d = np.diff(v)
    first, last = v[0], v[-1]
    if np.all(d >= 0) and last > 10 * max(first, 1e-300):
        return ProfileVerdict(False, float(last), "ratio diverges")
    if np.all(d <= 0) and last < first / 10:
        return ProfileVerdict(False, float(last), "ratio collapses to zero")
    return ProfileVerdict(True, float(last), "ratio settles")
