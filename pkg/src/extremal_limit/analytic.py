"""Semigroup and generators of the truncated extremal process, and the
generator of the log-scaled subordinator.

State space is the whole real line: for ``x <= 0`` the limit process is
frozen, so ``T_t f(x) = f(x)`` and ``A f(x) = 0`` there.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .levy import LevyModel, _integrate_weight, rho
from .quadrature import quad

FD_STEP = 1e-5
SMALL_SHIFT = 1e-4


@dataclass(frozen=True)
class SmoothTestFunction:
    """``f`` and ``f'`` (both vanishing at infinity) plus a bound on ``|f'|``."""

    f: Callable
    f_prime: Callable
    sup_norm_f_prime: float
    name: str = "f"
    validate: bool = True

    def __post_init__(self):
        if not self.sup_norm_f_prime > 0:
            raise DomainError("sup_norm_f_prime must be positive")
        if not self.validate:
            return
        far = np.array([-1e6, 1e6])
        if np.any(np.abs(self.f(far)) > 1e-6) or np.any(np.abs(self.f_prime(far)) > 1e-6):
            raise DomainError(f"{self.name}: f and f' must vanish at infinity")
        grid = np.linspace(-5.0, 5.0, 201)
        fd = (self.f(grid + FD_STEP) - self.f(grid - FD_STEP)) / (2 * FD_STEP)
        if np.max(np.abs(fd - self.f_prime(grid))) > 1e-6:
            raise DomainError(f"{self.name}: f_prime does not match finite differences of f")

    def __call__(self, x):
        return self.f(x)


def gaussian_bump(center: float = 0.0, width: float = 1.0) -> SmoothTestFunction:
    """``exp(-((x - center)/width)**2)``."""
    if not width > 0:
        raise DomainError("width must be positive")

    def f(x):
        u = (np.asarray(x, dtype=float) - center) / width
        return np.exp(-u * u)

    def fp(x):
        u = (np.asarray(x, dtype=float) - center) / width
        return -2.0 * u / width * np.exp(-u * u)

    sup = np.sqrt(2.0) / width * np.exp(-0.5)
    return SmoothTestFunction(f, fp, sup, name=f"gaussian({center:g},{width:g})")


def compact_bump(center: float = 0.0, width: float = 1.0) -> SmoothTestFunction:
    """``exp(-1/(1 - s**2))`` for ``|s| < 1``, ``s = (x - center)/width``; zero outside."""
    if not width > 0:
        raise DomainError("width must be positive")

    def f(x):
        s = (np.asarray(x, dtype=float) - center) / width
        inside = np.abs(s) < 1
        q = np.where(inside, 1.0 - s * s, 1.0)
        return np.where(inside, np.exp(-1.0 / q), 0.0)

    def fp(x):
        s = (np.asarray(x, dtype=float) - center) / width
        inside = np.abs(s) < 1
        q = np.where(inside, 1.0 - s * s, 1.0)
        return np.where(inside, np.exp(-1.0 / q) * (-2.0 * s / q**2) / width, 0.0)

    grid = np.linspace(center - width, center + width, 400001)
    sup = float(np.max(np.abs(fp(grid)))) * (1 + 1e-6)
    return SmoothTestFunction(f, fp, sup, name=f"compact({center:g},{width:g})")


def _map_points(fn, x):
    xs = np.asarray(x, dtype=float)
    out = np.array([fn(float(v)) for v in np.atleast_1d(xs).ravel()])
    return float(out[0]) if xs.ndim == 0 else out.reshape(xs.shape)


# ------------------------------------------------------------ limit side

def generator_A(f: SmoothTestFunction, x, gamma: float, form: str = "derivative",
                abs_tol: float = 1e-10):
    """Generator of the truncated extremal process.

    ``form="derivative"`` integrates ``-gamma * u * f'(u)`` over ``[0, x]``;
    ``form="difference"`` integrates ``gamma * (f(y) - f(x))``.
    """
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    if form not in ("derivative", "difference"):
        raise DomainError("form must be 'derivative' or 'difference'")

    def one(xv):
        if xv <= 0:
            return 0.0
        if form == "derivative":
            return -gamma * quad(lambda u: u * f.f_prime(u), 0.0, xv,
                                 abs_tol=abs_tol, rel_tol=0.0)
        fx = float(f.f(xv))
        return gamma * quad(lambda y: f.f(y) - fx, 0.0, xv, abs_tol=abs_tol, rel_tol=0.0)

    return _map_points(one, x)


def semigroup_T(f, x, t: float, gamma: float, abs_tol: float = 1e-10):
    """``E_x f(zeta_t) = exp(-gamma t x) f(x) + gamma t int_0^x f(y) exp(-gamma t y) dy``.

    ``f`` may be a :class:`SmoothTestFunction` or any vectorised callable.
    """
    if not t >= 0:
        raise DomainError("t must be nonnegative")
    if not gamma > 0:
        raise DomainError("gamma must be positive")
    g = f.f if isinstance(f, SmoothTestFunction) else f
    rate = gamma * t

    def one(xv):
        fx = float(g(xv))
        if xv <= 0 or t == 0:
            return fx
        integral = quad(lambda y: g(y) * np.exp(-rate * y), 0.0, xv,
                        abs_tol=abs_tol, rel_tol=0.0)
        return np.exp(-rate * xv) * fx + rate * integral

    return _map_points(one, x)


def semigroup_image(f: SmoothTestFunction, t: float, gamma: float,
                    abs_tol: float = 1e-11) -> SmoothTestFunction:
    """``T_t f`` as a test function, evaluated by quadrature at each point.

    Its derivative is ``exp(-gamma t x) f'(x)`` for ``x > 0`` and ``f'(x)``
    below, so ``|f'|`` still bounds it.
    """
    def tf(x):
        return semigroup_T(f, x, t, gamma, abs_tol=abs_tol)

    def tfp(x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, np.exp(-gamma * t * np.maximum(x, 0)), 1.0) * f.f_prime(x)

    return SmoothTestFunction(tf, tfp, f.sup_norm_f_prime,
                              name=f"T_{t:g}[{f.name}]", validate=False)


def chapman_kolmogorov_gap(f: SmoothTestFunction, s: float, t: float, x: float,
                           gamma: float, inner_tol: float = 1e-11,
                           outer_tol: float = 1e-8) -> float:
    """``|T_{s+t} f(x) - T_s(T_t f)(x)|`` with the inner function computed by nested quadrature."""
    direct = semigroup_T(f, x, s + t, gamma, abs_tol=inner_tol)
    nested = semigroup_T(semigroup_image(f, t, gamma, abs_tol=inner_tol), x, s, gamma,
                         abs_tol=outer_tol)
    return abs(direct - nested)


def semigroup_derivative_identity_gap(f: SmoothTestFunction, x: float, t: float,
                                      gamma: float, h: float = FD_STEP) -> float:
    """``|FD[T_t f](x) - exp(-gamma t x) f'(x)|`` with a central difference of step ``h``."""
    if not x > 0:
        raise DomainError("x must be positive")
    if not (t >= 0 and gamma > 0):
        raise DomainError("t must be nonnegative and gamma positive")
    rate = gamma * t
    lo, hi = x - h, x + h
    # T_t f(hi) - T_t f(lo): the integral over [0, lo] is common to both and
    # cancels exactly, leaving only the short piece over [lo, hi]
    piece = quad(lambda y: f.f(y) * np.exp(-rate * y), max(lo, 0.0), hi,
                 abs_tol=1e-16, rel_tol=1e-14)
    t_hi = np.exp(-rate * hi) * f.f(hi)
    t_lo = np.exp(-rate * lo) * f.f(lo) if lo > 0 else f.f(lo)
    fd = (t_hi - t_lo + rate * piece) / (2 * h)
    return float(abs(fd - np.exp(-rate * x) * f.f_prime(x)))


def generator_limit_gap(f: SmoothTestFunction, x: float, t: float, gamma: float) -> float:
    """``|(T_t f(x) - f(x))/t - A f(x)|``."""
    tf = semigroup_T(f, x, t, gamma, abs_tol=1e-13)
    return abs((tf - float(f.f(x))) / t - generator_A(f, x, gamma))


# ---------------------------------------------------------- prelimit side

def _increment(f, x, shift):
    """``f(x + shift) - f(x)``, via the midpoint derivative when ``shift`` is tiny."""
    direct = f.f(x + shift) - f.f(x)
    mid = f.f_prime(x + 0.5 * shift) * shift
    return np.where(np.abs(shift) < SMALL_SHIFT, mid, direct)


def generator_B_t(f: SmoothTestFunction, x, t: float, model: LevyModel,
                  abs_tol: float = 1e-9, rel_tol: float = 1e-10):
    """Generator of ``s -> -t log X_{ts}`` for the subordinator with measure ``model``.

    With ``y = exp(-w)`` the post-jump state is
    ``-t log(y + exp(-x/t)) = x - t * softplus(x/t - w)``; the softplus
    (``logaddexp``) form stays finite for every ``x/t``.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    if model.weight is None:
        raise DomainError("generator_B_t needs a model with a density")

    def one(xv):
        r = xv / t

        def integrand(w):
            shift = -t * np.logaddexp(0.0, r - w)
            return _increment(f, xv, shift)

        points = (r,) if r > 0 else ()
        val = _integrate_weight(model, integrand, 0.0, np.inf, points=points,
                                abs_tol=abs_tol / t, rel_tol=rel_tol)
        return t * val

    return _map_points(one, x)


def negative_side_bound(f: SmoothTestFunction, x, t: float, model: LevyModel):
    """``||f'|| * rho * t**2 * exp(x/t)``, the bound on ``|B^t f(x)|`` for ``x <= 0``."""
    x = np.asarray(x, dtype=float)
    return f.sup_norm_f_prime * rho(model) * t * t * np.exp(np.minimum(x, 0.0) / t)


def default_x_grid(z: float, n: int = 200, lower: float = -2.0) -> np.ndarray:
    """Uniform negatives, log-spacing towards 0 and towards ``z``, ``n`` points in all."""
    if not z > 0 or n < 10 or not lower < 0:
        raise DomainError("need z > 0, lower < 0 and n >= 10")
    n_neg = n // 4
    n_mid = (n - n_neg - 1) // 2
    n_top = n - n_neg - 2 - n_mid
    neg = np.linspace(lower, 0.0, n_neg, endpoint=False)
    near0 = np.geomspace(z * 1e-4, z / 2, n_mid)
    near_z = z - np.geomspace(z / 2, z * 1e-4, n_top + 1)[1:]
    grid = np.unique(np.concatenate([neg, [0.0], near0, near_z, [z]]))
    return grid


def generator_gaps(f: SmoothTestFunction, t: float, model: LevyModel, gamma: float,
                   x_grid, a_values=None) -> np.ndarray:
    """Pointwise ``|B^t f(x) - A f(x)|`` along ``x_grid``."""
    x = np.asarray(x_grid, dtype=float)
    if a_values is None:
        a_values = generator_A(f, x, gamma)
    return np.abs(np.asarray(generator_B_t(f, x, t, model)) - a_values)


def uniform_gap(f: SmoothTestFunction, t: float, model: LevyModel, gamma: float,
                z: float, x_grid) -> float:
    """Largest generator gap over a grid contained in ``(-inf, z]``."""
    x = np.asarray(x_grid, dtype=float)
    if x.size == 0 or np.any(x > z):
        raise DomainError("x_grid must be nonempty and bounded above by z")
    return float(np.max(generator_gaps(f, t, model, gamma, x)))
