"""Generalized fractional Bell polynomials and the moments they generate.

For a Poisson count mixed over ``V`` the factorial moments are
``E[N (N-1) ... (N-j+1)] = E[V^j]``.  With ``V = X^theta W`` and the mixing
law of the fractional counting process,

    E[W^j] = Gamma(theta_v) (zeta)_j / Gamma(mu j + theta_v),

so ``n^m = sum_j S(m, j) n (n-1) ... (n-j+1)`` turns every double series
for the polynomial of order ``m`` into a finite sum over Stirling numbers
of the second kind.  That finite form is what is evaluated here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special as sc

from .errors import ConvergenceError, ValidationError
from .special_fn import DEFAULT_CONTROL, SeriesControl, series_columns

__all__ = [
    "MomentProvider",
    "stirling2_row",
    "gfbp",
    "sgfbp",
    "sgfbn",
    "gfbp_gen_fn",
    "sgfbp_gen_fn",
    "tcfcp_moment",
]


@dataclass(frozen=True)
class MomentProvider:
    """Fractional moments ``E[X^q]`` of a nonnegative random variable.

    Parameters
    ----------
    fn : callable
        ``fn(q)`` returns ``E[X^q]`` for real ``q >= 0``.
    theta : float
        The exponent: the polynomials consume ``E[X^(theta j)]``.
    """

    fn: Callable[[float], float]
    theta: float

    def __post_init__(self):
        if not self.theta > 0:
            raise ValidationError("theta must be positive")
        m0 = self.fn(0.0)
        if abs(m0 - 1.0) > 1e-12:
            raise ValidationError(f"inconsistent provider: E[X^0] = {m0} instead of 1")

    def moment(self, j: int) -> float:
        """``E[X^(theta j)]``; a value too large for a float is reported as ``inf``."""
        try:
            return float(self.fn(self.theta * j))
        except OverflowError:
            return math.inf

    @classmethod
    def deterministic(cls, x: float, theta: float = 1.0) -> "MomentProvider":
        """``X = x^(1/theta)`` so that ``X^theta = x``."""
        if x < 0:
            raise ValidationError("x must be nonnegative")
        return cls(lambda q: 1.0 if q == 0 else x ** (q / theta), theta)

    @classmethod
    def unit(cls) -> "MomentProvider":
        return cls(lambda q: 1.0, 1.0)

    def check_log_convex(self, orders=(0.25, 0.5, 1.0, 1.5), delta: float = 0.25) -> bool:
        """Lyapunov spot check ``E[X^p]^2 <= E[X^(p-d)] E[X^(p+d)]``."""
        for p in orders:
            lo, mid, hi = self.fn(max(p - delta, 0.0)), self.fn(p), self.fn(p + delta)
            if mid * mid > lo * hi * (1.0 + 1e-9):
                return False
        return True


@lru_cache(maxsize=64)
def stirling2_row(m: int) -> tuple:
    """``S(m, j)`` for ``j = 0..m`` as exact integers."""
    return tuple(int(sc.stirling2(m, j, exact=True)) for j in range(m + 1))


def _check_shape(shape):
    mu, th, ze = shape
    if not (0 < mu <= 1 and th > 0 and ze > 0 and th >= mu * ze):
        raise ValidationError(f"invalid shape {shape}")
    return mu, th, ze


def _factorial_weights(shape, m: int) -> np.ndarray:
    """``Gamma(theta_v) (zeta)_j / Gamma(mu j + theta_v)`` for ``j = 0..m``."""
    mu, th, ze = shape
    j = np.arange(m + 1, dtype=float)
    return np.exp(math.lgamma(th) + sc.gammaln(ze + j) - math.lgamma(ze) - sc.gammaln(mu * j + th))


def _bell_sum(shape, m: int, moments) -> float:
    if m < 0 or int(m) != m:
        raise ValidationError("order m must be a nonnegative integer")
    m = int(m)
    if m == 0:
        return 1.0
    w = _factorial_weights(shape, m)
    s = stirling2_row(m)
    return math.fsum(float(s[j]) * w[j] * moments(j) for j in range(1, m + 1))


def gfbp(x: float, m: int, shape, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``B_G(x, m)``, the ``m``-th moment of the counting law at operational time ``x``.

    Examples
    --------
    >>> round(gfbp(2.0, 2, (1.0, 1.0, 1.0)), 12)
    6.0
    """
    if x < 0:
        raise ValidationError("x must be nonnegative")
    shape = _check_shape(shape)
    return _bell_sum(shape, m, lambda j: x ** j)


def sgfbp(mp: MomentProvider, m: int, shape, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``B_SG(m)`` with ``E[X^(theta j)]`` supplied by ``mp``."""
    shape = _check_shape(shape)
    return _bell_sum(shape, m, mp.moment)


def sgfbn(m: int, shape, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Subordinated Bell numbers: the unit provider, equal to ``gfbp(1, m)``.

    >>> [round(sgfbn(m, (1.0, 1.0, 1.0))) for m in range(5)]
    [1, 1, 2, 5, 15]
    """
    return sgfbp(MomentProvider.unit(), m, shape, ctrl)


def sgfbp_gen_fn(s: float, mp: MomentProvider, shape,
                 ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``F_SG(s) = Gamma(theta_v) sum_l (zeta)_l E[X^(theta l)] (e^s - 1)^l / (l! Gamma(mu l + theta_v))``.

    This is ``E[exp(s N)]``.  The series is summed under ``ctrl``; a
    diverging sum (large ``s`` or fast-growing moments) raises
    :class:`~fcplab.errors.ConvergenceError`.
    """
    mu, th, ze = _check_shape(shape)
    if s == 0:
        return 1.0
    u = math.expm1(s)
    lu = math.log(abs(u))
    cache: dict[int, float] = {}

    def lmom(j):
        if j not in cache:
            v = mp.moment(j)
            if not math.isfinite(v):
                raise ConvergenceError(f"moment of order {mp.theta * j} is infinite; "
                                       "the generating function diverges")
            cache[j] = math.log(v) if v > 0 else -math.inf
        return cache[j]

    def gen(k):
        kk = k[:, None].astype(float)
        lm_h = np.array([[lmom(int(j))] for j in k])
        a = sc.gammaln(ze + kk) - math.lgamma(ze)
        b = sc.gammaln(kk + 1)
        g = sc.gammaln(mu * kk + th)
        lm = math.lgamma(th) + a + kk * lu - b - g + lm_h
        sg = np.where((k[:, None] % 2 == 1) & (u < 0), -1.0, 1.0)
        return lm, sg, np.abs(a) + np.abs(b) + np.abs(g) + np.abs(lm_h) + np.abs(kk * lu)

    v, _, _ = series_columns(gen, 1, ctrl, what="Bell generating function")
    return float(v[0])


def gfbp_gen_fn(s: float, x: float, shape, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Generating function of ``B_G(x, m)``: the deterministic-provider case."""
    return sgfbp_gen_fn(s, MomentProvider.deterministic(x), shape, ctrl)


def tcfcp_moment(model, p: int, t: float) -> float:
    """``E[Z(t)^p]`` for the time-changed process.

    The provider is ``E[X^(theta j)] = lambda^j E[H(t)^(theta j)]``; moments
    of the clock up to order ``theta p`` must exist.
    """
    if p < 1 or int(p) != p:
        raise ValidationError("moment order must be a positive integer")
    if not (t >= 0 and math.isfinite(t)):
        raise ValidationError("time must be finite and nonnegative")
    if t == 0:
        return 0.0
    prm = model.params
    lam, th = prm.lambda_theta, prm.theta_t
    clock = model.clock

    def fn(q):
        if q == 0:
            return 1.0
        return lam ** (q / th) * clock.moment(q, t)[0]

    return sgfbp(MomentProvider(fn, th), int(p), prm.shape)
