"""The fractional counting process (FCP).

With ``x = lambda_theta * t**theta`` the one-dimensional law is

    P(n, t) = Gamma(theta_v) x^n / n! (zeta)_n E^{zeta+n}_{mu, theta_v + n mu}(-x),

which contains the Poisson law (``mu = theta_v = zeta = theta_t = 1``) and
several fractional Poisson variants as special cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NegativeProbabilityError, ValidationError
from .special_fn import (DEFAULT_CONTROL, MlArgs, SeriesControl, count_kernel, log_beta,
                         ml3)

NEG_CLAMP = 1e-12

__all__ = [
    "FcpParams",
    "PmfVector",
    "fcp_x",
    "fcp_pmf",
    "fcp_pmf_vector",
    "fcp_pmf_auto",
    "fcp_pgf",
    "fcp_laplace",
    "fcp_mgf",
    "fcp_mean",
    "fcp_variance",
    "fcp_moment",
    "fcp_survival",
    "order_stat_cond_cdf",
    "dispersion_factor",
    "relative_mean_deviation",
    "increment_gap",
]


@dataclass(frozen=True)
class FcpParams:
    """Parameters ``(mu, theta_v, zeta, theta_t, lambda_theta)`` of the FCP.

    Constraints: ``0 < mu <= 1``, ``zeta > 0``, ``theta_v >= mu * zeta``,
    ``0 < theta_t <= 1`` and ``lambda_theta > 0``.
    """

    mu: float
    theta_v: float
    zeta: float
    theta_t: float
    lambda_theta: float

    def __post_init__(self):
        problems = []
        if not (0.0 < self.mu <= 1.0):
            problems.append(f"mu={self.mu} not in (0, 1]")
        if not self.zeta > 0:
            problems.append(f"zeta={self.zeta} must be positive")
        if not self.theta_v >= self.mu * self.zeta or not self.theta_v > 0:
            problems.append(f"theta_v={self.theta_v} must be >= mu*zeta={self.mu * self.zeta}")
        if not (0.0 < self.theta_t <= 1.0):
            problems.append(f"theta_t={self.theta_t} not in (0, 1]")
        if not self.lambda_theta > 0:
            problems.append(f"lambda_theta={self.lambda_theta} must be positive")
        if problems:
            raise ValidationError("invalid FcpParams: " + "; ".join(problems))

    @classmethod
    def poisson(cls, rate: float) -> "FcpParams":
        """The Poisson special case with intensity ``rate``."""
        return cls(1.0, 1.0, 1.0, 1.0, rate)

    def with_rate(self, lambda_theta: float) -> "FcpParams":
        return FcpParams(self.mu, self.theta_v, self.zeta, self.theta_t, lambda_theta)

    @property
    def shape(self) -> tuple[float, float, float]:
        """The time-free triple ``(mu, theta_v, zeta)``."""
        return (self.mu, self.theta_v, self.zeta)


@dataclass(frozen=True)
class PmfVector:
    """Probabilities ``P(0..n_max, t)`` with bookkeeping.

    Attributes
    ----------
    probs : ndarray
    errors : ndarray
        Absolute error estimate of each entry.
    tail_mass : float
        ``1 - sum(probs)``, the mass beyond ``n_max`` (up to rounding).
    """

    probs: np.ndarray
    errors: np.ndarray
    tail_mass: float

    @property
    def n_max(self) -> int:
        return self.probs.size - 1


def _check_t(t: float) -> None:
    if not (t >= 0 and math.isfinite(t)):
        raise ValidationError(f"time must be finite and nonnegative, got {t}")


def fcp_x(params: FcpParams, t: float) -> float:
    """The operational time ``lambda_theta * t**theta_t``."""
    _check_t(t)
    return params.lambda_theta * t ** params.theta_t if t > 0 else 0.0


def clamp_probs(values: np.ndarray, what: str = "probability") -> np.ndarray:
    """Clip truncation noise into [0, 1]; raise on real violations."""
    values = np.asarray(values, dtype=float)
    if np.any(~np.isfinite(values)):
        raise NegativeProbabilityError(f"non-finite {what} encountered")
    low = float(values.min()) if values.size else 0.0
    if low < -NEG_CLAMP:
        raise NegativeProbabilityError(f"{what} {low:.3e} is negative beyond truncation noise")
    high = float(values.max()) if values.size else 0.0
    if high > 1.0 + 1e-9:
        raise NegativeProbabilityError(f"{what} {high:.12g} exceeds one")
    return np.clip(values, 0.0, 1.0)


def shape_pmf_vector(shape, x: float, n_max: int,
                     ctrl: SeriesControl = DEFAULT_CONTROL) -> PmfVector:
    """Counting-law probabilities for a shape triple at operational time ``x``."""
    mu, th, ze = shape
    v, e, _ = count_kernel(mu, th, ze, x, n_max, ctrl)
    v = clamp_probs(v)
    return PmfVector(v, e, float(1.0 - math.fsum(v.tolist())))


def fcp_pmf_vector(params: FcpParams, t: float, n_max: int,
                   ctrl: SeriesControl = DEFAULT_CONTROL) -> PmfVector:
    """``P(n, t)`` for ``n = 0..n_max`` in one pass."""
    if n_max < 0:
        raise ValidationError("n_max must be >= 0")
    return shape_pmf_vector(params.shape, fcp_x(params, t), int(n_max), ctrl)


def fcp_pmf(params: FcpParams, n: int, t: float,
            ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Probability ``P[N(t) = n]``.

    Examples
    --------
    >>> round(fcp_pmf(FcpParams.poisson(1.5), 0, 2.0), 10)
    0.0497870684
    """
    if n < 0 or int(n) != n:
        raise ValidationError("n must be a nonnegative integer")
    return float(fcp_pmf_vector(params, t, int(n), ctrl).probs[int(n)])


def _initial_n_max(mean: float, var: float) -> int:
    return int(max(32, math.ceil(mean + 12.0 * math.sqrt(max(var, 0.0)) + 10)))


def auto_pmf_vector(shape, x: float, ctrl: SeriesControl = DEFAULT_CONTROL,
                    rel_cut: float = 1e-14, run: int = 5, cap: int = 200_000) -> PmfVector:
    """Probabilities truncated adaptively.

    The vector is extended until ``pmf(n) < rel_cut * max`` for ``run``
    consecutive ``n`` past the mode.
    """
    mu, th, ze = shape
    m = ze * math.exp(math.lgamma(th) - math.lgamma(mu + th)) * x
    d = _dispersion(mu, th, ze)
    n_max = _initial_n_max(m, m + m * m * d)
    while True:
        vec = shape_pmf_vector(shape, x, n_max, ctrl)
        p = vec.probs
        top = p.max()
        mode = int(p.argmax())
        tail = p[mode + 1:] < rel_cut * top
        if tail.size >= run and np.all(tail[-run:]):
            cut = mode + 1 + int(np.argmax(np.convolve(tail, np.ones(run), "valid") == run)) + run
            probs = p[:cut]
            return PmfVector(probs, vec.errors[:cut], float(1.0 - math.fsum(probs.tolist())))
        if n_max >= cap:
            return vec
        n_max = min(2 * n_max, cap)


def fcp_pmf_auto(params: FcpParams, t: float,
                 ctrl: SeriesControl = DEFAULT_CONTROL) -> PmfVector:
    """Probabilities with the truncation level chosen automatically."""
    return auto_pmf_vector(params.shape, fcp_x(params, t), ctrl)


def fcp_pgf(params: FcpParams, s: float, t: float,
            ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Probability generating function ``E[s^N(t)]`` for ``0 <= s <= 1``."""
    if not 0.0 <= s <= 1.0:
        raise ValidationError("pgf argument must lie in [0, 1]")
    x = fcp_x(params, t)
    mu, th, ze = params.shape
    return math.exp(math.lgamma(th)) * ml3(MlArgs(mu, th, ze, x * (s - 1.0)), ctrl)


def fcp_laplace(params: FcpParams, s: float, t: float,
                ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Laplace transform ``E[exp(-s N(t))]`` for ``s >= 0``."""
    if not s >= 0:
        raise ValidationError("Laplace argument must be nonnegative")
    return fcp_pgf(params, math.exp(-s), t, ctrl)


fcp_mgf = fcp_laplace


def _mean_factor(shape) -> float:
    mu, th, ze = shape
    return ze * math.exp(math.lgamma(th) - math.lgamma(mu + th))


def _dispersion(mu: float, th: float, ze: float) -> float:
    return (1.0 + 1.0 / ze) * math.exp(log_beta(mu + th, mu + th) - log_beta(2 * mu + th, th)) - 1.0


def dispersion_factor(params: FcpParams) -> float:
    """``(1 + 1/zeta) B(mu+theta_v, mu+theta_v) / B(2mu+theta_v, theta_v) - 1``.

    ``Var N = E N + dispersion_factor * (E N)^2``; it is zero in the Poisson
    case and positive for every fractional parameter set.
    """
    return _dispersion(*params.shape)


def fcp_mean(params: FcpParams, t: float) -> float:
    """``E N(t) = zeta Gamma(theta_v) x / Gamma(mu + theta_v)``."""
    return _mean_factor(params.shape) * fcp_x(params, t)


def fcp_variance(params: FcpParams, t: float) -> float:
    """``Var N(t) = m + m^2 * dispersion_factor`` with ``m = E N(t)``."""
    m = fcp_mean(params, t)
    return m + m * m * dispersion_factor(params)


def fcp_moment(params: FcpParams, p: int, t: float,
               ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Raw moment ``E N(t)^p`` through the generalised Bell polynomial."""
    from .bell_poly import gfbp
    if p < 1 or int(p) != p:
        raise ValidationError("moment order must be a positive integer")
    return gfbp(fcp_x(params, t), int(p), params.shape, ctrl)


def fcp_survival(params: FcpParams, k: int, t: float,
                 ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``P[N(t) >= k]``."""
    if k < 1 or int(k) != k:
        raise ValidationError("k must be a positive integer")
    if t == 0:
        return 0.0
    p = fcp_pmf_vector(params, t, int(k) - 1, ctrl).probs
    return float(min(1.0, max(0.0, 1.0 - math.fsum(p.tolist()))))


def order_stat_cond_cdf(params: FcpParams, g_y_at_x: float, k: int, t: float,
                        ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``P[Y_(k) < x | N(t) >= k]`` for iid marks with cdf value ``G_Y(x)``.

    Thinning the process by ``G_Y(x)`` gives another FCP with rate
    ``lambda_theta * G_Y(x)``, hence the ratio of two survival functions.
    """
    if not 0.0 <= g_y_at_x <= 1.0:
        raise ValidationError("g_y_at_x must lie in [0, 1]")
    den = fcp_survival(params, k, t, ctrl)
    if den <= 0.0:
        raise ZeroDivisionError("P[N(t) >= k] is zero; the conditional law is undefined")
    if g_y_at_x == 0.0:
        return 0.0
    if g_y_at_x == 1.0:
        return 1.0
    num = fcp_survival(params.with_rate(params.lambda_theta * g_y_at_x), k, t, ctrl)
    return min(1.0, num / den)


def relative_mean_deviation(params: FcpParams, t: float,
                            ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``E|N(t)/E N(t) - 1|`` by summation over the probabilities."""
    m = fcp_mean(params, t)
    if m == 0:
        raise ValidationError("mean is zero at t = 0")
    p = fcp_pmf_auto(params, t, ctrl).probs
    n = np.arange(p.size)
    return math.fsum((np.abs(n / m - 1.0) * p).tolist())


def increment_gap(params: FcpParams, s: float, t1: float, t2: float,
                  ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``L(s, t1 + t2) - L(s, t1) L(s, t2)`` for the Laplace transform ``L``.

    A process with independent and stationary increments would give zero.
    """
    lt = lambda u: fcp_laplace(params, s, u, ctrl)  # noqa: E731
    return lt(t1 + t2) - lt(t1) * lt(t2)
