"""Compound laws built on the counting process.

Additive (``sum_{i <= N} Y_i``) and multiplicative (``prod_{j <= N} X_j``)
compounds, with the count taken either at deterministic time or at a
random clock.  In both cases

    P[compound in A] = sum_m P[N = m] P[m-fold sum (or product) in A],

so every formula here is the count distribution contracted against the
m-fold law of the jumps.  The empty sum is 0 and the empty product is 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special as sc
from scipy import stats

from . import fcp_core
from .errors import UnsupportedError, ValidationError
from .fcp_core import FcpParams
from .special_fn import DEFAULT_CONTROL, SeriesControl

__all__ = [
    "DiscretePmf",
    "Bernoulli",
    "PoissonJump",
    "Geometric",
    "BetaUnit",
    "GammaJump",
    "ContinuousDensity",
    "JumpSpec",
    "ConvolutionTable",
    "fgcp_cdf",
    "fgcp_mean",
    "fgcp_variance",
    "fgcp_pmf_discrete",
    "fgcp_levy_cdf",
    "fgcp_levy_pmf_discrete",
    "mcfcp_cdf",
    "mcfcp_point_mass",
    "mcfcp_levy_cdf",
    "mcfcp_levy_point_mass",
    "mcfcp_levy_density_beta",
]


# ---------------------------------------------------------------------------
# jump families


@dataclass(frozen=True)
class DiscretePmf:
    """Integer-valued jumps with an explicit finite pmf."""

    support: tuple
    probs: tuple
    integer_valued = True

    def __post_init__(self):
        sup = tuple(int(v) for v in self.support)
        pr = tuple(float(v) for v in self.probs)
        if len(sup) != len(pr) or not sup:
            raise ValidationError("support and probs must be nonempty and of equal length")
        if len(set(sup)) != len(sup):
            raise ValidationError("support values must be distinct")
        if min(sup) < 0:
            raise ValidationError("support must be nonnegative")
        if min(pr) < 0 or abs(math.fsum(pr) - 1.0) > 1e-12:
            raise ValidationError("probs must be nonnegative and sum to 1")
        object.__setattr__(self, "support", sup)
        object.__setattr__(self, "probs", pr)

    @property
    def mean(self) -> float:
        return math.fsum(s * p for s, p in zip(self.support, self.probs))

    @property
    def variance(self) -> float:
        m = self.mean
        return math.fsum((s - m) ** 2 * p for s, p in zip(self.support, self.probs))

    def pmf_array(self, s_max: int) -> np.ndarray:
        out = np.zeros(s_max + 1)
        for s, p in zip(self.support, self.probs):
            if s <= s_max:
                out[s] += p
        return out

    def sample(self, rng, size):
        return rng.choice(np.array(self.support), size=size, p=np.array(self.probs))


@dataclass(frozen=True)
class Bernoulli:
    """Jumps in ``{0, 1}`` with ``P[Y = 1] = p``."""

    p: float
    integer_valued = True

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValidationError("Bernoulli p must lie in [0, 1]")

    @property
    def mean(self) -> float:
        return self.p

    @property
    def variance(self) -> float:
        return self.p * (1.0 - self.p)

    def pmf_array(self, s_max: int) -> np.ndarray:
        out = np.zeros(s_max + 1)
        out[0] = 1.0 - self.p
        if s_max >= 1:
            out[1] = self.p
        return out

    def mfold_pmf(self, m: int, s: np.ndarray) -> np.ndarray:
        return stats.binom.pmf(s, m, self.p)

    def mfold_cdf(self, m: int, y: float) -> float:
        return float(stats.binom.cdf(math.floor(y), m, self.p)) if y >= 0 else 0.0

    def product_cdf(self, m: int, y: float) -> float:
        """``P[X_1 ... X_m <= y]``; the product is Bernoulli(p^m)."""
        if y < 0:
            return 0.0
        if y >= 1:
            return 1.0
        return 1.0 - self.p ** m

    def product_mass_at_one(self, m: int) -> float:
        return self.p ** m

    def sample(self, rng, size):
        return (rng.random(size) < self.p).astype(float)


@dataclass(frozen=True)
class PoissonJump:
    """Poisson(rho) jumps; the m-fold sum is Poisson(m rho)."""

    rho: float
    integer_valued = True

    def __post_init__(self):
        if not self.rho > 0:
            raise ValidationError("Poisson jump rate must be positive")

    @property
    def mean(self) -> float:
        return self.rho

    @property
    def variance(self) -> float:
        return self.rho

    def pmf_array(self, s_max: int) -> np.ndarray:
        return stats.poisson.pmf(np.arange(s_max + 1), self.rho)

    def mfold_pmf(self, m: int, s: np.ndarray) -> np.ndarray:
        return stats.poisson.pmf(s, m * self.rho)

    def mfold_cdf(self, m: int, y: float) -> float:
        return float(stats.poisson.cdf(math.floor(y), m * self.rho)) if y >= 0 else 0.0

    def sample(self, rng, size):
        return rng.poisson(self.rho, size).astype(float)


@dataclass(frozen=True)
class Geometric:
    """Jumps on ``{1, 2, ...}`` with ``P[Y = k] = p (1 - p)^(k - 1)``.

    The m-fold sum is negative binomial,
    ``b_s^{*m} = C(s - 1, m - 1) p^m (1 - p)^(s - m)``.
    """

    p: float
    integer_valued = True

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValidationError("geometric p must lie in (0, 1]")

    @property
    def mean(self) -> float:
        return 1.0 / self.p

    @property
    def variance(self) -> float:
        return (1.0 - self.p) / self.p ** 2

    def pmf_array(self, s_max: int) -> np.ndarray:
        k = np.arange(s_max + 1)
        return np.where(k >= 1, stats.geom.pmf(k, self.p), 0.0)

    def mfold_pmf(self, m: int, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s)
        return np.where(s >= m, stats.nbinom.pmf(s - m, m, self.p), 0.0)

    def mfold_cdf(self, m: int, y: float) -> float:
        if y < m:
            return 0.0
        return float(stats.nbinom.cdf(math.floor(y) - m, m, self.p))

    def sample(self, rng, size):
        return rng.geometric(self.p, size).astype(float)


@dataclass(frozen=True)
class BetaUnit:
    """Beta factors whose running products are Beta(1, m).

    The j-th factor is Beta(j, 1) (density ``j x^(j-1)``), the ``c = d = 1``
    case of Fan's product theorem, so ``R_m = X_1 ... X_m`` has density
    ``(1 - y)^(m-1) / B(1, m)`` and cdf ``1 - (1 - y)^m``.  Note that a
    product of iid uniforms would instead have density
    ``(-log y)^(m-1) / (m-1)!``.
    """

    integer_valued = False

    def product_cdf(self, m: int, y: float) -> float:
        if y <= 0:
            return 0.0
        if y >= 1:
            return 1.0
        return -math.expm1(m * math.log1p(-y))

    def product_pdf(self, m: int, y: float) -> float:
        if not 0.0 < y < 1.0:
            return 0.0
        return m * (1.0 - y) ** (m - 1)

    def product_mass_at_one(self, m: int) -> float:
        return 0.0

    def sample_factors(self, rng, m: int) -> np.ndarray:
        """``X_1, ..., X_m`` with ``X_j ~ Beta(j, 1)``."""
        j = np.arange(1, m + 1)
        return rng.random(m) ** (1.0 / j)


@dataclass(frozen=True)
class GammaJump:
    """Gamma(shape a, scale b) jumps; the m-fold sum is Gamma(m a, scale b)."""

    a: float
    b: float
    integer_valued = False

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValidationError("gamma jump shape and scale must be positive")

    @property
    def mean(self) -> float:
        return self.a * self.b

    @property
    def variance(self) -> float:
        return self.a * self.b ** 2

    def mfold_cdf(self, m: int, y: float) -> float:
        return float(sc.gammainc(m * self.a, y / self.b)) if y > 0 else 0.0

    def mfold_pdf(self, m: int, y: float) -> float:
        return float(stats.gamma.pdf(y, m * self.a, scale=self.b))

    def sample(self, rng, size):
        return rng.gamma(self.a, self.b, size)


@dataclass(frozen=True)
class ContinuousDensity:
    """Continuous jumps described by callbacks.

    Parameters
    ----------
    density : callable
        ``f_Y(y)``.
    mfold_cdf_fn : callable
        ``(m, y) -> P[Y_1 + ... + Y_m <= y]``; the library does not build
        convolutions of arbitrary densities itself.
    mean, variance : float
    sampler : callable, optional
        ``(rng, size) -> draws``.
    """

    density: Callable[[float], float]
    mfold_cdf_fn: Optional[Callable[[int, float], float]]
    mean: float
    variance: float
    sampler: Optional[Callable] = field(default=None, compare=False)
    integer_valued = False

    def mfold_cdf(self, m: int, y: float) -> float:
        if self.mfold_cdf_fn is None:
            raise UnsupportedError("no m-fold convolution supplied for this density")
        return float(self.mfold_cdf_fn(m, y))

    def sample(self, rng, size):
        if self.sampler is None:
            raise UnsupportedError("no sampler supplied for this density")
        return self.sampler(rng, size)


JumpSpec = (DiscretePmf, Bernoulli, PoissonJump, Geometric, BetaUnit, GammaJump, ContinuousDensity)


def _check_jump(jump, additive: bool = False) -> None:
    if not isinstance(jump, JumpSpec):
        raise ValidationError(f"unsupported jump {jump!r}")
    if additive and not (hasattr(jump, "mfold_cdf") or hasattr(jump, "pmf_array")):
        raise UnsupportedError(f"{type(jump).__name__} jumps define products only")


# ---------------------------------------------------------------------------
# m-fold convolutions of integer jumps


@dataclass
class ConvolutionTable:
    """``b[m, s] = P[Y_1 + ... + Y_m = s]`` for ``m <= m_max``, ``s <= s_max``.

    Rows are built by repeated discrete convolution of the jump pmf; mass
    that lands beyond ``s_max`` is recorded per row in ``tail``.
    """

    b: np.ndarray
    tail: np.ndarray

    @classmethod
    def build(cls, jump, m_max: int, s_max: int) -> "ConvolutionTable":
        _check_jump(jump)
        if not jump.integer_valued:
            raise UnsupportedError("convolution tables need integer-valued jumps")
        if m_max < 0 or s_max < 0:
            raise ValidationError("table sizes must be nonnegative")
        base = jump.pmf_array(s_max)
        b = np.zeros((m_max + 1, s_max + 1))
        b[0, 0] = 1.0
        for m in range(1, m_max + 1):
            b[m] = np.convolve(b[m - 1], base)[: s_max + 1]
        tail = np.maximum(0.0, 1.0 - b.sum(axis=1))
        return cls(b, tail)

    @property
    def m_max(self) -> int:
        return self.b.shape[0] - 1

    @property
    def s_max(self) -> int:
        return self.b.shape[1] - 1


# ---------------------------------------------------------------------------
# additive compound


def _fcp_counts(params: FcpParams, t: float, ctrl: SeriesControl) -> np.ndarray:
    if t == 0:
        return np.ones(1)
    return fcp_core.fcp_pmf_auto(params, t, ctrl).probs


def _levy_counts(params: FcpParams, sub, t: float, ctrl: SeriesControl,
                 allow_asymptotic: bool = False) -> np.ndarray:
    from .tcfcp import TcfcpModel, tcfcp_pmf_auto
    if t == 0:
        return np.ones(1)
    model = TcfcpModel(params, sub, ctrl, allow_asymptotic)
    return tcfcp_pmf_auto(model, t).probs


def _sum_cdf(counts: np.ndarray, jump, y: float) -> float:
    _check_jump(jump, additive=True)
    if not hasattr(jump, "mfold_cdf"):
        if y < 0:
            return 0.0
        table = ConvolutionTable.build(jump, counts.size - 1, int(math.floor(y)))
        rows = table.b.sum(axis=1)
        return float(min(1.0, max(0.0, math.fsum((counts * rows).tolist()))))
    total = [counts[0] * (1.0 if y >= 0 else 0.0)]
    for m in range(1, counts.size):
        if counts[m] == 0.0:
            continue
        total.append(counts[m] * jump.mfold_cdf(m, y))
    return float(min(1.0, max(0.0, math.fsum(total))))


def fgcp_cdf(params: FcpParams, jump, y: float, t: float,
             ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``P[sum_{i <= N(t)} Y_i <= y]``.

    Examples
    --------
    >>> round(fgcp_cdf(FcpParams.poisson(1.0), Bernoulli(0.5), 0.5, 1.0), 10)
    0.6065306597
    """
    fcp_core._check_t(t)
    return _sum_cdf(_fcp_counts(params, t, ctrl), jump, y)


def fgcp_mean(params: FcpParams, jump, t: float) -> float:
    """``M_Y E N(t)``."""
    _check_jump(jump, additive=True)
    return jump.mean * fcp_core.fcp_mean(params, t)


def fgcp_variance(params: FcpParams, jump, t: float) -> float:
    """``(M_Y^2 + V_Y^2) E N + (M_Y E N)^2 d`` with ``d`` the dispersion factor."""
    _check_jump(jump, additive=True)
    en = fcp_core.fcp_mean(params, t)
    m, v = jump.mean, jump.variance
    return (m * m + v) * en + (m * en) ** 2 * fcp_core.dispersion_factor(params)


def _sum_pmf(counts: np.ndarray, jump, s: int) -> float:
    _check_jump(jump, additive=True)
    if not jump.integer_valued:
        raise UnsupportedError("point probabilities need integer-valued jumps")
    if s < 0 or int(s) != s:
        raise ValidationError("s must be a nonnegative integer")
    s = int(s)
    if hasattr(jump, "mfold_pmf"):
        m = np.arange(1, counts.size)
        rows = np.array([jump.mfold_pmf(int(k), s) for k in m]) if m.size else np.zeros(0)
    else:
        table = ConvolutionTable.build(jump, counts.size - 1, s)
        rows = table.b[1:, s]
    total = counts[0] * (1.0 if s == 0 else 0.0) + math.fsum((counts[1:] * rows).tolist())
    return float(min(1.0, max(0.0, total)))


def fgcp_pmf_discrete(params: FcpParams, jump, s: int, t: float,
                      ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``P[sum_{i <= N(t)} Y_i = s]`` for integer jumps."""
    fcp_core._check_t(t)
    return _sum_pmf(_fcp_counts(params, t, ctrl), jump, s)


def fgcp_levy_cdf(params: FcpParams, sub, jump, y: float, t: float,
                  ctrl: SeriesControl = DEFAULT_CONTROL, allow_asymptotic: bool = False) -> float:
    """Additive compound at a random clock: ``P[sum_{i <= N(H(t))} Y_i <= y]``."""
    fcp_core._check_t(t)
    return _sum_cdf(_levy_counts(params, sub, t, ctrl, allow_asymptotic), jump, y)


def fgcp_levy_pmf_discrete(params: FcpParams, sub, jump, s: int, t: float,
                           ctrl: SeriesControl = DEFAULT_CONTROL,
                           allow_asymptotic: bool = False) -> float:
    """``P[sum_{i <= N(H(t))} Y_i = s]`` for integer jumps.

    Examples
    --------
    >>> from fcplab.subordinators import Drift
    >>> p = FcpParams.poisson(2.0)
    >>> round(fgcp_levy_pmf_discrete(p, Drift(1.0), Geometric(0.3), 0, 1.0), 12) == round(math.exp(-2), 12)
    True
    """
    fcp_core._check_t(t)
    return _sum_pmf(_levy_counts(params, sub, t, ctrl, allow_asymptotic), jump, s)


# ---------------------------------------------------------------------------
# multiplicative compound


def _product_cdf(counts: np.ndarray, jump, y: float) -> float:
    _check_jump(jump)
    if not hasattr(jump, "product_cdf"):
        raise UnsupportedError(f"no closed-form product law for {type(jump).__name__} jumps")
    total = [counts[0] * (1.0 if y >= 1 else 0.0)]
    for m in range(1, counts.size):
        if counts[m] == 0.0:
            continue
        total.append(counts[m] * jump.product_cdf(m, y))
    return float(min(1.0, max(0.0, math.fsum(total))))


def _product_mass_at_one(counts: np.ndarray, jump) -> float:
    _check_jump(jump)
    if not hasattr(jump, "product_mass_at_one"):
        raise UnsupportedError(f"no closed-form product law for {type(jump).__name__} jumps")
    m = np.arange(1, counts.size)
    atoms = np.array([jump.product_mass_at_one(int(k)) for k in m]) if m.size else np.zeros(0)
    return float(min(1.0, counts[0] + math.fsum((counts[1:] * atoms).tolist())))


def mcfcp_cdf(params: FcpParams, jump, y: float, t: float,
              ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``P[prod_{j <= N(t)} X_j <= y]`` with the empty product equal to 1.

    Examples
    --------
    >>> round(mcfcp_cdf(FcpParams.poisson(1.0), BetaUnit(), 0.5, 1.0), 10)
    0.3934693403
    """
    fcp_core._check_t(t)
    return _product_cdf(_fcp_counts(params, t, ctrl), jump, y)


def mcfcp_point_mass(params: FcpParams, jump, t: float,
                     ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``P[prod_{j <= N(t)} X_j = 1]``."""
    fcp_core._check_t(t)
    return _product_mass_at_one(_fcp_counts(params, t, ctrl), jump)


def mcfcp_levy_cdf(params: FcpParams, sub, jump, y: float, t: float,
                   ctrl: SeriesControl = DEFAULT_CONTROL, allow_asymptotic: bool = False) -> float:
    """Multiplicative compound at a random clock."""
    fcp_core._check_t(t)
    return _product_cdf(_levy_counts(params, sub, t, ctrl, allow_asymptotic), jump, y)


def mcfcp_levy_point_mass(params: FcpParams, sub, jump, t: float,
                          ctrl: SeriesControl = DEFAULT_CONTROL,
                          allow_asymptotic: bool = False) -> float:
    """``P[Z_pi = 1]``; for continuous factors this is the no-event probability."""
    fcp_core._check_t(t)
    return _product_mass_at_one(_levy_counts(params, sub, t, ctrl, allow_asymptotic), jump)


def mcfcp_levy_density_beta(params: FcpParams, sub, y: float, t: float,
                            ctrl: SeriesControl = DEFAULT_CONTROL,
                            allow_asymptotic: bool = False) -> float:
    """Density on ``(0, 1)`` of the :class:`BetaUnit` product at a random clock.

    ``h(y, t) = sum_{m >= 1} z(m, t) m (1 - y)^(m - 1)``.
    """
    if not 0.0 < y < 1.0:
        raise ValidationError("y must lie in (0, 1)")
    fcp_core._check_t(t)
    counts = _levy_counts(params, sub, t, ctrl, allow_asymptotic)
    m = np.arange(1, counts.size, dtype=float)
    with np.errstate(under="ignore"):
        terms = counts[1:] * m * np.exp((m - 1.0) * math.log1p(-y))
    return float(max(0.0, math.fsum(terms.tolist())))
