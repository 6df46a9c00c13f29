"""Levy subordinators used as random clocks.

Every formula for the time-changed process consumes the subordinator only
through its fractional moments ``E[H(t)^p]``.  Besides real moments each
family with a closed form also exposes the analytic continuation
``log E[H(t)^p]`` to complex ``p`` (its Mellin transform), which is what the
Mellin-Barnes evaluation in :mod:`fcplab.tcfcp` integrates.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special as sc

from .errors import MomentNonexistenceError, NumericalError, UnsupportedError, ValidationError

__all__ = [
    "MomentQuality",
    "Drift",
    "AlphaStable",
    "TemperedStable",
    "GammaSub",
    "IncompleteGamma",
    "SubordinatorSpec",
    "frac_moment",
    "laplace_exponent",
    "sample_increment",
    "sample_increments",
    "stable_sample",
]


class MomentQuality(enum.Enum):
    """Whether a moment formula is exact or only valid asymptotically."""

    EXACT = "exact"
    ASYMPTOTIC = "asymptotic"

    def combine(self, other: "MomentQuality") -> "MomentQuality":
        if MomentQuality.ASYMPTOTIC in (self, other):
            return MomentQuality.ASYMPTOTIC
        return MomentQuality.EXACT


def _check_time(t: float) -> None:
    if not (t > 0 and math.isfinite(t)):
        raise ValidationError(f"subordinator time must be positive, got {t}")


@dataclass(frozen=True)
class Drift:
    """Deterministic clock ``H(t) = c t``."""

    c: float = 1.0
    kind = "drift"

    def __post_init__(self):
        if not self.c > 0:
            raise ValidationError("drift rate must be positive")

    def moment(self, p: float, t: float):
        return (self.c * t) ** p, MomentQuality.EXACT

    def log_mellin(self, p, t: float):
        return p * math.log(self.c * t)

    def dlog_mellin_dt(self, p, t: float):
        return p / t

    def mellin_strip(self, t: float):
        return (-math.inf, math.inf)

    def laplace_exponent(self, s: float) -> float:
        return self.c * s

    def sample(self, dt: float, rng: np.random.Generator, size=None):
        if size is None:
            return self.c * dt
        return np.full(size, self.c * dt)


@dataclass(frozen=True)
class AlphaStable:
    """One-sided stable subordinator with ``E exp(-s H(t)) = exp(-t s^alpha)``."""

    alpha: float
    kind = "stable"

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError("stable index must lie in (0, 1)")

    def moment(self, p: float, t: float):
        a = self.alpha
        if p >= a:
            raise MomentNonexistenceError(
                f"E[H^p] is infinite for the {a}-stable subordinator when p={p} >= {a}")
        if p == 0:
            return 1.0, MomentQuality.EXACT
        v = math.exp(math.lgamma(1 - p / a) - math.lgamma(1 - p) + (p / a) * math.log(t))
        return v, MomentQuality.EXACT

    def log_mellin(self, p, t: float):
        a = self.alpha
        return sc.loggamma(1 - p / a) - sc.loggamma(1 - p) + (p / a) * math.log(t)

    def dlog_mellin_dt(self, p, t: float):
        return p / (self.alpha * t)

    def mellin_strip(self, t: float):
        return (-math.inf, self.alpha)

    def laplace_exponent(self, s: float) -> float:
        return s ** self.alpha

    def sample(self, dt: float, rng: np.random.Generator, size=None):
        return dt ** (1.0 / self.alpha) * stable_sample(self.alpha, rng, size)


@dataclass(frozen=True)
class TemperedStable:
    """Exponentially tempered stable subordinator.

    Laplace exponent ``(s + varphi)^alpha - varphi^alpha``.  The closed-form
    moment is the large-``t`` asymptote ``(alpha varphi^(alpha-1) t)^p``;
    :meth:`exact_moment` integrates the Laplace transform instead.
    """

    alpha: float
    varphi: float
    kind = "tempered"

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError("stable index must lie in (0, 1)")
        if not self.varphi > 0:
            raise ValidationError("tempering parameter must be positive")

    def moment(self, p: float, t: float):
        if p < 0:
            raise MomentNonexistenceError("asymptotic tempered-stable moment needs p >= 0")
        return (self.alpha * self.varphi ** (self.alpha - 1) * t) ** p, MomentQuality.ASYMPTOTIC

    def exact_moment(self, p: float, t: float, nodes: int = 4000) -> float:
        """``E[H(t)^p]`` from ``(1/Gamma(m-p)) int u^(m-p-1) E[H^m e^(-uH)] du``.

        ``m`` is a nonnegative integer with ``m - p >= 1``; the
        derivatives of ``exp(-t psi(u))`` follow from a Faa di Bruno
        recursion on the exponent.
        """
        _check_time(t)
        if p == 0:
            return 1.0
        m = max(0, math.floor(p) + 2)
        a, ph = self.alpha, self.varphi
        v = np.linspace(-45.0, 45.0, nodes)
        u = np.exp(v)
        base = u + ph
        f = [-t * ((base ** a) - ph ** a)]
        for j in range(1, m + 1):
            f.append(-t * sc.poch(a - j + 1, j) * base ** (a - j))
        lap = [np.exp(f[0])]
        for k in range(1, m + 1):
            acc = np.zeros_like(u)
            for i in range(k):
                acc = acc + math.comb(k - 1, i) * f[i + 1] * lap[k - 1 - i]
            lap.append(acc)
        g = (-1) ** m * lap[m]
        integrand = np.exp((m - p) * v) * g
        val = np.trapezoid(integrand, v) / math.gamma(m - p)
        return float(val)

    def asymptotic_law(self) -> Drift:
        """The clock whose exact moments equal the asymptotic ones."""
        return Drift(self.alpha * self.varphi ** (self.alpha - 1))

    def laplace_exponent(self, s: float) -> float:
        return (s + self.varphi) ** self.alpha - self.varphi ** self.alpha

    def sample(self, dt: float, rng: np.random.Generator, size=None, retry_cap: int = 10**6):
        # split the step so each piece is accepted with probability >= e^-1
        pieces = max(1, math.ceil(dt * self.varphi ** self.alpha))
        h = dt / pieces
        scale = h ** (1.0 / self.alpha)
        shape = (1,) if size is None else (int(np.prod(size)),)
        total = np.zeros(shape)
        for _ in range(pieces):
            out = np.empty(shape)
            todo = np.arange(shape[0])
            tries = 0
            while todo.size:
                s = scale * stable_sample(self.alpha, rng, todo.size)
                ok = rng.random(todo.size) < np.exp(-self.varphi * s)
                out[todo[ok]] = s[ok]
                todo = todo[~ok]
                tries += 1
                if tries > retry_cap:
                    raise NumericalError("tempered-stable rejection sampler exceeded its retry cap")
            total += out
        if size is None:
            return float(total[0])
        return total.reshape(size)


@dataclass(frozen=True)
class GammaSub:
    """Gamma subordinator: ``H(t) ~ Gamma(shape a_g t, rate r_g)``."""

    a_g: float
    r_g: float
    kind = "gamma"

    def __post_init__(self):
        if not (self.a_g > 0 and self.r_g > 0):
            raise ValidationError("gamma subordinator needs positive shape rate and rate")

    def moment(self, p: float, t: float):
        at = self.a_g * t
        if p <= -at:
            raise MomentNonexistenceError(f"E[H^p] is infinite for p={p} <= -a_g t={-at}")
        return math.exp(math.lgamma(at + p) - math.lgamma(at) - p * math.log(self.r_g)), \
            MomentQuality.EXACT

    def log_mellin(self, p, t: float):
        at = self.a_g * t
        return sc.loggamma(at + p) - sc.gammaln(at) - p * math.log(self.r_g)

    def dlog_mellin_dt(self, p, t: float):
        at = self.a_g * t
        return self.a_g * (sc.psi(at + p) - sc.psi(at))

    def mellin_strip(self, t: float):
        return (-self.a_g * t, math.inf)

    def laplace_exponent(self, s: float) -> float:
        return self.a_g * math.log1p(s / self.r_g)

    def sample(self, dt: float, rng: np.random.Generator, size=None):
        return rng.gamma(self.a_g * dt, 1.0 / self.r_g, size)


@dataclass(frozen=True)
class IncompleteGamma:
    """Incomplete-gamma subordinator, known here only through its moment asymptote.

    ``E[D(t)^p] ~ Gamma(1 - p/alpha) / Gamma(1 - p) t^(p/alpha)`` as
    ``t -> inf`` for ``p <= alpha``.
    """

    alpha: float
    asymptotic_only: bool = True
    kind = "incomplete_gamma"

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValidationError("index must lie in (0, 1]")

    def moment(self, p: float, t: float):
        a = self.alpha
        if p > a or (a < 1 and p == a):
            raise MomentNonexistenceError(f"asymptotic moment needs p < alpha={a}")
        if a == 1.0:
            return t ** p, MomentQuality.ASYMPTOTIC
        v = math.exp(math.lgamma(1 - p / a) - math.lgamma(1 - p) + (p / a) * math.log(t))
        return v, MomentQuality.ASYMPTOTIC

    def asymptotic_law(self):
        """The clock whose exact moments equal the asymptotic ones."""
        if self.alpha == 1.0:
            return Drift(1.0)
        return AlphaStable(self.alpha)

    def laplace_exponent(self, s: float) -> float:
        raise UnsupportedError("the incomplete-gamma subordinator is declared asymptotic-only")

    def sample(self, dt, rng, size=None):
        raise UnsupportedError("no sampler for the incomplete-gamma subordinator")


SubordinatorSpec = Union[Drift, AlphaStable, TemperedStable, GammaSub, IncompleteGamma]


def stable_sample(alpha: float, rng: np.random.Generator, size=None):
    """Standard one-sided stable draws with Laplace transform ``exp(-s^alpha)``.

    Kanter's representation: ``(A(U)/E)^((1-alpha)/alpha)`` with ``U``
    uniform on ``(0, pi)`` and ``E`` standard exponential.
    """
    u = rng.uniform(0.0, math.pi, size)
    e = rng.standard_exponential(size)
    a = alpha
    part = np.sin(a * u) / np.sin(u) ** (1.0 / a)
    return part * (np.sin((1.0 - a) * u) / e) ** ((1.0 - a) / a)


def frac_moment(spec: SubordinatorSpec, p: float, t: float):
    """``E[H(t)^p]`` and its :class:`MomentQuality`.

    Examples
    --------
    >>> frac_moment(Drift(1.0), 2, 3.0)[0]
    9.0
    """
    _check_time(t)
    return spec.moment(p, t)


def laplace_exponent(spec: SubordinatorSpec, s: float) -> float:
    """``psi(s)`` with ``E exp(-s H(t)) = exp(-t psi(s))``."""
    if not s >= 0:
        raise ValidationError("Laplace exponent argument must be nonnegative")
    return spec.laplace_exponent(s)


def sample_increment(spec: SubordinatorSpec, dt: float, rng: np.random.Generator) -> float:
    """One draw of ``H(dt)``."""
    _check_time(dt)
    return float(spec.sample(dt, rng))


def sample_increments(spec: SubordinatorSpec, dt: float, rng: np.random.Generator,
                      size: int) -> np.ndarray:
    """``size`` independent draws of ``H(dt)``."""
    _check_time(dt)
    return np.asarray(spec.sample(dt, rng, size), dtype=float)
