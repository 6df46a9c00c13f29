"""Shock deterioration of a structure driven by the fractional counting process.

Shocks arrive according to the counting law and each one removes a
Gamma(``a``, scale ``b``) amount of resistance, so the accumulated shock
damage is a compound sum with a gamma ``n``-fold convolution:

    f_X(y, t) = sum_{n>=1} P(n, t) (y/b)^(a n - 1) e^(-y/b) / (b Gamma(a n))
              = Gamma(theta_v) e^(-y/b) / y * Upsilon(lambda t^theta, y/b, a).

On top of that a deterministic gradual loss ``S(t)`` is subtracted, and the
structure survives up to ``tau`` while ``r0 - X(tau) - S(tau) >= k_p``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy import special as sc

from . import fcp_core
from .errors import NumericalError, ValidationError
from .fcp_core import FcpParams
from .special_fn import DEFAULT_CONTROL, MlArgs, SeriesControl, ml3

__all__ = [
    "ShockModel",
    "UpsilonArgs",
    "UpsilonBound",
    "UpsilonBoundWarning",
    "upsilon",
    "upsilon_upper_bound",
    "upsilon_bound_report",
    "shock_pdf",
    "shock_cdf",
    "survival",
    "failure_cdf",
    "reliability_curve",
]

# lower bound of the gamma function on the positive axis
GAMMA_MIN = 0.8856


def _no_gradual(t: float) -> float:
    return 0.0


@dataclass(frozen=True)
class ShockModel:
    """Resistance ``R(t) = r0 - X(t) - S(t)`` with failure threshold ``k_p``.

    Parameters
    ----------
    params : FcpParams
        Law of the shock count.
    a, b : float
        Gamma shape and scale of a single shock.
    r0 : float
        Initial resistance, taken as deterministic.
    k_p : float
        Failure threshold, ``0 <= k_p < r0``.
    gradual : callable
        Gradual deterioration ``S(t)``: nondecreasing with ``S(0) = 0``.
    """

    params: FcpParams
    a: float
    b: float
    r0: float
    k_p: float = 0.0
    gradual: Callable[[float], float] = field(default=_no_gradual, compare=False)

    def __post_init__(self):
        problems = []
        if not self.a > 0:
            problems.append("a must be positive")
        if not self.b > 0:
            problems.append("b must be positive")
        if not self.r0 > 0:
            problems.append("r0 must be positive")
        if not 0 <= self.k_p < self.r0:
            problems.append("k_p must satisfy 0 <= k_p < r0")
        if self.gradual(0.0) != 0:
            problems.append("gradual deterioration must vanish at t = 0")
        if problems:
            raise ValidationError("; ".join(problems))

    @property
    def budget(self) -> float:
        """Resistance that may be lost before failure, ``r0 - k_p``."""
        return self.r0 - self.k_p

    def check_gradual(self, taus) -> None:
        """Raise unless ``S`` is nondecreasing on the sorted grid ``taus``."""
        taus = np.sort(np.asarray(taus, dtype=float))
        s = np.array([self.gradual(float(u)) for u in taus])
        if np.any(np.diff(s) < 0):
            raise ValidationError("gradual deterioration decreases on the grid")


@dataclass(frozen=True)
class UpsilonArgs:
    """Arguments ``(p, q, s)`` of the Upsilon kernel."""

    p: float
    q: float
    s: float

    def __post_init__(self):
        if not (self.p >= 0 and self.q >= 0 and self.s > 0):
            raise ValidationError("Upsilon needs p >= 0, q >= 0 and s > 0")
        if not (math.isfinite(self.p) and math.isfinite(self.q) and math.isfinite(self.s)):
            raise ValidationError("Upsilon arguments must be finite")


class UpsilonBoundWarning(UserWarning):
    """The closed-form Upsilon bound fails to exceed Upsilon."""


@dataclass(frozen=True)
class UpsilonBound:
    """Upsilon next to two candidate upper bounds.

    ``printed`` is ``(E(p(q^s - 1)) - 1) / 0.8856``.  ``corrected`` replaces
    the ``1`` by the ``n = 0`` term ``E(-p)`` that the Taylor step actually
    removes; it always dominates Upsilon.
    """

    upsilon: float
    printed: float
    corrected: float

    @property
    def printed_holds(self) -> bool:
        return self.printed > self.upsilon or (self.upsilon == 0 and self.printed >= 0)


def _count_terms(shape, x: float, q: float, s: float, ctrl: SeriesControl):
    """Counting probabilities long enough for weights ``q^(s n) / Gamma(s n)``.

    Those weights peak near ``s n = q``, so the vector must reach past it.
    """
    vec = fcp_core.auto_pmf_vector(shape, x, ctrl)
    need = int(math.ceil((q + 10.0 * math.sqrt(q) + 30.0) / s))
    if vec.n_max < need:
        vec = fcp_core.shape_pmf_vector(shape, x, need, ctrl)
    return vec.probs


def _log_weighted_sum(logs: np.ndarray) -> float:
    logs = logs[np.isfinite(logs)]
    if logs.size == 0:
        return -math.inf
    return float(sc.logsumexp(logs))


def _log_upsilon(args: UpsilonArgs, shape, ctrl: SeriesControl) -> float:
    if args.p == 0 or args.q == 0:
        return -math.inf
    probs = _count_terms(shape, args.p, args.q, args.s, ctrl)
    n = np.arange(1, probs.size, dtype=float)
    with np.errstate(divide="ignore"):
        lp = np.log(probs[1:])
    logs = lp + args.s * n * math.log(args.q) - sc.gammaln(args.s * n)
    return _log_weighted_sum(logs) - math.lgamma(shape[1])


def upsilon(args: UpsilonArgs, shape, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``Upsilon(p, q, s) = sum_{n>=1} (zeta)_n (p q^s)^n E^{zeta+n}_{mu,theta_v+n mu}(-p) / (n! Gamma(s n))``.

    Each summand is a counting probability at operational time ``p``
    divided by ``Gamma(theta_v)``, which is how it is evaluated.

    Examples
    --------
    >>> upsilon(UpsilonArgs(0.0, 2.0, 1.0), (1.0, 1.0, 1.0))
    0.0
    >>> round(upsilon(UpsilonArgs(1.0, 1.0, 1.0), (1.0, 1.0, 1.0)), 10)
    0.5851625972
    """
    return math.exp(_log_upsilon(args, shape, ctrl))


def upsilon_bound_report(args: UpsilonArgs, shape,
                         ctrl: SeriesControl = DEFAULT_CONTROL) -> UpsilonBound:
    """Upsilon together with the printed and the corrected bound."""
    mu, th, ze = shape
    u = upsilon(args, shape, ctrl)
    top = ml3(MlArgs(mu, th, ze, args.p * (args.q ** args.s - 1.0)), ctrl)
    base = ml3(MlArgs(mu, th, ze, -args.p), ctrl)
    return UpsilonBound(u, (top - 1.0) / GAMMA_MIN, (top - base) / GAMMA_MIN)


def upsilon_upper_bound(args: UpsilonArgs, shape,
                        ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """The closed-form bound ``(E^zeta_{mu,theta_v}(p(q^s - 1)) - 1) / 0.8856``.

    The value is returned as written.  When it does not exceed Upsilon
    (always the case for ``q <= 1`` and ``theta_v = 1``) an
    :class:`UpsilonBoundWarning` is issued; :func:`upsilon_bound_report`
    gives a bound that holds.
    """
    rep = upsilon_bound_report(args, shape, ctrl)
    if not rep.printed_holds:
        warnings.warn(
            f"Upsilon bound {rep.printed:.6g} does not exceed Upsilon {rep.upsilon:.6g}; "
            f"corrected bound is {rep.corrected:.6g}", UpsilonBoundWarning, stacklevel=2)
    return rep.printed


def _check_time(t: float) -> None:
    if not (t >= 0 and math.isfinite(t)):
        raise ValidationError("time must be finite and nonnegative")


def shock_pdf(model: ShockModel, y: float, t: float,
              ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Density of the accumulated shock damage at ``y > 0``.

    Examples
    --------
    >>> m = ShockModel(FcpParams.poisson(1.0), a=1.0, b=1.0, r0=5.0)
    >>> round(shock_pdf(m, 1.0, 1.0), 10)
    0.2152692892
    """
    _check_time(t)
    if not y > 0:
        raise ValidationError("the damage density is defined for y > 0")
    if t == 0:
        return 0.0
    x = fcp_core.fcp_x(model.params, t)
    q = y / model.b
    probs = _count_terms(model.params.shape, x, q, model.a, ctrl)
    n = np.arange(1, probs.size, dtype=float)
    with np.errstate(divide="ignore"):
        logs = np.log(probs[1:]) + (model.a * n - 1.0) * math.log(q) - q \
            - sc.gammaln(model.a * n) - math.log(model.b)
    return math.exp(_log_weighted_sum(logs))


def shock_cdf(model: ShockModel, y, t: float,
              ctrl: SeriesControl = DEFAULT_CONTROL):
    """``P[X(t) <= y]``: the atom ``P[N(t) = 0]`` plus the integrated density.

    The integral of each gamma convolution is a regularized incomplete gamma
    function, so no quadrature is needed.  ``y`` may be an array.
    """
    _check_time(t)
    ys = np.asarray(y, dtype=float)
    flat = ys.ravel()
    if t == 0:
        out = np.where(flat >= 0, 1.0, 0.0)
    else:
        x = fcp_core.fcp_x(model.params, t)
        q = np.maximum(flat, 0.0) / model.b
        probs = _count_terms(model.params.shape, x, float(q.max(initial=0.0)), model.a, ctrl)
        n = np.arange(1, probs.size, dtype=float)
        parts = probs[1:, None] * sc.gammainc(model.a * n[:, None], q[None, :])
        out = probs[0] + np.sort(parts, axis=0).sum(axis=0)
        out = np.where(flat < 0, 0.0, np.clip(out, 0.0, 1.0))
    if ys.ndim == 0:
        return float(out[0])
    return out.reshape(ys.shape)


def survival(model: ShockModel, tau: float,
             s_density: Optional[Callable[[float], float]] = None,
             ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``Y(0, tau) = P[r0 - X(tau) - S(tau) >= k_p]``.

    With ``s_density`` the gradual loss at ``tau`` is random with that
    density on ``[0, inf)`` and ``model.gradual`` is ignored; the survival
    probability is then ``int F_X(r0 - s - k_p, tau) f_S(s) ds``.
    """
    _check_time(tau)
    if s_density is None:
        room = model.budget - float(model.gradual(tau))
        if room < 0:
            return 0.0
        return shock_cdf(model, room, tau, ctrl)
    if tau == 0:
        return 1.0
    val, err = integrate.quad(lambda s: shock_cdf(model, model.budget - s, tau, ctrl) * s_density(s),
                              0.0, model.budget, limit=200, epsabs=1e-12, epsrel=1e-10)
    if not math.isfinite(val) or err > 1e-6:
        raise NumericalError(f"survival quadrature error estimate {err:.3g} is too large")
    return min(max(val, 0.0), 1.0)


def failure_cdf(model: ShockModel, tau: float,
                s_density: Optional[Callable[[float], float]] = None,
                ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """``F_T(tau) = Q(0, tau) = 1 - Y(0, tau)``."""
    return 1.0 - survival(model, tau, s_density, ctrl)


def reliability_curve(model: ShockModel, taus,
                      ctrl: SeriesControl = DEFAULT_CONTROL):
    """Survival and failure probabilities along a time grid.

    Returns
    -------
    survival, failure : ndarray
    """
    taus = np.asarray(taus, dtype=float)
    model.check_gradual(taus)
    y = np.array([survival(model, float(u), ctrl=ctrl) for u in taus])
    return y, 1.0 - y
