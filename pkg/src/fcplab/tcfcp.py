"""The counting process run on a random clock: ``Z(t) = N(H(t))``.

Given ``H(t)`` the count is fractional-counting distributed with operational
time ``lambda_theta H(t)^theta``, so everything about ``Z`` is an average of
the plain law over the fractional moments of the clock.  The term-by-term
moment series

    z(n, t) = (zeta)_n Gamma(theta_v) lambda^n / n!
              sum_k (-lambda)^k (zeta + n)_k / (k! Gamma(mu (n + k) + theta_v)) E[H(t)^(theta (n + k))]

is available as ``method="series"``.  It only makes sense when every
moment exists and the alternating sum converges, which fails for stable
clocks (moments stop at order ``alpha``) and for gamma clocks (factorial
moment growth).  The default evaluates the same quantity as a
Mellin-Barnes integral over the clock's Mellin transform, which needs only
the moments on a strip and is exact for all supported clocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sc

from . import fcp_core
from .errors import MomentNonexistenceError, ValidationError
from .fcp_core import FcpParams, PmfVector, clamp_probs
from .mellin import fcp_log_mellin, fcp_mellin_upper, mixed_poisson_probs
from .special_fn import DEFAULT_CONTROL, SeriesControl, series_columns
from .subordinators import AlphaStable, Drift, MomentQuality, SubordinatorSpec

METHODS = ("auto", "series", "mellin")

__all__ = [
    "TcfcpModel",
    "TcfcpPmf",
    "tcfcp_pmf",
    "tcfcp_pmf_vector",
    "tcfcp_pmf_auto",
    "tcfcp_lt",
    "tcfcp_pgf",
    "tcfcp_mgf",
    "tcfcp_mean",
    "tcfcp_variance",
    "waiting_time_pdf",
    "first_passage_survival",
    "first_passage_pdf",
    "tcfcp_increment_gap",
    "tcfcp_summed_moment",
    "power_tail_sum",
]


@dataclass(frozen=True)
class TcfcpModel:
    """Counting-law parameters together with a clock.

    Parameters
    ----------
    params : FcpParams
    sub : SubordinatorSpec
    ctrl : SeriesControl
    allow_asymptotic : bool
        Clocks known only through large-time moment asymptotes
        (tempered stable, incomplete gamma) are refused unless this is set.
        They are then replaced by the clock whose exact moments equal those
        asymptotes, and results carry ``MomentQuality.ASYMPTOTIC``.
    method : {"auto", "series", "mellin"}
    """

    params: FcpParams
    sub: SubordinatorSpec
    ctrl: SeriesControl = DEFAULT_CONTROL
    allow_asymptotic: bool = False
    method: str = "auto"
    _clock: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.params, FcpParams):
            raise ValidationError("params must be FcpParams")
        if self.method not in METHODS:
            raise ValidationError(f"method must be one of {METHODS}")
        sub = self.sub
        if isinstance(sub, AlphaStable) and self.params.theta_t >= sub.alpha:
            raise ValidationError(
                f"theta={self.params.theta_t} >= alpha={sub.alpha}: E[H^theta] is infinite, "
                "so no moment beyond order zero exists")
        if hasattr(sub, "log_mellin"):
            clock = sub
        elif self.allow_asymptotic:
            clock = sub.asymptotic_law()
        else:
            raise ValidationError(
                f"the {sub.kind} clock has only asymptotic moments; pass allow_asymptotic=True")
        object.__setattr__(self, "_clock", clock)

    @property
    def clock(self):
        """The clock actually used (the asymptotic surrogate if one applies)."""
        return self._clock

    @property
    def quality(self) -> MomentQuality:
        return MomentQuality.EXACT if self._clock is self.sub else MomentQuality.ASYMPTOTIC

    def _route(self) -> str:
        if self.method != "auto":
            return self.method
        return "drift" if isinstance(self._clock, Drift) else "mellin"


@dataclass(frozen=True)
class TcfcpPmf(PmfVector):
    """:class:`PmfVector` tagged with the quality of the clock moments."""

    quality: MomentQuality = MomentQuality.EXACT


def _check_t(t: float) -> None:
    if not (t >= 0 and math.isfinite(t)):
        raise ValidationError(f"time must be finite and nonnegative, got {t}")


# ---------------------------------------------------------------------------
# evaluation routes


def _drift_params(model: TcfcpModel, rate: float):
    """Plain parameters and time giving the same law as a drift clock."""
    return model.params.with_rate(rate), model._clock.c


def _mellin_setup(model: TcfcpModel, t: float, rate: float):
    p = model.params
    th = p.theta_t
    clock = model._clock
    lr = math.log(rate)
    shape = p.shape

    def log_mv(s):
        return -s * lr + clock.log_mellin(-th * s, t) + fcp_log_mellin(shape, s)

    plo, phi = clock.mellin_strip(t)
    strip = (-phi / th, min(-plo / th, fcp_mellin_upper(shape)))
    return log_mv, strip


def _mellin_values(model, t, n, rate, deriv=False):
    log_mv, strip = _mellin_setup(model, t, rate)
    weight = None
    if deriv:
        clock, th = model._clock, model.params.theta_t
        weight = lambda s: clock.dlog_mellin_dt(-th * s, t)  # noqa: E731
    return mixed_poisson_probs(log_mv, strip, n, weight)


def _series_values(model, t, n, rate, deriv=False):
    """The moment series, optionally differentiated in ``t`` term by term."""
    p = model.params
    mu, thv, ze = p.shape
    th = p.theta_t
    clock = model._clock
    n = np.asarray(n)
    nn = n[None, :].astype(float)
    lr = math.log(rate)
    cache: dict[int, tuple[float, float]] = {}

    def log_moment(j: int):
        if j not in cache:
            m, _ = clock.moment(th * j, t)
            d = clock.dlog_mellin_dt(th * j, t) if deriv else 1.0
            v = m * d
            cache[j] = (math.log(abs(v)) if v != 0 else -math.inf, math.copysign(1.0, v))
        return cache[j]

    pre = math.lgamma(thv) - math.lgamma(ze) - sc.gammaln(nn + 1)

    def gen(k):
        kk = k[:, None].astype(float)
        jj = (nn + kk).astype(int)
        lm_h = np.empty(jj.shape)
        sg_h = np.empty(jj.shape)
        for idx, j in np.ndenumerate(jj):
            lm_h[idx], sg_h[idx] = log_moment(int(j))
        a = sc.gammaln(ze + nn + kk)
        b = sc.gammaln(kk + 1)
        g = sc.gammaln(mu * (nn + kk) + thv)
        lm = pre + a + (nn + kk) * lr - b - g + lm_h
        sg = np.where(k[:, None] % 2 == 1, -1.0, 1.0) * sg_h
        return lm, sg, np.abs(a) + np.abs(b) + np.abs(g) + np.abs(lm_h) + np.abs((nn + kk) * lr)

    v, e, _ = series_columns(gen, n.size, model.ctrl, what="time-changed moment series")
    return v, e


def _values(model: TcfcpModel, t: float, n, rate=None, deriv=False):
    """``z(n, t)`` (or its ``t``-derivative) at the given counts."""
    n = np.atleast_1d(np.asarray(n, dtype=int))
    rate = model.params.lambda_theta if rate is None else rate
    route = model._route()
    if route == "drift":
        fp, c = _drift_params(model, rate)
        x = fp.lambda_theta * (c * t) ** fp.theta_t
        top = int(n.max()) + (1 if deriv else 0)
        vec = fcp_core.shape_pmf_vector(fp.shape, x, top, model.ctrl)
        if not deriv:
            return vec.probs[n], vec.errors[n]
        # d/dt P(n; x) = (theta/t) (n P(n) - (n + 1) P(n + 1))
        f = fp.theta_t / t
        pr, er = vec.probs, vec.errors
        return f * (n * pr[n] - (n + 1) * pr[n + 1]), f * (n * er[n] + (n + 1) * er[n + 1])
    if route == "series":
        return _series_values(model, t, n, rate, deriv)
    return _mellin_values(model, t, n, rate, deriv)


# ---------------------------------------------------------------------------
# public operations


def tcfcp_pmf_vector(model: TcfcpModel, t: float, n_max: int) -> TcfcpPmf:
    """``z(n, t)`` for ``n = 0..n_max``."""
    _check_t(t)
    if n_max < 0:
        raise ValidationError("n_max must be >= 0")
    if t == 0:
        v = np.zeros(n_max + 1)
        v[0] = 1.0
        return TcfcpPmf(v, np.zeros(n_max + 1), 0.0, model.quality)
    v, e = _values(model, t, np.arange(n_max + 1))
    v = clamp_probs(v)
    return TcfcpPmf(v, e, float(1.0 - math.fsum(v.tolist())), model.quality)


def tcfcp_pmf(model: TcfcpModel, n: int, t: float) -> float:
    """Probability ``P[Z(t) = n]``.

    Examples
    --------
    >>> from fcplab.subordinators import GammaSub
    >>> m = TcfcpModel(FcpParams.poisson(1.0), GammaSub(1.0, 1.0))
    >>> round(tcfcp_pmf(m, 0, 1.0), 12)
    0.5
    """
    if n < 0 or int(n) != n:
        raise ValidationError("n must be a nonnegative integer")
    _check_t(t)
    if t == 0:
        return 1.0 if n == 0 else 0.0
    v, _ = _values(model, t, [int(n)])
    return float(clamp_probs(v)[0])


def _tail_index(model: TcfcpModel, t: float) -> float:
    """``kappa`` with ``P[Z > n] ~ C n^(-kappa)``; infinite for light tails."""
    plo, phi = model._clock.mellin_strip(t)
    return phi / model.params.theta_t


def tcfcp_pmf_auto(model: TcfcpModel, t: float, tail_tol: float | None = None,
                   cap: int = 100_000) -> TcfcpPmf:
    """Probabilities truncated once the missing mass drops below ``tail_tol``.

    The default tolerance is ``1e-13`` for light-tailed laws and ``2e-7``
    for stable clocks, whose counts have power-law tails; there the next
    truncation level is extrapolated from the tail index.
    """
    _check_t(t)
    if t == 0:
        return tcfcp_pmf_vector(model, 0.0, 0)
    kappa = _tail_index(model, t)
    if tail_tol is None:
        tail_tol = 1e-13 if math.isinf(kappa) else 2e-7
    try:
        m = tcfcp_mean(model, t)
        var = tcfcp_variance(model, t)
        n_max = fcp_core._initial_n_max(m, var)
    except MomentNonexistenceError:
        n_max = 256
    vals, errs = [], []
    done = 0
    while True:
        v, e = _values(model, t, np.arange(done, n_max + 1))
        vals.append(clamp_probs(v))
        errs.append(e)
        done = n_max + 1
        probs = np.concatenate(vals)
        tail = 1.0 - math.fsum(probs.tolist())
        if tail <= tail_tol or n_max >= cap:
            return TcfcpPmf(probs, np.concatenate(errs), float(tail), model.quality)
        grow = 2.0
        if math.isfinite(kappa):
            grow = min(8.0, max(1.2, 1.1 * (tail / tail_tol) ** (1.0 / kappa)))
        n_max = min(int(math.ceil(grow * n_max)), cap)


def _tail_exponents(kappa: float, count: int) -> np.ndarray:
    # z(n) expands in n^-(k kappa + 1 + j): residues at the clock's poles
    # times the 1/n corrections of Gamma(n + s) / n!
    ex = sorted({round(k * kappa + 1.0 + j, 12) for k in (1, 2, 3) for j in range(count)})
    return np.array(ex[:count])


def power_tail_sum(probs: np.ndarray, kappa: float, power: int = 0, terms: int = 5) -> float:
    """Estimate ``sum_{n > N} n^power z(n)`` beyond a pmf vector of length ``N + 1``.

    The last three quarters of the vector are fitted by least squares to
    ``sum_i c_i n^(-e_i)`` with the exponents of the power-law expansion, and
    the fitted tail is summed with Hurwitz zeta functions.  Requires
    ``kappa > power``.
    """
    if not kappa > power:
        raise MomentNonexistenceError(f"tail index {kappa} does not exceed moment order {power}")
    n_max = probs.size - 1
    n = np.arange(n_max // 4, n_max + 1, dtype=float)
    ex = _tail_exponents(kappa, terms)
    basis = n[:, None] ** -ex[None, :]
    coef = np.linalg.lstsq(basis, probs[n_max // 4:], rcond=None)[0]
    return float(sum(c * sc.zeta(e - power, n_max + 1) for c, e in zip(coef, ex)))


def tcfcp_summed_moment(model: TcfcpModel, p: int, t: float, n_max: int | None = None) -> float:
    """``sum_n n^p z(n, t)`` evaluated directly from the probabilities.

    Light tails are truncated where the mass is negligible.  Power-law tails
    (stable clocks) are summed to ``n_max`` and completed by
    :func:`power_tail_sum`.
    """
    _check_t(t)
    kappa = _tail_index(model, t)
    if math.isinf(kappa):
        probs = tcfcp_pmf_auto(model, t).probs
        return math.fsum((np.arange(probs.size, dtype=float) ** p * probs).tolist())
    probs = tcfcp_pmf_vector(model, t, 1000 if n_max is None else n_max).probs
    head = math.fsum((np.arange(probs.size, dtype=float) ** p * probs).tolist())
    return head + power_tail_sum(probs, kappa, p)


def _zero_prob_at_rate(model: TcfcpModel, t: float, rate: float) -> float:
    if rate == 0.0 or t == 0:
        return 1.0
    v, _ = _values(model, t, [0], rate=rate)
    return float(clamp_probs(v)[0])


def tcfcp_pgf(model: TcfcpModel, u: float, t: float) -> float:
    """``E[u^Z(t)]`` for ``u`` in ``[0, 1]``.

    Thinning: ``E[u^Z]`` is the no-event probability at rate ``lambda (1 - u)``.
    """
    if not 0.0 <= u <= 1.0:
        raise ValidationError("pgf argument must lie in [0, 1]")
    _check_t(t)
    if model._route() == "series":
        return _series_lt(model, u, t)
    return _zero_prob_at_rate(model, t, model.params.lambda_theta * (1.0 - u))


def _series_lt(model: TcfcpModel, u: float, t: float) -> float:
    """``Gamma(theta_v) sum_m (zeta)_m (lambda (u-1))^m / (m! Gamma(mu m + theta_v)) E[H^(m theta)]``."""
    if u == 1.0 or t == 0:
        return 1.0
    p = model.params
    rate = p.lambda_theta * (1.0 - u)
    v, _ = _series_values(model, t, [0], rate)
    return float(clamp_probs(v)[0])


def tcfcp_lt(model: TcfcpModel, s: float, t: float) -> float:
    """Laplace transform ``E[exp(-s Z(t))]`` for ``s >= 0``."""
    if not s >= 0:
        raise ValidationError("Laplace argument must be nonnegative")
    return tcfcp_pgf(model, math.exp(-s), t)


tcfcp_mgf = tcfcp_lt


def _mean_factor(params: FcpParams) -> float:
    mu, th, ze = params.shape
    return ze * math.exp(math.lgamma(th) - math.lgamma(mu + th)) * params.lambda_theta


def tcfcp_mean(model: TcfcpModel, t: float) -> float:
    """``zeta Gamma(theta_v) lambda / Gamma(mu + theta_v) E[H(t)^theta]``."""
    _check_t(t)
    if t == 0:
        return 0.0
    m1, _ = model._clock.moment(model.params.theta_t, t)
    return _mean_factor(model.params) * m1


def tcfcp_variance(model: TcfcpModel, t: float) -> float:
    """``E Z (1 - E Z) + K^2 (1 + 1/zeta) B(mu+theta_v, mu+theta_v)/B(2mu+theta_v, theta_v) E[H^(2 theta)]``.

    ``K`` is the mean factor ``zeta Gamma(theta_v) lambda / Gamma(mu + theta_v)``.
    """
    _check_t(t)
    if t == 0:
        return 0.0
    p = model.params
    m2, _ = model._clock.moment(2 * p.theta_t, t)
    k = _mean_factor(p)
    ez = tcfcp_mean(model, t)
    d = fcp_core.dispersion_factor(p) + 1.0
    return max(0.0, ez * (1.0 - ez) + k * k * d * m2)


def waiting_time_pdf(model: TcfcpModel, tau: float) -> float:
    """Density of the first event time, ``-d/dtau z(0, tau)``.

    The derivative is analytic: the time dependence enters only through the
    clock's Mellin transform, whose logarithmic derivative is closed-form.
    """
    if not (tau > 0 and math.isfinite(tau)):
        raise ValidationError("tau must be positive")
    d, _ = _values(model, tau, [0], deriv=True)
    return max(0.0, -float(d[0]))


def first_passage_survival(model: TcfcpModel, w: int, t: float) -> float:
    """``P[T_w > t] = sum_{n < w} z(n, t)``, ``T_w`` the first time ``Z >= w``."""
    if w < 1 or int(w) != w:
        raise ValidationError("level w must be a positive integer")
    _check_t(t)
    if t == 0:
        return 1.0
    v = tcfcp_pmf_vector(model, t, int(w) - 1).probs
    return float(min(1.0, max(0.0, math.fsum(v.tolist()))))


def first_passage_pdf(model: TcfcpModel, w: int, t: float) -> float:
    """Density of ``T_w``: ``-d/dt sum_{n < w} z(n, t)``."""
    if w < 1 or int(w) != w:
        raise ValidationError("level w must be a positive integer")
    if not (t > 0 and math.isfinite(t)):
        raise ValidationError("t must be positive")
    d, _ = _values(model, t, np.arange(int(w)), deriv=True)
    return max(0.0, -math.fsum(d.tolist()))


def tcfcp_increment_gap(model: TcfcpModel, s: float, t1: float, t2: float) -> float:
    """``L(s, t1 + t2) - L(s, t1) L(s, t2)``; zero for independent stationary increments."""
    lt = lambda u: tcfcp_lt(model, s, u)  # noqa: E731
    return lt(t1 + t2) - lt(t1) * lt(t2)
