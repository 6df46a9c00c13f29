"""Special functions: log-gamma, Pochhammer, beta and the Prabhakar function.

The three-parameter Mittag-Leffler (Prabhakar) function is

    E^zeta_{mu,theta}(z) = sum_m (zeta)_m z^m / (m! Gamma(mu m + theta)).

For ``z >= 0`` every term is positive and plain series summation is exact to
rounding.  For ``z < 0`` the terms alternate and grow to a peak of roughly
``exp(|z|^(1/mu))`` before decaying, so double precision loses all digits
well before ``|z| = 100``.  The series is still tried first.  When its error
estimate is too large it is replaced by one of two routes:

* ``mu == 1``: Kummer's transformation turns the alternating series into
  ``exp(-x) M(theta - zeta, theta, x)``, whose terms keep one sign.
* ``mu < 1``: the inverse Laplace transform of
  ``s^(mu zeta - theta) / (s^mu + x)^zeta`` is integrated along a pair of
  rays ``sigma + r exp(+-i phi)`` with ``mu phi <= pi/2``.  This keeps
  ``|s^mu + x| >= x`` on the path, so the integrand is never amplified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special as sc

from .errors import ConvergenceError, DomainError, NumericalError, ValidationError

_EPS = float(np.finfo(float).eps)
_LOG_MAX = 709.0
# beyond this value of x^(1/mu) the alternating series cancels by more than
# exp(60) and is not even attempted
_HOPELESS = 60.0

__all__ = [
    "SeriesControl",
    "MlArgs",
    "SeriesResult",
    "log_gamma",
    "pochhammer",
    "log_pochhammer",
    "beta_fn",
    "log_beta",
    "ml3",
    "ml3_eval",
    "ml3_deriv",
    "count_kernel",
    "series_columns",
]


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy shared by every infinite series in the package.

    Parameters
    ----------
    rel_tol : float
        A term is *small* when ``|t| < rel_tol * |partial sum| + abs_tol``.
    abs_tol : float
        Absolute floor of the smallness test.
    max_terms : int
        Term budget.  Exceeding it raises :class:`ConvergenceError`.
    consecutive_small : int
        Number of successive small terms required before stopping.
    """

    rel_tol: float = 1e-12
    abs_tol: float = 1e-300
    max_terms: int = 10_000
    consecutive_small: int = 3

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValidationError("rel_tol and abs_tol must be positive")
        if self.max_terms < 1 or self.consecutive_small < 1:
            raise ValidationError("max_terms and consecutive_small must be >= 1")


DEFAULT_CONTROL = SeriesControl()


@dataclass(frozen=True)
class MlArgs:
    """Arguments of ``E^zeta_{mu,theta_v}(z)``."""

    mu: float
    theta_v: float
    zeta: float
    z: float

    def __post_init__(self):
        if not (0.0 < self.mu <= 1.0):
            raise DomainError(f"mu must lie in (0, 1], got {self.mu}")
        if not self.theta_v > 0:
            raise DomainError(f"theta_v must be positive, got {self.theta_v}")
        if not self.zeta > 0:
            raise DomainError(f"zeta must be positive, got {self.zeta}")
        if not math.isfinite(self.z):
            raise DomainError("z must be finite")


@dataclass(frozen=True)
class SeriesResult:
    """A value together with an estimate of its absolute error.

    ``method`` is one of ``"series"``, ``"kummer"`` or ``"contour"``.
    """

    value: float
    error: float
    n_terms: int
    method: str


# ---------------------------------------------------------------------------
# elementary pieces


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``.

    Examples
    --------
    >>> round(log_gamma(7.0), 10)
    6.579251212
    """
    if not x > 0:
        raise DomainError(f"log_gamma needs x > 0, got {x}")
    return math.lgamma(x)


def log_pochhammer(zeta, n):
    """``log((zeta)_n)`` for ``zeta > 0`` and integer ``n >= 0`` (vectorised)."""
    zeta = np.asarray(zeta, dtype=float)
    if np.any(zeta <= 0):
        raise DomainError("pochhammer needs zeta > 0")
    out = sc.gammaln(zeta + n) - sc.gammaln(zeta)
    return float(out) if np.ndim(out) == 0 else out


def pochhammer(zeta: float, n: int) -> float:
    """Rising factorial ``(zeta)_n = Gamma(zeta + n) / Gamma(zeta)``.

    Small ``n`` uses the exact product, larger ``n`` a log-gamma ratio.
    """
    if not zeta > 0:
        raise DomainError(f"pochhammer needs zeta > 0, got {zeta}")
    if n < 0 or int(n) != n:
        raise DomainError("n must be a nonnegative integer")
    n = int(n)
    if n <= 30:
        out = 1.0
        for j in range(n):
            out *= zeta + j
        return out
    return math.exp(math.lgamma(zeta + n) - math.lgamma(zeta))


def log_beta(alpha: float, beta: float) -> float:
    if not (alpha > 0 and beta > 0):
        raise DomainError("beta function needs positive arguments")
    return math.lgamma(alpha) + math.lgamma(beta) - math.lgamma(alpha + beta)


def beta_fn(alpha: float, beta: float) -> float:
    """Euler beta function ``B(alpha, beta)`` via log-gamma."""
    return math.exp(log_beta(alpha, beta))


# ---------------------------------------------------------------------------
# column-wise signed series engine


def _first_stop(small: np.ndarray, c: int) -> np.ndarray:
    """Index of the first row ending a run of ``c`` small rows, per column (-1 if none)."""
    k, ncol = small.shape
    cs = np.vstack([np.zeros((1, ncol), dtype=np.int64), np.cumsum(small, axis=0)])
    if k < c:
        return np.full(ncol, -1)
    run = cs[c:] - cs[:-c]
    hit = run == c
    idx = np.argmax(hit, axis=0) + (c - 1)
    idx[~hit.any(axis=0)] = -1
    return idx


def series_columns(gen: Callable[[np.ndarray], tuple], ncol: int,
                   ctrl: SeriesControl = DEFAULT_CONTROL, start: int = 0,
                   what: str = "series"):
    """Sum ``ncol`` signed series whose terms are supplied in log form.

    Parameters
    ----------
    gen : callable
        ``gen(k)`` receives a 1-d integer array of term indices and returns
        ``(logmag, sign, scale)``, each broadcastable to ``(len(k), ncol)``.
        ``logmag`` is ``log|t_k|`` (``-inf`` for exact zeros), ``sign`` is
        ``+-1`` and ``scale`` bounds the absolute size of the log-gamma
        pieces used to build ``logmag`` (it drives the rounding estimate).
    ncol : int
        Number of independent series.
    ctrl : SeriesControl
    start : int
        Index of the first term.

    Returns
    -------
    value, error : ndarray
        Sums and absolute error estimates.
    n_terms : ndarray of int
    """
    c = ctrl.consecutive_small
    kmax = ctrl.max_terms
    size = min(64, kmax)
    while True:
        k = np.arange(start, start + size)
        lm, sg, scale = gen(k)
        lm = np.broadcast_to(np.asarray(lm, dtype=float), (size, ncol))
        sg = np.broadcast_to(np.asarray(sg, dtype=float), (size, ncol))
        scale = np.broadcast_to(np.asarray(scale, dtype=float), (size, ncol))
        shift = np.max(np.where(np.isfinite(lm), lm, -np.inf), axis=0)
        shift = np.where(np.isfinite(shift), shift, 0.0)
        with np.errstate(under="ignore"):
            terms = sg * np.exp(lm - shift)
        partial = np.cumsum(terms, axis=0)
        floor = ctrl.abs_tol * np.exp(np.minimum(-shift, _LOG_MAX))
        small = np.abs(terms) <= ctrl.rel_tol * np.abs(partial) + floor
        # a term only counts as small once the magnitudes are past their running peak;
        # this keeps underflowed leading terms of a growing series from stopping it
        past_peak = (lm < np.maximum.accumulate(lm, axis=0)) | ~np.isfinite(lm)
        small &= past_peak
        stop = _first_stop(small, c)
        if np.all(stop >= 0):
            break
        if size >= kmax:
            bad = int(np.argmin(stop))
            raise ConvergenceError(
                f"{what} did not converge within {kmax} terms",
                partial_sum=float(partial[-1, bad] * math.exp(min(shift[bad], _LOG_MAX))),
                last_term=float(abs(terms[-1, bad]) * math.exp(min(shift[bad], _LOG_MAX))))
        size = min(2 * size, kmax)

    value = np.empty(ncol)
    error = np.empty(ncol)
    for j in range(ncol):
        m = stop[j] + 1
        col = terms[:m, j]
        s = math.fsum(col.tolist())
        a = np.abs(col)
        sc_max = float(np.max(np.where(a > 0, scale[:m, j], 0.0)))
        rnd = _EPS * float(a.sum()) * (8.0 + sc_max)
        last = float(a[-1])
        prev = float(a[-2]) if m >= 2 else 0.0
        r = last / prev if prev > 0 else 0.0
        tail = last * r / (1.0 - r) if r < 0.9 else 10.0 * last
        e = rnd + tail
        value[j] = _scale(s, shift[j])
        error[j] = _scale(e, shift[j])
    return value, error, stop + 1


def _scale(v: float, logscale: float) -> float:
    if v == 0.0:
        return 0.0
    lg = math.log(abs(v)) + logscale
    if lg > _LOG_MAX:
        return math.copysign(math.inf, v)
    return math.copysign(math.exp(lg), v)


# ---------------------------------------------------------------------------
# routes for the Prabhakar function at negative argument


def _prabhakar_series(mu, th, ze, z, ctrl):
    if z == 0:
        return SeriesResult(1.0 / math.gamma(th) if th < 171 else math.exp(-math.lgamma(th)),
                            0.0, 1, "series")
    lz = math.log(abs(z))
    neg = z < 0
    lgz = math.lgamma(ze)

    def gen(k):
        kk = k[:, None].astype(float)
        a = sc.gammaln(ze + kk) - lgz
        b = sc.gammaln(kk + 1)
        g = sc.gammaln(mu * kk + th)
        lm = a + kk * lz - b - g
        sg = np.where((k[:, None] % 2 == 1) & neg, -1.0, 1.0)
        return lm, sg, np.abs(a) + np.abs(b) + np.abs(g) + np.abs(kk * lz)

    v, e, n = series_columns(gen, 1, ctrl, what="Prabhakar series")
    if not math.isfinite(v[0]):
        raise NumericalError("Prabhakar series overflows double precision")
    return SeriesResult(float(v[0]), float(e[0]), int(n[0]), "series")


def _kummer_columns(a, b, x, ctrl):
    """``M(a, b_j, x)`` for ``x >= 0`` and an array of ``b_j > 0``."""
    b = np.asarray(b, dtype=float)
    if x == 0 or a == 0:
        return np.ones_like(b), np.zeros_like(b)
    lx = math.log(x)
    a_is_negint = a < 0 and float(a).is_integer()
    lga = sc.gammaln(a) if not a_is_negint else 0.0
    sga = sc.gammasgn(a) if not a_is_negint else 1.0
    lgb = sc.gammaln(b)[None, :]

    def gen(k):
        kk = k[:, None].astype(float)
        if a_is_negint:
            # (a)_k = (-1)^k |a|! / (|a|-k)!, zero for k > |a|
            na = int(-a)
            ok = kk <= na
            pa = np.where(ok, sc.gammaln(na + 1) - sc.gammaln(np.maximum(na - kk, 0) + 1), -np.inf)
            spa = np.where(k[:, None] % 2 == 1, -1.0, 1.0)
        else:
            pa = sc.gammaln(a + kk) - lga
            spa = sc.gammasgn(a + kk) * sga
        pb = sc.gammaln(b[None, :] + kk) - lgb
        f = sc.gammaln(kk + 1)
        lm = pa + kk * lx - f - pb
        return lm, spa, np.abs(pa) + np.abs(pb) + np.abs(f) + np.abs(kk * lx)

    v, e, _ = series_columns(gen, b.size, ctrl, what="Kummer series")
    return v, e


@lru_cache(maxsize=8)
def _gauss_legendre(m: int):
    return np.polynomial.legendre.leggauss(m)


@lru_cache(maxsize=64)
def _ray_nodes(mu: float):
    """Quadrature nodes/weights in ``r`` and the ray geometry for order ``mu``."""
    # any angle in (pi/2, pi) is valid; near pi/2 the ray would be endless
    phi = min(max(math.pi / (2.0 * mu), 0.6 * math.pi), 0.8 * math.pi)
    sigma = 0.5
    length = (sigma + 42.0) / -math.cos(phi)
    edges = np.concatenate([np.arange(0.0, 4.0, 0.25), np.arange(4.0, length, 0.5), [length]])
    x16, w16 = _gauss_legendre(16)
    lo, hi = edges[:-1, None], edges[1:, None]
    r = (0.5 * (hi - lo) * x16 + 0.5 * (hi + lo)).ravel()
    w = (0.5 * (hi - lo) * w16).ravel()
    return phi, sigma, r, w


def _ray_columns(mu, a, ze, x, n):
    """``J(n) = (1/2 pi i) int e^s s^a (s^mu + x)^(-ze) (x/(s^mu + x))^n ds``.

    Returns values and rounding-based absolute error estimates for each entry
    of the integer array ``n``.
    """
    phi, sigma, r, w = _ray_nodes(float(mu))
    rot = complex(math.cos(phi), math.sin(phi))
    s = sigma + r * rot
    logs = np.log(s)
    lden = np.log(np.exp(mu * logs) + x)
    base = s + a * logs - ze * lden + 1j * phi
    logw = math.log(x) - lden
    n = np.asarray(n, dtype=float)
    out = np.empty(n.size)
    err = np.empty(n.size)
    step = max(1, int(2_000_000 // max(r.size, 1)))
    for i0 in range(0, n.size, step):
        nn = n[i0:i0 + step]
        expo = base[:, None] + logw[:, None] * nn[None, :]
        with np.errstate(under="ignore"):
            vals = np.exp(expo)
        out[i0:i0 + step] = (w @ vals.imag) / math.pi
        err[i0:i0 + step] = 64.0 * _EPS * (w @ np.abs(vals)) / math.pi
    return out, err


def _neg_prabhakar(mu, th, ze, x, ctrl) -> SeriesResult:
    """``E^ze_{mu,th}(-x)`` for ``x > 0`` with automatic route selection."""
    best = SeriesResult(math.nan, math.inf, 0, "series")
    if x ** (1.0 / mu) < _HOPELESS:
        try:
            best = _prabhakar_series(mu, th, ze, -x, ctrl)
        except NumericalError:
            pass
        if best.error <= 10.0 * ctrl.rel_tol * abs(best.value):
            return best
    if mu == 1.0:
        m, e = _kummer_columns(th - ze, np.array([th]), x, ctrl)
        f = math.exp(-x - math.lgamma(th))
        alt = SeriesResult(float(m[0]) * f, float(e[0]) * f, 0, "kummer")
    else:
        v, e = _ray_columns(mu, mu * ze - th, ze, x, np.array([0]))
        alt = SeriesResult(float(v[0]), float(e[0]), 0, "contour")
    return alt if alt.error < best.error else best


def ml3_eval(args: MlArgs, ctrl: SeriesControl = DEFAULT_CONTROL) -> SeriesResult:
    """Evaluate ``E^zeta_{mu,theta_v}(z)`` and report an absolute error estimate."""
    if args.z >= 0:
        return _prabhakar_series(args.mu, args.theta_v, args.zeta, args.z, ctrl)
    return _neg_prabhakar(args.mu, args.theta_v, args.zeta, -args.z, ctrl)


def ml3(args: MlArgs, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Three-parameter Mittag-Leffler function ``E^zeta_{mu,theta_v}(z)``.

    Examples
    --------
    >>> round(ml3(MlArgs(1.0, 1.0, 1.0, 1.0)), 10)
    2.7182818285
    >>> round(ml3(MlArgs(1.0, 2.0, 1.0, 1.0)), 10)
    1.7182818285
    """
    return ml3_eval(args, ctrl).value


def ml3_deriv(args: MlArgs, n: int, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """n-th derivative in ``z``: ``(zeta)_n E^{zeta+n}_{mu, theta_v + n mu}(z)``."""
    if n < 0 or int(n) != n:
        raise DomainError("derivative order must be a nonnegative integer")
    n = int(n)
    if n == 0:
        return ml3(args, ctrl)
    shifted = MlArgs(args.mu, args.theta_v + n * args.mu, args.zeta + n, args.z)
    return pochhammer(args.zeta, n) * ml3(shifted, ctrl)


# ---------------------------------------------------------------------------
# batched counting kernel


def count_kernel(mu: float, theta_v: float, zeta: float, x: float, n_max: int,
                 ctrl: SeriesControl = DEFAULT_CONTROL):
    """Weights ``Gamma(theta_v) x^n/n! (zeta)_n E^{zeta+n}_{mu,theta_v+n mu}(-x)``.

    These are the probabilities of the fractional counting law at
    ``x = lambda t^theta``, for ``n = 0..n_max``.  Each entry is computed by
    the series when its rounding estimate is small, and by the Kummer or ray
    route otherwise; the more accurate of the candidates is kept.

    Returns
    -------
    values, errors : ndarray, shape (n_max + 1,)
    methods : list of str
    """
    n = np.arange(n_max + 1)
    if x == 0:
        v = np.zeros(n_max + 1)
        v[0] = 1.0
        return v, np.zeros(n_max + 1), ["series"] * (n_max + 1)
    lx = math.log(x)
    pre = math.lgamma(theta_v) - math.lgamma(zeta)
    nn = n[None, :].astype(float)
    lfn = sc.gammaln(nn + 1)

    def gen(k):
        kk = k[:, None].astype(float)
        a = sc.gammaln(zeta + nn + kk)
        b = sc.gammaln(kk + 1)
        g = sc.gammaln(mu * (nn + kk) + theta_v)
        lm = pre + a + (nn + kk) * lx - lfn - b - g
        sg = np.where(k[:, None] % 2 == 1, -1.0, 1.0)
        return lm, sg, np.abs(a) + np.abs(b) + np.abs(g) + np.abs((nn + kk) * lx) + lfn

    val = np.full(n.size, np.nan)
    err = np.full(n.size, np.inf)
    if x ** (1.0 / mu) < _HOPELESS:
        try:
            val, err, _ = series_columns(gen, n.size, ctrl, what="counting-law series")
        except NumericalError:
            pass
    err = np.where(np.isfinite(val), err, np.inf)
    methods = ["series"] * n.size
    bad = np.nonzero(~(err <= 10.0 * ctrl.rel_tol * np.abs(val) + 1e-300))[0]
    if bad.size:
        nb = n[bad]
        if mu == 1.0:
            m, e = _kummer_columns(theta_v - zeta, theta_v + nb, x, ctrl)
            lf = (math.lgamma(theta_v) - sc.gammaln(theta_v + nb) + sc.gammaln(zeta + nb)
                  - math.lgamma(zeta) + nb * lx - sc.gammaln(nb + 1.0) - x)
            f = np.exp(lf)
            alt_v, alt_e, tag = m * f, e * f, "kummer"
        else:
            j, e = _ray_columns(mu, mu * zeta - theta_v, zeta, x, nb)
            f = np.exp(math.lgamma(theta_v) + sc.gammaln(zeta + nb) - math.lgamma(zeta)
                       - sc.gammaln(nb + 1.0))
            alt_v, alt_e, tag = j * f, e * f, "contour"
        take = alt_e < err[bad]
        val[bad[take]] = alt_v[take]
        err[bad[take]] = alt_e[take]
        for i in bad[take]:
            methods[i] = tag
    return val, err, methods
