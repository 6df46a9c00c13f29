"""Mellin-Barnes evaluation of mixed-Poisson probabilities.

If ``N | V ~ Poisson(V)`` then for any ``c`` in the strip where both sides
are finite

    P[N = n] = (1 / 2 pi i) int_{c - i inf}^{c + i inf} E[V^(-s)] Gamma(n + s) / n! ds.

The fractional counting law is of this form with ``V = x W`` and
``E[W^p] = Gamma(theta_v) Gamma(zeta + p) / (Gamma(zeta) Gamma(theta_v + mu p))``;
time-changing by an independent subordinator multiplies ``E[V^(-s)]`` by
``E[H(t)^(-theta s)]``.  Along the real axis the log of the integrand is
convex, so the contour is placed through its minimum (the saddle point),
where ``|integrand|`` is largest at ``Im s = 0`` and no cancellation
occurs.  The integrand then decays like a Gaussian followed by an
exponential, which a fixed Gauss-Legendre rule in scaled units resolves.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import special as sc

from .errors import NumericalError

_EPS = float(np.finfo(float).eps)
_GOLD = 0.5 * (math.sqrt(5.0) - 1.0)
_STEP = 2.0
_TAIL = 1e-18
_MAX_PANELS = 20000
_RAY_MIN_N = 16
_RAY_ANGLE = 0.75 * math.pi

__all__ = ["mixed_poisson_probs", "fcp_log_mellin", "fcp_mellin_upper"]


def fcp_log_mellin(shape, s):
    """``log E[W^(-s)]`` for the mixing variable of the counting law."""
    mu, th, ze = shape
    s = np.asarray(s, dtype=complex)
    out = (math.lgamma(th) - math.lgamma(ze)) + sc.loggamma(ze - s)
    if mu == 1.0 and th == ze:
        return out - sc.loggamma(ze - s)
    return out - sc.loggamma(th - mu * s)


def fcp_mellin_upper(shape) -> float:
    """Right end of the real strip where ``E[W^(-s)]`` is finite.

    Normally the pole of ``Gamma(zeta - s)`` at ``s = zeta``.  When
    ``theta_v = mu zeta`` the poles at ``s = zeta + j`` with ``mu j`` a
    nonnegative integer are cancelled by ``Gamma(mu (zeta - s))``.
    """
    mu, th, ze = shape
    if th != mu * ze:
        return float(ze)
    if mu == 1.0:
        return math.inf
    j = 0
    while True:
        mj = mu * j
        if abs(mj - round(mj)) > 1e-12:
            return float(ze + j)
        j += 1


@lru_cache(maxsize=4)
def _gauss_legendre(m: int):
    return np.polynomial.legendre.leggauss(m)


def _saddle(g: Callable[[np.ndarray], np.ndarray], a: np.ndarray, b: np.ndarray, iters: int = 90):
    """Vectorised golden-section minimisation of convex ``g`` on ``(a, b)``."""
    a = a.copy()
    b = b.copy()
    x1 = b - _GOLD * (b - a)
    x2 = a + _GOLD * (b - a)
    f1, f2 = g(x1), g(x2)
    for _ in range(iters):
        # minimum lies in (a, x2) where f1 < f2, else in (x1, b)
        left = f1 < f2
        b = np.where(left, x2, b)
        a = np.where(left, a, x1)
        x_keep = np.where(left, x1, x2)
        f_keep = np.where(left, f1, f2)
        x_new = np.where(left, b - _GOLD * (b - a), a + _GOLD * (b - a))
        f_new = g(x_new)
        x1 = np.where(left, x_new, x_keep)
        x2 = np.where(left, x_keep, x_new)
        f1 = np.where(left, f_new, f_keep)
        f2 = np.where(left, f_keep, f_new)
    return 0.5 * (a + b)


def mixed_poisson_probs(log_mv: Callable[[np.ndarray], np.ndarray], strip: tuple,
                        n: np.ndarray, weight: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                        ray: bool = True):
    """Probabilities ``P[N = n]`` of a Poisson law mixed over ``V``.

    Parameters
    ----------
    log_mv : callable
        ``log E[V^(-s)]`` for complex ``s`` (broadcasting over arrays).
    strip : (float, float)
        Open interval of real ``s`` on which ``E[V^(-s)]`` is finite.
    n : array of int
        Counts to evaluate.
    weight : callable, optional
        Extra factor ``w(s)`` inserted into the integrand.  Used for time
        derivatives, where ``w = d/dt log E[V^(-s)]``.
    ray : bool
        Allow the ray deformation for large counts.

    Returns
    -------
    values, errors : ndarray
    """
    n = np.asarray(n, dtype=float)
    lo = np.maximum(strip[0], -n)
    hi = np.full(n.shape, float(strip[1]))
    if np.any(~(hi > lo)):
        raise NumericalError("empty Mellin strip")
    finite = np.isfinite(hi)
    span = np.where(finite, hi - lo, 1.0)
    a = lo + np.minimum(1e-9 * (1.0 + np.abs(lo)), 1e-6 * span)
    lfn = sc.gammaln(n + 1.0)

    def g(c):
        return np.real(log_mv(c.astype(complex))) + sc.gammaln(n + c) - lfn

    if np.all(finite):
        b = hi - np.minimum(1e-9 * (1.0 + np.abs(hi)), 1e-6 * span)
    else:
        # open right end: push b out until g is increasing there
        b = np.where(finite, hi - np.minimum(1e-9 * (1.0 + np.abs(hi)), 1e-6 * span), a + 16.0)
        for _ in range(40):
            rising = ~finite & ~(g(b) > g(b - 1e-3))
            if not rising.any():
                break
            b = np.where(rising, a + 2.0 * (b - a), b)
    c = _saddle(g, a, b)
    g0 = g(c)
    h = 1e-4 * np.minimum(np.minimum(c - lo, hi - c), 1.0)
    g2 = (g(c + h) - 2.0 * g0 + g(c - h)) / (h * h)
    scale = 1.0 / np.sqrt(np.maximum(g2, 1e-8))

    def logf(cc, dz, nn, l0, g00):
        s = cc[:, None] + dz
        return log_mv(s) + sc.loggamma(nn[:, None] + s) - l0[:, None] - g00[:, None], s

    # Large counts: the line integrand oscillates at frequency ~log n over a
    # Gaussian window of width ~sqrt(n).  Turning the upper half of the
    # contour into the ray c + r e^(i phi), phi > pi/2, makes it decay like
    # n^(r cos phi) instead.  This is only legal where the integrand also
    # vanishes on the arcs between the line and the ray, which is checked
    # far out at two angles.
    direction = np.full(n.size, 1j)
    if ray and np.any(n >= _RAY_MIN_N):
        far = 50.0 * (n + 10.0)
        ok = n >= _RAY_MIN_N
        for ang in (0.5 * (0.5 * math.pi + _RAY_ANGLE), _RAY_ANGLE):
            lf_far, _ = logf(c, (far * np.exp(1j * ang))[:, None], n, lfn, g0)
            ok &= np.real(lf_far[:, 0]) < -100.0
        direction = np.where(ok, np.exp(1j * _RAY_ANGLE), direction)

    # march along the contour panel by panel; each panel is sized so that
    # the log-integrand changes by a bounded amount across it
    x_gl, w_gl = _gauss_legendre(12)
    ncol = n.size
    om = np.zeros(ncol)
    body = np.zeros(ncol, dtype=complex)
    absint = np.zeros(ncol)
    tail = np.zeros(ncol)
    failed = np.zeros(ncol, dtype=bool)
    active = np.arange(ncol)
    for _ in range(_MAX_PANELS):
        cc, nn, l0, g00, sca, o = c[active], n[active], lfn[active], g0[active], scale[active], om[active]
        d = direction[active]
        hstep = 1e-5 * (sca + o)
        lp, _ = logf(cc, ((o + hstep) * d)[:, None], nn, l0, g00)
        lq, _ = logf(cc, (o * d)[:, None], nn, l0, g00)
        rate = np.abs(lp[:, 0] - lq[:, 0]) / hstep
        width = np.minimum(_STEP / np.maximum(rate, 1e-300), np.maximum(sca, 0.3 * o))
        width = np.maximum(width, 1e-3 * sca)
        nodes = o[:, None] + 0.5 * width[:, None] * (x_gl[None, :] + 1.0)
        lf, s = logf(cc, nodes * d[:, None], nn, l0, g00)
        with np.errstate(under="ignore", over="ignore"):
            f = np.exp(lf)
        mag = np.abs(f)
        if weight is not None:
            f = f * weight(s)
        hw = 0.5 * width
        body[active] += (f @ w_gl) * hw * d
        absint[active] += (np.abs(f) @ w_gl) * hw
        om[active] = o + width
        edge = mag[:, -1]
        tail[active] = np.abs(f[:, -1]) * width
        # on the line |F| <= 1; a ray that climbs above that would cancel badly
        blown = (np.imag(d) < 1.0) & (mag.max(axis=1) > 1e3)
        failed[active[blown]] = True
        active = active[~(((edge < _TAIL) & (o + width > 4.0 * sca)) | blown)]
        if active.size == 0:
            break
    else:
        raise NumericalError("Mellin-Barnes integrand did not decay along the contour")
    body = np.imag(body) / math.pi
    absint /= math.pi
    with np.errstate(under="ignore", over="ignore"):
        amp = np.exp(g0)
    err = amp * (absint * _EPS * (16.0 + np.abs(g0)) + tail)
    val = amp * body
    if failed.any():
        idx = np.nonzero(failed)[0]
        v2, e2 = mixed_poisson_probs(log_mv, strip, n[idx], weight, ray=False)
        val[idx], err[idx] = v2, e2
    return val, err
