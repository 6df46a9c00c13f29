"""Independent reference values for the test-suite.

Everything here is computed either in arbitrary precision with mpmath or by
plain quadrature of textbook formulas, never through fcplab itself.
"""

import math
from functools import lru_cache

import mpmath as mp
import numpy as np
from scipy import integrate


def _series_mp(mu, th, ze, z, shift=0):
    """sum_k (ze)_{k+shift} z^k / (k! Gamma(mu (k+shift) + th)) at adaptive precision."""
    az = abs(z)
    peak, k = 0.0, 0
    while az > 0:
        lt = (math.lgamma(ze + k + shift) - math.lgamma(ze) + k * math.log(az)
              - math.lgamma(k + 1) - math.lgamma(mu * (k + shift) + th))
        peak = max(peak, lt)
        if k > 5 and lt < peak - 300:
            break
        k += 1
    top_digits = max(peak, 0.0) / math.log(10)
    dps = int(top_digits) + 40
    while True:
        with mp.workdps(dps):
            mu_, th_, ze_, z_ = mp.mpf(mu), mp.mpf(th), mp.mpf(ze), mp.mpf(z)
            s, top, k = mp.mpf(0), mp.mpf(0), 0
            while True:
                t = mp.rf(ze_, k + shift) * z_ ** k * mp.rgamma(mu_ * (k + shift) + th_) / mp.factorial(k)
                s += t
                top = max(top, abs(t))
                if z == 0 or (k > 10 and abs(t) < top and abs(t) < mp.mpf(10) ** -30 * abs(s)):
                    break
                k += 1
            # digits lost to cancellation are those between the peak term and the sum
            lost = top_digits - float(mp.log10(abs(s))) if s != 0 else dps
            if dps >= lost + 30:
                return +s
        dps = int(lost) + 50


@lru_cache(maxsize=None)
def ml3_mp(mu, th, ze, z):
    """Three-parameter Mittag-Leffler function by direct series at adaptive precision."""
    return _series_mp(mu, th, ze, z)


def ml3_deriv_mp(mu, th, ze, z, n):
    """n-th z-derivative from the term-by-term differentiated series."""
    return float(_series_mp(mu, th, ze, z, shift=n))


@lru_cache(maxsize=None)
def pmf_mp(n, x, mu, th, ze):
    """Counting probability Gamma(th) x^n/n! (ze)_n E^{ze+n}_{mu, th+n mu}(-x)."""
    if x == 0:
        return 1.0 if n == 0 else 0.0
    e = ml3_mp(mu, th + n * mu, ze + n, -x)
    with mp.workdps(50):
        return float(mp.gamma(th) * mp.mpf(x) ** n / mp.factorial(n) * mp.rf(ze, n) * e)


def poisson_pmf(n, m):
    return float(mp.exp(-mp.mpf(m)) * mp.mpf(m) ** n / mp.factorial(n))


def mixing_moment(shape, p):
    """E[W^p] of the Poisson mixing variable."""
    mu, th, ze = shape
    return math.exp(math.lgamma(th) + math.lgamma(ze + p) - math.lgamma(ze) - math.lgamma(th + mu * p))


def gamma_clock_pmf(n, t, shape, theta, lam, a_g, r_g):
    """z(n, t) for a gamma clock: quadrature of the plain pmf against the clock's density."""
    k = a_g * t

    def f(h):
        if h <= 0:
            return 0.0
        dens = math.exp((k - 1) * math.log(h) + k * math.log(r_g) - r_g * h - math.lgamma(k))
        return pmf_mp(n, lam * h ** theta, *shape) * dens

    hi = (k + 40 * math.sqrt(k) + 40) / r_g
    val, _ = integrate.quad(f, 0, hi, limit=400, epsabs=1e-14, epsrel=1e-12,
                            points=[k / r_g] if k > 1 else None)
    return val


def stable_clock_poisson_pmf(n, t, alpha, theta, lam):
    """z(n, t) for a Poisson count on an alpha-stable clock.

    Kanter: H = t^(1/alpha) (A(U)/E)^((1-alpha)/alpha) with U uniform on
    (0, pi) and E exponential, so z(n) is a double integral over (U, E).
    """
    a = alpha

    def amp(u):
        return (math.sin(a * u) / math.sin(u) ** (1 / a)) * math.sin((1 - a) * u) ** ((1 - a) / a)

    def inner(u):
        c = t ** (1 / a) * amp(u)

        def g(e):
            x = lam * (c * e ** (-(1 - a) / a)) ** theta
            return math.exp(-e - x + n * math.log(x) - math.lgamma(n + 1)) if x > 0 else 0.0
        return integrate.quad(g, 0, np.inf, limit=200, epsabs=1e-14, epsrel=1e-12)[0]

    val, _ = integrate.quad(inner, 0, math.pi, limit=200, epsabs=1e-13, epsrel=1e-11)
    return val / math.pi


def compound_poisson_gamma_cdf(y, rate, a, b):
    """P[sum_{i <= N} Y_i <= y], N ~ Poisson(rate), Y_i ~ Gamma(a, scale b)."""
    with mp.workdps(40):
        r = mp.mpf(rate)
        s = mp.exp(-r)
        n = 1
        while True:
            w = mp.exp(-r) * r ** n / mp.factorial(n)
            s += w * mp.gammainc(a * n, 0, mp.mpf(y) / b, regularized=True)
            if n > rate + 20 and w < mp.mpf(10) ** -30:
                break
            n += 1
        return float(s)


def compound_poisson_gamma_pdf(y, rate, a, b):
    with mp.workdps(40):
        r, yy = mp.mpf(rate), mp.mpf(y)
        s, n = mp.mpf(0), 1
        while True:
            w = mp.exp(-r) * r ** n / mp.factorial(n)
            s += w * (yy / b) ** (a * n - 1) * mp.exp(-yy / b) / (b * mp.gamma(a * n))
            if n > rate + 20 and w < mp.mpf(10) ** -30:
                break
            n += 1
        return float(s)


def upsilon_mp(p, q, s, shape, terms=100):
    """Direct summation of Upsilon with Mittag-Leffler factors from ml3_mp."""
    mu, th, ze = shape
    tot = mp.mpf(0)
    for n in range(1, terms + 1):
        e = ml3_mp(mu, th + n * mu, ze + n, -p)
        tot += mp.rf(ze, n) * (mp.mpf(p) * mp.mpf(q) ** s) ** n / (mp.factorial(n) * mp.gamma(s * n)) * e
    return float(tot)


def bell_number(m):
    return int(mp.bell(m))


def fd_derivative(f, x, order, h, half_width=4):
    """Central finite difference of the given order on 2*half_width+1 points.

    The stencil weights solve the Taylor (Vandermonde) system, so the
    truncation error is O(h^(2 half_width + 1 - order)).
    """
    k = np.arange(-half_width, half_width + 1, dtype=float)
    a = np.vander(k, increasing=True).T
    rhs = np.zeros(k.size)
    rhs[order] = math.factorial(order)
    w = np.linalg.solve(a, rhs)
    return float(sum(wi * f(x + ki * h) for wi, ki in zip(w, k)) / h ** order)
