"""Simulation counterparts of the analytic laws.

Counts are drawn by inverse transform over the cumulative pmf.  For a
random clock each draw has its own operational time ``x = lambda H^theta``;
since the count is stochastically increasing in ``x``, the quantile at
``x`` is bracketed by the quantiles at two neighbouring grid points, and
the pmf at ``x`` itself is computed only for the draws where those differ.
The result is an exact inverse transform, not an interpolation.

Randomness comes from :class:`RngStream`, a Philox counter-based generator
keyed by ``(seed, stream_id)``, so that independent streams never overlap
and every run is reproducible.
"""

from __future__ import annotations

import math
import os
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import fcp_core
from .compound import BetaUnit, GammaJump, _check_jump
from .errors import UnsupportedError, ValidationError
from .fcp_core import FcpParams
from .shock_model import ShockModel
from .special_fn import DEFAULT_CONTROL, SeriesControl
from .subordinators import sample_increments
from .tcfcp import TcfcpModel

__all__ = [
    "RngStream",
    "McSummary",
    "estimate",
    "sample_fcp_count",
    "sample_fcp_counts",
    "sample_tcfcp_count",
    "sample_tcfcp_counts",
    "sample_mixing",
    "sample_fgcp",
    "sample_mcfcp",
    "sample_shock_damage",
    "parallel_draws",
    "tv_distance",
    "ks_distance",
]

_CACHE_SIZE = 64
CHUNK = 1 << 17


class RngStream:
    """Deterministic pseudo-random stream for ``(seed, stream_id)``.

    Two streams with the same key produce identical draws; different keys
    give statistically independent Philox streams.

    >>> a = RngStream(7, 1).random(3)
    >>> b = RngStream(7, 1).random(3)
    >>> bool(np.all(a == b))
    True
    """

    def __init__(self, seed: int, stream_id: int = 0, _path: tuple = ()):
        if not (0 <= int(seed) < 2 ** 64):
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if int(stream_id) < 0:
            raise ValidationError("stream_id must be nonnegative")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._path = tuple(_path)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,) + self._path)
        self.generator = np.random.Generator(np.random.Philox(ss))

    def substream(self, k: int) -> "RngStream":
        """Child stream ``k``; children of one stream are mutually independent."""
        return RngStream(self.seed, self.stream_id, self._path + (int(k),))

    def __getattr__(self, name):
        # forward the numpy Generator API (random, gamma, poisson, ...)
        return getattr(self.__dict__["generator"], name)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, path={self._path})"


RngLike = Union[RngStream, np.random.Generator]


def _gen(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise ValidationError("rng must be an RngStream or numpy Generator")


@dataclass(frozen=True)
class McSummary:
    """Sample statistics of a batch of draws.

    ``histogram`` maps each value to its relative frequency for integer
    draws, and ``(left, right)`` bin edges to relative frequency otherwise.
    """

    n_draws: int
    mean: float
    variance: float
    std_error: float
    histogram: dict


def estimate(draws, bins: int = 50) -> McSummary:
    """Mean, unbiased variance, standard error and histogram of ``draws``.

    >>> s = estimate([0.0, 2.0])
    >>> (s.mean, s.variance)
    (1.0, 2.0)
    """
    x = np.asarray(draws, dtype=float).ravel()
    n = x.size
    if n < 2:
        raise ValidationError("at least two draws are needed")
    mean = math.fsum(x.tolist()) / n
    var = math.fsum(((x - mean) ** 2).tolist()) / (n - 1)
    if np.all(x == np.round(x)):
        vals, cnt = np.unique(x.astype(np.int64), return_counts=True)
        hist = {int(v): c / n for v, c in zip(vals, cnt)}
    else:
        cnt, edges = np.histogram(x, bins=bins)
        hist = {(float(edges[i]), float(edges[i + 1])): c / n
                for i, c in enumerate(cnt) if c}
    return McSummary(n, mean, var, math.sqrt(var / n), hist)


# ---------------------------------------------------------------------------
# counts at a fixed operational time


class _CdfCache:
    """Cumulative pmf at one operational time, extended on demand."""

    def __init__(self, shape, x: float, ctrl: SeriesControl):
        self.shape, self.x, self.ctrl = shape, x, ctrl
        vec = fcp_core.auto_pmf_vector(shape, x, ctrl)
        self.cdf = np.cumsum(vec.probs)

    def quantile(self, u: np.ndarray) -> np.ndarray:
        while np.any(u >= self.cdf[-1]) and self.cdf[-1] < 1.0 - 1e-15:
            before = self.cdf[-1]
            vec = fcp_core.shape_pmf_vector(self.shape, self.x, 2 * self.cdf.size, self.ctrl)
            self.cdf = np.cumsum(vec.probs)
            if self.cdf[-1] <= before:
                break
        # u beyond the computed mass has probability below 1e-15; clip it
        return np.minimum(np.searchsorted(self.cdf, u, side="right"), self.cdf.size - 1)


_caches: "OrderedDict[tuple, _CdfCache]" = OrderedDict()


def _cache_for(shape, x: float, ctrl: SeriesControl) -> _CdfCache:
    key = (shape, x, ctrl)
    hit = _caches.get(key)
    if hit is None:
        hit = _CdfCache(shape, x, ctrl)
        _caches[key] = hit
        if len(_caches) > _CACHE_SIZE:
            _caches.popitem(last=False)
    else:
        _caches.move_to_end(key)
    return hit


def sample_fcp_counts(params: FcpParams, t: float, rng: RngLike, size: int,
                      ctrl: SeriesControl = DEFAULT_CONTROL) -> np.ndarray:
    """``size`` independent draws of ``N(t)``."""
    fcp_core._check_t(t)
    g = _gen(rng)
    if t == 0:
        return np.zeros(size, dtype=np.int64)
    u = g.random(size)
    return _cache_for(params.shape, fcp_core.fcp_x(params, t), ctrl).quantile(u).astype(np.int64)


def sample_fcp_count(params: FcpParams, t: float, rng: RngLike,
                     ctrl: SeriesControl = DEFAULT_CONTROL) -> int:
    """One draw of ``N(t)`` by inverse transform."""
    return int(sample_fcp_counts(params, t, rng, 1, ctrl)[0])


def _tilted_inverse_stable(mu: float, kappa: float, g: np.random.Generator, size: int) -> np.ndarray:
    """``T = S^(-mu)`` for a standard ``mu``-stable ``S``, size-biased by ``T^kappa``.

    Kanter's representation gives ``T = E^(1-mu) B(U)`` with ``E``
    exponential, ``U`` uniform on ``(0, pi)`` and ``B`` decreasing.  The
    tilt turns ``E`` into a Gamma(1 + (1-mu) kappa) variable and ``U``
    into a draw with density proportional to ``B(U)^kappa``, which is
    sampled by rejection from the uniform law (``kappa >= 0``).
    """
    def b(u):
        return np.sin(u) / (np.sin(mu * u) ** mu * np.sin((1.0 - mu) * u) ** (1.0 - mu))

    b0 = 1.0 / (mu ** mu * (1.0 - mu) ** (1.0 - mu))
    u = np.empty(size)
    todo = np.arange(size)
    while todo.size:
        cand = g.uniform(0.0, math.pi, todo.size)
        ok = g.random(todo.size) < (b(cand) / b0) ** kappa
        u[todo[ok]] = cand[ok]
        todo = todo[~ok]
    e = g.gamma(1.0 + (1.0 - mu) * kappa, 1.0, size)
    return e ** (1.0 - mu) * b(u)


def sample_mixing(shape, rng: RngLike, size: int) -> np.ndarray:
    """Draws of ``W`` with ``E[W^p] = Gamma(theta_v) Gamma(zeta+p) / (Gamma(zeta) Gamma(theta_v+mu p))``.

    The count at operational time ``x`` is then ``Poisson(x W)``.  The
    moments factor as

        Gamma(mu zeta) Gamma(zeta+p) / (Gamma(zeta) Gamma(mu zeta + mu p))
        * Gamma(theta_v) Gamma(mu zeta + mu p) / (Gamma(mu zeta) Gamma(theta_v + mu p)),

    the first being an inverse stable variable tilted by ``T^zeta`` and the
    second ``E[B^(mu p)]`` for ``B ~ Beta(mu zeta, theta_v - mu zeta)``.
    """
    mu, th, ze = shape
    g = _gen(rng)
    if mu == 1.0:
        return np.ones(size) if th == ze else g.beta(ze, th - ze, size)
    w = _tilted_inverse_stable(mu, ze, g, size)
    if th > mu * ze:
        w = w * g.beta(mu * ze, th - mu * ze, size) ** mu
    return w


def _model(params_or_model, sub=None, ctrl=DEFAULT_CONTROL):
    if isinstance(params_or_model, TcfcpModel):
        return params_or_model
    if sub is None:
        return params_or_model
    return TcfcpModel(params_or_model, sub, ctrl, allow_asymptotic=True)


def sample_tcfcp_counts(params: FcpParams, sub, t: float, rng: RngLike, size: int,
                        ctrl: SeriesControl = DEFAULT_CONTROL) -> np.ndarray:
    """``size`` draws of ``N(H(t))``: the clock first, then the count.

    Given the clock the count is ``Poisson(lambda H^theta W)`` with ``W``
    from :func:`sample_mixing`.

    The clock is drawn from ``sub`` itself, so for clocks handled
    analytically through an asymptotic surrogate the simulated law is the
    exact one.
    """
    fcp_core._check_t(t)
    g = _gen(rng)
    if t == 0:
        return np.zeros(size, dtype=np.int64)
    h = sample_increments(sub, t, g, size)
    x = params.lambda_theta * h ** params.theta_t
    return g.poisson(x * sample_mixing(params.shape, g, size)).astype(np.int64)


def sample_tcfcp_count(params: FcpParams, sub, t: float, rng: RngLike,
                       ctrl: SeriesControl = DEFAULT_CONTROL) -> int:
    """One draw of ``N(H(t))``."""
    return int(sample_tcfcp_counts(params, sub, t, rng, 1, ctrl)[0])


def _counts(params_or_model, t, g, size, ctrl):
    if isinstance(params_or_model, TcfcpModel):
        m = params_or_model
        return sample_tcfcp_counts(m.params, m.sub, t, g, size, ctrl)
    if isinstance(params_or_model, FcpParams):
        return sample_fcp_counts(params_or_model, t, g, size, ctrl)
    raise ValidationError("expected FcpParams or TcfcpModel")


# ---------------------------------------------------------------------------
# compound sums and products


def _jump_draws(jump, g, k: int) -> np.ndarray:
    if not hasattr(jump, "sample"):
        raise UnsupportedError(f"{type(jump).__name__} has no additive sampler")
    return np.asarray(jump.sample(g, k), dtype=float)


def sample_fgcp(params_or_model, jump, t: float, rng: RngLike, size: int | None = None,
                ctrl: SeriesControl = DEFAULT_CONTROL):
    """Draws of ``Y_1 + ... + Y_N`` with ``N`` the count at ``t`` (empty sum 0).

    ``params_or_model`` is :class:`FcpParams` for the plain count or a
    :class:`TcfcpModel` for the count at a random clock.
    """
    _check_jump(jump, additive=True)
    g = _gen(rng)
    k = 1 if size is None else int(size)
    n = _counts(params_or_model, t, g, k, ctrl)
    total = int(n.sum())
    y = _jump_draws(jump, g, total)
    out = np.bincount(np.repeat(np.arange(k), n), weights=y, minlength=k) if total else np.zeros(k)
    return float(out[0]) if size is None else out


def sample_mcfcp(params_or_model, jump, t: float, rng: RngLike, size: int | None = None,
                 ctrl: SeriesControl = DEFAULT_CONTROL):
    """Draws of ``X_1 ... X_N`` (empty product 1).

    For :class:`BetaUnit` the ``j``-th factor is drawn from Beta(j, 1).
    """
    _check_jump(jump)
    g = _gen(rng)
    k = 1 if size is None else int(size)
    n = _counts(params_or_model, t, g, k, ctrl)
    total = int(n.sum())
    path = np.repeat(np.arange(k), n)
    if isinstance(jump, BetaUnit):
        # position of each factor inside its own product, starting at 1
        start = np.repeat(np.cumsum(n) - n, n)
        j = np.arange(total) - start + 1
        f = g.random(total) ** (1.0 / j)
    else:
        f = _jump_draws(jump, g, total)
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(f))
    neg = np.bincount(path, weights=(f < 0).astype(float), minlength=k)
    zero = np.bincount(path, weights=(f == 0).astype(float), minlength=k) > 0
    mag = np.exp(np.bincount(path, weights=np.where(f == 0, 0.0, logs), minlength=k))
    out = np.where(zero, 0.0, np.where(neg % 2 == 1, -mag, mag))
    return float(out[0]) if size is None else out


def sample_shock_damage(model: ShockModel, t: float, rng: RngLike, size: int | None = None,
                        ctrl: SeriesControl = DEFAULT_CONTROL):
    """Accumulated shock damage ``X(t)`` with gamma shocks."""
    return sample_fgcp(model.params, GammaJump(model.a, model.b), t, rng, size, ctrl)


# ---------------------------------------------------------------------------
# parallel batches and distances


def _workers() -> int:
    raw = os.environ.get("FCPLAB_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"FCPLAB_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def parallel_draws(sampler: Callable[[RngStream, int], np.ndarray], n: int, stream: RngStream,
                   workers: int | None = None, chunk: int = CHUNK) -> np.ndarray:
    """``n`` draws split into fixed-size chunks on independent substreams.

    Chunk ``k`` always uses ``stream.substream(k)`` and results are joined
    in chunk order, so the output does not depend on the number of workers.
    """
    if n < 0:
        raise ValidationError("number of draws must be nonnegative")
    sizes = [min(chunk, n - s) for s in range(0, n, chunk)]
    jobs = [(stream.substream(k), m) for k, m in enumerate(sizes)]
    workers = _workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(jobs) == 1:
        parts = [sampler(s, m) for s, m in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda job: sampler(*job), jobs))
    return np.concatenate(parts) if parts else np.zeros(0)


def tv_distance(draws, pmf) -> float:
    """Total variation between integer draws and a pmf on ``0..len(pmf)-1``."""
    d = np.asarray(draws, dtype=np.int64)
    p = np.asarray(pmf, dtype=float)
    top = max(int(d.max()) + 1 if d.size else 0, p.size)
    emp = np.bincount(d, minlength=top) / d.size
    ref = np.zeros(top)
    ref[:p.size] = p
    return 0.5 * float(np.abs(emp - ref).sum() + max(0.0, 1.0 - p.sum()))


def ks_distance(draws, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Kolmogorov distance between the empirical cdf and ``cdf``.

    ``cdf`` is called on an array.  Both one-sided limits are compared at
    every distinct draw, so atoms in either law are handled.
    """
    x = np.sort(np.asarray(draws, dtype=float))
    vals, counts = np.unique(x, return_counts=True)
    upper = np.cumsum(counts) / x.size
    lower = upper - counts / x.size
    f = np.asarray(cdf(vals), dtype=float)
    f_left = np.asarray(cdf(np.nextafter(vals, -np.inf)), dtype=float)
    return float(max(np.max(np.abs(upper - f)), np.max(np.abs(lower - f_left))))
