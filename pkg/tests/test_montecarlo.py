import math

import numpy as np
import pytest

import oracles
from fcplab.compound import Bernoulli, BetaUnit, Geometric, fgcp_mean, fgcp_pmf_discrete, mcfcp_cdf
from fcplab.errors import UnsupportedError, ValidationError
from fcplab.fcp_core import FcpParams, fcp_mean, fcp_pmf_auto
from fcplab.montecarlo import (
    RngStream, estimate, ks_distance, parallel_draws, sample_fcp_count,
    sample_fcp_counts, sample_fgcp, sample_mcfcp, sample_mixing, sample_shock_damage,
    sample_tcfcp_counts, tv_distance,
)
from fcplab.shock_model import ShockModel, shock_cdf
from fcplab.subordinators import AlphaStable, GammaSub, TemperedStable
from fcplab.tcfcp import TcfcpModel, tcfcp_mean, tcfcp_pmf_auto

FRAC = FcpParams(0.7, 1.1, 1.2, 0.8, 1.5)


def test_streams_are_reproducible_and_distinct():
    a = RngStream(42, 3).random(5)
    np.testing.assert_array_equal(a, RngStream(42, 3).random(5))
    assert not np.array_equal(a, RngStream(42, 4).random(5))
    assert not np.array_equal(a, RngStream(43, 3).random(5))
    s = RngStream(42, 3)
    assert not np.array_equal(s.substream(0).random(5), s.substream(1).random(5))
    with pytest.raises(ValidationError):
        RngStream(-1)


def test_estimate_summary():
    x = np.array([1, 2, 2, 5])
    s = estimate(x)
    assert s.n_draws == 4
    assert s.mean == 2.5
    assert s.variance == pytest.approx(np.var(x, ddof=1))
    assert s.std_error == pytest.approx(math.sqrt(s.variance / 4))
    assert s.histogram == {1: 0.25, 2: 0.5, 5: 0.25}
    cont = estimate(np.linspace(0, 1, 101) + 0.001, bins=4)
    assert sum(cont.histogram.values()) == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        estimate([1.0])


@pytest.mark.parametrize("shape", [(0.5, 0.5, 1.0), (0.8, 0.8, 1.0), (0.7, 1.1, 1.2), (0.4, 2.0, 2.5),
                                   (0.6, 0.9, 1.5), (1.0, 1.7, 1.2), (0.7, 0.65, 0.9), (0.3, 0.1, 0.2),
                                   (1.0, 1.0, 1.0)])
def test_mixing_variable_moments(shape):
    w = sample_mixing(shape, RngStream(1), 400_000)
    for p in (0.5, 1.0, 2.0):
        ref = oracles.mixing_moment(shape, p)
        se = np.std(w ** p) / math.sqrt(w.size)
        assert abs(np.mean(w ** p) - ref) < 5 * se + 1e-12


def test_plain_counts_total_variation():
    draws = sample_fcp_counts(FRAC, 2.0, RngStream(5), 100_000)
    assert tv_distance(draws, fcp_pmf_auto(FRAC, 2.0).probs) < 0.01
    assert isinstance(sample_fcp_count(FRAC, 2.0, RngStream(5)), int)
    assert np.all(sample_fcp_counts(FRAC, 0.0, RngStream(5), 3) == 0)


@pytest.mark.parametrize("sub", [GammaSub(1.0, 1.0), AlphaStable(0.9)])
def test_time_changed_counts_total_variation(sub):
    p = FcpParams(0.8, 0.8, 1.0, 0.5, 1.0)
    draws = sample_tcfcp_counts(p, sub, 1.0, RngStream(9), 100_000)
    ref = tcfcp_pmf_auto(TcfcpModel(p, sub), 1.0).probs
    assert tv_distance(draws, ref) < 0.01


def test_time_changed_counts_with_small_zeta():
    p = FcpParams(0.7, 0.65, 0.9, 0.6, 1.2)
    model = TcfcpModel(p, GammaSub(1.0, 1.0))
    draws = sample_tcfcp_counts(p, GammaSub(1.0, 1.0), 1.0, RngStream(2), 100_000)
    assert tv_distance(draws, tcfcp_pmf_auto(model, 1.0).probs) < 0.01
    m = tcfcp_mean(model, 1.0)
    assert abs(draws.mean() - m) < 5 * draws.std() / math.sqrt(draws.size)


def test_tempered_clock_uses_true_law():
    p = FcpParams(1.0, 1.0, 1.0, 1.0, 2.0)
    ts = TemperedStable(0.6, 1.5)
    draws = sample_tcfcp_counts(p, ts, 2.0, RngStream(4), 100_000)
    exact = 2.0 * ts.exact_moment(1.0, 2.0)
    assert abs(draws.mean() - exact) < 5 * draws.std() / math.sqrt(draws.size)


def test_compound_samplers():
    jump = Geometric(0.4)
    y = sample_fgcp(FRAC, jump, 1.5, RngStream(6), 100_000)
    ref = [fgcp_pmf_discrete(FRAC, jump, s, 1.5) for s in range(60)]
    assert tv_distance(y.astype(int), ref) < 0.01
    assert abs(y.mean() - fgcp_mean(FRAC, jump, 1.5)) < 5 * y.std() / math.sqrt(y.size)
    z = sample_mcfcp(FRAC, BetaUnit(), 1.5, RngStream(7), 100_000)
    counts = fcp_pmf_auto(FRAC, 1.5).probs
    m = np.arange(counts.size)[:, None]

    def beta_cdf(v):
        # Beta(1, m) products: P[Z <= y] = sum_m P(m) (1 - (1 - y)^m) below 1
        v = np.asarray(v)
        inner = (counts[:, None] * (1.0 - (1.0 - np.clip(v, 0, 1)[None, :]) ** m)).sum(axis=0)
        return np.where(v >= 1, 1.0, np.where(v < 0, 0.0, inner))

    assert beta_cdf(np.array([0.4]))[0] == pytest.approx(mcfcp_cdf(FRAC, BetaUnit(), 0.4, 1.5))
    assert ks_distance(z, beta_cdf) < 0.01
    b = sample_mcfcp(FRAC, Bernoulli(0.6), 1.5, RngStream(7), 20_000)
    assert set(np.unique(b)) <= {0.0, 1.0}
    model = TcfcpModel(FRAC, GammaSub(1.0, 1.0))
    assert isinstance(sample_fgcp(model, jump, 1.0, RngStream(1)), float)
    with pytest.raises(ValidationError):
        sample_fgcp("oops", jump, 1.0, RngStream(1), 5)


def test_shock_damage_sampler():
    m = ShockModel(FRAC, a=1.3, b=0.6, r0=10.0)
    x = sample_shock_damage(m, 1.2, RngStream(3), 100_000)
    assert ks_distance(x, lambda v: shock_cdf(m, v, 1.2)) < 0.01


def test_parallel_draws_do_not_depend_on_workers():
    def sampler(stream, m):
        return sample_fcp_counts(FRAC, 1.0, stream, m)

    one = parallel_draws(sampler, 10_000, RngStream(11), workers=1, chunk=1024)
    four = parallel_draws(sampler, 10_000, RngStream(11), workers=4, chunk=1024)
    np.testing.assert_array_equal(one, four)
    assert one.size == 10_000
    assert parallel_draws(sampler, 0, RngStream(11)).size == 0


def test_distances():
    assert tv_distance([0, 1, 1, 2], [0.25, 0.5, 0.25]) == pytest.approx(0.0)
    assert tv_distance([0, 0], [0.0, 1.0]) == pytest.approx(1.0)
    assert ks_distance([0.5], lambda v: np.clip(v, 0, 1)) == pytest.approx(0.5)
    # an atom matched exactly
    assert ks_distance([0.0, 0.0, 1.0, 1.0], lambda v: np.where(v >= 1, 1.0, np.where(v >= 0, 0.5, 0.0))) \
        == pytest.approx(0.0)


def test_mean_of_plain_counts_matches():
    d = sample_fcp_counts(FRAC, 3.0, RngStream(8), 50_000)
    assert abs(d.mean() - fcp_mean(FRAC, 3.0)) < 5 * d.std() / math.sqrt(d.size)
