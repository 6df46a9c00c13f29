import math

import numpy as np
import pytest
from scipy import integrate

import oracles
from fcplab.compound import (
    Bernoulli, BetaUnit, ContinuousDensity, ConvolutionTable, DiscretePmf, GammaJump, Geometric,
    PoissonJump, fgcp_cdf, fgcp_levy_cdf, fgcp_levy_pmf_discrete, fgcp_mean, fgcp_pmf_discrete,
    fgcp_variance, mcfcp_cdf, mcfcp_levy_cdf, mcfcp_levy_density_beta, mcfcp_levy_point_mass,
    mcfcp_point_mass,
)
from fcplab.errors import UnsupportedError, ValidationError
from fcplab.fcp_core import FcpParams, fcp_pgf, fcp_pmf_auto, fcp_x
from fcplab.subordinators import Drift, GammaSub
from fcplab.tcfcp import TcfcpModel, tcfcp_pgf

P = FcpParams(0.7, 1.2, 1.3, 0.8, 1.6)
T = 1.4


def brute_compound_pmf(counts, jump_pmf, s_max):
    out = np.zeros(s_max + 1)
    row = np.zeros(s_max + 1)
    row[0] = 1.0
    for m, c in enumerate(counts):
        out += c * row
        row = np.convolve(row, jump_pmf)[: s_max + 1]
    return out


def test_bernoulli_jumps_thin_the_count():
    x = fcp_x(P, T)
    for s in (0, 1, 4):
        ref = oracles.pmf_mp(s, 0.35 * x, *P.shape)
        assert fgcp_pmf_discrete(P, Bernoulli(0.35), s, T) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("jump,pmf", [
    (Geometric(0.4), np.r_[0.0, 0.4 * 0.6 ** np.arange(40)]),
    (PoissonJump(0.8), np.array([math.exp(-0.8) * 0.8 ** k / math.factorial(k) for k in range(41)])),
    (DiscretePmf((0, 2, 3), (0.2, 0.5, 0.3)), np.array([0.2, 0, 0.5, 0.3])),
])
def test_discrete_jumps_against_brute_convolution(jump, pmf):
    counts = fcp_pmf_auto(P, T).probs
    ref = brute_compound_pmf(counts, pmf, 12)
    got = [fgcp_pmf_discrete(P, jump, s, T) for s in range(13)]
    np.testing.assert_allclose(got, ref, rtol=1e-10, atol=1e-15)
    assert fgcp_cdf(P, jump, 6.5, T) == pytest.approx(ref[:7].sum(), rel=1e-10)


def test_mean_and_variance_against_pmf_sums():
    jump = Geometric(0.45)
    s = np.arange(400)
    v = np.array([fgcp_pmf_discrete(P, jump, int(k), T) for k in s])
    mean = math.fsum((s * v).tolist())
    var = math.fsum((s * s * v).tolist()) - mean ** 2
    assert fgcp_mean(P, jump, T) == pytest.approx(mean, rel=1e-9)
    assert fgcp_variance(P, jump, T) == pytest.approx(var, rel=1e-8)


@pytest.mark.parametrize("y", [0.3, 2.0, 7.5])
def test_gamma_jumps_on_poisson_count(y):
    p = FcpParams.poisson(2.2)
    ref = oracles.compound_poisson_gamma_cdf(y, 2.2, 1.7, 0.6)
    assert fgcp_cdf(p, GammaJump(1.7, 0.6), y, 1.0) == pytest.approx(ref, rel=1e-11)


def test_convolution_table():
    tab = ConvolutionTable.build(DiscretePmf((1, 2), (0.5, 0.5)), 4, 5)
    assert tab.b[2].tolist() == [0, 0, 0.25, 0.5, 0.25, 0]
    assert tab.tail[4] == pytest.approx(1.0 - tab.b[4].sum())
    assert tab.m_max == 4 and tab.s_max == 5
    with pytest.raises(UnsupportedError):
        ConvolutionTable.build(GammaJump(1.0, 1.0), 2, 3)


def test_beta_unit_product_law_monte_carlo():
    bu = BetaUnit()
    rng = np.random.default_rng(8)
    m = 4
    prods = np.array([np.prod(bu.sample_factors(rng, m)) for _ in range(40_000)])
    for y in (0.05, 0.2, 0.5):
        assert np.mean(prods <= y) == pytest.approx(bu.product_cdf(m, y), abs=0.01)
    val, _ = integrate.quad(lambda u: bu.product_pdf(m, u), 0, 0.3)
    assert val == pytest.approx(bu.product_cdf(m, 0.3), rel=1e-12)


@pytest.mark.parametrize("y", [0.1, 0.6, 0.95])
def test_multiplicative_compounds_against_pgf(y):
    # Beta(1, m) products: P[Z <= y] = 1 - G(1 - y); Bernoulli products: 1 - G(p)
    assert mcfcp_cdf(P, BetaUnit(), y, T) == pytest.approx(1.0 - fcp_pgf(P, 1.0 - y, T), rel=1e-10)
    assert mcfcp_cdf(P, Bernoulli(0.3), y, T) == pytest.approx(1.0 - fcp_pgf(P, 0.3, T), rel=1e-10)
    assert mcfcp_cdf(P, BetaUnit(), 1.0, T) == pytest.approx(1.0, abs=1e-12)
    assert mcfcp_point_mass(P, Bernoulli(0.3), T) == pytest.approx(fcp_pgf(P, 0.3, T), rel=1e-10)
    assert mcfcp_point_mass(P, BetaUnit(), T) == pytest.approx(fcp_pgf(P, 0.0, T), rel=1e-10)


def test_levy_time_compounds():
    sub = GammaSub(1.0, 1.5)
    model = TcfcpModel(P, sub)
    assert mcfcp_levy_cdf(P, sub, BetaUnit(), 0.4, T) == pytest.approx(
        1.0 - tcfcp_pgf(model, 0.6, T), rel=1e-9)
    atom = mcfcp_levy_point_mass(P, sub, BetaUnit(), T)
    assert atom == pytest.approx(tcfcp_pgf(model, 0.0, T), rel=1e-10)
    dens, _ = integrate.quad(lambda y: mcfcp_levy_density_beta(P, sub, y, T), 0, 1, limit=200)
    assert dens + atom == pytest.approx(1.0, abs=1e-9)
    h = 1e-5
    fd = (mcfcp_levy_cdf(P, sub, BetaUnit(), 0.3 + h, T)
          - mcfcp_levy_cdf(P, sub, BetaUnit(), 0.3 - h, T)) / (2 * h)
    assert mcfcp_levy_density_beta(P, sub, 0.3, T) == pytest.approx(fd, rel=1e-6)
    # a unit drift clock leaves the law unchanged
    assert fgcp_levy_cdf(P, Drift(1.0), Geometric(0.5), 3.0, T) == pytest.approx(
        fgcp_cdf(P, Geometric(0.5), 3.0, T), rel=1e-12)
    assert fgcp_levy_pmf_discrete(P, Drift(1.0), Bernoulli(0.5), 2, T) == pytest.approx(
        fgcp_pmf_discrete(P, Bernoulli(0.5), 2, T), rel=1e-12)


def test_zero_time_and_empty_compounds():
    assert fgcp_cdf(P, GammaJump(1.0, 1.0), 0.0, 0.0) == 1.0
    assert fgcp_cdf(P, GammaJump(1.0, 1.0), -0.1, 0.0) == 0.0
    assert mcfcp_cdf(P, BetaUnit(), 0.99, 0.0) == 0.0
    assert mcfcp_point_mass(P, BetaUnit(), 0.0) == 1.0


def test_operation_support_checks():
    with pytest.raises(UnsupportedError):
        fgcp_cdf(P, BetaUnit(), 1.0, T)
    with pytest.raises(UnsupportedError):
        fgcp_mean(P, BetaUnit(), T)
    with pytest.raises(UnsupportedError):
        fgcp_pmf_discrete(P, GammaJump(1.0, 1.0), 1, T)
    with pytest.raises(UnsupportedError):
        mcfcp_cdf(P, Geometric(0.5), 0.5, T)
    no_conv = ContinuousDensity(lambda y: math.exp(-y), None, 1.0, 1.0)
    with pytest.raises(UnsupportedError):
        fgcp_cdf(P, no_conv, 1.0, T)
    with pytest.raises(ValidationError):
        fgcp_cdf(P, "geometric", 1.0, T)
    with pytest.raises(ValidationError):
        DiscretePmf((0, 1), (0.5, 0.6))
    with pytest.raises(ValidationError):
        mcfcp_levy_density_beta(P, Drift(1.0), 1.0, T)


def test_user_supplied_density():
    # exponential jumps: m-fold sums are Gamma(m, 1)
    from scipy import stats
    cd = ContinuousDensity(lambda y: math.exp(-y), lambda m, y: stats.gamma(m).cdf(y), 1.0, 1.0)
    assert fgcp_cdf(P, cd, 2.5, T) == pytest.approx(fgcp_cdf(P, GammaJump(1.0, 1.0), 2.5, T),
                                                   rel=1e-12)
