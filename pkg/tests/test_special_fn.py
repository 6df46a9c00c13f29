import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from fcplab.errors import ConvergenceError, DomainError
from fcplab.special_fn import (
    MlArgs, SeriesControl, beta_fn, count_kernel, log_beta, log_gamma, ml3, ml3_deriv,
    ml3_eval, pochhammer,
)

SHAPES = [(1.0, 1.0, 1.0), (0.5, 0.5, 1.0), (0.8, 0.8, 1.0), (0.7, 1.3, 1.6), (0.3, 1.0, 2.5),
          (1.0, 2.5, 1.5)]


def test_exponential_and_shifted_reductions():
    assert ml3(MlArgs(1.0, 1.0, 1.0, 1.0)) == pytest.approx(math.e, rel=1e-14)
    assert ml3(MlArgs(1.0, 2.0, 1.0, 1.0)) == pytest.approx(math.e - 1.0, rel=1e-14)
    assert ml3(MlArgs(1.0, 1.0, 1.0, -50.0)) == pytest.approx(math.exp(-50.0), rel=1e-10)


@pytest.mark.parametrize("shape", SHAPES)
@pytest.mark.parametrize("z", [-25.0, -10.0, -3.0, -0.5, 0.0, 0.7, 4.0])
def test_ml3_against_high_precision_series(shape, z):
    if abs(z) ** (1.0 / shape[0]) > 1000:
        pytest.skip("reference series too long at this shape")
    ref = float(oracles.ml3_mp(*shape, z))
    got = ml3_eval(MlArgs(*shape, z))
    assert got.value == pytest.approx(ref, rel=1e-9, abs=1e-300)
    assert got.error <= max(1e-8 * abs(ref), 1e-300)


@pytest.mark.parametrize("shape", SHAPES)
def test_nonnegative_and_decaying_on_negative_axis(shape):
    vals = [ml3(MlArgs(*shape, z)) for z in (-10.0, -20.0, -40.0)]
    assert all(v >= 0 for v in vals)
    assert vals[0] >= vals[1] >= vals[2]


@pytest.mark.parametrize("shape", [(1.0, 1.0, 1.0), (0.5, 0.5, 1.0), (0.8, 1.1, 1.3)])
@pytest.mark.parametrize("z", [-2.0, -0.4, 1.5])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_derivative_matches_differentiated_series(shape, z, n):
    ref = oracles.ml3_deriv_mp(*shape, z, n)
    assert ml3_deriv(MlArgs(*shape, z), n) == pytest.approx(ref, rel=1e-9, abs=1e-14)


def test_derivative_order_zero_is_value():
    a = MlArgs(0.6, 0.9, 1.2, -1.1)
    assert ml3_deriv(a, 0) == ml3(a)
    with pytest.raises(DomainError):
        ml3_deriv(a, -1)


@pytest.mark.parametrize("shape", SHAPES[:4])
@pytest.mark.parametrize("x", [0.3, 3.0, 12.0])
def test_count_kernel_against_oracle(shape, x):
    mu, th, ze = shape
    if th < mu * ze:
        pytest.skip("not a probability law")
    vals, errs, _ = count_kernel(mu, th, ze, x, 40)
    for n in (0, 1, 5, 17, 40):
        ref = oracles.pmf_mp(n, x, *shape)
        assert vals[n] == pytest.approx(ref, rel=1e-8, abs=1e-16)


def test_count_kernel_large_argument():
    vals, _, methods = count_kernel(0.9, 1.2, 1.1, 150.0, 60)
    ref = oracles.pmf_mp(60, 150.0, 0.9, 1.2, 1.1)
    assert vals[60] == pytest.approx(ref, rel=1e-7)
    assert set(methods) <= {"series", "kummer", "contour"}


def test_term_budget_raises_with_partial_sum():
    with pytest.raises(ConvergenceError) as info:
        ml3(MlArgs(1.0, 1.0, 1.0, 30.0), SeriesControl(max_terms=5))
    assert info.value.partial_sum > 0


@pytest.mark.parametrize("bad", [dict(mu=0.0), dict(mu=1.5), dict(theta_v=0.0), dict(zeta=-1.0),
                                 dict(z=math.inf)])
def test_domain_checks(bad):
    kw = dict(mu=0.5, theta_v=1.0, zeta=1.0, z=0.1)
    kw.update(bad)
    with pytest.raises(DomainError):
        MlArgs(**kw)


def test_elementary_pieces():
    assert log_gamma(7.0) == pytest.approx(math.log(720.0), rel=1e-15)
    assert pochhammer(0.5, 3) == pytest.approx(0.5 * 1.5 * 2.5)
    assert pochhammer(2.0, 40) == pytest.approx(math.factorial(41), rel=1e-12)
    assert beta_fn(2.0, 3.0) == pytest.approx(1.0 / 12.0, rel=1e-14)
    assert log_beta(0.5, 0.5) == pytest.approx(math.log(math.pi), rel=1e-14)
    with pytest.raises(DomainError):
        log_gamma(0.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(-30.0, 30.0))
def test_exponential_property(z):
    assert ml3(MlArgs(1.0, 1.0, 1.0, z)) == pytest.approx(math.exp(z), rel=1e-11)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 1.0), st.floats(0.0, 2.0), st.floats(0.2, 2.0), st.floats(-15.0, 0.0))
def test_nonnegativity_property(mu, extra, zeta, z):
    th = mu * zeta + extra
    assert ml3(MlArgs(mu, th, zeta, z)) >= 0.0


def test_series_columns_vectorised_shapes():
    vals, errs, _ = count_kernel(0.8, 0.9, 1.0, 2.0, 10)
    assert vals.shape == errs.shape == (11,)
    assert np.all(errs >= 0)
