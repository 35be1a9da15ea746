import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mosim.marshall_olkin import (
    SHOCK_MAX_DIM,
    BivariateMOCopulaParams,
    MOParameters,
    alpha_beta_from_rates,
    mo_copula_cdf,
    rates_from_alpha_beta_and_margins,
    sample_mo_arnold,
    sample_mo_shock,
    survival_mo,
)
from mosim.mc import empirical_survival, two_sample_z

from .conftest import within
from .strategies import mo_parameters, time_vectors

CASE = MOParameters(2, {1: 1 / 30, 2: 1 / 30, 3: 1 / 15})
D3 = MOParameters(3, {(1,): 0.2, (2,): 0.1, (3,): 0.3, (1, 2): 0.05, (1, 2, 3): 0.15})


def brute_survival(params, t):
    # independent oracle: loop over the shock table
    total = 0.0
    for members, rate in params.rates.items():
        total += rate * max(t[k - 1] for k in members)
    return math.exp(-total)


def test_survival_examples():
    assert survival_mo(CASE, [10, 10]) == pytest.approx(math.exp(-4 / 3), abs=1e-15)
    assert round(survival_mo(CASE, [10, 10]), 5) == 0.26360
    assert survival_mo(CASE, [10, 5]) == pytest.approx(math.exp(-7 / 6), abs=1e-15)
    assert round(survival_mo(CASE, [10, 5]), 5) == 0.31140
    assert survival_mo(D3, [0, 0, 0]) == 1.0


def test_survival_batched():
    t = np.array([[10, 10], [10, 5], [0, 0]])
    assert np.allclose(survival_mo(CASE, t), [math.exp(-4 / 3), math.exp(-7 / 6), 1.0], rtol=0, atol=1e-15)


def test_parameter_validation():
    with pytest.raises(ValueError):
        MOParameters(2, {1: 1.0})  # component 2 never defaults
    with pytest.raises(ValueError):
        MOParameters(2, {4: 1.0, 1: 1.0, 2: 1.0})
    with pytest.raises(ValueError):
        MOParameters(2, {3: -1.0})
    with pytest.raises(ValueError):
        MOParameters(0, {})
    with pytest.raises(ValueError):
        survival_mo(CASE, [1.0])
    with pytest.raises(ValueError):
        survival_mo(CASE, [-1.0, 1.0])


def test_keys_by_mask_or_members_agree():
    a = MOParameters(3, {0b011: 0.5, 0b100: 1.0, 0b001: 0.2, 0b010: 0.3})
    b = MOParameters(3, {(1, 2): 0.5, (3,): 1.0, (1,): 0.2, (2,): 0.3})
    assert a.rates == b.rates
    assert a.rate({2, 1}) == 0.5
    assert np.allclose(a.marginal_rates(), [0.7, 0.8, 1.0])


@settings(max_examples=200)
@given(mo_parameters(), st.data())
def test_survival_matches_brute_force(params, data):
    t = data.draw(time_vectors(params.d))
    assert survival_mo(params, t) == pytest.approx(brute_survival(params, t), rel=1e-12, abs=1e-300)


@settings(max_examples=200)
@given(mo_parameters(), st.data())
def test_lack_of_memory(params, data):
    t = data.draw(st.floats(0.0, 5.0))
    s = data.draw(time_vectors(params.d, 5.0))
    keep = sorted(data.draw(st.sets(st.integers(1, params.d), min_size=1)))
    sub = params.margin(keep)
    s_sub = [s[k - 1] for k in keep]
    lhs = survival_mo(sub, np.full(sub.d, t) + s_sub)
    rhs = survival_mo(sub, np.full(sub.d, t)) * survival_mo(sub, s_sub)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


@settings(max_examples=200)
@given(mo_parameters(), st.data())
def test_marginalization(params, data):
    t = data.draw(time_vectors(params.d))
    keep = sorted(data.draw(st.sets(st.integers(1, params.d), min_size=1)))
    padded = [t[k] if (k + 1) in keep else 0.0 for k in range(params.d)]
    assert survival_mo(params.margin(keep), [t[k - 1] for k in keep]) == pytest.approx(
        survival_mo(params, padded), rel=0, abs=1e-14
    )


def test_single_shock_is_comonotone(rng):
    params = MOParameters(2, {3: 1.0})
    for sampler in (sample_mo_shock, sample_mo_arnold):
        taus = sampler(params, 1000, rng)
        assert np.array_equal(taus[:, 0], taus[:, 1])


def test_independence_factorizes(rng):
    n = 10**6
    params = MOParameters(2, {1: 0.7, 2: 1.3})
    taus = sample_mo_shock(params, n, rng)
    p, _ = empirical_survival(taus, [1.0, 1.0])
    assert within(p, math.exp(-2.0), n)
    # factorization of empirical marginals
    p1 = (taus[:, 0] > 1).mean()
    p2 = (taus[:, 1] > 1).mean()
    assert within(p, p1 * p2, n)


def test_one_dimensional_exponential(rng):
    n = 10**6
    params = MOParameters(1, {1: 2.0})
    for sampler in (sample_mo_shock, sample_mo_arnold):
        taus = sampler(params, n, rng)[:, 0]
        assert abs(taus.mean() - 0.5) <= 4 * 0.5 / math.sqrt(n)


@pytest.mark.parametrize("sampler", [sample_mo_shock, sample_mo_arnold])
def test_samplers_match_survival(sampler, rng):
    n = 10**6
    taus = sampler(D3, n, rng)
    for t in ([1.0, 1.0, 1.0], [0.5, 2.0, 1.0], [3.0, 0.0, 0.2]):
        p, _ = empirical_survival(taus, t)
        assert within(p, survival_mo(D3, t), n)


def test_shock_and_arnold_agree(rng_factory):
    n = 10**6
    a = sample_mo_shock(D3, n, rng_factory(1))
    b = sample_mo_arnold(D3, n, rng_factory(2))
    for t in ([1.0, 1.0, 1.0], [2.0, 0.5, 0.1]):
        assert abs(two_sample_z(*empirical_survival(a, t), *empirical_survival(b, t))) <= 4


def test_shock_sampler_dimension_guard():
    params = MOParameters(SHOCK_MAX_DIM + 1, {(1 << (SHOCK_MAX_DIM + 1)) - 1: 1.0})
    with pytest.raises(ValueError):
        sample_mo_shock(params, 1)
    assert sample_mo_arnold(params, 3, 0).shape == (3, SHOCK_MAX_DIM + 1)


def test_copula_examples():
    p = BivariateMOCopulaParams(2 / 3, 2 / 3)
    assert mo_copula_cdf(p, math.exp(-1), math.exp(-1)) == pytest.approx(math.exp(-4 / 3), abs=1e-15)
    assert mo_copula_cdf(p, math.exp(-1), math.exp(-0.5)) == pytest.approx(math.exp(-7 / 6), abs=1e-15)


def test_alpha_beta_mapping():
    p = alpha_beta_from_rates(1 / 30, 1 / 30, 1 / 15)
    assert p.alpha == pytest.approx(2 / 3, abs=1e-15)
    assert p.beta == pytest.approx(2 / 3, abs=1e-15)
    back = rates_from_alpha_beta_and_margins(2 / 3, 2 / 3, 0.1, 0.1)
    assert back.rate([1]) == pytest.approx(1 / 30, abs=1e-15)
    assert back.rate([2]) == pytest.approx(1 / 30, abs=1e-15)
    assert back.rate([1, 2]) == pytest.approx(1 / 15, abs=1e-15)
    with pytest.raises(ValueError):
        rates_from_alpha_beta_and_margins(0.5, 0.5, 0.1, 0.2)
    with pytest.raises(ValueError):
        BivariateMOCopulaParams(1.5, 0.5)


@settings(max_examples=100)
@given(st.floats(0.0, 2.0), st.floats(0.0, 2.0), st.floats(0.01, 2.0), st.floats(0.0, 8.0), st.floats(0.0, 8.0))
def test_copula_reproduces_survival(l1, l2, l12, t1, t2):
    params = MOParameters(2, {1: l1, 2: l2, 3: l12})
    cop = alpha_beta_from_rates(l1, l2, l12)
    r1, r2 = l1 + l12, l2 + l12
    assert mo_copula_cdf(cop, math.exp(-r1 * t1), math.exp(-r2 * t2)) == pytest.approx(
        survival_mo(params, [t1, t2]), rel=0, abs=1e-14
    )
