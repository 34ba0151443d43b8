import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hsp import _kernels as K
from hsp.errors import ConsistencyError, DegenerateDataError, InvalidArgumentError
from hsp.model import (
    ClusterParams, DataMatrix, Hyperparams, log_likelihood_point, mu_full_conditional,
    sample_theta_prior, sigma2_full_conditional, standardize, update_theta,
)
from hsp.sampler import init_state


def test_standardize_examples():
    d = standardize(DataMatrix(np.array([[1.0], [2.0], [3.0]])))
    np.testing.assert_allclose(d.values[:, 0], [-1.0, 0.0, 1.0])
    assert d.standardized
    again = standardize(d)
    np.testing.assert_allclose(again.values, d.values, atol=1e-12)


def test_standardize_constant_column_names_subject():
    d = DataMatrix(np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]]), subject_names=["s1", "s2"])
    with pytest.raises(DegenerateDataError, match="s1"):
        standardize(d)


@given(arrays(np.float64, st.tuples(st.integers(2, 8), st.integers(1, 5)),
              elements=st.floats(-1e3, 1e3, allow_subnormal=False)))
def test_standardize_moments(values):
    ranges = values.max(axis=0) - values.min(axis=0)
    if np.any(ranges < 1e-3 * (1 + np.abs(values).max(axis=0))):
        return
    z = standardize(DataMatrix(values)).values
    np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-9)
    np.testing.assert_allclose(z.var(axis=0, ddof=1), 1.0, atol=1e-9)


def test_data_matrix_validation():
    with pytest.raises(DegenerateDataError):
        DataMatrix(np.array([[np.nan]]))
    with pytest.raises(InvalidArgumentError):
        DataMatrix(np.zeros((2, 2)), condition_names=["a"])
    d = DataMatrix(np.zeros((2, 3)))
    assert d.subject_names[2] == "subject_3" and d.n_conditions == 2


def test_log_likelihood_examples():
    assert log_likelihood_point(0.0, ClusterParams(0.0, 1.0)) == pytest.approx(
        -0.5 * math.log(2 * math.pi))
    assert log_likelihood_point(2.0, ClusterParams(2.0, 0.3)) == pytest.approx(
        -0.5 * math.log(2 * math.pi * 0.3))
    assert log_likelihood_point(1.0, ClusterParams(0.0, 0.16)) == pytest.approx(
        -0.5 * math.log(2 * math.pi * 0.16) - 1 / (2 * 0.16))
    with pytest.raises(InvalidArgumentError):
        ClusterParams(0.0, 0.0)


def test_hyperparams_validation_and_defaults():
    h = Hyperparams(c0=(1, 1), nu0=(1, 2, 2))
    assert h.d0[0] == 7.25 and h.e0[0] == 1.0
    assert h.e0[0] / (h.d0[0] - 1) == pytest.approx(0.16)
    for bad in (dict(b0=0.0), dict(d0=1.0), dict(tau=-1.0), dict(beta=0.0)):
        with pytest.raises(InvalidArgumentError):
            Hyperparams(c0=(1, 1), nu0=(1,), **bad)
    data = DataMatrix(np.array([[0.0, 1.0], [2.0, 5.0], [4.0, 6.0]]))
    h = Hyperparams.for_data(data, lam=2.0)
    np.testing.assert_allclose(h.a0, [2.0, 4.0])
    np.testing.assert_allclose(h.b0, [4.0, 7.0])
    assert h.with_shrinkage(tau=3.0).tau == 3.0 and h.lam == 2.0


def test_prior_draws_reproducible_and_degenerate_limit():
    h = Hyperparams(c0=(1,), nu0=(1, 1), a0=0.7, b0=1e-12)
    a = sample_theta_prior(0, h, np.random.default_rng(3))
    b = sample_theta_prior(0, h, np.random.default_rng(3))
    assert a == b
    assert a.mu == pytest.approx(0.7, abs=1e-5)


def test_mu_conditional_conjugate_example():
    mean, var = mu_full_conditional([0.1, 0.2], 0.16, 0.0, 1.0)
    b = 1 / (1 + 2 / 0.16)
    assert var == pytest.approx(b)
    assert mean == pytest.approx(b * (0.3 / 0.16))
    # flat-prior limit with one observation
    mean, var = mu_full_conditional([0.4], 0.5, 0.0, 1e12)
    assert mean == pytest.approx(0.4) and var == pytest.approx(0.5)
    # no data leaves the prior
    assert mu_full_conditional([], 0.5, 1.5, 2.0) == pytest.approx((1.5, 2.0))


def test_mu_conditional_against_quadrature():
    ys, s2, a0, b0 = np.array([0.1, 0.2, -0.4]), 0.3, 0.2, 0.8
    grid = np.linspace(-4, 4, 200001)
    logp = -(grid - a0) ** 2 / (2 * b0) - ((ys[:, None] - grid) ** 2).sum(0) / (2 * s2)
    w = np.exp(logp - logp.max())
    m = (grid * w).sum() / w.sum()
    v = ((grid - m) ** 2 * w).sum() / w.sum()
    mean, var = mu_full_conditional(ys, s2, a0, b0)
    assert mean == pytest.approx(m, abs=1e-8) and var == pytest.approx(v, rel=1e-6)


def test_sigma2_conditional():
    shape, scale = sigma2_full_conditional([1.0, 2.0], 1.5, 7.25, 1.0)
    assert shape == pytest.approx(7.25 + 1.0) and scale == pytest.approx(1.0 + 0.5 * 0.5)


def test_prior_sigma2_mean():
    K.seed(17)
    draws = np.array([K.prior_theta(0.0, 1.0, 7.25, 1.0)[1] for _ in range(100_000)])
    sd = draws.std() / math.sqrt(len(draws))
    assert abs(draws.mean() - 0.16) < 4 * sd


def test_theta_gibbs_without_data_keeps_prior():
    # alternating the two conditionals with no likelihood must leave the prior invariant
    rng = np.random.default_rng(2)
    a0, b0, d0, e0 = 0.5, 2.0, 7.25, 1.0
    mu, s2 = 0.0, 1.0
    mus, s2s = [], []
    for _ in range(100_000):
        m, v = mu_full_conditional([], s2, a0, b0)
        mu = rng.normal(m, math.sqrt(v))
        shape, scale = sigma2_full_conditional([], mu, d0, e0)
        s2 = 1 / rng.gamma(shape, 1 / scale)
        mus.append(mu)
        s2s.append(s2)
    mus, s2s = np.array(mus), np.array(s2s)
    assert abs(mus.mean() - a0) < 4 * math.sqrt(b0 / len(mus))
    assert abs(mus.var() - b0) < 4 * b0 * math.sqrt(2 / len(mus))
    assert abs(s2s.mean() - 0.16) < 4 * s2s.std() / math.sqrt(len(s2s))


def test_update_theta_on_state():
    h = Hyperparams(c0=(1, 1), nu0=(1, 1, 1), lam=1.0)
    rng = np.random.default_rng(0)
    state = init_state(h, rng)
    data = DataMatrix(rng.normal(size=(3, 2)))
    thetas = update_theta(state, data, h, rng)
    assert [len(t) for t in thetas] == list(state.n_clusters)
    state.check()
    broken = state.copy()
    broken.pi[0] = [0, 2, 2]
    with pytest.raises(ConsistencyError):
        broken.check()


def test_kernel_theta_update_matches_conditionals():
    # one subject, clusters {0,1} and {2}: mu draws given the reset sigma2
    y = np.array([[0.1], [0.2], [1.5]])
    pi = np.array([[0, 0, 1]])
    L = np.array([2])
    a0, b0, d0, e0 = (np.array([v]) for v in (0.0, 1.0, 7.25, 1.0))
    K.seed(4)
    mus, s2s = [], []
    for _ in range(40_000):
        mu = np.zeros((1, 3))
        s2 = np.full((1, 3), 0.16)
        assert K.update_theta(y, pi, L, mu, s2, a0, b0, d0, e0, False)
        mus.append(mu[0, 0])
        s2s.append((mu[0, 0], s2[0, 0]))
    mean, var = mu_full_conditional([0.1, 0.2], 0.16, 0.0, 1.0)
    mus = np.array(mus)
    assert abs(mus.mean() - mean) < 4 * math.sqrt(var / len(mus))
    # E[sigma2 | mu] averaged over the mu draws
    expected = np.mean([sigma2_full_conditional([0.1, 0.2], m, 7.25, 1.0)[1]
                        / (sigma2_full_conditional([0.1, 0.2], m, 7.25, 1.0)[0] - 1)
                        for m, _ in s2s[:5000]])
    got = np.array([s for _, s in s2s])
    assert abs(got.mean() - expected) < 4 * got.std() / math.sqrt(len(got)) + 2e-4


def test_kernel_theta_update_flags_empty_cluster():
    y = np.zeros((2, 1))
    pi = np.array([[0, 0]])
    L = np.array([2])
    one = np.array([1.0])
    ok = K.update_theta(y, pi, L, np.zeros((1, 2)), np.ones((1, 2)), one * 0, one,
                        one * 7.25, one, False)
    assert not ok
