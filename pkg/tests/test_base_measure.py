import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.stats import norm

from spahm.base_measure import (GaussianFamily, NaturalParams, SufficientStat, gaussian_natural,
                                posterior_nat)

finite = st.floats(-5, 5, allow_nan=False)
positive = st.floats(0.05, 20, allow_nan=False)


def test_suff_stat_examples():
    s = GaussianFamily(1.0, 2).suff_stat([0.0, 0.0])
    assert s.t.tolist() == [0.0, 0.0]
    assert s.log_h == pytest.approx(-math.log(2 * math.pi), abs=1e-15)
    s = GaussianFamily(4.0, 1).suff_stat([2.0])
    assert s.t.tolist() == [0.5]
    assert s.log_h == pytest.approx(-0.5 - 0.5 * math.log(8 * math.pi), abs=1e-15)


def test_suff_stat_density_identity():
    rng = np.random.default_rng(0)
    fam = GaussianFamily(2.0, 5)
    v = rng.normal(size=5)
    s = fam.suff_stat(v)
    for _ in range(10):
        theta = rng.normal(size=5) * 3
        direct = norm(theta, math.sqrt(2.0)).logpdf(v).sum()
        A = theta @ theta / (2 * 2.0)
        assert s.log_h + theta @ s.t - A == pytest.approx(direct, abs=1e-10)


def test_suff_stat_dimension_mismatch():
    with pytest.raises(ValueError):
        GaussianFamily(1.0, 2).suff_stat([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        GaussianFamily(1.0, 1).suff_stat([np.nan])


def test_log_H_examples():
    fam = GaussianFamily(1.0, 1)
    assert fam.log_H(NaturalParams([0.0], 1.0)) == pytest.approx(-0.91894, abs=1e-5)
    assert fam.log_H(NaturalParams([0.0], 1.0)) == pytest.approx(-0.5 * math.log(2 * math.pi), abs=1e-15)
    expected = -1 + 0.5 * (math.log(2) - math.log(2 * math.pi))
    assert fam.log_H(NaturalParams([2.0], 2.0)) == pytest.approx(expected, abs=1e-14)


def _log_H_quadrature(tau, n0, sigma2):
    total = 0.0
    for t in tau:
        centre = t * sigma2 / n0
        width = 12 * math.sqrt(sigma2 / n0)
        f = lambda th: math.exp(t * th - n0 * th**2 / (2 * sigma2) - (t * centre - n0 * centre**2 / (2 * sigma2)))
        val, _ = integrate.quad(f, centre - width, centre + width, epsabs=1e-13, epsrel=1e-12)
        total += -math.log(val) - (t * centre - n0 * centre**2 / (2 * sigma2))
    return total


@pytest.mark.parametrize("seed", range(5))
def test_log_H_matches_quadrature(seed):
    rng = np.random.default_rng(seed)
    sigma2 = rng.uniform(0.2, 3)
    fam = GaussianFamily(sigma2, 3)
    params = NaturalParams(rng.normal(size=3) * 2, rng.uniform(0.2, 5))
    assert fam.log_H(params) == pytest.approx(_log_H_quadrature(params.tau, params.n0, sigma2), abs=1e-6)


def test_log_H_requires_positive_n0():
    with pytest.raises(ValueError):
        NaturalParams([0.0], 0.0)
    with pytest.raises(ValueError):
        NaturalParams([0.0], -1.0)


def test_log_H_batch_matches_scalar():
    rng = np.random.default_rng(3)
    fam = GaussianFamily(0.7, 4)
    tau = rng.normal(size=(6, 4))
    n0 = rng.uniform(0.1, 4, 6)
    batch = fam.log_H_batch(tau, n0)
    for k in range(6):
        assert batch[k] == pytest.approx(fam.log_H(NaturalParams(tau[k], n0[k])), abs=1e-13)
    atoms = rng.normal(size=(5, 4))
    assert np.allclose(fam.log_h_batch(atoms), [fam.suff_stat(a).log_h for a in atoms], atol=1e-13)


def test_posterior_nat_examples():
    p = NaturalParams([0.0], 1.0)
    same = posterior_nat(p, [])
    assert same.tau.tolist() == [0.0] and same.n0 == 1.0
    stats = [SufficientStat(np.array([1.0]), 0.0), SufficientStat(np.array([2.0]), 0.0)]
    q = posterior_nat(p, stats)
    assert q.tau.tolist() == [3.0] and q.n0 == 3.0


@settings(max_examples=50, deadline=None)
@given(a=st.lists(finite, min_size=2, max_size=2), b=st.lists(finite, min_size=2, max_size=2),
       n0=positive)
def test_posterior_nat_associative(a, b, n0):
    fam = GaussianFamily(1.3, 2)
    p = NaturalParams([0.1, -0.2], n0)
    sa, sb = fam.suff_stat(a), fam.suff_stat(b)
    both = posterior_nat(p, [sa, sb])
    step = posterior_nat(posterior_nat(p, [sa]), [sb])
    assert np.allclose(both.tau, step.tau, rtol=1e-14, atol=1e-14) and both.n0 == pytest.approx(step.n0, rel=1e-15)


def test_posterior_nat_dimension_mismatch():
    with pytest.raises(ValueError):
        posterior_nat(NaturalParams([0.0, 0.0], 1.0), [SufficientStat(np.array([1.0]), 0.0)])


def test_theta_map_examples():
    fam = GaussianFamily(1.0, 1)
    p = gaussian_natural([0.0], 1.0, 1.0)
    assert fam.theta_map(p, [fam.suff_stat([2.0])]) == pytest.approx([1.0], abs=1e-15)
    p = gaussian_natural([3.5], 2.0, 1.0)
    assert fam.theta_map(p, []) == pytest.approx([3.5], abs=1e-15)
    p = gaussian_natural([1.0], 4.0, 1.0)
    got = fam.theta_map(p, [fam.suff_stat([2.0]), fam.suff_stat([4.0])])
    assert got == pytest.approx([25 / 9], abs=1e-14)


@settings(max_examples=60, deadline=None)
@given(mu0=finite, s0=positive, s=positive, v=finite)
def test_conjugacy_identity(mu0, s0, s, v):
    fam = GaussianFamily(s, 1)
    p = gaussian_natural([mu0], s0, s)
    stat = fam.suff_stat([v])
    lhs = fam.log_H(p) - fam.log_H(posterior_nat(p, [stat])) + stat.log_h
    rhs = norm(mu0, math.sqrt(s0 + s)).logpdf(v)
    assert lhs == pytest.approx(rhs, abs=1e-8)


def test_theta_map_limits():
    fam = GaussianFamily(1.0, 2)
    atoms = np.array([[1.0, 2.0], [3.0, -1.0], [2.0, 0.5]])
    stats = [fam.suff_stat(a) for a in atoms]
    mu0 = np.array([-4.0, 7.0])
    wide = fam.theta_map(gaussian_natural(mu0, 1e8, 1.0), stats)
    assert np.allclose(wide, atoms.mean(axis=0), rtol=1e-4)
    narrow = fam.theta_map(gaussian_natural(mu0, 1e-8, 1.0), stats)
    assert np.allclose(narrow, mu0, rtol=1e-4)


@pytest.mark.parametrize("seed", range(8))
def test_log_H_strictly_concave_in_tau(seed):
    rng = np.random.default_rng(seed)
    d = 3
    fam = GaussianFamily(rng.uniform(0.2, 3), d)
    n0 = rng.uniform(0.1, 5)
    tau = rng.normal(size=d)
    h = 1e-3
    f = lambda t: fam.log_H(NaturalParams(t, n0))
    hess = np.empty((d, d))
    eye = np.eye(d) * h
    for a in range(d):
        for b in range(d):
            hess[a, b] = (f(tau + eye[a] + eye[b]) - f(tau + eye[a] - eye[b])
                          - f(tau - eye[a] + eye[b]) + f(tau - eye[a] - eye[b])) / (4 * h * h)
    assert np.linalg.eigvalsh((hess + hess.T) / 2).max() < 0


def test_family_validation():
    with pytest.raises(ValueError):
        GaussianFamily(0.0, 1)
    with pytest.raises(ValueError):
        GaussianFamily(1.0, 0)
    with pytest.raises(ValueError):
        NaturalParams([np.inf], 1.0)
