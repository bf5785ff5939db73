import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from twoweight.grid import GridConfig, enumerate_cubes
from twoweight.linear import Identity, ap_linear, maximal_linear, reduce_linear


def test_maximal_linear_spike():
    grid = GridConfig(d=1, nu=2, L_max=2)
    field = maximal_linear(np.array([4.0, 0.0, 0.0, 0.0]), enumerate_cubes(grid))
    assert_allclose(field, [4.0, 2.0, 1.0, 1.0])


def test_ap_linear_lebesgue():
    grid = GridConfig(d=1, nu=2, L_max=2)
    assert ap_linear(np.ones(4), np.ones(4), 3.0, enumerate_cubes(grid)) == pytest.approx(1.0)


def test_identity_difference():
    assert Identity('A', 2.0, 2.0).holds
    assert Identity('A', 0.0, 0.0).difference == 0.0
    assert not Identity('A', 1.0, 1.1).holds


@pytest.mark.parametrize('q', [1.5, 2.0, 3.0])
@pytest.mark.parametrize('scope', ['dyadic', 'general'])
def test_equal_weights(equal_m2_d1, q, scope):
    sigma = equal_m2_d1.sigmas[0].density
    identities = reduce_linear(equal_m2_d1.grid, equal_m2_d1.omega.density, sigma, q, copies=2, scope=scope)
    assert [identity.name for identity in identities] == ['RH', 'A', 'testing', 'norm', 'S']
    for identity in identities:
        assert identity.holds, identity.to_dict()


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([1.5, 2.0, 3.0]), st.integers(1, 3), st.booleans())
def test_random_weights(seed, q, copies, zeros):
    grid = GridConfig(d=1, nu=2, L_max=3)
    rng = np.random.default_rng(seed)
    omega = rng.lognormal(size=grid.shape)
    sigma = rng.lognormal(size=grid.shape)
    if zeros:
        sigma[rng.random(grid.shape) < 0.25] = 0.0
    if not sigma.any():
        sigma[0] = 1.0
    for identity in reduce_linear(grid, omega, sigma, q, copies=copies, seed=seed):
        assert identity.holds, identity.to_dict()


def test_two_dimensions():
    grid = GridConfig(d=2, nu=2, L_max=2)
    rng = np.random.default_rng(4)
    identities = reduce_linear(grid, rng.lognormal(size=grid.shape), rng.lognormal(size=grid.shape), 2.0)
    assert all(identity.holds for identity in identities)
