import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twoweight.constants import (
    ap_constant,
    compute_constants,
    default_doubling,
    eligible_cubes,
    norm_lower,
    rh_constant,
    sp_constant,
    testing_constant,
)
from twoweight.exceptions import ChainViolationError, DegenerateSystemError, ParameterError
from twoweight.grid import GridConfig
from twoweight.weights import WeightSystem

from .factories import seeded_system

TOL = 1e-10


def test_default_doubling():
    assert default_doubling(1, 2, 1.0) == pytest.approx(16.0)
    assert default_doubling(2, 1, 2.0, nu=3) == pytest.approx(3.0 ** 8)
    with pytest.raises(ParameterError):
        default_doubling(1, 1, 1.0)


def test_default_doubling_follows_the_grid_base():
    system = WeightSystem.lebesgue(GridConfig(d=1, nu=3, L_max=2), (2.0,))
    assert compute_constants(system, with_norm=False).D == pytest.approx(3.0 ** 4)
    assert testing_constant(system).value == pytest.approx(1.0)


class TestLebesgue:
    def test_every_constant_is_one(self, lebesgue_d1):
        report = compute_constants(lebesgue_d1)
        for supremum in (report.a_p, report.s_p, report.rh, report.testing):
            assert supremum.value == pytest.approx(1.0, rel=TOL)
        assert report.norm.value == pytest.approx(1.0, rel=TOL)
        assert report.D == pytest.approx(16.0)
        assert report.certificate == pytest.approx(2.0)
        assert report.certificate_ratio == pytest.approx(0.5)

    def test_general_scope_d2(self, lebesgue_d2):
        report = compute_constants(lebesgue_d2, scope='general')
        assert report.a_p.value == pytest.approx(1.0, rel=TOL)
        assert report.s_p.value == pytest.approx(1.0, rel=TOL)
        assert report.a_p.witness.grid_id == 'lattice'

    def test_small_doubling_constant_leaves_nothing_eligible(self, lebesgue_d1):
        eligibility = eligible_cubes(lebesgue_d1, 2.0, 1.0)
        assert eligibility.cubes == []
        assert testing_constant(lebesgue_d1, 2.0, 1.0).value == 0.0

    def test_root_has_no_enlargement(self, lebesgue_d1):
        eligibility = eligible_cubes(lebesgue_d1, 2.0, 16.0)
        assert lebesgue_d1.grid.root() not in eligibility.cubes
        assert eligibility.outside == 1

    def test_bad_testing_parameters(self, lebesgue_d1):
        with pytest.raises(ParameterError):
            eligible_cubes(lebesgue_d1, 1.0, 16.0)
        with pytest.raises(ParameterError):
            eligible_cubes(lebesgue_d1, 2.0, 0.5)


class TestSpike:
    def test_constants(self, spike_d1):
        grid = spike_d1.grid
        a_p = ap_constant(spike_d1)
        assert a_p.value == pytest.approx(4.0)
        assert a_p.witness == grid.cube(2, (0,))
        s_p = sp_constant(spike_d1)
        assert s_p.value == pytest.approx(5.5)
        assert s_p.witness == grid.root()
        assert rh_constant(spike_d1).value == pytest.approx(1.0)
        testing = testing_constant(spike_d1)
        assert testing.value == pytest.approx(5.0)
        assert testing.witness == grid.cube(1, (0,))

    def test_norm_estimate(self, spike_d1):
        estimate = norm_lower(spike_d1)
        assert estimate.value == pytest.approx(5.5)
        assert estimate.localized.witness == spike_d1.grid.root()
        assert estimate.weak <= estimate.global_indicator * (1 + TOL)

    def test_scaling_omega(self, spike_d1):
        scaled = spike_d1.scaled_omega(3.0)
        assert ap_constant(scaled).value == pytest.approx(12.0)
        assert sp_constant(scaled).value == pytest.approx(16.5)


class TestNormLower:
    def test_vanishing_sigma(self):
        grid = GridConfig(d=1, nu=2, L_max=2)
        system = WeightSystem.from_arrays(grid, np.ones(4), [np.ones(4), np.zeros(4)], (2.0, 2.0))
        with pytest.raises(DegenerateSystemError):
            norm_lower(system)

    def test_unknown_strategy(self, lebesgue_d1):
        with pytest.raises(ParameterError):
            norm_lower(lebesgue_d1, 'simulated-annealing')

    def test_seeded_strategies_are_reproducible(self, equal_m2_d1):
        first = norm_lower(equal_m2_d1, 'ascent', seed=5, starts=2, steps=5)
        second = norm_lower(equal_m2_d1, 'ascent', seed=5, starts=2, steps=5)
        assert first.value == second.value
        assert first.trials == second.trials
        assert first.value >= norm_lower(equal_m2_d1).value

    def test_random_strategy_uses_settings(self, equal_m2_d1):
        estimate = norm_lower(equal_m2_d1, 'random', seed=1)
        indicators = norm_lower(equal_m2_d1)
        assert estimate.trials == indicators.trials + 2
        assert estimate.value >= indicators.value


class TestChain:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(1, 3), st.booleans(), st.sampled_from(['dyadic', 'general']))
    def test_chain_on_random_systems(self, seed, m, zeros, scope):
        system = seeded_system(seed, L_max=3 if scope == 'dyadic' else 2, p_i=(1.5 * m,) * m, zeros=zeros)
        report = compute_constants(system, scope)
        assert report.a_p.value <= report.s_p.value * (1 + TOL)
        assert report.testing.value <= report.s_p.value * (1 + TOL)
        assert report.norm.value == pytest.approx(report.s_p.value, rel=TOL)
        report.assert_chain()

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_chain_in_two_dimensions(self, seed):
        system = seeded_system(seed, d=2, L_max=2, p_i=(3.0, 3.0))
        report = compute_constants(system, 'dyadic')
        report.assert_chain()
        assert all(row['holds'] for row in report.chain())

    def test_broken_chain_is_reported(self, spike_d1):
        report = compute_constants(spike_d1, with_norm=False)
        report.a_p.value = 2 * report.s_p.value
        with pytest.raises(ChainViolationError) as exc:
            report.assert_chain()
        assert exc.value.details['chain'][0]['relation'] == 'A_p <= S_p'

    def test_report_schema(self, spike_d1):
        data = compute_constants(spike_d1).to_dict()
        for key in ('A_p', 'S_p', 'RH', 'testing', 'norm_lower', 'certificate', 'sawyer_bound', 'chain'):
            assert key in data
        assert data['A_p']['witness']['level'] == 2
        assert math.isfinite(data['certificate'])


def linear_system(L_max, p_i):
    """omega = 1 + x and sigma_i = 2 - x; midpoint values are exact cell averages."""
    grid = GridConfig(d=1, nu=2, L_max=L_max)
    x = (np.arange(grid.resolution) + 0.5) / grid.resolution
    return WeightSystem.from_arrays(grid, 1.0 + x, [2.0 - x] * len(p_i), p_i)


@pytest.mark.parametrize('p_i', [(2.0,), (4.0, 4.0)])
def test_certificate_ratio_is_stable_under_refinement(p_i):
    ratios = [compute_constants(linear_system(L_max, p_i)).certificate_ratio for L_max in (3, 4, 5)]
    assert all(ratio is not None and 0 < ratio < math.inf for ratio in ratios)
    assert max(ratios) / min(ratios) <= 1.1
