import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twoweight.exceptions import ParameterError, SparsityError
from twoweight.grid import GridConfig
from twoweight.sparse import (
    build_sparse,
    carleson_check,
    check_sparse,
    coefficients,
    domination_check,
)
from twoweight.weights import WeightSystem

from .factories import seeded_system


def sample_functions(system, rng):
    shape = system.grid.shape
    spiky = np.where(rng.random(shape) < 0.2, 50.0, 0.01)
    return [None, [rng.lognormal(size=shape) for _ in range(system.m)], [spiky] * system.m]


class TestSpike:
    def test_generations(self, spike_d1):
        family = build_sparse(spike_d1)
        grid = spike_d1.grid
        assert family.base == pytest.approx(4.0)
        assert family.anchor == pytest.approx(0.5)
        assert [g.threshold for g in family.generations] == pytest.approx([0.5, 2.0])
        root, spike = list(family)
        assert (root.k, root.cube) == (0, grid.root())
        assert (spike.k, spike.cube) == (1, grid.cube(2, (0,)))
        assert root.to_dict()['E_cells'] == [1, 2, 3]
        assert spike.to_dict()['E_cells'] == [0]

    def test_coefficients(self, spike_d1):
        family = build_sparse(spike_d1)
        assert coefficients(spike_d1, family) == pytest.approx([0.75, 4.0])

    def test_domination(self, spike_d1):
        report = domination_check(spike_d1)
        assert report.lhs == pytest.approx(5.5)
        assert report.rhs == pytest.approx(76.0)
        assert report.holds

    def test_carleson(self, spike_d1):
        report = carleson_check(spike_d1, build_sparse(spike_d1))
        assert report.a_star == pytest.approx(4.75)
        assert report.witness == spike_d1.grid.root()
        assert report.lhs == pytest.approx(4.75)
        assert report.rhs == pytest.approx(19.0)
        assert not report.vacuous

    def test_smaller_base(self, spike_d1):
        family = build_sparse(spike_d1, base=2.0)
        assert len(family.generations) == 3
        assert [item.cube.level for item in family] == [0, 1, 2]


class TestLebesgue:
    def test_single_root(self, lebesgue_d1):
        family = build_sparse(lebesgue_d1)
        assert family.base == pytest.approx(16.0)
        assert [item.cube for item in family] == [lebesgue_d1.grid.root()]
        report = carleson_check(lebesgue_d1, family)
        assert report.a_star == pytest.approx(1.0)
        assert report.lhs == pytest.approx(1.0)

    def test_base_too_close_to_one(self, lebesgue_d1):
        with pytest.raises(SparsityError):
            build_sparse(lebesgue_d1, base=1.01)

    def test_base_must_exceed_one(self, lebesgue_d1):
        with pytest.raises(ParameterError):
            build_sparse(lebesgue_d1, base=1.0)


def test_vanishing_root_gives_empty_family():
    grid = GridConfig(d=1, nu=2, L_max=2)
    system = WeightSystem.from_arrays(grid, np.ones(4), [np.ones(4), np.zeros(4)], (2.0, 2.0))
    family = build_sparse(system)
    assert len(family) == 0
    report = carleson_check(system, family)
    assert report.lhs == 0.0
    assert report.holds


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 2), st.integers(1, 3), st.booleans())
def test_sparse_invariants(seed, d, m, zeros):
    system = seeded_system(seed, d=d, L_max=4 if d == 1 else 3, p_i=(1.5 * m,) * m, zeros=zeros)
    rng = np.random.default_rng(seed)
    for f in sample_functions(system, rng):
        family = build_sparse(system, f)
        check_sparse(system.grid, family)
        covered = np.zeros(system.grid.shape, dtype=int)
        for item in family:
            assert item.cube.volume <= 2 * item.e_cells
            covered += item.e_mask
        assert covered.max(initial=0) <= 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 2), st.booleans())
def test_domination_and_carleson(seed, m, zeros):
    system = seeded_system(seed, L_max=4, p_i=(2.0 * m,) * m, zeros=zeros)
    rng = np.random.default_rng(seed)
    for f in sample_functions(system, rng):
        family = build_sparse(system, f)
        assert domination_check(system, f, family).holds
        assert carleson_check(system, family, f).holds


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.1, 10.0))
def test_carleson_lhs_scales_with_the_functions(seed, factor):
    system = seeded_system(seed, p_i=(3.0, 3.0))
    rng = np.random.default_rng(seed)
    f = [rng.lognormal(size=system.grid.shape) for _ in range(system.m)]
    family = build_sparse(system)
    plain = carleson_check(system, family, f)
    scaled = carleson_check(system, family, [factor * fi for fi in f])
    power = system.m * system.p
    assert scaled.lhs == pytest.approx(factor ** power * plain.lhs, rel=1e-12)
    assert scaled.rhs == pytest.approx(factor ** power * plain.rhs, rel=1e-12)
