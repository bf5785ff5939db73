import pytest

from twoweight.forms import load_system

from .factories import fixture_file


@pytest.fixture(autouse=True)
def report_settings(settings, tmp_path):
    settings.WEIGHTLAB_OUT_DIR = str(tmp_path / 'reports')
    settings.WEIGHTLAB_TIMESTAMP = '2024-01-01T00:00:00+00:00'
    settings.WEIGHTLAB_SEARCH_STARTS = 2
    settings.WEIGHTLAB_SEARCH_STEPS = 5


@pytest.fixture
def lebesgue_d1():
    return load_system(fixture_file('lebesgue_d1'))


@pytest.fixture
def lebesgue_d2():
    return load_system(fixture_file('lebesgue_d2'))


@pytest.fixture
def spike_d1():
    return load_system(fixture_file('spike_d1'))


@pytest.fixture
def equal_m2_d1():
    return load_system(fixture_file('equal_m2_d1'))


@pytest.fixture
def shifted_d1():
    return load_system(fixture_file('shifted_d1'))


@pytest.fixture
def leftover_d1():
    return load_system(fixture_file('leftover_d1'))
