"""
App settings with defaults.

Values come from ``django.conf.settings`` when a project is configured and fall
back to the defaults below otherwise, so the library works without manage.py.
"""
from django.conf import settings

DEFAULTS = {
    'WEIGHTLAB_BUDGET': 10_000_000,
    'WEIGHTLAB_SEARCH_STARTS': 64,
    'WEIGHTLAB_SEARCH_STEPS': 200,
    'WEIGHTLAB_STEP_FACTOR': 0.25,
    'WEIGHTLAB_SEED': 0,
    'WEIGHTLAB_WORKERS': 1,
    'WEIGHTLAB_OUT_DIR': 'reports',
    'WEIGHTLAB_TIMESTAMP': None,
}


def get(name):
    if settings.configured:
        return getattr(settings, name, DEFAULTS[name])
    return DEFAULTS[name]
