"""
Django settings for the WeightGrid project.

There is no web surface and no database: the project exists so the twoweight
app gets Django's settings, logging and management-command machinery.
"""

from pathlib import Path
import os
from dotenv import load_dotenv

load_dotenv()

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.getenv('SECRET_KEY', 'django-insecure-change-this-in-production')

DEBUG = os.getenv('DEBUG', 'True') == 'True'

ALLOWED_HOSTS = []

INSTALLED_APPS = [
    'twoweight',
]

DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

# Computation
WEIGHTLAB_BUDGET = int(os.getenv('WEIGHTLAB_BUDGET', '10000000'))
WEIGHTLAB_SEARCH_STARTS = int(os.getenv('WEIGHTLAB_SEARCH_STARTS', '64'))
WEIGHTLAB_SEARCH_STEPS = int(os.getenv('WEIGHTLAB_SEARCH_STEPS', '200'))
WEIGHTLAB_STEP_FACTOR = float(os.getenv('WEIGHTLAB_STEP_FACTOR', '0.25'))
WEIGHTLAB_SEED = int(os.getenv('WEIGHTLAB_SEED', '0'))
WEIGHTLAB_WORKERS = int(os.getenv('WEIGHTLAB_WORKERS', '1'))

# Reports
WEIGHTLAB_OUT_DIR = os.getenv('WEIGHTLAB_OUT_DIR', str(BASE_DIR / 'reports'))
WEIGHTLAB_TIMESTAMP = os.getenv('WEIGHTLAB_TIMESTAMP') or None

WEIGHTLAB_LOG_LEVEL = os.getenv('WEIGHTLAB_LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'twoweight': {
            'handlers': ['console'],
            'level': WEIGHTLAB_LOG_LEVEL,
            'propagate': False,
        },
    },
}
