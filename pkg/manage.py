#!/usr/bin/env python
"""
WeightGrid entry point.

    python manage.py constants --input twoweight/fixtures/spike_d1.json
    python manage.py verify_theorem --input twoweight/fixtures/lebesgue_d1.json --R all

Run ``python manage.py help`` for the full list; the twoweight commands are
constants, maximal, sparse, verify_theorem, search_extremal and reduce_linear.
"""
import os
import sys


def main(argv=None):
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'weightgrid.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Django is not importable; install the requirements "
            "(pip install -r requirements.txt) inside an active virtual environment."
        ) from exc
    execute_from_command_line(argv or sys.argv)


if __name__ == '__main__':
    main()
