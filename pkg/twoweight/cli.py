"""
Command-line front door: ``weightlab <subcommand> [options]``.

Each subcommand is a management command of the twoweight app, so
``python manage.py verify_theorem ...`` and ``weightlab verify-theorem ...``
are the same program.
"""
import os
import sys

SUBCOMMANDS = {
    'constants': 'constants',
    'maximal': 'maximal',
    'sparse': 'sparse',
    'verify-theorem': 'verify_theorem',
    'search-extremal': 'search_extremal',
    'reduce-linear': 'reduce_linear',
}


def run(argv=None):
    """Run one subcommand and return its exit status (0 passed, 1 verification failed, 2 bad input)."""
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in SUBCOMMANDS:
        sys.stderr.write(f"usage: weightlab {{{','.join(SUBCOMMANDS)}}} [options]\n")
        return 2

    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'weightgrid.settings')
    from django.core.management import ManagementUtility

    utility = ManagementUtility(['weightlab', SUBCOMMANDS[argv[0]], *argv[1:]])
    try:
        utility.execute()
    except SystemExit as exc:
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else 1
    return 0


def main():
    sys.exit(run())


if __name__ == '__main__':
    main()
