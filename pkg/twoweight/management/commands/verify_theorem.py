from django.core.exceptions import ValidationError

from twoweight.constants import SCOPES
from twoweight.decomposition import MODES, choose_parameters, verify_theorem
from twoweight.exceptions import GridError

from ._base import Outcome, WeightCommand


def parse_roots(grid, text):
    """'all' for every standard grid cube, otherwise 'level:o1,...,od' separated by ';'."""
    if text is None:
        return [grid.root()]
    if text == 'all':
        return [cube for level in range(grid.L_max + 1) for cube in grid.level_cubes(level)]
    roots = []
    for part in text.split(';'):
        try:
            level, offset = part.split(':')
            roots.append(grid.cube(int(level), [int(o) for o in offset.split(',')]))
        except (ValueError, GridError) as exc:
            raise ValidationError({'R': [f"Cannot read root cube {part!r}: {exc}"]}) from exc
    return roots


class Command(WeightCommand):
    help = 'Check every step of the parent-testing bound on a weight system'
    report_name = 'verify_theorem'

    def add_command_arguments(self, parser):
        parser.add_argument('--scope', choices=list(SCOPES), default='dyadic')
        parser.add_argument('--rho', type=float, default=2.0)
        parser.add_argument('--D', type=float, default=None)
        parser.add_argument('--t', type=float, default=None, help='Sets D = nu^(d t)')
        parser.add_argument('--q', type=float, default=2.0, help='Exponent of the scale decay n^-q')
        parser.add_argument('--R', default=None, help="Root cubes: 'all' or 'level:o1,...,od[;...]'")
        parser.add_argument('--mode', choices=MODES, default='eligibility')
        parser.add_argument('--diagnostic', action='store_true', help='Accept a D below the growth threshold')

    def run(self, system, options):
        grid = system.grid
        params = choose_parameters(
            system.d, system.exponents, q=options['q'], rho=options['rho'], D=options['D'], t=options['t'],
            nu=grid.nu, diagnostic=options['diagnostic'],
        )
        roots = parse_roots(grid, options['R'])
        report = verify_theorem(system, params, roots, options['mode'], options['scope'], budget=options['budget'])

        header = ['root', 'k', 'j', 'cube', 'depth', 'collection', 'A_p']
        rows = [
            [str(part.root), m.item.k, m.item.j, str(m.item.cube), m.depth, m.collection, m.a_p]
            for part in report.partitions for m in part.members
        ]
        bound_rows = [
            [str(part.root), b.name, b.count, b.lhs, b.middle, b.rhs, b.holds]
            for part, bounds in zip(report.partitions, report.bounds) for b in bounds
        ]
        for part in report.partitions:
            self.stdout.write(f"  {part.root}: {part.counts()}")
        for failure in report.failures:
            self.stderr.write(self.style.ERROR(f"  failed: {failure['check']}"))
        return Outcome(
            result=report.to_dict(),
            parameters={**params.to_dict(), 'scope': options['scope'], 'mode': options['mode'],
                        'R': options['R'] or 'root'},
            tables={
                'members': (header, rows),
                'bounds': (['root', 'collection', 'count', 'lhs', 'middle', 'rhs', 'holds'], bound_rows),
            },
            failed=not report.passed,
        )
