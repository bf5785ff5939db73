from twoweight.exceptions import VerificationError
from twoweight.sparse import build_sparse, carleson_check, coefficients, domination_check

from ._base import Outcome, WeightCommand


class Command(WeightCommand):
    help = 'Build the sparse family of M_D(sigma_1, ..., sigma_m) and check domination and the Carleson embedding'
    report_name = 'sparse'

    def add_command_arguments(self, parser):
        parser.add_argument('--base', type=float, default=None, help='Generation ratio a (default 2^m nu^(dm))')

    def run(self, system, options):
        family = build_sparse(system, base=options['base'])
        self.stdout.write(f"  {len(family)} cubes in {len(family.generations)} generations (base {family.base:.6g})")
        weights = coefficients(system, family)
        rows = [
            [item.k, item.j, item.cube.level, list(item.cube.offset), list(item.cube.corner), item.cube.side,
             item.e_cells, weight]
            for item, weight in zip(family, weights)
        ]
        result = {'family': family.to_dict(), 'coefficients': weights}
        failures = []
        for name, check in (('domination', lambda: domination_check(system, None, family)),
                            ('carleson', lambda: carleson_check(system, family))):
            try:
                result[name] = check().to_dict()
            except VerificationError as exc:
                result[name] = exc.details
                failures.append(name)
                self.stderr.write(self.style.ERROR(f"  {name}: {exc.message}"))
        result['failures'] = failures
        return Outcome(
            result=result,
            parameters={'base': family.base},
            tables={'family': (['k', 'j', 'level', 'offset', 'corner', 'side', 'E_cells', 'a_Q'], rows)},
            failed=bool(failures),
        )
