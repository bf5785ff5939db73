from twoweight.maximal import dyadic_maximal, general_maximal_bruteforce, shifted_bound_check

from ._base import Outcome, WeightCommand

ENGINES = ('dyadic', 'general', 'shifted')


class Command(WeightCommand):
    help = 'Evaluate M(sigma_1, ..., sigma_m) on every cell, with the cube attaining each value'
    report_name = 'maximal'

    def add_command_arguments(self, parser):
        parser.add_argument('--scope', choices=ENGINES, default='dyadic',
                            help='dyadic: standard grid; general: every lattice cube; '
                                 'shifted: general field against the shifted grids')

    def run(self, system, options):
        scope = options['scope']
        if scope == 'dyadic':
            field = dyadic_maximal(system)
        else:
            field = general_maximal_bruteforce(system, budget=options['budget'])
        result = {
            'scope': scope,
            'values': field.values.ravel().tolist(),
            'energy': field.energy(system.omega, system.p) * system.grid.cell_volume,
        }
        failed = False
        if scope == 'shifted':
            check = shifted_bound_check(system, budget=options['budget'])
            result['shifted_bound'] = check.to_dict()
            failed = not check.holds
            self.stdout.write(f"  general / shifted ratio {check.ratio:.6g} (bound {check.bound:.6g})")
        return Outcome(
            result=result,
            parameters={'scope': scope},
            tables={'field': field.table()},
            failed=failed,
        )
