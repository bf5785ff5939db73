from twoweight.constants import SCOPES, STRATEGIES, compute_constants

from ._base import Outcome, WeightCommand, resolve_doubling


def _row(name, value, witness):
    return [name, value, str(witness) if witness else '']


class Command(WeightCommand):
    help = 'Compute A_p, S_p, RH, the parent-testing constant and a lower estimate of the operator norm'
    report_name = 'constants'

    def add_command_arguments(self, parser):
        parser.add_argument('--scope', choices=list(SCOPES), default='dyadic')
        parser.add_argument('--rho', type=float, default=2.0)
        parser.add_argument('--D', type=float, default=None)
        parser.add_argument('--t', type=float, default=None, help='Sets D = nu^(d t)')
        parser.add_argument('--strategy', choices=STRATEGIES, default='indicators')

    def run(self, system, options):
        D = resolve_doubling(system, options)
        report = compute_constants(
            system, options['scope'], options['rho'], D,
            strategy=options['strategy'], seed=options['seed'], budget=options['budget'],
        )
        rows = [
            _row('A_p', report.a_p.value, report.a_p.witness),
            _row('S_p', report.s_p.value, report.s_p.witness),
            _row('RH', report.rh.value, report.rh.witness),
            _row('testing', report.testing.value, report.testing.witness),
            _row('norm_lower', report.norm.value, report.norm.localized.witness),
        ]
        chain = report.chain()
        for row in chain:
            style = self.style.SUCCESS if row['holds'] else self.style.ERROR
            self.stdout.write(style(f"  {row['relation']}: {row['lhs']:.6g} <= {row['rhs']:.6g}"))
        return Outcome(
            result=report.to_dict(),
            parameters={'scope': report.scope, 'rho': report.rho, 'D': report.D, 't': options['t'],
                        'strategy': options['strategy']},
            tables={'constants': (['constant', 'value', 'witness'], rows)},
            failed=not all(row['holds'] for row in chain),
        )
