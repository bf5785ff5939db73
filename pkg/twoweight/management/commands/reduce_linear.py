from twoweight.constants import SCOPES
from twoweight.linear import reduce_linear

from ._base import Outcome, WeightCommand, resolve_doubling


class Command(WeightCommand):
    help = 'Compare the multilinear constants of (omega; sigma, ..., sigma) with the linear ones'
    report_name = 'reduce_linear'

    def add_command_arguments(self, parser):
        parser.add_argument('--q', type=float, default=None, help='Linear exponent (default: the first p_i)')
        parser.add_argument('--copies', type=int, default=None, help='Copies of sigma (default: m)')
        parser.add_argument('--trials', type=int, default=4)
        parser.add_argument('--scope', choices=list(SCOPES), default='dyadic')
        parser.add_argument('--rho', type=float, default=2.0)
        parser.add_argument('--D', type=float, default=None)
        parser.add_argument('--t', type=float, default=None, help='Sets D = nu^(d t)')

    def run(self, system, options):
        q = options['q'] if options['q'] is not None else system.exponents.p_i[0]
        copies = options['copies'] or system.m
        identities = reduce_linear(
            system.grid, system.omega.density, system.sigmas[0].density, q,
            copies=copies, scope=options['scope'], rho=options['rho'], D=resolve_doubling(system, options),
            trials=options['trials'], seed=options['seed'],
        )
        for identity in identities:
            style = self.style.SUCCESS if identity.holds else self.style.ERROR
            self.stdout.write(style(f"  {identity.name}: {identity.multilinear:.12g} vs {identity.linear:.12g}"))
        header = ['identity', 'multilinear', 'linear', 'relative_difference', 'holds']
        rows = [[i.name, i.multilinear, i.linear, i.difference, i.holds] for i in identities]
        return Outcome(
            result={'identities': [identity.to_dict() for identity in identities]},
            parameters={'q': q, 'copies': copies, 'scope': options['scope'], 'rho': options['rho'],
                        'trials': options['trials']},
            tables={'identities': (header, rows)},
            failed=not all(identity.holds for identity in identities),
        )
