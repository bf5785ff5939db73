from twoweight.constants import SCOPES
from twoweight.extremal import OBJECTIVES, PROFILES, SearchConfig, ascend, random_system
from twoweight.forms import payload_from_system

from ._base import Outcome, WeightCommand, resolve_doubling


class Command(WeightCommand):
    help = 'Seeded hill-climbing over weight systems, starting from the input file or a random profile'
    report_name = 'search_extremal'

    def add_command_arguments(self, parser):
        parser.add_argument('--objective', choices=OBJECTIVES, default='certificate')
        parser.add_argument('--profile', choices=PROFILES, default=None,
                            help='Start from a random system of this profile instead of the input weights')
        parser.add_argument('--population', type=int, default=8)
        parser.add_argument('--iterations', type=int, default=50)
        parser.add_argument('--mutation-scale', type=float, default=0.5)
        parser.add_argument('--workers', type=int, default=None)
        parser.add_argument('--scope', choices=list(SCOPES), default='dyadic')
        parser.add_argument('--rho', type=float, default=2.0)
        parser.add_argument('--D', type=float, default=None)
        parser.add_argument('--t', type=float, default=None, help='Sets D = nu^(d t)')

    def run(self, system, options):
        config = SearchConfig(
            seed=options['seed'],
            population=options['population'],
            iterations=options['iterations'],
            mutation_scale=options['mutation_scale'],
            objective=options['objective'],
            scope=options['scope'],
            rho=options['rho'],
            D=resolve_doubling(system, options),
            workers=options['workers'],
        )
        start = system
        if options['profile']:
            start = random_system(system.grid, system.exponents, options['profile'], config.seed)
        result = ascend(start, config)
        self.stdout.write(f"  {config.objective}: {result.value:.6g} after {config.iterations} iterations")
        return Outcome(
            result={**result.to_dict(), 'best_input': payload_from_system(result.best)},
            parameters={'objective': config.objective, 'profile': options['profile'], 'scope': config.scope,
                        'rho': config.rho, 'D': config.D, 'population': config.population,
                        'iterations': config.iterations, 'mutation_scale': config.mutation_scale},
            tables={'trace': result.trace_table()},
        )
