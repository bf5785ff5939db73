"""
Shared plumbing for the twoweight management commands.

Exit codes: 0 success, 1 a verification failed (the report is still written),
2 bad input or parameters.
"""
from dataclasses import dataclass, field

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from twoweight import conf
from twoweight.exceptions import VerificationError, WeightLabError
from twoweight.forms import load_system
from twoweight.reports import RunManifest, emit_report


@dataclass
class Outcome:
    result: dict
    parameters: dict
    tables: dict = field(default_factory=dict)
    failed: bool = False


def describe(exc):
    lines = []
    for name, messages in exc.message_dict.items():
        for message in messages:
            lines.append(message if name == '__all__' else f"{name}: {message}")
    return '; '.join(lines)


def resolve_doubling(system, options):
    """--D wins; otherwise --t gives D = nu^(d t); None means the default."""
    if options.get('D') is not None and options.get('t') is not None:
        raise ValidationError({'D': ["Give either --D or --t, not both"]})
    if options.get('t') is not None:
        return float(system.grid.nu) ** (system.d * options['t'])
    return options.get('D')


class WeightCommand(BaseCommand):
    requires_system_checks = []
    report_name = None

    def add_arguments(self, parser):
        parser.add_argument('--input', required=True, help='Weight-system JSON file')
        parser.add_argument('--out-dir', default=None, help='Report directory (default WEIGHTLAB_OUT_DIR)')
        parser.add_argument('--nu', type=int, default=None, help='Expected grid base; must match the input')
        parser.add_argument('--seed', type=int, default=None)
        parser.add_argument('--budget', type=int, default=None, help='Work limit for brute-force passes')
        parser.add_argument('--xlsx', action='store_true', help='Also write an Excel workbook')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def run(self, system, options):
        raise NotImplementedError

    def handle(self, *args, **options):
        seed = options['seed'] if options['seed'] is not None else conf.get('WEIGHTLAB_SEED')
        options['seed'] = seed
        try:
            system = load_system(options['input'])
            if options['nu'] is not None and options['nu'] != system.grid.nu:
                raise ValidationError({'nu': [f"--nu {options['nu']} disagrees with the input (nu = {system.grid.nu})"]})
            self.stdout.write(f"Loaded {options['input']}: d={system.d}, m={system.m}, "
                              f"resolution={system.grid.resolution}, p={system.p:.6g}")
            try:
                outcome = self.run(system, options)
            except VerificationError as exc:
                outcome = Outcome(
                    result={'error': exc.message, 'details': exc.details},
                    parameters={},
                    failed=True,
                )
        except ValidationError as exc:
            raise CommandError(describe(exc), returncode=2) from exc
        except WeightLabError as exc:
            raise CommandError(exc.message, returncode=2) from exc

        parameters = {'nu': system.grid.nu, 'd': system.d, 'm': system.m, 'p': system.exponents.p_i,
                      **outcome.parameters}
        manifest = RunManifest(self.report_name, options['input'], parameters, seed)
        try:
            paths = emit_report(self.report_name, outcome.result, manifest, options['out_dir'],
                                outcome.tables, options['xlsx'])
        except OSError as exc:
            raise CommandError(f"Cannot write the report: {exc}", returncode=2) from exc

        for path in paths:
            self.stdout.write(f"  wrote {path}")
        if outcome.failed:
            raise CommandError(f"{self.report_name}: verification failed, see {paths[0]}", returncode=1)
        self.stdout.write(self.style.SUCCESS(f"{self.report_name}: done"))
