from pathlib import Path

from django.core.management.base import CommandError

from analysis.management.base import ANALYSIS_FAILURE, USAGE_ERROR, VALIDATION_FAILURE, AnalysisCommand
from analysis.reports import format_validation
from analysis.serializers import ValidationReportSerializer
from analysis.services import AnalysisService


class Command(AnalysisCommand):
    help = 'Confere a cota inferida contra o oráculo exato e o Monte-Carlo'

    def add_arguments(self, parser):
        parser.add_argument('file', help='Programa .pw')
        parser.add_argument('--entry', help='Procedimento analisado (padrão: o último declarado)')
        parser.add_argument('--samples', type=int, help='Amostras Monte-Carlo por ponto da grade')
        parser.add_argument('--seed', type=int, help='Semente do Monte-Carlo')
        parser.add_argument('--depth', type=int, help='Profundidade do oráculo exato')
        self.add_config_arguments(parser)

    def handle(self, *args, **options):
        path = Path(options['file'])
        if not path.is_file():
            raise CommandError(f'arquivo não encontrado: {path}', returncode=USAGE_ERROR)
        config = self.build_config(
            options,
            mc_samples=options['samples'],
            seed=options['seed'],
            oracle_depth=options['depth'],
        )

        validation = AnalysisService(config).validate(path, options['entry'])

        self.stdout.write(format_validation(validation))
        self.write_json(options, ValidationReportSerializer, validation)
        if not validation.report.is_bounded:
            raise CommandError(f'{validation.report.program}: {validation.report.status}', returncode=ANALYSIS_FAILURE)
        if not validation.passed:
            failed = sum(1 for p in validation.points if not p.passed)
            raise CommandError(f'{failed} pontos acima da cota', returncode=VALIDATION_FAILURE)
        self.stdout.write(self.style.SUCCESS(f'✅ {validation.report.program}: cota validada'))
