from pathlib import Path

from django.core.management.base import CommandError

from analysis.management.base import ANALYSIS_FAILURE, USAGE_ERROR, AnalysisCommand
from analysis.reports import format_analysis
from analysis.serializers import AnalysisReportSerializer
from analysis.services import AnalysisService


class Command(AnalysisCommand):
    help = 'Infere uma cota superior para o valor esperado devolvido por um programa .pw'

    def add_arguments(self, parser):
        parser.add_argument('file', help='Programa .pw')
        parser.add_argument('--entry', help='Procedimento analisado (padrão: o último declarado)')
        self.add_config_arguments(parser)

    def handle(self, *args, **options):
        path = Path(options['file'])
        if not path.is_file():
            raise CommandError(f'arquivo não encontrado: {path}', returncode=USAGE_ERROR)

        service = AnalysisService(self.build_config(options))
        report = service.analyze(path, options['entry'])

        self.stdout.write(format_analysis(report))
        self.write_json(options, AnalysisReportSerializer, report)
        if not report.is_bounded:
            raise CommandError(f'{report.program}: {report.status}', returncode=ANALYSIS_FAILURE)
        self.stdout.write(self.style.SUCCESS(f'✅ {report.program}: {report.bound_text}'))
