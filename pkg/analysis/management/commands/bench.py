from django.conf import settings
from django.core.management.base import CommandError

from analysis.management.base import ANALYSIS_FAILURE, USAGE_ERROR, AnalysisCommand
from analysis.reports import format_benchmarks
from analysis.serializers import BenchmarkRunSerializer
from analysis.services import AnalysisService
from common.exceptions import ManifestError


class Command(AnalysisCommand):
    help = 'Analisa o corpus de benchmarks e compara as cotas com o manifesto'

    def add_arguments(self, parser):
        parser.add_argument('directory', nargs='?', default=settings.BENCHMARKS_DIR, help='Diretório com os .pw')
        parser.add_argument('--manifest', help='Manifesto TOML (padrão: <directory>/manifest.toml)')
        self.add_config_arguments(parser)

    def handle(self, *args, **options):
        service = AnalysisService(self.build_config(options))
        try:
            run = service.run_benchmarks(options['directory'], options['manifest'])
        except ManifestError as exc:
            raise CommandError(exc.message, returncode=USAGE_ERROR)

        for warning in run.warnings:
            self.stderr.write(self.style.WARNING(f'⚠️ {warning}'))
        self.stdout.write(format_benchmarks(run))
        self.write_json(options, BenchmarkRunSerializer, run)

        if not run.all_passed:
            failed = ', '.join(r.name for r in run.results if not r.passed)
            raise CommandError(f'{run.failed} programas reprovados: {failed}', returncode=ANALYSIS_FAILURE)
        self.stdout.write(self.style.SUCCESS(f'✨ Corpus aprovado: {run.passed} programas'))
