"""
Base comum dos comandos ``analyze``, ``bench`` e ``validate``.

Códigos de saída estáveis: 0 tudo aprovado, 1 falha de análise, 2 falha de
validação, 3 erro de uso.
"""

import sys

from django.core.management.base import BaseCommand, CommandError
from pydantic import ValidationError

from analysis.config import AnalysisConfig
from analysis.serializers import write_json

SUCCESS = 0
ANALYSIS_FAILURE = 1
VALIDATION_FAILURE = 2
USAGE_ERROR = 3


class AnalysisCommand(BaseCommand):

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)

        def usage_error(message):
            if not parser.called_from_command_line:
                raise CommandError(f'Error: {message}', returncode=USAGE_ERROR)
            parser.print_usage(sys.stderr)
            parser.exit(USAGE_ERROR, f'{parser.prog}: erro: {message}\n')

        parser.error = usage_error
        return parser

    def add_config_arguments(self, parser):
        parser.add_argument('--solver', help='Executável do solver SMT (padrão: PEVAL_SOLVER)')
        parser.add_argument('--timeout', type=float, help='Segundos por consulta ao solver')
        parser.add_argument('--smt-dump', help='Diretório onde gravar os scripts SMT')
        parser.add_argument(
            '--template',
            choices=['auto', 'linear', 'simple-mixed'],
            help='Tipo de template; auto escala de linear para simple-mixed',
        )
        parser.add_argument('--degree', type=int, help='Grau de Handelman fixo')
        parser.add_argument('--optimize', choices=['alternating', 'bisect', 'none'], help='Estratégia de otimização')
        parser.add_argument('--workers', type=int, help='Tarefas em paralelo')
        parser.add_argument('--json', help='Grava o relatório em JSON neste caminho')

    def build_config(self, options, **extra):
        try:
            return AnalysisConfig.from_settings(
                solver=options.get('solver'),
                solver_timeout=options.get('timeout'),
                smt_dump=options.get('smt_dump'),
                template_kind=options.get('template'),
                handelman_degree=options.get('degree'),
                optimize=options.get('optimize'),
                workers=options.get('workers'),
                **extra,
            )
        except ValidationError as exc:
            raise CommandError(f'configuração inválida: {exc}', returncode=USAGE_ERROR)

    def write_json(self, options, serializer_class, instance):
        if not options.get('json'):
            return
        try:
            write_json(options['json'], serializer_class, instance)
        except OSError as exc:
            raise CommandError(f"não foi possível gravar {options['json']}: {exc}", returncode=USAGE_ERROR)
        self.stdout.write(f"Relatório JSON gravado em {options['json']}")
