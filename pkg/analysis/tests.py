import json
import shutil
import tempfile
from fractions import Fraction
from io import StringIO
from pathlib import Path
from unittest import skipUnless

import sympy as sp
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase
from pydantic import ValidationError

from analysis.config import AnalysisConfig
from analysis.management.base import ANALYSIS_FAILURE, USAGE_ERROR
from analysis.manifest import ANY, EXACT, FACTOR, load_manifest
from analysis.reports import (
    BOUNDED,
    INVALID_PROGRAM,
    SOLVER_ERROR,
    AnalysisReport,
    ValidationPoint,
    ValidationReport,
    format_analysis,
    format_validation,
)
from analysis.serializers import AnalysisReportSerializer, render_json
from analysis.services import AnalysisService, compare_bound, display_bound
from common.exceptions import ManifestError
from frontend.parser import parse_expectation, parse_program
from oracle.exact import exact_expectation
from oracle.semantics import eval_expr
from pevalyzer.cli import main
from terms.symbols import program_symbol
from terms.term import clamp, constant

N = program_symbol('n')
MISSING_SOLVER = '/nonexistent/pevalyzer-solver'
HAS_SOLVER = shutil.which(settings.PEVALYZER['SOLVER']) is not None
BENCHMARKS = Path(settings.BENCHMARKS_DIR)


def quick_config(**overrides):
    values = {'check_trials': 300, 'mc_samples': 2000}
    values.update(overrides)
    return AnalysisConfig.from_settings(**values)


def write_manifest(directory, text):
    path = Path(directory) / 'manifest.toml'
    path.write_text(text, encoding='utf-8')
    return path


class ConfigTest(SimpleTestCase):
    """
    Testes da configuração da análise.
    """

    def test_defaults_from_settings(self):
        """
        Testa que os padrões vêm de settings.PEVALYZER.
        """
        config = AnalysisConfig.from_settings()

        self.assertEqual(config.solver, settings.PEVALYZER['SOLVER'])
        self.assertEqual(config.oracle_depth, settings.PEVALYZER['ORACLE_DEPTH'])
        self.assertEqual(config.template_kind, settings.PEVALYZER['TEMPLATE_KIND'])

    def test_overrides(self):
        """
        Testa que valores None não sobrescrevem os padrões.
        """
        config = AnalysisConfig.from_settings(solver='cvc5', solver_timeout=None)

        self.assertEqual(config.solver, 'cvc5')
        self.assertEqual(config.solver_timeout, settings.PEVALYZER['SOLVER_TIMEOUT'])

    def test_invalid_values(self):
        """
        Testa valores inválidos e campos desconhecidos.
        """
        with self.assertRaises(ValidationError):
            AnalysisConfig.from_settings(template_kind='cubic')
        with self.assertRaises(ValidationError):
            AnalysisConfig.from_settings(handelman_degree=0)
        with self.assertRaises(ValidationError):
            AnalysisConfig(colour='blue')

    def test_escalation_order(self):
        """
        Testa a ordem de escalada: linear nos graus 1, 2, 3 e depois simple-mixed nos graus 2, 3.
        """
        auto = AnalysisConfig(template_kind='auto')
        fixed = AnalysisConfig(template_kind='auto', handelman_degree=2)
        linear = AnalysisConfig(template_kind='linear')

        self.assertEqual(auto.attempts(), [
            ('linear', 1), ('linear', 2), ('linear', 3), ('simple-mixed', 2), ('simple-mixed', 3),
        ])
        self.assertEqual(fixed.attempts(), [('linear', 2), ('simple-mixed', 2)])
        self.assertEqual(linear.attempts(), [('linear', 1), ('linear', 2), ('linear', 3)])


class ManifestTest(SimpleTestCase):
    """
    Testes do manifesto de benchmarks.
    """

    def test_shipped_manifest(self):
        """
        Testa o manifesto do corpus: todos os arquivos existem e os modos são coerentes.
        """
        records = load_manifest(BENCHMARKS / 'manifest.toml')
        by_name = {r.name: r for r in records}

        self.assertGreaterEqual(len(records), 12)
        for record in records:
            self.assertTrue((BENCHMARKS / record.file).exists(), record.file)
        self.assertEqual(by_name['every'].mode, ANY)
        self.assertEqual(by_name['every-5'].mode, FACTOR)
        self.assertEqual(by_name['every-5'].ratio, Fraction(5, 4))
        self.assertEqual(by_name['balls'].expected_expr, parse_expectation('1/5 * ⟨n⟩'))

    def test_rdwalk_expectation_guarded(self):
        """
        Testa a cota esperada de rdwalk: 0 abaixo de 2, onde o programa devolve 0, e acima do oráculo nos demais.
        """
        record = {r.name: r for r in load_manifest(BENCHMARKS / 'manifest.toml')}['rdwalk']
        program = parse_program((BENCHMARKS / record.file).read_text(encoding='utf-8'))

        for n in range(-2, 8):
            exact = exact_expectation(program, args=(n,), depth=15)
            expected = eval_expr(record.expected_expr, {'n': n})
            self.assertLessEqual(exact, expected, n)
            if n < 2:
                self.assertEqual(expected, 0)

    def test_biased_coin_expectation_exact(self):
        """
        Testa que a cota esperada de biased_coin é o valor exato, ao contrário de ⟨x1⟩ + 1/2·[x1 > x2].
        """
        record = {r.name: r for r in load_manifest(BENCHMARKS / 'manifest.toml')}['biased_coin']
        program = parse_program((BENCHMARKS / record.file).read_text(encoding='utf-8'))
        naive = parse_expectation('⟨x1⟩ + 1/2 * [x1 > x2]')

        for x1 in (0, 1, 2, 3, 5, 10):
            for x2 in (0, 1, 2, 3, 5, 10):
                memory = {'x1': x1, 'x2': x2}
                self.assertEqual(exact_expectation(program, args=(x1, x2)), eval_expr(record.expected_expr, memory))
        self.assertEqual(record.mode, EXACT)
        self.assertGreater(exact_expectation(program, args=(10, 0)), eval_expr(naive, {'x1': 10, 'x2': 0}))

    def test_invalid_records(self):
        """
        Testa registros inválidos: modo desconhecido, cota ausente, cota malformada, fator < 1, nome repetido.
        """
        cases = [
            '[[program]]\nname = "a"\nfile = "a.pw"\nmode = "close"\n',
            '[[program]]\nname = "a"\nfile = "a.pw"\nmode = "exact"\n',
            '[[program]]\nname = "a"\nfile = "a.pw"\nexpected = "1 +"\n',
            '[[program]]\nname = "a"\nfile = "a.pw"\nexpected = "2"\nmode = "factor"\nfactor = "1/2"\n',
            '[[program]]\nname = "a"\nfile = "a.pw"\nmode = "any"\n[[program]]\nname = "a"\nfile = "b.pw"\nmode = "any"\n',
            '[[program]\n',
        ]
        for text in cases:
            with tempfile.TemporaryDirectory() as directory:
                path = write_manifest(directory, text)
                with self.assertRaises(ManifestError, msg=text):
                    load_manifest(path)

    def test_missing_file(self):
        """
        Testa manifesto inexistente.
        """
        with self.assertRaises(ManifestError):
            load_manifest('/nonexistent/manifest.toml')


class CompareBoundTest(SimpleTestCase):
    """
    Testes da comparação de cotas por avaliação numa grade aleatória.
    """

    def test_exact(self):
        """
        Testa 1/5·⟨n⟩ contra a expressão esperada do manifesto.
        """
        bound = clamp(N, sp.Rational(1, 5))

        passed, reason = compare_bound(bound, parse_expectation('1/5 * ⟨n⟩'), [('n', 'n')])

        self.assertTrue(passed, reason)

    def test_missing_clamp(self):
        """
        Testa que n/5 difere de ⟨n⟩/5 nos valores negativos.
        """
        bound = clamp(N, sp.Rational(1, 5))
        expected = parse_expectation('n / 5')

        passed, reason = compare_bound(bound, expected, [('n', 'n')])

        self.assertFalse(passed)
        self.assertIn('n=-', reason)

    def test_factor(self):
        """
        Testa o modo factor: 25 ≤ 5/4 · 20, mas 26 não.
        """
        expected = parse_expectation('20')

        self.assertTrue(compare_bound(constant(25), expected, [], FACTOR, Fraction(5, 4))[0])
        self.assertFalse(compare_bound(constant(26), expected, [], FACTOR, Fraction(5, 4))[0])

    def test_renamed_parameters(self):
        """
        Testa a correspondência entre nomes normalizados e do fonte.
        """
        bound = clamp(program_symbol('n_1'))
        names = [('n_1', 'n')]

        self.assertTrue(compare_bound(bound, parse_expectation('⟨n⟩'), names, EXACT)[0])
        self.assertEqual(display_bound(bound, names), '⟨n⟩')

    def test_sound_and_any(self):
        """
        Testa que os modos sound e any não comparam valores.
        """
        expected = parse_expectation('0')

        self.assertEqual(compare_bound(constant(3), expected, [], 'sound'), (True, None))
        self.assertEqual(compare_bound(constant(3), expected, [], 'any'), (True, None))


class ReportTest(SimpleTestCase):
    """
    Testes dos relatórios e da serialização JSON.
    """

    def report(self):
        return AnalysisReport(
            program='balls.pw',
            entry='balls',
            status=BOUNDED,
            bound=clamp(N, sp.Rational(1, 5)),
            bound_text='1/5·⟨n⟩',
            params=[['n', 'n']],
            template_kind='linear',
            degree=1,
            solver={'queries': 3, 'solver_time': 0.1},
        )

    def test_structured_bound(self):
        """
        Testa a cota como termo estruturado no JSON.
        """
        data = json.loads(render_json(AnalysisReportSerializer, self.report()))

        self.assertEqual(data['status'], BOUNDED)
        self.assertEqual(data['bound']['text'], '1/5·⟨n⟩')
        (summand,) = data['bound']['summands']
        self.assertEqual(summand['coefficient'], '1/5')
        self.assertEqual(summand['body'], 'n')
        self.assertEqual(summand['guard'], [{'expr': 'n', 'strict': False, 'text': 'n ≥ 0'}])

    def test_without_bound(self):
        """
        Testa relatório sem cota.
        """
        report = AnalysisReport(program='every.pw', status='unbounded-template-failure')

        data = AnalysisReportSerializer(report).data

        self.assertIsNone(data['bound'])
        self.assertFalse(report.is_bounded)

    def test_human_format(self):
        """
        Testa o texto impresso pelo comando analyze.
        """
        text = format_analysis(self.report())

        self.assertIn('Cota:     1/5·⟨n⟩', text)
        self.assertIn('linear/1', text)

    def test_validation_reports_truncation(self):
        """
        Testa que a validação informa as execuções truncadas por ponto e no total.
        """
        points = [
            ValidationPoint(args={'n': n}, bound=str(n / 5), exact=None, mean=n / 5, stderr=0.01,
                            samples=100, truncated=cut, passed=True)
            for n, cut in ((0, 0), (5, 3), (10, 4))
        ]
        validation = ValidationReport(report=self.report(), points=points, depth=10, samples=100, seed=1)

        text = format_validation(validation)

        self.assertIn('truncadas', text)
        self.assertIn('7 execuções truncadas', text)
        self.assertIn('Validação aprovada', text)


class AnalysisServiceTest(SimpleTestCase):
    """
    Testes do serviço que não dependem de um solver instalado.
    """

    def test_invalid_program(self):
        """
        Testa erro de sintaxe: status invalid-program com posição.
        """
        report = AnalysisService(quick_config()).analyze_source('def f(: return 1', 'broken.pw')

        self.assertEqual(report.status, INVALID_PROGRAM)
        self.assertIn('1:', report.message)

    def test_unknown_entry(self):
        """
        Testa procedimento de entrada inexistente.
        """
        report = AnalysisService(quick_config()).analyze(BENCHMARKS / 'balls.pw', entry='nope')

        self.assertEqual(report.status, INVALID_PROGRAM)

    def test_missing_file(self):
        """
        Testa arquivo inexistente.
        """
        report = AnalysisService(quick_config()).analyze('/nonexistent/program.pw')

        self.assertEqual(report.status, INVALID_PROGRAM)

    def test_missing_solver(self):
        """
        Testa solver ausente: status solver-error sem novas tentativas.
        """
        report = AnalysisService(quick_config(solver=MISSING_SOLVER)).analyze(BENCHMARKS / 'balls.pw')

        self.assertEqual(report.status, SOLVER_ERROR)
        self.assertEqual(len(report.attempts), 1)
        self.assertGreater(report.attempts[0].conditions, 0)
        self.assertEqual(report.params, [['n', 'n']])

    def test_empty_corpus(self):
        """
        Testa diretório vazio: relatório vazio e aprovado.
        """
        with tempfile.TemporaryDirectory() as directory:
            run = AnalysisService(quick_config()).run_benchmarks(directory)

        self.assertEqual(run.results, [])
        self.assertTrue(run.all_passed)

    def test_not_a_directory(self):
        """
        Testa corpus que não é um diretório.
        """
        with self.assertRaises(ManifestError):
            AnalysisService(quick_config()).run_benchmarks(BENCHMARKS / 'balls.pw')

    def test_unlisted_program(self):
        """
        Testa que programas fora do manifesto geram aviso e entram no modo any.
        """
        with tempfile.TemporaryDirectory() as directory:
            shutil.copy(BENCHMARKS / 'one.pw', directory)
            write_manifest(directory, '')
            run = AnalysisService(quick_config(solver=MISSING_SOLVER)).run_benchmarks(directory)

        self.assertEqual(len(run.results), 1)
        self.assertEqual(run.results[0].mode, ANY)
        self.assertTrue(run.results[0].passed)
        self.assertIn('one.pw sem registro no manifesto', run.warnings)

    def test_failing_program(self):
        """
        Testa corpus com um programa reprovado e um arquivo ausente.
        """
        manifest = (
            '[[program]]\nname = "one"\nfile = "one.pw"\nexpected = "1"\nmode = "exact"\n'
            '[[program]]\nname = "ghost"\nfile = "ghost.pw"\nmode = "sound"\n'
        )
        with tempfile.TemporaryDirectory() as directory:
            shutil.copy(BENCHMARKS / 'one.pw', directory)
            write_manifest(directory, manifest)
            run = AnalysisService(quick_config(solver=MISSING_SOLVER)).run_benchmarks(directory)

        self.assertFalse(run.all_passed)
        self.assertEqual(run.failed, 2)
        self.assertIn('ghost: arquivo ghost.pw não encontrado', run.warnings)

    def test_validate_without_bound(self):
        """
        Testa validação sem cota: reprovada e sem pontos.
        """
        validation = AnalysisService(quick_config(solver=MISSING_SOLVER)).validate(BENCHMARKS / 'one.pw')

        self.assertFalse(validation.passed)
        self.assertEqual(validation.points, [])


class CommandTest(SimpleTestCase):
    """
    Testes dos códigos de saída dos comandos.
    """

    def test_missing_file(self):
        """
        Testa arquivo inexistente: erro de uso.
        """
        with self.assertRaises(CommandError) as context:
            call_command('analyze', '/nonexistent/program.pw')

        self.assertEqual(context.exception.returncode, USAGE_ERROR)

    def test_invalid_option(self):
        """
        Testa valor de configuração inválido: erro de uso.
        """
        with self.assertRaises(CommandError) as context:
            call_command('analyze', str(BENCHMARKS / 'one.pw'), template='cubic')

        self.assertEqual(context.exception.returncode, USAGE_ERROR)

    def test_analysis_failure_writes_json(self):
        """
        Testa falha de análise: código 1 e relatório JSON gravado.
        """
        with tempfile.TemporaryDirectory() as directory:
            out = Path(directory) / 'report.json'
            with self.assertRaises(CommandError) as context:
                call_command('analyze', str(BENCHMARKS / 'one.pw'), solver=MISSING_SOLVER, json=str(out), stdout=StringIO())
            data = json.loads(out.read_text(encoding='utf-8'))

        self.assertEqual(context.exception.returncode, ANALYSIS_FAILURE)
        self.assertEqual(data['status'], SOLVER_ERROR)

    def test_bench_manifest_error(self):
        """
        Testa manifesto inválido no bench: erro de uso.
        """
        with tempfile.TemporaryDirectory() as directory:
            write_manifest(directory, '[[program]\n')
            with self.assertRaises(CommandError) as context:
                call_command('bench', directory)

        self.assertEqual(context.exception.returncode, USAGE_ERROR)

    def test_unknown_subcommand(self):
        """
        Testa subcomando desconhecido na linha de comando.
        """
        with self.assertRaises(SystemExit) as context:
            main(['frobnicate'])

        self.assertEqual(context.exception.code, USAGE_ERROR)


@skipUnless(HAS_SOLVER, 'solver SMT não instalado')
class EndToEndTest(SimpleTestCase):
    """
    Testes de ponta a ponta com o solver configurado.
    """

    def test_balls(self):
        """
        Testa balls: cota igual a 1/5·⟨n⟩.
        """
        report = AnalysisService(quick_config()).analyze(BENCHMARKS / 'balls.pw')

        self.assertEqual(report.status, BOUNDED)
        passed, reason = compare_bound(
            report.bound, parse_expectation('1/5 * ⟨n⟩'), [tuple(p) for p in report.params],
        )
        self.assertTrue(passed, reason)

    def test_throws(self):
        """
        Testa throws: cota constante 5.
        """
        report = AnalysisService(quick_config()).analyze(BENCHMARKS / 'throws.pw')

        self.assertEqual(report.status, BOUNDED)
        self.assertEqual(report.bound_text, '5')

    def test_validate_constant(self):
        """
        Testa validação de return 1 com cota 1: folga zero.
        """
        validation = AnalysisService(quick_config()).validate(BENCHMARKS / 'one.pw', samples=100)

        self.assertTrue(validation.passed)
        (point,) = validation.points
        self.assertEqual(point.bound, '1')
        self.assertEqual(point.exact, '1')
        self.assertEqual(point.mean, 1.0)

    def test_validate_balls(self):
        """
        Testa validação de balls na grade de parâmetros.
        """
        validation = AnalysisService(quick_config()).validate(BENCHMARKS / 'balls.pw', samples=500, depth=8)

        self.assertTrue(validation.passed, [p.message for p in validation.points if not p.passed])
        self.assertEqual(len(validation.points), 6)

    def test_every_5(self):
        """
        Testa every-5: a cota fica dentro do fator 5/4 de 20 apesar do sistema bilinear.
        """
        record = {r.name: r for r in load_manifest(BENCHMARKS / 'manifest.toml')}['every-5']
        service = AnalysisService(quick_config())

        report = service.analyze(BENCHMARKS / record.file, record.entry, record.name)

        self.assertEqual(report.status, BOUNDED, report.message)
        passed, reason = service.judge(record, report)
        self.assertTrue(passed, reason)

    def test_biased_coin_matches_oracle(self):
        """
        Testa biased_coin: a cota inferida coincide com o valor exato em (10, 0), (3, 1) e (1, 3).
        """
        validation = AnalysisService(quick_config()).validate(
            BENCHMARKS / 'biased_coin.pw', samples=200, grid=(0, 1, 3, 10),
        )

        self.assertTrue(validation.passed, [p.message for p in validation.points if not p.passed])
        by_args = {(p.args['x1'], p.args['x2']): p for p in validation.points}
        for args, value in (((10, 0), '15'), ((3, 1), '9/2'), ((1, 3), '1')):
            self.assertEqual(by_args[args].exact, value, args)
            self.assertEqual(by_args[args].bound, value, args)

    def test_shipped_manifest_accepted(self):
        """
        Testa cada programa do corpus: veredito do manifesto aprovado e cota abaixo dos oráculos reprovada em nenhum ponto.
        """
        service = AnalysisService(quick_config())
        for record in load_manifest(BENCHMARKS / 'manifest.toml'):
            with self.subTest(program=record.name):
                report = service.analyze(BENCHMARKS / record.file, record.entry, record.name)
                passed, reason = service.judge(record, report)
                self.assertTrue(passed, reason)
                if not report.is_bounded:
                    continue
                validation = service.validate(
                    BENCHMARKS / record.file, record.entry, samples=200, depth=8, grid=(0, 1, 5),
                )
                self.assertTrue(validation.passed, [p.message for p in validation.points if not p.passed])
