"""
Service Layer do analisador.

Centraliza o fluxo completo: parse, normalização, templates, condições
laterais, divisão em casos, Handelman, solver (com escalada de templates e
graus), checagem do modelo e instanciação da cota. Também roda o corpus de
benchmarks e a validação contra os oráculos.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from analysis.config import AnalysisConfig
from analysis.manifest import ANY, EXACT, FACTOR, MANIFEST_NAME, SOUND, BenchmarkExpectation, load_manifest
from analysis.reports import (
    BOUNDED,
    INVALID_PROGRAM,
    SOLVER_ERROR,
    SOLVER_TIMEOUT,
    TEMPLATE_FAILURE,
    UNSUPPORTED,
    AnalysisReport,
    Attempt,
    BenchmarkResult,
    BenchmarkRun,
    ValidationPoint,
    ValidationReport,
)
from common.exceptions import (
    EvaluationError,
    FrontendError,
    ManifestError,
    SolverError,
    SupportExplosion,
    TermSubstitutionError,
    UnsupportedCondition,
    UnsupportedExpansion,
)
from common.utils import format_fraction
from constraints.checking import check_model
from constraints.handelman import linearize_conditions
from constraints.optimize import GRID, build_objective, grid_points, optimize
from constraints.smtlib import SAT, TIMEOUT
from constraints.solver import SolverService
from frontend.normalize import normalize
from frontend.parser import parse_program
from oracle import semantics
from oracle.exact import exact_expectation
from oracle.montecarlo import monte_carlo
from templating.templates import instantiate_bound
from terms.evaluation import eval_term
from terms.printer import format_term
from terms.symbols import program_symbol
from terms.term import substitute
from transformer.state import AnalysisState, TemplateSettings
from transformer.transformer import entry_procedure, generate_constraints

logger = logging.getLogger(__name__)

COMPARISON_POINTS = 10 ** 4
COMPARISON_RANGE = (-10, 40)
# folga de arredondamento da média em ponto flutuante
FLOAT_TOLERANCE = 1e-9


def bound_names(program, entry):
    """Parâmetros da entrada e globais, como pares ``(normalizado, fonte)``."""
    decl = program.procedure(entry)
    names = [(p, program.source_name(p)) for p in decl.params]
    names.extend((g, g) for g in program.globals)
    return names


def display_bound(bound, names):
    """Cota com os nomes do fonte."""
    mapping = {
        program_symbol(normalized): program_symbol(source)
        for normalized, source in names
        if normalized != source
    }
    return format_term(substitute(bound, mapping) if mapping else bound)


def compare_bound(bound, expected, names, mode=EXACT, factor=1, points=COMPARISON_POINTS, seed=0):
    """
    Compara uma cota inferida com a esperada numa grade aleatória.

    Args:
        bound: Term sobre os nomes normalizados
        expected: expressão de cota do AST, sobre os nomes do fonte
        names: pares ``(normalizado, fonte)`` das variáveis livres
        mode: exact exige igualdade em todos os pontos; factor exige
            ``cota <= factor * esperada``; sound e any sempre passam
        factor: razão máxima no modo factor
        points: pontos sorteados (repetidos contam uma vez)
        seed: semente do sorteio

    Returns:
        ``(passou, motivo)``; o motivo descreve o primeiro ponto em falta
    """
    if mode in (SOUND, ANY):
        return True, None
    if names:
        rng = np.random.default_rng(seed)
        rows = rng.integers(COMPARISON_RANGE[0], COMPARISON_RANGE[1] + 1, size=(points, len(names)))
        grid = sorted({tuple(int(v) for v in row) for row in rows})
    else:
        grid = [()]
    factor = Fraction(factor)
    for point in grid:
        memory = {normalized: value for (normalized, _), value in zip(names, point)}
        source_memory = {source: Fraction(value) for (_, source), value in zip(names, point)}
        where = ', '.join(f'{source}={value}' for (_, source), value in zip(names, point)) or '()'
        try:
            actual = eval_term(bound, memory=memory)
            wanted = semantics.eval_expr(expected, source_memory)
        except EvaluationError as exc:
            return False, f'em {where}: {exc.message}'
        if mode == EXACT and actual != wanted:
            return False, f'em {where}: cota {format_fraction(actual)}, esperada {format_fraction(wanted)}'
        if mode == FACTOR and actual > factor * wanted:
            return False, (
                f'em {where}: cota {format_fraction(actual)} acima de '
                f'{format_fraction(factor)} × {format_fraction(wanted)}'
            )
    return True, None


class AnalysisService:
    """
    Service para análise, corpus e validação.

    Attributes:
        config: AnalysisConfig; cada chamada cria seu próprio estado de
            análise e seu SolverService, então instâncias podem ser usadas
            por várias threads
    """

    def __init__(self, config=None):
        """
        Args:
            config: AnalysisConfig; por padrão, a de ``settings.PEVALYZER``
        """
        self.config = config or AnalysisConfig.from_settings()

    # Análise

    def analyze(self, path, entry=None, name=None, dump_dir=None):
        """
        Analisa um arquivo ``.pw``.

        Args:
            path: caminho do programa
            entry: procedimento; por padrão o último declarado
            name: identificador no relatório; por padrão o nome do arquivo
            dump_dir: diretório dos scripts SMT; por padrão ``config.smt_dump``

        Returns:
            AnalysisReport; falhas viram status, nunca exceções
        """
        path = Path(path)
        name = name or path.name
        try:
            source = path.read_text(encoding='utf-8')
        except OSError as exc:
            logger.warning(f'Não foi possível ler {path}: {exc}')
            return AnalysisReport(program=name, entry=entry, status=INVALID_PROGRAM, message=str(exc))
        return self.analyze_source(source, name, entry, dump_dir)

    def analyze_source(self, source, name='<fonte>', entry=None, dump_dir=None):
        started = time.monotonic()

        def finish(**fields):
            return AnalysisReport(program=name, elapsed=round(time.monotonic() - started, 3), **fields)

        try:
            program = normalize(parse_program(source))
            entry = entry_procedure(program, entry)
        except FrontendError as exc:
            logger.warning(f'{name}: programa inválido: {exc.message}')
            return finish(entry=entry, status=INVALID_PROGRAM, message=exc.message)
        except KeyError:
            return finish(entry=entry, status=INVALID_PROGRAM, message=f"procedimento '{entry}' não declarado")
        except IndexError:
            return finish(entry=entry, status=INVALID_PROGRAM, message='programa sem procedimentos')

        names = bound_names(program, entry)
        service = SolverService(
            self.config.solver,
            self.config.solver_args,
            self.config.solver_timeout,
            dump_dir if dump_dir is not None else self.config.smt_dump,
        )
        attempts = []
        for kind, degree in self.config.attempts():
            attempt, outcome = self._attempt(program, entry, kind, degree, service)
            attempts.append(attempt)
            if outcome is not None:
                bound, conditions = outcome
                report = finish(
                    entry=entry,
                    status=BOUNDED,
                    bound=bound,
                    bound_text=display_bound(bound, names),
                    params=[list(pair) for pair in names],
                    template_kind=kind,
                    degree=degree,
                    conditions=len(conditions),
                    check_trials=self.config.check_trials,
                    solver=service.statistics,
                    attempts=attempts,
                )
                logger.info(f'{name}: cota {report.bound_text} ({kind}, grau {degree}) em {report.elapsed}s')
                return report
            if attempt.status == SOLVER_ERROR:
                break

        statuses = {a.status for a in attempts}
        if SOLVER_ERROR in statuses:
            status = SOLVER_ERROR
        elif SOLVER_TIMEOUT in statuses:
            status = SOLVER_TIMEOUT
        elif statuses == {UNSUPPORTED}:
            status = UNSUPPORTED
        else:
            status = TEMPLATE_FAILURE
        message = next((a.message for a in reversed(attempts) if a.message), None)
        logger.info(f'{name}: {status} após {len(attempts)} tentativas')
        return finish(
            entry=entry,
            status=status,
            params=[list(pair) for pair in names],
            solver=service.statistics,
            attempts=attempts,
            message=message,
        )

    def _attempt(self, program, entry, kind, degree, service):
        """
        Uma tentativa da escalada.

        Returns:
            ``(Attempt, (cota, condições))`` quando há cota checada, ou
            ``(Attempt, None)``
        """
        started = time.monotonic()
        config = self.config

        def record(status, message=None, conditions=0, equations=0):
            return Attempt(
                kind=kind,
                degree=degree,
                status=status,
                conditions=conditions,
                equations=equations,
                elapsed=round(time.monotonic() - started, 3),
                message=message,
            )

        st = AnalysisState(program, TemplateSettings(
            kind=kind,
            logicals=config.template_logicals,
            guarded=config.template_guarded,
            instantiate_locals=config.instantiate_locals,
        ))
        try:
            conditions = generate_constraints(program, st, entry)
            system = linearize_conditions(conditions, degree, st.unknowns)
        except (UnsupportedExpansion, UnsupportedCondition, TermSubstitutionError, EvaluationError) as exc:
            logger.warning(f'{entry} ({kind}, grau {degree}): {exc.message}', exc_info=True)
            return record(UNSUPPORTED, exc.message), None

        pair = st.templates[entry]
        objective = None if config.optimize == 'none' else build_objective(pair, program.globals)
        sizes = {'conditions': len(conditions), 'equations': len(system.equations)}
        try:
            result = optimize(system, objective, service, config.optimize, config.bisect_steps)
        except SolverError as exc:
            logger.error(f'{entry}: falha no solver: {exc.message}', exc_info=True)
            return record(SOLVER_ERROR, exc.message, **sizes), None
        if result.status == TIMEOUT:
            return record(SOLVER_TIMEOUT, 'tempo esgotado no solver', **sizes), None
        if result.status != SAT:
            return record(TEMPLATE_FAILURE, f'solver devolveu {result.status}', **sizes), None

        check = check_model(conditions, result.model, config.check_trials, config.seed)
        if not check.passed:
            return record(TEMPLATE_FAILURE, f'modelo reprovado na checagem: {check.failures[0]}', **sizes), None
        bound = instantiate_bound(pair, result.model)
        return record(BOUNDED, **sizes), (bound, conditions)

    # Corpus

    def judge(self, record, report):
        """Veredito de um programa do corpus contra o manifesto."""
        if record.mode == ANY:
            return True, None
        if not report.is_bounded:
            return False, f'status {report.status}'
        if record.mode == SOUND:
            return True, None
        return compare_bound(
            report.bound,
            record.expected_expr,
            [tuple(pair) for pair in report.params],
            record.mode,
            record.ratio,
            seed=self.config.seed,
        )

    def _run_record(self, directory, record):
        path = directory / record.file
        dump_dir = Path(self.config.smt_dump) / record.name if self.config.smt_dump else None
        report = self.analyze(path, record.entry, record.name, dump_dir)
        passed, reason = self.judge(record, report)
        if not passed:
            logger.warning(f'{record.name}: reprovado ({reason})')
        return BenchmarkResult(
            name=record.name,
            file=record.file,
            mode=record.mode,
            expected=record.expected,
            factor=str(record.factor) if record.factor is not None else None,
            note=record.note,
            report=report,
            passed=passed,
            reason=reason,
        )

    def run_benchmarks(self, directory, manifest=None):
        """
        Analisa o corpus de um diretório.

        Args:
            directory: diretório com arquivos ``.pw``
            manifest: caminho do manifesto; por padrão ``<directory>/manifest.toml``
                quando existir

        Returns:
            BenchmarkRun com um resultado por programa, na ordem do manifesto

        Raises:
            ManifestError: diretório inexistente ou manifesto inválido
        """
        started = time.monotonic()
        directory = Path(directory)
        if not directory.is_dir():
            raise ManifestError(f'{directory} não é um diretório')
        manifest_path = Path(manifest) if manifest else directory / MANIFEST_NAME
        records = load_manifest(manifest_path) if manifest or manifest_path.exists() else []

        warnings = []
        listed = {r.file for r in records}
        for path in sorted(directory.glob('*.pw')):
            if path.name not in listed:
                warnings.append(f'{path.name} sem registro no manifesto')
                records.append(BenchmarkExpectation(name=path.stem, file=path.name, mode=ANY))
        for record in records:
            if not (directory / record.file).exists():
                warnings.append(f'{record.name}: arquivo {record.file} não encontrado')
        for warning in warnings:
            logger.warning(warning)

        if self.config.workers > 1 and len(records) > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                results = list(pool.map(lambda r: self._run_record(directory, r), records))
        else:
            results = [self._run_record(directory, r) for r in records]
        run = BenchmarkRun(
            directory=str(directory),
            results=results,
            warnings=warnings,
            elapsed=round(time.monotonic() - started, 3),
        )
        logger.info(f'Corpus {directory}: {run.passed} de {len(results)} aprovados em {run.elapsed}s')
        return run

    # Validação

    def _validate_point(self, program, report, args, samples, seed, depth):
        config = self.config
        source_args = dict(zip(report.source_params, args))
        memory = {normalized: 0 for normalized, _ in report.params}
        memory.update(zip((normalized for normalized, _ in report.params), args))
        bound = eval_term(report.bound, memory=memory)
        messages = []
        exact = None
        try:
            exact = exact_expectation(
                program, report.entry, args, {}, depth, config.oracle_unroll, config.oracle_state_cap,
            )
        except SupportExplosion as exc:
            messages.append(f'oráculo exato: {exc.message}')
        except EvaluationError as exc:
            messages.append(f'oráculo exato: {exc.message}')
            return ValidationPoint(
                args=source_args, bound=format_fraction(bound), mean=0.0, stderr=0.0,
                samples=0, passed=False, message='; '.join(messages),
            )
        try:
            estimate = monte_carlo(
                program, report.entry, args, {}, samples, seed,
                config.mc_maxdepth, config.mc_maxsteps, config.mc_chunk, config.workers,
                config.mc_nondet_subsamples,
            )
        except EvaluationError as exc:
            messages.append(f'Monte-Carlo: {exc.message}')
            return ValidationPoint(
                args=source_args, bound=format_fraction(bound),
                exact=format_fraction(exact) if exact is not None else None,
                mean=0.0, stderr=0.0, samples=0, passed=False, message='; '.join(messages),
            )
        sampled_ok = estimate.lower() <= float(bound) + FLOAT_TOLERANCE
        exact_ok = exact is None or exact <= bound
        if not sampled_ok:
            messages.append(f'média {estimate.mean:.6f} − 4σ acima da cota')
        if not exact_ok:
            messages.append(f'valor exato {format_fraction(exact)} acima da cota')
        return ValidationPoint(
            args=source_args,
            bound=format_fraction(bound),
            exact=format_fraction(exact) if exact is not None else None,
            mean=estimate.mean,
            stderr=estimate.stderr,
            samples=estimate.samples,
            truncated=estimate.truncated,
            passed=sampled_ok and exact_ok,
            message='; '.join(messages) or None,
        )

    def validate(self, path, entry=None, samples=None, seed=None, depth=None, grid=GRID):
        """
        Confere a cota inferida contra os oráculos numa grade de entradas.

        Para cada ponto (parâmetros em ``grid``, globais em 0) exige
        ``média − 4·erro padrão <= cota`` e ``valor exato(depth) <= cota``.

        Args:
            path: programa ``.pw``
            entry: procedimento; por padrão o último declarado
            samples: amostras Monte-Carlo por ponto
            seed: semente do Monte-Carlo
            depth: profundidade do oráculo exato

        Returns:
            ValidationReport; sem cota, ``passed`` é falso e não há pontos
        """
        started = time.monotonic()
        config = self.config
        samples = samples or config.mc_samples
        seed = config.seed if seed is None else seed
        depth = config.oracle_depth if depth is None else depth
        report = self.analyze(path, entry)
        validation = ValidationReport(report=report, depth=depth, samples=samples, seed=seed)
        if not report.is_bounded:
            logger.info(f'{report.program}: sem cota para validar ({report.status})')
            return validation

        program = normalize(parse_program(Path(path).read_text(encoding='utf-8')))
        params = program.procedure(report.entry).params
        for args in grid_points(params, grid):
            point = self._validate_point(program, report, tuple(args), samples, seed, depth)
            if not point.passed:
                logger.warning(f'{report.program}{tuple(args)}: {point.message}')
            validation.points.append(point)
        validation.elapsed = round(time.monotonic() - started, 3)
        logger.info(
            f'{report.program}: validação {"aprovada" if validation.passed else "reprovada"} '
            f'em {len(validation.points)} pontos'
        )
        return validation
