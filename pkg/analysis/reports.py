"""
Relatórios de análise, de corpus e de validação.

Os relatórios são modelos pydantic; ``analysis.serializers`` os converte em
JSON e as funções ``format_*`` montam as tabelas impressas pelos comandos.
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel

BOUNDED = 'bounded'
TEMPLATE_FAILURE = 'unbounded-template-failure'
SOLVER_TIMEOUT = 'solver-timeout'
UNSUPPORTED = 'unsupported'
SOLVER_ERROR = 'solver-error'
INVALID_PROGRAM = 'invalid-program'

STATUSES = (BOUNDED, TEMPLATE_FAILURE, SOLVER_TIMEOUT, UNSUPPORTED, SOLVER_ERROR, INVALID_PROGRAM)


class Attempt(BaseModel):
    """Uma tentativa da escalada: tipo de template, grau e resultado."""
    kind: str
    degree: int
    status: str
    conditions: int = 0
    equations: int = 0
    elapsed: float = 0.0
    message: Optional[str] = None


class AnalysisReport(BaseModel):
    """
    Resultado da análise de um programa.

    Attributes:
        program: identificador (nome do arquivo ou do benchmark)
        entry: procedimento analisado
        status: um de STATUSES; ``bounded`` só com cota e modelo checado
        bound: Term concreto sobre os nomes normalizados dos parâmetros
        bound_text: cota com os nomes do fonte
        params: parâmetros da entrada, ``[(normalizado, fonte)]``
        template_kind, degree: tentativa que produziu a cota
        solver: estatísticas do solver (consultas e tempo)
        elapsed: tempo de parede em segundos
    """
    program: str
    entry: Optional[str] = None
    status: str
    bound: Optional[Any] = None
    bound_text: Optional[str] = None
    params: List[List[str]] = []
    template_kind: Optional[str] = None
    degree: Optional[int] = None
    conditions: int = 0
    check_trials: int = 0
    solver: Dict[str, Any] = {}
    attempts: List[Attempt] = []
    elapsed: float = 0.0
    message: Optional[str] = None

    class Config:
        arbitrary_types_allowed = True

    @property
    def is_bounded(self):
        return self.status == BOUNDED and self.bound is not None

    @property
    def source_params(self):
        return [source for _, source in self.params]


class BenchmarkResult(BaseModel):
    """Um programa do corpus: relatório, expectativa do manifesto e veredito."""
    name: str
    file: str
    mode: str
    expected: Optional[str] = None
    factor: Optional[str] = None
    note: Optional[str] = None
    report: AnalysisReport
    passed: bool
    reason: Optional[str] = None


class BenchmarkRun(BaseModel):
    directory: str
    results: List[BenchmarkResult] = []
    warnings: List[str] = []
    elapsed: float = 0.0

    @property
    def passed(self):
        return sum(1 for r in self.results if r.passed)

    @property
    def failed(self):
        return len(self.results) - self.passed

    @property
    def all_passed(self):
        return self.failed == 0


class ValidationPoint(BaseModel):
    """
    Um ponto da grade de validação.

    ``exact`` é None quando o oráculo exato excede o limite de estados; nesse
    caso só a estimativa Monte-Carlo decide o veredito.
    """
    args: Dict[str, int]
    bound: str
    exact: Optional[str] = None
    mean: float
    stderr: float
    samples: int
    truncated: int = 0
    passed: bool
    message: Optional[str] = None


class ValidationReport(BaseModel):
    report: AnalysisReport
    points: List[ValidationPoint] = []
    depth: int = 0
    samples: int = 0
    seed: int = 0
    elapsed: float = 0.0

    @property
    def passed(self):
        return self.report.is_bounded and all(p.passed for p in self.points)


def _table(headers, rows):
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    lines = ['  '.join(cell.ljust(w) for cell, w in zip(headers, widths)).rstrip()]
    lines.append('  '.join('-' * w for w in widths))
    for row in rows:
        lines.append('  '.join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return '\n'.join(lines)


def _attempt_label(report):
    if report.template_kind is None:
        return '-'
    return f'{report.template_kind}/{report.degree}'


def format_analysis(report):
    lines = [
        f'Programa: {report.program}',
        f'Entrada:  {report.entry or "-"}',
        f'Status:   {report.status}',
    ]
    if report.bound_text is not None:
        lines.append(f'Cota:     {report.bound_text}')
    if report.template_kind:
        lines.append(f'Template: {_attempt_label(report)}')
    queries = report.solver.get('queries', 0)
    lines.append(f'Tempo:    {report.elapsed:.2f}s ({queries} consultas ao solver)')
    if report.message:
        lines.append(f'Detalhe:  {report.message}')
    return '\n'.join(lines)


def format_benchmarks(run):
    rows = []
    for result in run.results:
        report = result.report
        rows.append([
            result.name,
            report.status,
            report.bound_text or '-',
            result.expected or '-',
            result.mode,
            _attempt_label(report),
            f'{report.elapsed:.2f}',
            'ok' if result.passed else 'FALHA',
        ])
    table = _table(['programa', 'status', 'cota', 'esperada', 'modo', 'template', 'tempo', 'veredito'], rows)
    summary = f'{run.passed} de {len(run.results)} programas aprovados em {run.elapsed:.2f}s'
    return f'{table}\n\n{summary}' if rows else summary


def format_validation(validation):
    lines = [format_analysis(validation.report), '']
    rows = [
        [
            ', '.join(f'{k}={v}' for k, v in point.args.items()) or '()',
            point.bound,
            point.exact if point.exact is not None else '-',
            f'{point.mean:.4f}',
            f'{point.stderr:.4f}',
            str(point.truncated),
            'ok' if point.passed else 'FALHA',
        ]
        for point in validation.points
    ]
    if rows:
        lines.append(_table(['args', 'cota', f'exato(i={validation.depth})', 'média', 'erro', 'truncadas', 'veredito'], rows))
    verdict = 'aprovada' if validation.passed else 'reprovada'
    truncated = sum(point.truncated for point in validation.points)
    lines.append(
        f'\nValidação {verdict}: {len(validation.points)} pontos, {validation.samples} amostras, '
        f'{truncated} execuções truncadas, semente {validation.seed}'
    )
    return '\n'.join(lines)
