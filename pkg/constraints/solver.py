import logging
import subprocess
import time
from dataclasses import dataclass, field
from itertools import count
from pathlib import Path
from typing import Dict, Optional

from django.conf import settings

from common.exceptions import SolverError
from constraints.smtlib import TIMEOUT, UNKNOWN, parse_model

logger = logging.getLogger(__name__)


@dataclass
class SolverResult:
    status: str
    model: Dict = field(default_factory=dict)
    elapsed: float = 0.0
    output: str = ''
    reason: Optional[str] = None

    @property
    def is_sat(self):
        return self.status == 'sat'


class SolverService:
    """
    Executa um solver SMT externo, um processo por consulta.

    O script vai pela entrada padrão; a saída é lida com ``parse_model``.
    Instâncias não compartilham estado mutável além das estatísticas.
    """

    def __init__(self, solver=None, args=None, timeout=None, dump_dir=None):
        config = settings.PEVALYZER
        self.solver = solver or config['SOLVER']
        self.args = list(args if args is not None else config['SOLVER_ARGS'])
        self.timeout = timeout or config['SOLVER_TIMEOUT']
        self.dump_dir = Path(dump_dir) if dump_dir else None
        self.queries = 0
        self.total_time = 0.0
        self._sequence = count()

    def _dump(self, script, tag):
        if self.dump_dir is None:
            return
        self.dump_dir.mkdir(parents=True, exist_ok=True)
        path = self.dump_dir / f'{next(self._sequence):03d}-{tag}.smt2'
        path.write_text(script, encoding='utf-8')
        logger.debug(f'Script SMT salvo em {path}')

    def run(self, script, tag='query'):
        """
        Resolve um script.

        Args:
            script: texto SMT-LIB2
            tag: rótulo da consulta (logs e nome do arquivo de dump)

        Returns:
            SolverResult; estouro de tempo vira status ``timeout``

        Raises:
            SolverError: solver ausente, processo falhou ou saída malformada
        """
        self._dump(script, tag)
        logger.debug(f'Consulta {tag}:\n{script}')
        started = time.monotonic()
        try:
            completed = subprocess.run(
                [self.solver, *self.args],
                input=script,
                capture_output=True,
                text=True,
                timeout=self.timeout,
            )
        except FileNotFoundError as exc:
            raise SolverError(f"solver '{self.solver}' não encontrado", original_exception=exc)
        except subprocess.TimeoutExpired:
            elapsed = time.monotonic() - started
            self._account(elapsed)
            logger.info(f'Consulta {tag}: timeout após {elapsed:.2f}s')
            return SolverResult(TIMEOUT, elapsed=elapsed)
        elapsed = time.monotonic() - started
        self._account(elapsed)
        output = completed.stdout
        if not output.strip():
            raise SolverError(
                f'solver terminou com código {completed.returncode} sem saída: {completed.stderr.strip()[:200]}'
            )
        parsed = parse_model(output)
        logger.info(f'Consulta {tag}: {parsed.status} em {elapsed:.2f}s')
        if parsed.status == UNKNOWN and parsed.reason:
            logger.warning(f'Consulta {tag}: {parsed.reason}')
        return SolverResult(parsed.status, parsed.values, elapsed, output, parsed.reason)

    def _account(self, elapsed):
        self.queries += 1
        self.total_time += elapsed

    @property
    def statistics(self):
        return {'queries': self.queries, 'solver_time': round(self.total_time, 3)}
