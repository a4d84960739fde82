"""
Checagem de modelos contra as condições laterais originais.

Independe da codificação: substitui o modelo nos termos com colchetes e
testa ``ctx ⟹ lhs ≤ rhs`` em memórias e valorações aleatórias.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List

import numpy as np

from common.exceptions import EvaluationError
from terms.evaluation import environment, eval_guard, eval_term
from terms.symbols import is_integral, is_unknown

logger = logging.getLogger(__name__)

SMALL_RANGE = (-5, 25)
LARGE_MAGNITUDE = 10 ** 6
LARGE_PROBABILITY = 0.05
LOGICAL_MAX = 10 ** 6
ATTEMPTS_PER_TRIAL = 20


@dataclass
class CheckFailure:
    origin: str
    condition: str
    witness: Dict[str, Fraction]
    lhs: Fraction
    rhs: Fraction

    def __str__(self):
        values = ', '.join(f'{k}={v}' for k, v in sorted(self.witness.items()))
        return f'{self.origin}: {self.lhs} > {self.rhs} em {values}'


@dataclass
class CheckReport:
    passed: bool = True
    trials: int = 0
    failures: List[CheckFailure] = field(default_factory=list)


def sample_value(symbol, rng):
    """Inteiros em geral pequenos (às vezes ±10⁶); lógicas racionais em ``[0, 10⁶]``."""
    if is_integral(symbol):
        if rng.random() < LARGE_PROBABILITY:
            return Fraction(int(rng.integers(-LARGE_MAGNITUDE, LARGE_MAGNITUDE + 1)))
        return Fraction(int(rng.integers(SMALL_RANGE[0], SMALL_RANGE[1] + 1)))
    if rng.random() < 0.5:
        return Fraction(int(rng.integers(0, 4)), int(rng.integers(1, 4)))
    return Fraction(int(rng.integers(0, LOGICAL_MAX + 1)), int(rng.integers(1, 8)))


def _check_condition(condition, model, trials, rng):
    variables = sorted((s for s in condition.variables if not is_unknown(s)), key=lambda s: s.name)
    checked = 0
    for _ in range(trials * ATTEMPTS_PER_TRIAL):
        if checked >= trials:
            break
        memory = {s: sample_value(s, rng) for s in variables}
        env = environment(memory, model)
        try:
            if not eval_guard(condition.ctx, env):
                continue
            lhs = eval_term(condition.lhs, env=env)
            rhs = eval_term(condition.rhs, env=env)
        except EvaluationError:
            continue
        checked += 1
        if lhs > rhs:
            witness = {s.name: v for s, v in memory.items()}
            return checked, CheckFailure(str(condition.origin), str(condition), witness, lhs, rhs)
        if not variables:
            break
    return checked, None


def check_model(conditions, model, trials=2000, seed=0):
    """
    Confere um modelo em todas as condições laterais.

    Args:
        conditions: lista de SideCondition
        model: desconhecido -> racional; ausentes valem 0
        trials: amostras que satisfazem o contexto, por condição
        seed: semente do gerador numpy

    Returns:
        CheckReport com a primeira testemunha de cada condição violada
    """
    rng = np.random.default_rng(seed)
    report = CheckReport()
    for condition in conditions:
        missing = {u: 0 for u in condition.unknowns if u not in model}
        checked, failure = _check_condition(condition, {**missing, **model}, trials, rng)
        report.trials += checked
        if failure is not None:
            report.passed = False
            report.failures.append(failure)
            logger.warning(f'Modelo viola {failure}')
    logger.info(f'Checagem do modelo: {len(conditions)} condições, {report.trials} amostras, '
                f'{len(report.failures)} falhas')
    return report
