"""
Escolha de um modelo que aperta a cota de entrada.

Primeiro uma consulta de viabilidade QF_NRA. Depois, alternadamente,
fixam-se as instanciações ``d`` (o sistema fica linear nos demais) e
minimiza-se o objetivo lexicográfico; em seguida fixam-se os coeficientes
dos templates e minimiza-se ``Σ d``. Sem otimização nativa no solver,
cai-se para busca binária com consultas de satisfatibilidade.
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple

import sympy as sp

from common.exceptions import SolverError
from constraints.smtlib import SAT, emit_smt
from templating.bases import CONSTANT
from terms.evaluation import environment, eval_expr, eval_guard
from terms.symbols import arg_symbol

logger = logging.getLogger(__name__)

GRID = (0, 1, 2, 5, 10, 20)
MAX_GRID_POINTS = 1296
MAX_ROUNDS = 4
PRECISION = Fraction(1, 10 ** 6)

ALTERNATING, BISECT, NONE = 'alternating', 'bisect', 'none'
STRATEGIES = (ALTERNATING, BISECT, NONE)


@dataclass
class Objective:
    primary: sp.Expr
    secondary: sp.Expr

    def score(self, model):
        """``(primário, secundário)`` sob o modelo; desconhecidos ausentes valem 0."""
        values = {k: _rational(v) for k, v in model.items()}
        scores = []
        for expr in (self.primary, self.secondary):
            value = sp.sympify(expr).xreplace(values)
            value = value.xreplace({s: 0 for s in value.free_symbols})
            scores.append(Fraction(int(value.p), int(value.q)))
        return tuple(scores)


@dataclass
class OptimizationResult:
    status: str
    model: Optional[Dict] = None
    strategy: str = NONE
    score: Optional[Tuple[Fraction, Fraction]] = None
    rounds: int = 0


def grid_points(params, grid=GRID):
    return itertools.islice(itertools.product(grid, repeat=len(params)), MAX_GRID_POINTS)


def build_objective(pair, globals_=(), grid=GRID):
    """
    Objetivo lexicográfico sobre ``h_entry``.

    O primário é o coeficiente da constante; o secundário pondera cada
    outro coeficiente pela soma de sua função-base na grade (lógicas em 1,
    globais em 0).
    """
    primary = pair.h.coefficient(CONSTANT)
    weights = {}
    for point in grid_points(pair.params, grid):
        memory = {arg_symbol(p): v for p, v in zip(pair.params, point)}
        memory.update({g: 0 for g in globals_})
        memory.update({symbol: 1 for symbol in pair.logicals})
        env = environment(memory)
        for coeff, norm in pair.h.summands:
            if norm == CONSTANT or not eval_guard(norm.guard, env):
                continue
            weights[norm] = weights.get(norm, Fraction(0)) + eval_expr(norm.body, env)
    secondary = sp.Integer(0)
    for coeff, norm in pair.h.summands:
        if norm == CONSTANT:
            continue
        weight = weights.get(norm, Fraction(0))
        # normas que se anulam na grade ainda recebem peso mínimo
        weight = max(weight, Fraction(1))
        secondary += sp.Rational(weight.numerator, weight.denominator) * coeff
    return Objective(sp.expand(primary), sp.expand(secondary))


def _model_from(values, unknowns, fixed=None):
    model = {u: Fraction(values.get(u.name, 0)) for u in unknowns}
    model.update(fixed or {})
    return model


def _rational(value):
    return sp.Rational(value.numerator, value.denominator)


class Optimizer:
    """Executa a estratégia configurada sobre um ConstraintSystem."""

    def __init__(self, system, objective, service, strategy=ALTERNATING, bisect_steps=16):
        self.system = system
        self.objective = objective
        self.service = service
        self.strategy = strategy
        self.bisect_steps = bisect_steps

    def query(self, tag, equations=None, inequalities=(), objectives=(), fixed=None):
        fixed = fixed or {}
        replacement = {k: _rational(v) for k, v in fixed.items()}
        equations = self.system.equations if equations is None else equations
        if replacement:
            equations = [sp.expand(e.xreplace(replacement)) for e in equations]
            inequalities = [sp.expand(e.xreplace(replacement)) for e in inequalities]
            objectives = [sp.expand(e.xreplace(replacement)) for e in objectives]
        free = [u for u in self.system.unknowns if u not in fixed]
        trivially_false = [e for e in equations if e.is_Number and e != 0]
        if trivially_false:
            logger.debug(f'{tag}: equação constante não nula {trivially_false[0]}')
            return 'unsat', None
        script = emit_smt(equations, free, inequalities, objectives)
        result = self.service.run(script, tag)
        if not result.is_sat:
            return result.status, None
        return SAT, _model_from(result.model, free, fixed)

    def feasibility(self):
        return self.query('feasibility')

    def run(self):
        """
        Returns:
            OptimizationResult com status do solver e, se ``sat``, o modelo
        """
        status, model = self.feasibility()
        if status != SAT:
            return OptimizationResult(status)
        result = OptimizationResult(SAT, model, NONE, self.objective.score(model) if self.objective else None)
        if self.objective is None or self.strategy == NONE:
            return result
        if self.strategy == ALTERNATING:
            try:
                best = self.alternate(result)
            except SolverError as exc:
                logger.warning(f'Otimização nativa falhou ({exc.message}); usando busca binária', exc_info=True)
            else:
                return self.refine(best)
        return self.bisect(result)

    def refine(self, best):
        """
        Sai de um ótimo local da alternância.

        Com instanciações o sistema é bilinear e a alternância pode parar
        num ponto pior que o ótimo global. A busca binária consulta o sistema
        completo; se achar objetivo menor, uma nova alternância parte dali
        para chegar a um vértice exato.
        """
        if not self.system.by_role('instantiation'):
            return best
        try:
            searched = self.bisect(OptimizationResult(SAT, best.model, best.strategy, best.score))
        except SolverError as exc:
            logger.warning(f'Refinamento abandonado ({exc.message})', exc_info=True)
            return best
        if searched.score >= best.score:
            return best
        logger.info(f'Busca binária melhorou o objetivo: {best.score} -> {searched.score}')
        try:
            return self.alternate(searched)
        except SolverError as exc:
            logger.warning(f'Alternância após a busca falhou ({exc.message})', exc_info=True)
            return searched

    def alternate(self, best):
        instantiation = self.system.by_role('instantiation')
        templates = self.system.by_role('procedure', 'invariant')
        goals = [self.objective.primary, self.objective.secondary]
        rounds = 0
        for rounds in range(1, MAX_ROUNDS + 1):
            fixed = {d: best.model[d] for d in instantiation}
            status, candidate = self.query(f'min-template-{rounds}', objectives=goals, fixed=fixed)
            if status != SAT:
                raise SolverError(f'minimização com instanciações fixas devolveu {status}')
            score = self.objective.score(candidate)
            if score < best.score:
                best = OptimizationResult(SAT, candidate, ALTERNATING, score, rounds)
            elif rounds > 1:
                break
            if not instantiation:
                break
            fixed = {u: best.model[u] for u in templates}
            status, refined = self.query(f'min-instantiation-{rounds}', objectives=[sp.Add(*instantiation)], fixed=fixed)
            if status == SAT:
                best.model = refined
        best.strategy = ALTERNATING
        best.rounds = rounds
        logger.info(f'Otimização alternada: objetivo {best.score[0]}, {best.score[1]} em {rounds} rodadas')
        return best

    def _search(self, index, best, bounds, tag):
        """Busca binária pelo menor ``t`` com ``objetivo[index] <= t`` satisfatível."""
        expr = (self.objective.primary, self.objective.secondary)[index]
        low, high = Fraction(0), best.score[index]
        for step in range(self.bisect_steps):
            if high - low <= PRECISION:
                break
            middle = (low + high) / 2
            inequalities = list(bounds) + [_rational(middle) - expr]
            status, candidate = self.query(f'{tag}-{step}', inequalities=inequalities)
            if status == SAT:
                best = OptimizationResult(SAT, candidate, BISECT, self.objective.score(candidate))
                high = best.score[index]
            else:
                low = middle
        return best, high

    def bisect(self, best):
        best, primary = self._search(0, best, (), 'bisect-primary')
        bound = [_rational(primary) - self.objective.primary]
        best, _ = self._search(1, best, bound, 'bisect-secondary')
        best.strategy = BISECT
        return best


def optimize(system, objective, service, strategy=ALTERNATING, bisect_steps=16):
    """
    Resolve o sistema e, se viável, minimiza o objetivo.

    Args:
        system: ConstraintSystem
        objective: Objective ou None (só viabilidade)
        service: SolverService
        strategy: ``alternating``, ``bisect`` ou ``none``
        bisect_steps: passos da busca binária

    Returns:
        OptimizationResult
    """
    if strategy not in STRATEGIES:
        raise ValueError(f'Estratégia de otimização desconhecida: {strategy}')
    return Optimizer(system, objective, service, strategy, bisect_steps).run()
