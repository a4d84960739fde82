"""
Distribuições em tempo de execução.

``support`` devolve a tabela exata ``(probabilidade, valor)`` em Fraction
para o oráculo exato; ``draw`` sorteia um valor com o gerador numpy para
o Monte-Carlo. Os parâmetros são avaliados na memória corrente e validados
a cada uso.
"""

import math
from fractions import Fraction

from common.exceptions import EvaluationError
from frontend import ast
from oracle.semantics import eval_expr


def _probability(expr, memory, name):
    value = eval_expr(expr, memory)
    if not 0 <= value <= 1:
        raise EvaluationError(f'{name}: probabilidade {value} fora de [0, 1]')
    return value


def _integer(expr, memory, name, what):
    value = eval_expr(expr, memory)
    if value.denominator != 1:
        raise EvaluationError(f'{name}: {what} {value} não é inteiro')
    return int(value)


def _parameters(dist, memory):
    """Parâmetros validados, por tipo de distribuição."""
    if isinstance(dist, ast.Bernoulli):
        return (_probability(dist.prob, memory, 'Bernoulli'),)
    if isinstance(dist, ast.Uniform):
        lo = _integer(dist.lo, memory, 'Uniform', 'limite')
        hi = _integer(dist.hi, memory, 'Uniform', 'limite')
        if lo > hi:
            raise EvaluationError(f'Uniform({lo}, {hi}) vazia')
        return lo, hi
    if isinstance(dist, ast.Binomial):
        trials = _integer(dist.trials, memory, 'Binomial', 'número de tentativas')
        if trials < 0:
            raise EvaluationError(f'Binomial com {trials} tentativas')
        return trials, _probability(dist.prob, memory, 'Binomial')
    if isinstance(dist, ast.Hypergeometric):
        population, successes, draws = (
            _integer(e, memory, 'Hypergeometric', 'parâmetro') for e in ast.dist_exprs(dist)
        )
        if not (0 <= successes <= population and 0 <= draws <= population):
            raise EvaluationError(f'Hypergeometric({population}, {successes}, {draws}) fora do domínio')
        return population, successes, draws
    if isinstance(dist, ast.DiscreteTable):
        entries = [
            (_probability(p, memory, 'Discrete'), eval_expr(v, memory))
            for p, v in dist.entries
        ]
        if sum(p for p, _ in entries) != 1:
            raise EvaluationError(f'Discrete com probabilidades somando {sum(p for p, _ in entries)}')
        return tuple(entries)
    raise TypeError(f'Distribuição desconhecida: {dist!r}')


def support(dist, memory):
    """
    Tabela exata da distribuição na memória dada.

    Args:
        dist: distribuição do AST
        memory: mapeamento ``nome -> Fraction``

    Returns:
        lista de pares ``(Fraction, Fraction)`` com probabilidade positiva

    Raises:
        EvaluationError: parâmetros fora do domínio
    """
    params = _parameters(dist, memory)
    if isinstance(dist, ast.Bernoulli):
        (p,) = params
        table = [(p, Fraction(1)), (1 - p, Fraction(0))]
    elif isinstance(dist, ast.Uniform):
        lo, hi = params
        share = Fraction(1, hi - lo + 1)
        table = [(share, Fraction(v)) for v in range(lo, hi + 1)]
    elif isinstance(dist, ast.Binomial):
        n, p = params
        table = [(math.comb(n, k) * p ** k * (1 - p) ** (n - k), Fraction(k)) for k in range(n + 1)]
    elif isinstance(dist, ast.Hypergeometric):
        population, successes, draws = params
        total = math.comb(population, draws)
        low, high = max(0, draws + successes - population), min(draws, successes)
        table = [
            (Fraction(math.comb(successes, k) * math.comb(population - successes, draws - k), total), Fraction(k))
            for k in range(low, high + 1)
        ]
    else:
        table = list(params)
    return [(p, v) for p, v in table if p > 0]


def draw(dist, memory, rng):
    """Sorteia um valor com ``rng`` (``numpy.random.Generator``)."""
    params = _parameters(dist, memory)
    if isinstance(dist, ast.Bernoulli):
        return Fraction(1) if rng.random() < params[0] else Fraction(0)
    if isinstance(dist, ast.Uniform):
        lo, hi = params
        return Fraction(int(rng.integers(lo, hi + 1)))
    if isinstance(dist, ast.Binomial):
        n, p = params
        return Fraction(int(rng.binomial(n, float(p))))
    if isinstance(dist, ast.Hypergeometric):
        population, successes, draws = params
        if draws == 0:
            return Fraction(0)
        return Fraction(int(rng.hypergeometric(successes, population - successes, draws)))
    if len(params) == 1:
        return params[0][1]
    index = rng.choice(len(params), p=[float(p) for p, _ in params])
    return params[int(index)][1]
