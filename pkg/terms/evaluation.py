"""
Avaliação exata (Fraction) de expressões, guardas e termos.

As expressões sympy são compiladas uma vez em closures Python; a avaliação
repetida (amostragem aleatória, checagem de modelos) não passa pelo sympy.
"""

from fractions import Fraction
from functools import lru_cache, reduce
import operator

import sympy as sp

from common.exceptions import EvaluationError
from terms.symbols import as_symbol


@lru_cache(maxsize=None)
def compile_expr(expr):
    """Closure ``env -> Fraction`` para uma expressão sympy racional."""
    if expr.is_Rational:
        value = Fraction(int(expr.p), int(expr.q))
        return lambda env: value
    if expr.is_Symbol:
        def lookup(env):
            try:
                return env[expr]
            except KeyError:
                raise EvaluationError(f"símbolo não ligado '{expr}'") from None
        return lookup
    if expr.is_Add:
        parts = [compile_expr(a) for a in expr.args]
        return lambda env: sum((p(env) for p in parts), Fraction(0))
    if expr.is_Mul:
        parts = [compile_expr(a) for a in expr.args]
        return lambda env: reduce(operator.mul, (p(env) for p in parts), Fraction(1))
    if expr.is_Pow and expr.exp.is_Integer:
        base, exponent = compile_expr(expr.base), int(expr.exp)

        def power(env):
            value = base(env)
            if value == 0 and exponent < 0:
                raise EvaluationError(f'divisão por zero em {expr}')
            return value ** exponent
        return power
    raise EvaluationError(f'expressão não racional: {expr}')


def as_fraction(value):
    if isinstance(value, sp.Basic):
        if not value.is_Rational:
            raise EvaluationError(f'valor não racional: {value}')
        return Fraction(int(value.p), int(value.q))
    return Fraction(value)


def environment(*mappings):
    """Une memórias/valorações/modelos num só ambiente ``Symbol -> Fraction``."""
    env = {}
    for mapping in mappings:
        for key, value in (mapping or {}).items():
            env[as_symbol(key)] = as_fraction(value)
    return env


def eval_expr(expr, env):
    return compile_expr(sp.sympify(expr))(env)


def eval_atom(atom, env):
    value = compile_expr(atom.expr)(env)
    return value > 0 if atom.strict else value >= 0


def eval_guard(guard, env):
    if guard is None:
        return False
    return all(eval_atom(atom, env) for atom in guard)


def eval_term(term, memory=None, valuation=None, model=None, env=None):
    """
    Valor exato de um termo.

    Args:
        term: Term
        memory: variáveis de programa (nome ou símbolo -> inteiro)
        valuation: variáveis lógicas
        model: desconhecidos -> racionais
        env: ambiente já montado (dispensa os três anteriores)

    Returns:
        Fraction; o corpo de uma norma só é avaliado quando a guarda vale

    Raises:
        EvaluationError: símbolo não ligado ou divisão por zero
    """
    if env is None:
        env = environment(memory, valuation, model)
    total = Fraction(0)
    for coeff, norm in term.summands:
        if not eval_guard(norm.guard, env):
            continue
        total += compile_expr(coeff)(env) * compile_expr(norm.body)(env)
    return total
