"""
Símbolos da álgebra de termos.

Há quatro famílias, distinguidas pela classe e pelas suposições do sympy:

- variáveis de programa e as lógicas dedicadas ``ℓr`` e ``ℓa_x`` são inteiras;
- variáveis lógicas livres (``ℓ``, ``ℓ1``...) são reais;
- coeficientes desconhecidos são instâncias de :class:`Unknown`, cujo papel
  vem do prefixo do nome.
"""

from fractions import Fraction

import sympy as sp

from frontend import ast
from common.exceptions import EvaluationError

RETURN_NAME = 'ℓr'
ARG_PREFIX = 'ℓa_'
LOGICAL_PREFIX = 'ℓ'

# prefixo -> papel do desconhecido
UNKNOWN_ROLES = {
    'c': 'procedure',
    'd': 'instantiation',
    'e': 'invariant',
    'lam': 'multiplier',
}


class Unknown(sp.Symbol):
    """Coeficiente desconhecido; o solver lhe atribui um racional não negativo."""

    def __new__(cls, name, **assumptions):
        assumptions.setdefault('real', True)
        return super().__new__(cls, name, **assumptions)

    @property
    def role(self):
        prefix = self.name.rstrip('0123456789_')
        return UNKNOWN_ROLES.get(prefix, 'procedure')


def program_symbol(name):
    return sp.Symbol(name, integer=True)


def arg_symbol(param):
    return sp.Symbol(f'{ARG_PREFIX}{param}', integer=True)


RETURN = sp.Symbol(RETURN_NAME, integer=True)


def logical(index=0):
    name = LOGICAL_PREFIX if index == 0 else f'{LOGICAL_PREFIX}{index}'
    return sp.Symbol(name, real=True)


def is_unknown(symbol):
    return isinstance(symbol, Unknown)


def is_logical(symbol):
    """Lógica livre (``ℓ``, ``ℓ1``...), excluindo ``ℓr`` e ``ℓa_x``."""
    return (
        not is_unknown(symbol)
        and symbol.name.startswith(LOGICAL_PREFIX)
        and symbol != RETURN
        and not symbol.name.startswith(ARG_PREFIX)
    )


def is_integral(symbol):
    return bool(symbol.is_integer)


def as_symbol(name):
    """Símbolo correspondente a um nome textual (usado em memórias e testes)."""
    if isinstance(name, sp.Symbol):
        return name
    if name == RETURN_NAME or name.startswith(ARG_PREFIX):
        return sp.Symbol(name, integer=True)
    if name.startswith(LOGICAL_PREFIX):
        return sp.Symbol(name, real=True)
    return program_symbol(name)


def source_param(symbol):
    """``ℓa_n`` -> ``n``; demais símbolos ficam como estão."""
    if symbol.name.startswith(ARG_PREFIX):
        return symbol.name[len(ARG_PREFIX):]
    return symbol.name


def to_sympy(expr):
    """Converte uma expressão inteira do AST (ou de cota, sem normas) para sympy."""
    if isinstance(expr, ast.Num):
        return sp.Integer(expr.value)
    if isinstance(expr, ast.Var):
        return program_symbol(expr.name)
    if isinstance(expr, ast.Neg):
        return -to_sympy(expr.operand)
    if isinstance(expr, ast.BinOp):
        left, right = to_sympy(expr.left), to_sympy(expr.right)
        if expr.op == '+':
            return left + right
        if expr.op == '-':
            return left - right
        if expr.op == '*':
            return left * right
        if right == 0:
            raise EvaluationError('divisão por zero em expressão constante')
        return left / right
    raise TypeError(f'Expressão sem forma polinomial: {expr!r}')


def to_fraction(value):
    """Número sympy racional -> Fraction."""
    value = sp.sympify(value)
    if not value.is_Rational:
        raise EvaluationError(f'valor não racional: {value}')
    return Fraction(int(value.p), int(value.q))
