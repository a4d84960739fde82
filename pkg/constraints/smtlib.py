"""
Scripts SMT-LIB2 e leitura de modelos.

Os desconhecidos são declarados como ``Real`` não negativos; as
restrições chegam como expressões sympy (igualdades ``e = 0`` e
desigualdades ``e >= 0``). Valores do modelo são lidos como racionais
exatos, nas formas decimal e fracionária.
"""

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional

import sympy as sp

from common.exceptions import SolverError

SAT, UNSAT, UNKNOWN, TIMEOUT = 'sat', 'unsat', 'unknown', 'timeout'

_TOKEN = re.compile(r'\(|\)|"(?:[^"]|"")*"|\|[^|]*\||[^\s()]+')
_SIMPLE_SYMBOL = re.compile(r'^[A-Za-z_][A-Za-z0-9_.]*$')


@dataclass
class ModelResult:
    status: str
    values: Dict[str, Fraction] = field(default_factory=dict)
    reason: Optional[str] = None


def smt_symbol(symbol):
    name = symbol.name
    return name if _SIMPLE_SYMBOL.match(name) else f'|{name}|'


def smt_number(value):
    value = sp.Rational(value)
    magnitude = abs(value)
    if magnitude.q == 1:
        text = f'{magnitude.p}.0'
    else:
        text = f'(/ {magnitude.p}.0 {magnitude.q}.0)'
    return f'(- {text})' if value < 0 else text


def to_smt(expr):
    """Expressão polinomial sympy em notação prefixa SMT-LIB."""
    expr = sp.sympify(expr)
    if expr.is_Rational:
        return smt_number(expr)
    if expr.is_Symbol:
        return smt_symbol(expr)
    if expr.is_Add:
        return f"(+ {' '.join(to_smt(a) for a in expr.args)})"
    if expr.is_Mul:
        return f"(* {' '.join(to_smt(a) for a in expr.args)})"
    if expr.is_Pow and expr.exp.is_Integer and expr.exp > 1:
        base = to_smt(expr.base)
        return f"(* {' '.join([base] * int(expr.exp))})"
    raise SolverError(f'expressão sem forma SMT-LIB polinomial: {expr}')


def emit_smt(equations=(), unknowns=(), inequalities=(), objectives=(), logic='QF_NRA'):
    """
    Script SMT-LIB2 para as restrições sobre coeficientes.

    Args:
        equations: expressões que devem valer 0
        unknowns: símbolos declarados como reais não negativos
        inequalities: expressões que devem ser >= 0
        objectives: expressões a minimizar, em ordem lexicográfica
        logic: lógica declarada; omitida quando há objetivos

    Returns:
        texto do script
    """
    lines = ['(set-option :produce-models true)']
    if not objectives and logic:
        lines.append(f'(set-logic {logic})')
    unknowns = sorted(set(unknowns), key=lambda s: s.name)
    for symbol in unknowns:
        lines.append(f'(declare-fun {smt_symbol(symbol)} () Real)')
    for symbol in unknowns:
        lines.append(f'(assert (>= {smt_symbol(symbol)} 0.0))')
    for expr in equations:
        expr = sp.expand(expr)
        if expr != 0:
            lines.append(f'(assert (= {to_smt(expr)} 0.0))')
    for expr in inequalities:
        lines.append(f'(assert (>= {to_smt(sp.expand(expr))} 0.0))')
    for expr in objectives:
        lines.append(f'(minimize {to_smt(sp.expand(expr))})')
    lines.append('(check-sat)')
    if unknowns:
        lines.append(f"(get-value ({' '.join(smt_symbol(s) for s in unknowns)}))")
    lines.append('(exit)')
    return '\n'.join(lines) + '\n'


def read_sexprs(text):
    """Lê uma sequência de s-expressões como listas aninhadas de strings."""
    stack = [[]]
    for token in _TOKEN.findall(text):
        if token == '(':
            stack.append([])
        elif token == ')':
            if len(stack) == 1:
                raise SolverError(f'parêntese sem par na saída do solver: {text[:200]}')
            closed = stack.pop()
            stack[-1].append(closed)
        else:
            stack[-1].append(token)
    if len(stack) != 1:
        raise SolverError(f'saída do solver truncada: {text[:200]}')
    return stack[0]


class IrrationalValue(Exception):
    pass


def read_value(sexpr):
    """Valor numérico exato de um termo SMT-LIB (decimal, fração, negação)."""
    if isinstance(sexpr, str):
        try:
            return Fraction(sexpr)
        except ValueError:
            raise SolverError(f'valor não numérico no modelo: {sexpr}') from None
    if not sexpr:
        raise SolverError('valor vazio no modelo')
    head = sexpr[0]
    if head == 'root-obj' or head == 'root-of':
        raise IrrationalValue(str(sexpr))
    if head == '-' and len(sexpr) == 2:
        return -read_value(sexpr[1])
    if head == '-' and len(sexpr) == 3:
        return read_value(sexpr[1]) - read_value(sexpr[2])
    if head == '/' and len(sexpr) == 3:
        return read_value(sexpr[1]) / read_value(sexpr[2])
    if head == '+':
        return sum((read_value(s) for s in sexpr[1:]), Fraction(0))
    raise SolverError(f'valor não reconhecido no modelo: {sexpr}')


def _unquote(name):
    return name[1:-1] if name.startswith('|') and name.endswith('|') else name


def parse_model(output):
    """
    Interpreta a saída do solver.

    Returns:
        ModelResult com status ``sat``/``unsat``/``unknown`` e, em ``sat``,
        os valores racionais; valores algébricos irracionais viram ``unknown``

    Raises:
        SolverError: saída malformada ou erro reportado antes do resultado
    """
    status = None
    values = {}
    for item in read_sexprs(output):
        if isinstance(item, str):
            if item in (SAT, UNSAT, UNKNOWN, TIMEOUT) and status is None:
                status = item
            continue
        if item and item[0] == 'error':
            if status in (None, SAT):
                raise SolverError(f'erro do solver: {" ".join(map(str, item[1:]))}')
            continue
        if status != SAT or item and item[0] == 'objectives':
            continue
        for pair in item:
            if not isinstance(pair, list) or len(pair) != 2 or not isinstance(pair[0], str):
                raise SolverError(f'par malformado no modelo: {pair}')
            try:
                values[_unquote(pair[0])] = read_value(pair[1])
            except IrrationalValue as exc:
                return ModelResult(UNKNOWN, reason=f'valor irracional: {exc}')
    if status is None:
        raise SolverError(f'saída do solver sem resultado: {output[:200]}')
    return ModelResult(status, values if status == SAT else {})
