"""
Eliminação de colchetes de Iverson por análise de casos.

Os átomos distintos das guardas de uma condição lateral são enumerados em
profundidade; cada ramo é podado assim que as premissas ficam
insatisfatíveis (checagem de viabilidade linear com o ``linprog`` do scipy).
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import sympy as sp
from scipy.optimize import linprog

from common.exceptions import UnsupportedCondition
from terms.atoms import Atom, conjoin, make_atom, sorted_atoms
from terms.symbols import is_unknown

logger = logging.getLogger(__name__)

# status do linprog para problema inviável
INFEASIBLE = 2
SLACK_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PolyInequality:
    """``premissas ⟹ goal ≥ 0``, com premissas ``p ≥ 0`` lineares."""

    premises: Tuple[sp.Expr, ...]
    goal: sp.Expr
    variables: Tuple[sp.Symbol, ...]
    origin: object = None

    def __str__(self):
        premises = ', '.join(f'{p} ≥ 0' for p in self.premises) or 'true'
        return f'{premises} ⊢ {self.goal} ≥ 0'


def _linear_row(expr, variables):
    """``(coeficientes, constante)`` de uma expressão linear; None se não for linear."""
    expr = sp.expand(expr)
    symbols = sorted(expr.free_symbols, key=lambda s: s.name)
    if symbols and not expr.is_polynomial(*symbols):
        return None
    if symbols and sp.Poly(expr, *symbols).total_degree() > 1:
        return None
    row = [float(expr.coeff(v)) for v in variables]
    constant = float(expr.subs({v: 0 for v in symbols}))
    return row, constant


def check_linear(atom):
    if _linear_row(atom.expr, sorted(atom.free_symbols, key=lambda s: s.name)) is None:
        raise UnsupportedCondition(f'guarda não linear: {atom}')


def feasible(atoms):
    """
    Viabilidade real de uma conjunção de átomos lineares.

    Átomos estritos entram com uma folga ``t`` maximizada; o sistema é
    viável se o ótimo tem ``t > 0``.
    """
    atoms = list(atoms)
    if not atoms:
        return True
    variables = sorted(set().union(*(a.free_symbols for a in atoms)), key=lambda s: s.name)
    has_strict = any(a.strict for a in atoms)
    rows, bounds = [], []
    for atom in atoms:
        linear = _linear_row(atom.expr, variables)
        if linear is None:
            raise UnsupportedCondition(f'guarda não linear: {atom}')
        row, constant = linear
        # a·x + c >= t  <=>  -a·x + t <= c
        rows.append([-v for v in row] + [1.0 if atom.strict else 0.0])
        bounds.append(constant)
    objective = np.zeros(len(variables) + 1)
    objective[-1] = -1.0
    limits = [(None, None)] * len(variables) + [(None, 1.0) if has_strict else (0.0, 0.0)]
    result = linprog(objective, A_ub=np.array(rows), b_ub=np.array(bounds), bounds=limits, method='highs')
    if result.status == INFEASIBLE:
        return False
    if result.status != 0:
        return True
    return not has_strict or -result.fun > SLACK_TOLERANCE


def atom_key(atom):
    """Representante comum de um átomo e de sua negação."""
    negated = atom.negate()
    if isinstance(negated, bool):
        return atom
    return min(atom, negated, key=Atom.sort_key)


def _holds(atom, assignment):
    key = atom_key(atom)
    return (atom == key) == assignment[key]


def _value(term, assignment):
    total = sp.Integer(0)
    for coeff, norm in term.summands:
        if all(_holds(a, assignment) for a in norm.guard):
            total += coeff * norm.body
    return total


def _denominator_sign(factor, premises):
    """+1/-1 se o sinal do fator é fixo sob as premissas; senão erro."""
    if any(is_unknown(s) for s in factor.free_symbols):
        raise UnsupportedCondition(f'denominador com desconhecidos: {factor}')
    # fator > 0 se "fator <= 0" é inviável; simetricamente para < 0
    for sign, opposite in ((1, make_atom(-factor)), (-1, make_atom(factor))):
        if opposite is False or (opposite is not True and not feasible([*premises, opposite])):
            return sign
    raise UnsupportedCondition(f'denominador {factor} sem sinal definido sob as premissas')


def polynomial_goal(expr, premises):
    """Numerador de ``expr`` com o sinal do denominador já resolvido."""
    numerator, denominator = sp.fraction(sp.together(sp.expand(expr)))
    sign = 1
    if not denominator.is_Number:
        constant, factors = sp.factor_list(denominator)
        sign = 1 if constant > 0 else -1
        for factor, multiplicity in factors:
            if multiplicity % 2 == 1:
                sign *= _denominator_sign(factor, premises)
    elif denominator < 0:
        sign = -1
    return sp.expand(sign * numerator)


def case_split(condition):
    """
    Casos sem colchetes de uma SideCondition.

    Returns:
        lista de PolyInequality cuja conjunção equivale à condição; vazia
        se o contexto é insatisfatível

    Raises:
        UnsupportedCondition: guarda não linear ou denominador sem sinal
    """
    ctx = conjoin(condition.ctx)
    if ctx is None:
        return []
    for atom in ctx:
        check_linear(atom)
    if not feasible(ctx):
        return []
    fixed = {atom_key(a): atom == atom_key(a) for a in ctx}
    keys = []
    for term in (condition.lhs, condition.rhs):
        for norm in term.norms:
            for atom in norm.guard:
                key = atom_key(atom)
                if key not in fixed and key not in keys:
                    check_linear(key)
                    keys.append(key)
    keys = sorted_atoms(keys)
    cases = []

    def visit(index, assignment, premises):
        if index == len(keys):
            goal = _value(condition.rhs, assignment) - _value(condition.lhs, assignment)
            goal = polynomial_goal(goal, premises)
            exprs = tuple(dict.fromkeys(a.expr for a in sorted_atoms(premises)))
            symbols = set(goal.free_symbols)
            for expr in exprs:
                symbols |= expr.free_symbols
            variables = tuple(sorted((s for s in symbols if not is_unknown(s)), key=lambda s: s.name))
            cases.append(PolyInequality(exprs, goal, variables, condition.origin))
            return
        key = keys[index]
        for value in (True, False):
            literal = key if value else key.negate()
            extended = conjoin(premises, literal)
            if extended is None or not feasible(extended):
                continue
            visit(index + 1, {**assignment, key: value}, extended)

    visit(0, dict(fixed), ctx)
    logger.debug(f'{condition.origin}: {len(keys)} átomos, {len(cases)} casos')
    return cases
